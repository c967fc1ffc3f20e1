//! Test fixtures: cylindrical grids and walls, random digraphs and walls
//! attached to a small terminal head through a two-vertex interface.
//!
//! Grid vertex `(j, i)`, position `i` on cycle `j`, has id `j * 2k + i`.
//! Splitting a grid vertex keeps its id for the in-half and appends the
//! out-half after all grid ids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DiGraph, Instance, Vertex};

/// A grid or wall together with its cycles and radial paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallHandle {
    pub g: DiGraph,
    /// The `k` concentric cycles, each listed in cycle order.
    pub cycles: Vec<Vec<Vertex>>,
    /// The `2k` radial paths, each listed in path order.
    pub verticals: Vec<Vec<Vertex>>,
}

/// Deterministic PRNG used by every seeded generator.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gen_cyl_grid(k: usize) -> WallHandle {
    assert!(k >= 1, "grid order must be positive");
    let len = 2 * k;
    let id = |j: usize, i: usize| j * len + i;
    let mut g = DiGraph::new(k * len);
    let mut cycles = Vec::with_capacity(k);
    for j in 0..k {
        for i in 0..len {
            g.add_arc(id(j, i), id(j, (i + 1) % len)).unwrap();
        }
        cycles.push((0..len).map(|i| id(j, i)).collect());
    }
    let mut verticals = Vec::with_capacity(len);
    for i in 0..len {
        let order: Vec<usize> = if i % 2 == 0 { (0..k).collect() } else { (0..k).rev().collect() };
        let path: Vec<Vertex> = order.iter().map(|&j| id(j, i)).collect();
        for w in path.windows(2) {
            g.add_arc(w[0], w[1]).unwrap();
        }
        verticals.push(path);
    }
    WallHandle { g, cycles, verticals }
}

pub fn gen_cyl_wall(k: usize) -> WallHandle {
    let grid = gen_cyl_grid(k);
    let n = grid.g.n();
    let mut out_half: Vec<Vertex> = (0..n).collect();
    let mut next = n;
    for v in 0..n {
        if grid.g.in_degree(v) + grid.g.out_degree(v) == 4 {
            out_half[v] = next;
            next += 1;
        }
    }
    let mut g = DiGraph::new(next);
    for &(u, v) in grid.g.arcs() {
        g.add_arc(out_half[u], v).unwrap();
    }
    for v in 0..n {
        if out_half[v] != v {
            g.add_arc(v, out_half[v]).unwrap();
        }
    }
    // A split vertex is entered through its in-half along both its cycle and
    // its radial path, so both sequences list the in-half first.
    let expand = |seq: &Vec<Vertex>| -> Vec<Vertex> {
        seq.iter()
            .flat_map(|&v| if out_half[v] != v { vec![v, out_half[v]] } else { vec![v] })
            .collect()
    };
    let cycles = grid.cycles.iter().map(expand).collect();
    let verticals = grid.verticals.iter().map(expand).collect();
    WallHandle { g, cycles, verticals }
}

/// Each ordered pair `(u, v)`, `u != v`, becomes an arc with probability `p`,
/// drawn in lexicographic pair order from [`rng`].
pub fn gen_random(n: usize, p: f64, seed: u64) -> DiGraph {
    assert!((0.0..=1.0).contains(&p), "arc probability must lie in [0, 1]");
    let mut r = rng(seed);
    let mut g = DiGraph::new(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && r.gen_bool(p) {
                g.add_arc(u, v).unwrap();
            }
        }
    }
    g
}

/// A vertex of a fixture: either a wall vertex or a head-local vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Wall(Vertex),
    Head(usize),
}

/// Wiring of a small terminal head graph to a wall.
///
/// The two `interface` head vertices form the separator. Arcs from the wall
/// may only enter interface vertices, so every cross arc runs from the head
/// interior into the wall.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttachSpec {
    pub head_n: usize,
    pub head_arcs: Vec<(usize, usize)>,
    pub pairs: Vec<(usize, usize)>,
    pub c: usize,
    pub interface: [usize; 2],
    pub links: Vec<(End, End)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid attach spec: {0}")]
pub struct AttachError(pub String);

impl AttachSpec {
    /// A random head with `pairs` terminal pairs, wired to the wall of the
    /// given order. Head vertices `0` and `1` form the interface; the
    /// terminals follow as `s_1, t_1, s_2, t_2, ...`.
    pub fn random(k_wall: usize, pairs: usize, seed: u64) -> AttachSpec {
        let mut r = rng(seed);
        let wall_n = gen_cyl_wall(k_wall).g.n();
        let head_n = 2 + 2 * pairs;
        let mut head_arcs = Vec::new();
        for u in 0..head_n {
            for v in 0..head_n {
                if u != v && r.gen_bool(0.2) {
                    head_arcs.push((u, v));
                }
            }
        }
        let mut links = Vec::new();
        for iface in 0..2 {
            links.push((End::Head(iface), End::Wall(r.gen_range(0..wall_n))));
            links.push((End::Wall(r.gen_range(0..wall_n)), End::Head(iface)));
        }
        for u in 2..head_n {
            if r.gen_bool(0.15) {
                links.push((End::Head(u), End::Wall(r.gen_range(0..wall_n))));
            }
        }
        AttachSpec {
            head_n,
            head_arcs,
            pairs: (0..pairs).map(|i| (2 + 2 * i, 3 + 2 * i)).collect(),
            c: 2,
            interface: [0, 1],
            links,
        }
    }
}

/// Builds the fixture instance; head vertex `h` gets id `wall_n + h`.
pub fn gen_sep_fixture(k_wall: usize, attach: &AttachSpec) -> Result<Instance, AttachError> {
    let wall = gen_cyl_wall(k_wall);
    let wall_n = wall.g.n();
    let bad = |msg: String| Err(AttachError(msg));
    let [x, y] = attach.interface;
    if x == y || x >= attach.head_n || y >= attach.head_n {
        return bad(format!("interface {x}, {y} must be two distinct head vertices"));
    }
    if attach.c == 0 {
        return bad("congestion must be positive".into());
    }
    let mut g = wall.g.clone();
    for _ in 0..attach.head_n {
        g.add_vertex();
    }
    let head = |h: usize| -> Result<Vertex, AttachError> {
        if h < attach.head_n {
            Ok(wall_n + h)
        } else {
            Err(AttachError(format!("head vertex {h} out of range")))
        }
    };
    for &(u, v) in &attach.head_arcs {
        if u == v {
            return bad(format!("head self-loop at {u}"));
        }
        g.add_arc(head(u)?, head(v)?).unwrap();
    }
    for &(a, b) in &attach.links {
        let wall_ok = |w: Vertex| {
            if w < wall_n {
                Ok(w)
            } else {
                Err(AttachError(format!("wall vertex {w} out of range 0..{wall_n}")))
            }
        };
        let (u, v) = match (a, b) {
            (End::Head(h), End::Wall(w)) => (head(h)?, wall_ok(w)?),
            (End::Wall(w), End::Head(h)) if h == x || h == y => (wall_ok(w)?, head(h)?),
            (End::Wall(_), End::Head(h)) => return bad(format!("wall arc into non-interface head vertex {h}")),
            _ => return bad("links must join the head and the wall".into()),
        };
        g.add_arc(u, v).unwrap();
    }
    let mut pairs = Vec::with_capacity(attach.pairs.len());
    for &(s, t) in &attach.pairs {
        pairs.push((head(s)?, head(t)?));
    }
    Ok(Instance::new(g, pairs, attach.c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_grid_is_a_two_cycle() {
        let h = gen_cyl_grid(1);
        assert_eq!(h.g.n(), 2);
        assert_eq!(h.g.arcs(), &[(0, 1), (1, 0)]);
        assert_eq!(gen_cyl_wall(1).g, h.g);
    }

    #[test]
    fn random_extremes_and_determinism() {
        assert_eq!(gen_random(5, 0.0, 1).m(), 0);
        assert_eq!(gen_random(3, 1.0, 1).m(), 6);
        assert_eq!(gen_random(8, 0.3, 42), gen_random(8, 0.3, 42));
    }

    #[test]
    fn fixture_rejects_bad_wiring() {
        let mut spec = AttachSpec::random(3, 2, 7);
        assert!(gen_sep_fixture(3, &spec).is_ok());
        spec.links.push((End::Wall(0), End::Head(2)));
        assert!(gen_sep_fixture(3, &spec).is_err());
        spec.interface = [0, 0];
        assert!(gen_sep_fixture(3, &spec).is_err());
    }
}
