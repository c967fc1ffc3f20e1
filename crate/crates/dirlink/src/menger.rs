//! Vertex-capacitated Menger engine and cut-vertex sequences.
//!
//! Every vertex `v` is split into `v_in -> v_out` carrying the vertex capacity;
//! graph arcs become `u_out -> v_in` with unbounded capacity. Augmenting paths
//! are found by depth-first search that tries arcs in increasing id order, so
//! all returned paths are deterministic.

use thiserror::Error;

use crate::graph::{coreachable, reachable, ArcId, DiGraph, Path, Vertex};
use crate::separation::{Separation, Side};

const INF: i64 = i64::MAX / 4;

/// Whether path endpoints may be shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Paths share no vertex at all.
    Disjoint,
    /// Paths share no internal vertex; vertices of `S` and `T` are uncapacitated.
    Internal,
}

/// Which minimum separator to report when too few paths exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nearest {
    Source,
    Sink,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MengerResult {
    Paths(Vec<Path>),
    Separation(Separation),
}

struct Net {
    to: Vec<usize>,
    res: Vec<i64>,
    cap: Vec<i64>,
    adj: Vec<Vec<usize>>,
    arc_of_edge: Vec<Option<ArcId>>,
}

impl Net {
    fn add(&mut self, u: usize, v: usize, c: i64, arc: Option<ArcId>) {
        for (x, y, cc) in [(u, v, c), (v, u, 0)] {
            self.adj[x].push(self.to.len());
            self.to.push(y);
            self.res.push(cc);
            self.cap.push(cc);
            self.arc_of_edge.push(arc);
        }
    }
}

/// Max-flow state on the split network of `g`.
struct Flow<'g> {
    g: &'g DiGraph,
    net: Net,
    src: usize,
    snk: usize,
    value: usize,
}

impl<'g> Flow<'g> {
    /// `cap[v]` is the vertex capacity (`None` = unbounded); sinks are
    /// connected to the super sink through their own capacity.
    fn new(g: &'g DiGraph, cap: &[Option<i64>], sources: &[Vertex], sinks: &[Vertex]) -> Self {
        let n = g.n();
        let mut net = Net {
            to: Vec::new(),
            res: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); 2 * n + 2],
            arc_of_edge: Vec::new(),
        };
        let (src, snk) = (2 * n, 2 * n + 1);
        for &s in sources {
            net.add(src, 2 * s, INF, None);
        }
        for v in 0..n {
            net.add(2 * v, 2 * v + 1, cap[v].unwrap_or(INF), None);
            for &a in g.out_arcs(v) {
                net.add(2 * v + 1, 2 * g.head(a), INF, Some(a));
            }
        }
        for &t in sinks {
            net.add(2 * t + 1, snk, INF, None);
        }
        Flow {
            g,
            net,
            src,
            snk,
            value: 0,
        }
    }

    fn augment(&mut self) -> bool {
        let nodes = self.net.adj.len();
        let mut seen = vec![false; nodes];
        let mut stack: Vec<(usize, usize)> = vec![(self.src, 0)];
        let mut via: Vec<usize> = Vec::new();
        seen[self.src] = true;
        while let Some(&mut (x, ref mut pos)) = stack.last_mut() {
            if x == self.snk {
                let mut bottleneck = INF;
                for &e in &via {
                    bottleneck = bottleneck.min(self.net.res[e]);
                }
                let push = bottleneck.min(1);
                for &e in &via {
                    self.net.res[e] -= push;
                    self.net.res[e ^ 1] += push;
                }
                self.value += 1;
                return true;
            }
            if *pos < self.net.adj[x].len() {
                let e = self.net.adj[x][*pos];
                *pos += 1;
                let y = self.net.to[e];
                if self.net.res[e] > 0 && !seen[y] {
                    seen[y] = true;
                    via.push(e);
                    stack.push((y, 0));
                }
            } else {
                stack.pop();
                via.pop();
            }
        }
        false
    }

    fn run(&mut self, limit: usize) {
        while self.value < limit && self.augment() {}
    }

    fn residual_reach(&self) -> Vec<bool> {
        let mut seen = vec![false; self.net.adj.len()];
        seen[self.src] = true;
        let mut stack = vec![self.src];
        while let Some(x) = stack.pop() {
            for &e in &self.net.adj[x] {
                let y = self.net.to[e];
                if self.net.res[e] > 0 && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// Decomposes the flow into walks, loop-erased to paths in `g`.
    fn paths(&self) -> Vec<Path> {
        let mut flow: Vec<i64> = (0..self.net.to.len())
            .map(|e| if e % 2 == 0 { self.net.cap[e] - self.net.res[e] } else { 0 })
            .collect();
        let mut out = Vec::new();
        for _ in 0..self.value {
            let mut x = self.src;
            let mut vertices: Vec<Vertex> = Vec::new();
            let mut arcs: Vec<ArcId> = Vec::new();
            while x != self.snk {
                let e = *self.net.adj[x]
                    .iter()
                    .find(|&&e| flow[e] > 0)
                    .expect("flow conservation");
                flow[e] -= 1;
                if let Some(a) = self.net.arc_of_edge[e] {
                    arcs.push(a);
                }
                x = self.net.to[e];
                if x < 2 * self.g.n() && x % 2 == 0 {
                    vertices.push(x / 2);
                }
            }
            out.push(Path { vertices, arcs }.loop_erased());
        }
        out
    }
}

/// Shortens `p` to run from its last `S` vertex to the first `T` vertex after it.
fn trim(p: &Path, in_s: &[bool], in_t: &[bool]) -> Path {
    let end = p.vertices.iter().position(|&v| in_t[v]).expect("path reaches T");
    let start = p.vertices[..=end].iter().rposition(|&v| in_s[v]).expect("path starts in S");
    Path {
        vertices: p.vertices[start..=end].to_vec(),
        arcs: p.arcs[start..end].to_vec(),
    }
}

fn set_mask(n: usize, set: &[Vertex]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

/// Either `k` (internally) disjoint `(S, T)`-paths or a separation of order
/// `< k` with `S ⊆ A` and `T ⊆ B`, whose separator is the minimum one closest
/// to the requested side. In `Internal` mode the separator avoids `S ∪ T`.
pub fn disjoint_paths_or_separator(
    g: &DiGraph,
    s: &[Vertex],
    t: &[Vertex],
    k: usize,
    mode: Mode,
    nearest: Nearest,
) -> MengerResult {
    let n = g.n();
    let in_s = set_mask(n, s);
    let in_t = set_mask(n, t);
    let cap: Vec<Option<i64>> = (0..n)
        .map(|v| match mode {
            Mode::Internal if in_s[v] || in_t[v] => None,
            _ => Some(1),
        })
        .collect();
    let mut flow = Flow::new(g, &cap, s, t);
    flow.run(k);
    if flow.value >= k {
        let paths = flow.paths().iter().map(|p| trim(p, &in_s, &in_t)).collect();
        return MengerResult::Paths(paths);
    }
    let sep = match nearest {
        Nearest::Source => source_side_separation(g, &flow),
        Nearest::Sink => {
            let rg = g.reverse();
            let mut rflow = Flow::new(&rg, &cap, t, s);
            rflow.run(k);
            source_side_separation(&rg, &rflow).swapped()
        }
    };
    let sep = Separation::new(g, &sep.a, &sep.b, Side::A).expect("min cut yields a separation");
    MengerResult::Separation(sep)
}

fn source_side_separation(g: &DiGraph, flow: &Flow) -> Separation {
    let reach = flow.residual_reach();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for v in 0..g.n() {
        let (vin, vout) = (reach[2 * v], reach[2 * v + 1]);
        if vin || vout {
            a.push(v);
        }
        if !vout {
            b.push(v);
        }
    }
    Separation::new(g, &a, &b, Side::A).expect("residual cut is a separation")
}

/// The chain of cut vertices between a source and two (possibly equal) targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSequence {
    pub vertices: Vec<Vertex>,
    /// `paths1[j]`, `paths2[j]` run from `vertices[j]` to `vertices[j + 1]`;
    /// the last entries run to `t1` and `t2`.
    pub paths1: Vec<Path>,
    pub paths2: Vec<Path>,
    pub regions: Vec<Vec<Vertex>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CutError {
    #[error("source {0} coincides with a target")]
    SourceIsTarget(Vertex),
    #[error("target {0} is unreachable from the source")]
    Unreachable(Vertex),
}

/// Computes the unique cut sequence between `s` and `t1, t2` in `g - banned`.
pub fn cut_sequence_in(
    g: &DiGraph,
    banned: &[bool],
    s: Vertex,
    t1: Vertex,
    t2: Vertex,
) -> Result<CutSequence, CutError> {
    if s == t1 || s == t2 {
        return Err(CutError::SourceIsTarget(s));
    }
    let reach = reachable(g, &[s], banned);
    for t in [t1, t2] {
        if !reach[t] {
            return Err(CutError::Unreachable(t));
        }
    }
    let n = g.n();
    let base: Vec<Option<i64>> = (0..n).map(|v| Some(if banned[v] { 0 } else { 1 })).collect();
    let mut vertices = vec![s];
    let mut paths1 = Vec::new();
    let mut paths2 = Vec::new();
    loop {
        let cur = *vertices.last().unwrap();
        if t1 == t2 && cur == t1 {
            paths1.push(Path::trivial(cur));
            paths2.push(Path::trivial(cur));
            break;
        }
        if cur == t1 || cur == t2 {
            let other = if cur == t1 { t2 } else { t1 };
            let p = two_paths(g, &base, cur, other, 1).remove(0);
            let (p1, p2) = if cur == t1 { (Path::trivial(cur), p) } else { (p, Path::trivial(cur)) };
            paths1.push(p1);
            paths2.push(p2);
            break;
        }
        let mut cap = base.clone();
        cap[cur] = None;
        if t1 == t2 {
            cap[t1] = Some(2);
        }
        let sinks: Vec<Vertex> = if t1 == t2 { vec![t1] } else { vec![t1, t2] };
        let mut flow = Flow::new(g, &cap, &[cur], &sinks);
        flow.run(2);
        if flow.value >= 2 {
            let in_s = set_mask(n, &[cur]);
            let in_t = set_mask(n, &sinks);
            let mut ps: Vec<Path> = flow.paths().iter().map(|p| trim(p, &in_s, &in_t)).collect();
            if t1 == t2 {
                paths1.push(ps.remove(0));
                paths2.push(ps.remove(0));
                vertices.push(t1);
                continue;
            }
            let i1 = ps.iter().position(|p| p.last() == t1).expect("one path per target");
            let p1 = ps.remove(i1);
            paths1.push(p1);
            paths2.push(ps.remove(0));
            break;
        }
        let reach = flow.residual_reach();
        let x = (0..n)
            .find(|&v| !banned[v] && reach[2 * v] && !reach[2 * v + 1])
            .expect("flow of one has a cut vertex");
        let mut ps = two_paths(g, &base, cur, x, 2);
        paths1.push(ps.remove(0));
        paths2.push(ps.remove(0));
        vertices.push(x);
    }
    let regions = regions(g, banned, &vertices, t1, t2);
    Ok(CutSequence {
        vertices,
        paths1,
        paths2,
        regions,
    })
}

pub fn cut_sequence(g: &DiGraph, s: Vertex, t1: Vertex, t2: Vertex) -> Result<CutSequence, CutError> {
    cut_sequence_in(g, &vec![false; g.n()], s, t1, t2)
}

/// `count` internally disjoint paths from `a` to `b`, which must exist.
fn two_paths(g: &DiGraph, base: &[Option<i64>], a: Vertex, b: Vertex, count: usize) -> Vec<Path> {
    let mut cap = base.to_vec();
    cap[a] = None;
    cap[b] = None;
    let mut flow = Flow::new(g, &cap, &[a], &[b]);
    flow.run(count);
    assert_eq!(flow.value, count, "cut vertices are joined by {count} internally disjoint paths");
    let in_a = set_mask(g.n(), &[a]);
    let in_b = set_mask(g.n(), &[b]);
    flow.paths().iter().map(|p| trim(p, &in_a, &in_b)).collect()
}

fn regions(g: &DiGraph, banned: &[bool], cuts: &[Vertex], t1: Vertex, t2: Vertex) -> Vec<Vec<Vertex>> {
    let n = g.n();
    let mut out = Vec::new();
    for (j, &c) in cuts.iter().enumerate() {
        let targets: Vec<Vertex> = match cuts.get(j + 1) {
            Some(&d) => vec![d],
            None => vec![t1, t2],
        };
        let mut ban_fwd = banned.to_vec();
        if let Some(&d) = cuts.get(j + 1) {
            ban_fwd[d] = true;
        }
        let fwd = reachable(g, &[c], &ban_fwd);
        let mut ban_bwd = banned.to_vec();
        ban_bwd[c] = true;
        let bwd = coreachable(g, &targets, &ban_bwd);
        let mut r: Vec<Vertex> = (0..n).filter(|&v| fwd[v] && bwd[v]).collect();
        r.push(c);
        r.extend(&targets);
        r.sort_unstable();
        r.dedup();
        out.push(r);
    }
    out
}

/// `P^i` of the sequence: the concatenation of all `i`-th segment paths.
pub fn cut_sequence_paths(seq: &CutSequence, i: usize) -> Path {
    let parts = if i == 1 { &seq.paths1 } else { &seq.paths2 };
    let mut p = parts[0].clone();
    for q in &parts[1..] {
        p = p.concat(q);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_internally_disjoint_paths() {
        // s=0, a=1, b=2, t=3
        let g = DiGraph::from_arcs(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        match disjoint_paths_or_separator(&g, &[0], &[3], 2, Mode::Internal, Nearest::Source) {
            MengerResult::Paths(ps) => {
                assert_eq!(ps[0].vertices, vec![0, 1, 3]);
                assert_eq!(ps[1].vertices, vec![0, 2, 3]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_middle_vertex_separates() {
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        match disjoint_paths_or_separator(&g, &[0], &[2], 2, Mode::Internal, Nearest::Source) {
            MengerResult::Separation(s) => {
                assert_eq!(s.separator(), vec![1]);
                s.validate(&g).unwrap();
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nearest_side_selection() {
        // 0 -> 1 -> 2 -> 3: both 1 and 2 are cut vertices
        let g = DiGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let sep = |side| match disjoint_paths_or_separator(&g, &[0], &[3], 2, Mode::Internal, side) {
            MengerResult::Separation(s) => s.separator(),
            _ => panic!(),
        };
        assert_eq!(sep(Nearest::Source), vec![1]);
        assert_eq!(sep(Nearest::Sink), vec![2]);
    }

    #[test]
    fn cut_sequence_through_common_vertex() {
        // s=0, a=1, b=2, c=3, t1=4, t2=5
        let g = DiGraph::from_arcs(6, &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5)]).unwrap();
        let seq = cut_sequence(&g, 0, 4, 5).unwrap();
        assert_eq!(seq.vertices, vec![0, 3]);
        assert_eq!(cut_sequence_paths(&seq, 1).vertices, vec![0, 1, 3, 4]);
        assert_eq!(cut_sequence_paths(&seq, 2).vertices, vec![0, 2, 3, 5]);
    }

    #[test]
    fn cut_sequence_base_and_equal_targets() {
        let g = DiGraph::from_arcs(3, &[(0, 1), (0, 2)]).unwrap();
        assert_eq!(cut_sequence(&g, 0, 1, 2).unwrap().vertices, vec![0]);
        let g = DiGraph::from_arcs(2, &[(0, 1)]).unwrap();
        let seq = cut_sequence(&g, 0, 1, 1).unwrap();
        assert_eq!(seq.vertices, vec![0, 1]);
        assert_eq!(seq.paths1[1], Path::trivial(1));
        assert_eq!(cut_sequence_paths(&seq, 1).vertices, vec![0, 1]);
        assert_eq!(cut_sequence(&g, 0, 0, 1), Err(CutError::SourceIsTarget(0)));
        let g = DiGraph::from_arcs(3, &[(0, 1)]).unwrap();
        assert_eq!(cut_sequence(&g, 0, 1, 2), Err(CutError::Unreachable(2)));
    }

    #[test]
    fn target_on_the_way_to_other_target() {
        // 0 -> 1 -> 2 with t1 = 1, t2 = 2: t1 itself is a cut vertex
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let seq = cut_sequence(&g, 0, 1, 2).unwrap();
        assert_eq!(seq.vertices, vec![0, 1]);
        assert_eq!(cut_sequence_paths(&seq, 1).vertices, vec![0, 1]);
        assert_eq!(cut_sequence_paths(&seq, 2).vertices, vec![0, 1, 2]);
    }
}
