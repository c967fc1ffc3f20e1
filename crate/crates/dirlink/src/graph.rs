//! Multidigraphs, instances, paths and linkages.
//!
//! Vertex and arc ids are dense `usize` values starting at 0. Parallel arcs are
//! distinct arcs with distinct ids; self-loops are rejected.

use std::collections::VecDeque;

use thiserror::Error;

pub type Vertex = usize;
pub type ArcId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("vertex {vertex} out of range (n = {n})")]
    OutOfRange { vertex: Vertex, n: usize },
}

/// A directed multigraph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiGraph {
    arcs: Vec<(Vertex, Vertex)>,
    out: Vec<Vec<ArcId>>,
    inc: Vec<Vec<ArcId>>,
}

impl DiGraph {
    pub fn new(n: usize) -> Self {
        DiGraph {
            arcs: Vec::new(),
            out: vec![Vec::new(); n],
            inc: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an arc list, assigning ids in list order.
    pub fn from_arcs(n: usize, arcs: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        let mut g = DiGraph::new(n);
        for &(u, v) in arcs {
            g.add_arc(u, v)?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self) -> Vertex {
        self.out.push(Vec::new());
        self.inc.push(Vec::new());
        self.out.len() - 1
    }

    pub fn add_arc(&mut self, u: Vertex, v: Vertex) -> Result<ArcId, GraphError> {
        let n = self.n();
        for x in [u, v] {
            if x >= n {
                return Err(GraphError::OutOfRange { vertex: x, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        let id = self.arcs.len();
        self.arcs.push((u, v));
        self.out[u].push(id);
        self.inc[v].push(id);
        Ok(id)
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn m(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc(&self, a: ArcId) -> (Vertex, Vertex) {
        self.arcs[a]
    }

    pub fn tail(&self, a: ArcId) -> Vertex {
        self.arcs[a].0
    }

    pub fn head(&self, a: ArcId) -> Vertex {
        self.arcs[a].1
    }

    pub fn arcs(&self) -> &[(Vertex, Vertex)] {
        &self.arcs
    }

    pub fn out_arcs(&self, v: Vertex) -> &[ArcId] {
        &self.out[v]
    }

    pub fn in_arcs(&self, v: Vertex) -> &[ArcId] {
        &self.inc[v]
    }

    pub fn successors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.out[v].iter().map(move |&a| self.arcs[a].1)
    }

    pub fn predecessors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.inc[v].iter().map(move |&a| self.arcs[a].0)
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out[v].len()
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.inc[v].len()
    }

    /// Lowest-id arc from `u` to `v`, if any.
    pub fn find_arc(&self, u: Vertex, v: Vertex) -> Option<ArcId> {
        self.out[u].iter().copied().find(|&a| self.arcs[a].1 == v)
    }

    /// Every arc flipped; arc ids are preserved.
    pub fn reverse(&self) -> DiGraph {
        let arcs: Vec<_> = self.arcs.iter().map(|&(u, v)| (v, u)).collect();
        DiGraph::from_arcs(self.n(), &arcs).expect("reversal keeps arcs valid")
    }

    /// Subgraph induced by `keep`, with vertices renumbered in increasing order.
    pub fn induced(&self, keep: &[bool]) -> Induced {
        let mut new_of_old = vec![None; self.n()];
        let mut old_of_new = Vec::new();
        for v in 0..self.n() {
            if keep[v] {
                new_of_old[v] = Some(old_of_new.len());
                old_of_new.push(v);
            }
        }
        let mut g = DiGraph::new(old_of_new.len());
        let mut arc_old_of_new = Vec::new();
        for (a, &(u, v)) in self.arcs.iter().enumerate() {
            if let (Some(x), Some(y)) = (new_of_old[u], new_of_old[v]) {
                g.add_arc(x, y).expect("induced arc is valid");
                arc_old_of_new.push(a);
            }
        }
        Induced {
            g,
            new_of_old,
            old_of_new,
            arc_old_of_new,
        }
    }
}

/// Result of [`DiGraph::induced`] with the id maps in both directions.
#[derive(Debug, Clone)]
pub struct Induced {
    pub g: DiGraph,
    pub new_of_old: Vec<Option<Vertex>>,
    pub old_of_new: Vec<Vertex>,
    pub arc_old_of_new: Vec<ArcId>,
}

/// Vertices reachable from `sources` without entering a `banned` vertex.
/// Banned sources are not expanded.
pub fn reachable(g: &DiGraph, sources: &[Vertex], banned: &[bool]) -> Vec<bool> {
    search(g, sources, banned, false)
}

/// Vertices that can reach `targets` without passing a `banned` vertex.
pub fn coreachable(g: &DiGraph, targets: &[Vertex], banned: &[bool]) -> Vec<bool> {
    search(g, targets, banned, true)
}

fn search(g: &DiGraph, start: &[Vertex], banned: &[bool], backward: bool) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    let mut queue = VecDeque::new();
    for &s in start {
        if !banned.get(s).copied().unwrap_or(false) && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let arcs = if backward { g.in_arcs(v) } else { g.out_arcs(v) };
        for &a in arcs {
            let (t, h) = g.arc(a);
            let w = if backward { t } else { h };
            if !seen[w] && !banned.get(w).copied().unwrap_or(false) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Shortest path by BFS from `s` to `t` avoiding `banned`, preferring low arc ids.
pub fn bfs_path(g: &DiGraph, s: Vertex, t: Vertex, banned: &[bool]) -> Option<Path> {
    if banned.get(s).copied().unwrap_or(false) || banned.get(t).copied().unwrap_or(false) {
        return None;
    }
    if s == t {
        return Some(Path::trivial(s));
    }
    let mut pred: Vec<Option<ArcId>> = vec![None; g.n()];
    let mut seen = vec![false; g.n()];
    seen[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        for &a in g.out_arcs(v) {
            let w = g.head(a);
            if seen[w] || banned.get(w).copied().unwrap_or(false) {
                continue;
            }
            seen[w] = true;
            pred[w] = Some(a);
            if w == t {
                let mut arcs = Vec::new();
                let mut x = t;
                while let Some(a) = pred[x] {
                    arcs.push(a);
                    x = g.tail(a);
                }
                arcs.reverse();
                return Some(Path::from_arcs(g, s, &arcs));
            }
            queue.push_back(w);
        }
    }
    None
}

/// Strongly connected components in reverse topological order of the
/// condensation (sink components first). Vertices inside a component are sorted.
pub fn strongly_connected_components(g: &DiGraph) -> Vec<Vec<Vertex>> {
    scc_restricted(g, &vec![false; g.n()])
}

/// Components of `g - banned`; banned vertices are omitted from the output.
pub fn scc_restricted(g: &DiGraph, banned: &[bool]) -> Vec<Vec<Vertex>> {
    let n = g.n();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != UNSEEN || banned[root] {
            continue;
        }
        // Iterative Tarjan: frames hold (vertex, next out-arc position).
        let mut frames: Vec<(Vertex, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if *pos < g.out_arcs(v).len() {
                let w = g.head(g.out_arcs(v)[*pos]);
                *pos += 1;
                if banned[w] {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// A directed path given by its vertex sequence and the arcs between them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub vertices: Vec<Vertex>,
    pub arcs: Vec<ArcId>,
}

impl Path {
    pub fn trivial(v: Vertex) -> Self {
        Path {
            vertices: vec![v],
            arcs: Vec::new(),
        }
    }

    pub fn from_arcs(g: &DiGraph, start: Vertex, arcs: &[ArcId]) -> Self {
        let mut vertices = vec![start];
        for &a in arcs {
            vertices.push(g.head(a));
        }
        Path {
            vertices,
            arcs: arcs.to_vec(),
        }
    }

    /// Uses the lowest-id arc between consecutive vertices.
    pub fn from_vertices(g: &DiGraph, vertices: &[Vertex]) -> Option<Self> {
        let mut arcs = Vec::with_capacity(vertices.len().saturating_sub(1));
        for w in vertices.windows(2) {
            arcs.push(g.find_arc(w[0], w[1])?);
        }
        Some(Path {
            vertices: vertices.to_vec(),
            arcs,
        })
    }

    pub fn first(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn last(&self) -> Vertex {
        *self.vertices.last().expect("paths are non-empty")
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn concat(&self, other: &Path) -> Path {
        assert_eq!(self.last(), other.first(), "paths do not meet");
        let mut p = self.clone();
        p.vertices.extend_from_slice(&other.vertices[1..]);
        p.arcs.extend_from_slice(&other.arcs);
        p
    }

    /// The same path read in the reversed graph (arc ids are kept by [`DiGraph::reverse`]).
    pub fn reversed(&self) -> Path {
        let mut p = self.clone();
        p.vertices.reverse();
        p.arcs.reverse();
        p
    }

    pub fn is_simple(&self) -> bool {
        let mut v = self.vertices.clone();
        v.sort_unstable();
        v.windows(2).all(|w| w[0] != w[1])
    }

    /// Removes cycles from a walk, keeping the first and last vertex.
    pub fn loop_erased(&self) -> Path {
        let mut vertices: Vec<Vertex> = Vec::new();
        let mut arcs: Vec<ArcId> = Vec::new();
        for (i, &v) in self.vertices.iter().enumerate() {
            if let Some(pos) = vertices.iter().position(|&x| x == v) {
                vertices.truncate(pos + 1);
                arcs.truncate(pos);
            } else {
                if i > 0 {
                    arcs.push(self.arcs[i - 1]);
                }
                vertices.push(v);
            }
        }
        Path { vertices, arcs }
    }
}

/// Paths index-aligned with the pairs of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Linkage {
    pub paths: Vec<Path>,
}

/// A routing problem: graph, ordered terminal pairs and congestion bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub g: DiGraph,
    pub pairs: Vec<(Vertex, Vertex)>,
    pub c: usize,
}

impl Instance {
    pub fn new(g: DiGraph, pairs: Vec<(Vertex, Vertex)>, c: usize) -> Self {
        Instance { g, pairs, c }
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn terminals(&self) -> Vec<Vertex> {
        let mut t: Vec<Vertex> = self.pairs.iter().flat_map(|&(s, t)| [s, t]).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    /// Sources with one out-arc and no in-arc, sinks with one in-arc and no
    /// out-arc, and all terminals distinct.
    pub fn is_normal_form(&self) -> bool {
        let t = self.terminals();
        t.len() == 2 * self.k()
            && self.pairs.iter().all(|&(s, t)| {
                self.g.out_degree(s) == 1
                    && self.g.in_degree(s) == 0
                    && self.g.in_degree(t) == 1
                    && self.g.out_degree(t) == 0
            })
    }
}

/// Per-vertex number of paths visiting it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongestionProfile {
    pub usage: Vec<usize>,
}

impl CongestionProfile {
    pub fn of(n: usize, paths: &[Path]) -> Self {
        let mut usage = vec![0; n];
        for p in paths {
            let mut vs = p.vertices.clone();
            vs.sort_unstable();
            vs.dedup();
            for v in vs {
                usage[v] += 1;
            }
        }
        CongestionProfile { usage }
    }

    pub fn max(&self) -> usize {
        self.usage.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("expected {expected} paths, got {got}")]
    PathCount { expected: usize, got: usize },
    #[error("path {path} runs from {from} to {to}, expected {want_from} to {want_to}")]
    Endpoints {
        path: usize,
        from: Vertex,
        to: Vertex,
        want_from: Vertex,
        want_to: Vertex,
    },
    #[error("path {path} step {step} does not follow an arc of the graph")]
    BadArc { path: usize, step: usize },
    #[error("path {path} visits vertex {vertex} twice")]
    NotSimple { path: usize, vertex: Vertex },
    #[error("vertex {vertex} used by {usage} paths, congestion is {c}")]
    Congestion { vertex: Vertex, usage: usize, c: usize },
}

/// Checks that `l` is a congestion-`c` linkage for the instance.
pub fn verify_linkage(inst: &Instance, l: &Linkage) -> Result<(), Violation> {
    let g = &inst.g;
    if l.paths.len() != inst.k() {
        return Err(Violation::PathCount {
            expected: inst.k(),
            got: l.paths.len(),
        });
    }
    for (i, (p, &(s, t))) in l.paths.iter().zip(&inst.pairs).enumerate() {
        if p.vertices.is_empty() || p.arcs.len() + 1 != p.vertices.len() {
            return Err(Violation::BadArc { path: i, step: 0 });
        }
        if p.first() != s || p.last() != t {
            return Err(Violation::Endpoints {
                path: i,
                from: p.first(),
                to: p.last(),
                want_from: s,
                want_to: t,
            });
        }
        for (step, &a) in p.arcs.iter().enumerate() {
            if a >= g.m() || g.arc(a) != (p.vertices[step], p.vertices[step + 1]) {
                return Err(Violation::BadArc { path: i, step });
            }
        }
        let mut seen = vec![false; g.n()];
        for &v in &p.vertices {
            if v >= g.n() {
                return Err(Violation::BadArc { path: i, step: 0 });
            }
            if seen[v] {
                return Err(Violation::NotSimple { path: i, vertex: v });
            }
            seen[v] = true;
        }
    }
    let prof = CongestionProfile::of(g.n(), &l.paths);
    if let Some(v) = (0..g.n()).find(|&v| prof.usage[v] > inst.c) {
        return Err(Violation::Congestion {
            vertex: v,
            usage: prof.usage[v],
            c: inst.c,
        });
    }
    Ok(())
}

/// Adds a fresh source `n + i` with the single arc to `s_i` and a fresh sink
/// `n + k + i` with the single arc from `t_i`, for every pair `i`.
pub fn normalize(inst: &Instance) -> Instance {
    let n = inst.g.n();
    let k = inst.k();
    let mut g = inst.g.clone();
    for _ in 0..2 * k {
        g.add_vertex();
    }
    let mut pairs = Vec::with_capacity(k);
    for (i, &(s, t)) in inst.pairs.iter().enumerate() {
        g.add_arc(n + i, s).expect("fresh source arc");
        g.add_arc(t, n + k + i).expect("fresh sink arc");
        pairs.push((n + i, n + k + i));
    }
    Instance::new(g, pairs, inst.c)
}

/// Maps a linkage of `normalize(inst)` back to `inst` by dropping the fresh ends.
pub fn denormalize_linkage(l: &Linkage) -> Linkage {
    Linkage {
        paths: l
            .paths
            .iter()
            .map(|p| Path {
                vertices: p.vertices[1..p.vertices.len() - 1].to_vec(),
                arcs: p.arcs[1..p.arcs.len() - 1].to_vec(),
            })
            .collect(),
    }
}

/// An instance restricted to useful vertices, with maps back to the original.
#[derive(Debug, Clone)]
pub struct Pruned {
    pub inst: Instance,
    pub old_of_new: Vec<Vertex>,
    pub arc_old_of_new: Vec<ArcId>,
}

impl Pruned {
    pub fn lift(&self, l: &Linkage) -> Linkage {
        Linkage {
            paths: l
                .paths
                .iter()
                .map(|p| Path {
                    vertices: p.vertices.iter().map(|&v| self.old_of_new[v]).collect(),
                    arcs: p.arcs.iter().map(|&a| self.arc_old_of_new[a]).collect(),
                })
                .collect(),
        }
    }
}

/// Keeps the vertices reachable from some source and reaching some sink.
/// Returns `None` when a terminal would be removed, i.e. the instance is infeasible.
pub fn prune_useless(inst: &Instance) -> Option<Pruned> {
    let g = &inst.g;
    let none = vec![false; g.n()];
    let sources: Vec<Vertex> = inst.pairs.iter().map(|p| p.0).collect();
    let sinks: Vec<Vertex> = inst.pairs.iter().map(|p| p.1).collect();
    let fwd = reachable(g, &sources, &none);
    let bwd = coreachable(g, &sinks, &none);
    let keep: Vec<bool> = (0..g.n()).map(|v| fwd[v] && bwd[v]).collect();
    if inst.terminals().iter().any(|&t| !keep[t]) {
        return None;
    }
    let ind = g.induced(&keep);
    let pairs = inst
        .pairs
        .iter()
        .map(|&(s, t)| (ind.new_of_old[s].unwrap(), ind.new_of_old[t].unwrap()))
        .collect();
    Some(Pruned {
        inst: Instance::new(ind.g, pairs, inst.c),
        old_of_new: ind.old_of_new,
        arc_old_of_new: ind.arc_old_of_new,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(n: usize) -> DiGraph {
        let arcs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        DiGraph::from_arcs(n, &arcs).unwrap()
    }

    #[test]
    fn rejects_self_loops_and_bad_ids() {
        let mut g = DiGraph::new(2);
        assert_eq!(g.add_arc(1, 1), Err(GraphError::SelfLoop(1)));
        assert!(matches!(g.add_arc(0, 2), Err(GraphError::OutOfRange { .. })));
        assert_eq!(g.add_arc(0, 1), Ok(0));
        assert_eq!(g.add_arc(0, 1), Ok(1));
        assert_eq!(g.out_arcs(0), &[0, 1]);
    }

    #[test]
    fn reverse_is_an_involution() {
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2), (0, 1)]).unwrap();
        assert_eq!(g.reverse().arc(0), (1, 0));
        assert_eq!(g.reverse().reverse(), g);
    }

    #[test]
    fn scc_of_cycle_and_dag() {
        let cyc = DiGraph::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(strongly_connected_components(&cyc), vec![vec![0, 1, 2]]);
        let dag = path_graph(3);
        // sinks first
        assert_eq!(strongly_connected_components(&dag), vec![vec![2], vec![1], vec![0]]);
    }

    #[test]
    fn linkage_congestion() {
        let g = path_graph(3);
        let p = Path::from_vertices(&g, &[0, 1, 2]).unwrap();
        let inst = Instance::new(g.clone(), vec![(0, 2)], 1);
        assert_eq!(verify_linkage(&inst, &Linkage { paths: vec![p.clone()] }), Ok(()));
        let two = Linkage {
            paths: vec![p.clone(), p.clone()],
        };
        let inst1 = Instance::new(g.clone(), vec![(0, 2), (0, 2)], 1);
        assert_eq!(
            verify_linkage(&inst1, &two),
            Err(Violation::Congestion { vertex: 0, usage: 2, c: 1 })
        );
        let inst2 = Instance::new(g, vec![(0, 2), (0, 2)], 2);
        assert_eq!(verify_linkage(&inst2, &two), Ok(()));
    }

    #[test]
    fn normalize_adds_fresh_terminals() {
        let inst = Instance::new(path_graph(3), vec![(1, 2)], 1);
        let nf = normalize(&inst);
        assert_eq!(nf.g.n(), 5);
        assert_eq!(nf.pairs, vec![(3, 4)]);
        assert!(nf.is_normal_form());
        assert!(!inst.is_normal_form());
    }

    #[test]
    fn prune_drops_isolated_and_detects_infeasible() {
        let g = DiGraph::from_arcs(3, &[(0, 1)]).unwrap();
        let p = prune_useless(&Instance::new(g, vec![(0, 1)], 1)).unwrap();
        assert_eq!(p.inst.g.n(), 2);
        let g = DiGraph::from_arcs(3, &[(1, 0)]).unwrap();
        assert!(prune_useless(&Instance::new(g, vec![(0, 2)], 1)).is_none());
    }

    #[test]
    fn loop_erasure() {
        let g = DiGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 1), (1, 3)]).unwrap();
        let walk = Path::from_arcs(&g, 0, &[0, 1, 2, 3]);
        let p = walk.loop_erased();
        assert_eq!(p.vertices, vec![0, 1, 3]);
        assert_eq!(p.arcs, vec![0, 3]);
    }
}
