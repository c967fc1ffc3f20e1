//! Boundary-set dynamic programming over directed tree-decompositions.
//!
//! For a vertex set `S`, a *fragment* is a walk inside `G[S]` together with
//! the arc entering its first vertex from outside `S` and the arc leaving its
//! last vertex to outside `S`. A family of fragments is admissible when every
//! ordinary vertex of `S` is visited at most `c` times in total and, for each
//! big vertex `u` in `S`, the multiset of `(in-arc, out-arc)` traversals of
//! `u` is empty or one of its feasible routings. The bound set of `S` is the
//! set of entry/exit multisets of admissible families; it is computed for
//! singletons directly and for unions by stitching fragments along arcs
//! running between the two parts.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::dtw::{check_decomposition, width, Decomposition, DecompositionError};
use crate::graph::{ArcId, DiGraph, Instance, Linkage, Path, Vertex};
use crate::separation::Side;

pub type ArcPair = (ArcId, ArcId);

/// A multiset of `(entry arc, exit arc)` pairs in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BoundarySet(pub Vec<ArcPair>);

impl BoundarySet {
    pub fn new(mut pairs: Vec<ArcPair>) -> Self {
        pairs.sort_unstable();
        BoundarySet(pairs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A maximal subpath inside a vertex set with the arcs entering and leaving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitTriple {
    pub e: ArcId,
    pub path: Path,
    pub f: ArcId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpError {
    #[error("path {path} has endpoint {vertex} inside the set")]
    EndpointInSet { path: usize, vertex: Vertex },
    #[error("invalid big vertex data: {0}")]
    BadBigVertex(String),
    #[error("bound must be at least 2, got {0}")]
    BoundTooSmall(usize),
    #[error("instance is not in normal form")]
    NotNormalForm,
    #[error("invalid decomposition: {0}")]
    Decomposition(#[from] DecompositionError),
    #[error("terminal {0} is not in the root bag")]
    TerminalBelowRoot(Vertex),
    #[error("children of node {0} cannot be ordered acyclically")]
    ChildrenNotOrderable(usize),
    #[error("bound tables exceeded {0} entries")]
    StateBudget(usize),
}

pub fn split(g: &DiGraph, paths: &[Path], s: &[Vertex]) -> Result<Vec<SplitTriple>, DpError> {
    let mut inside = vec![false; g.n()];
    for &v in s {
        inside[v] = true;
    }
    let mut out = Vec::new();
    for (pi, p) in paths.iter().enumerate() {
        for v in [p.first(), p.last()] {
            if inside[v] {
                return Err(DpError::EndpointInSet { path: pi, vertex: v });
            }
        }
        let mut i = 1;
        while i < p.vertices.len() {
            if !inside[p.vertices[i]] {
                i += 1;
                continue;
            }
            let start = i;
            while inside[p.vertices[i + 1]] {
                i += 1;
            }
            out.push(SplitTriple {
                e: p.arcs[start - 1],
                path: Path {
                    vertices: p.vertices[start..=i].to_vec(),
                    arcs: p.arcs[start..i].to_vec(),
                },
                f: p.arcs[i],
            });
            i += 1;
        }
    }
    Ok(out)
}

pub fn boundary(g: &DiGraph, paths: &[Path], s: &[Vertex]) -> Result<BoundarySet, DpError> {
    Ok(BoundarySet::new(split(g, paths, s)?.iter().map(|t| (t.e, t.f)).collect()))
}

/// A sorted multiset of traversals `(in-arc, out-arc)` of one vertex.
pub type Routing = Vec<ArcPair>;

/// Big vertices with their feasible routings, and the routing size bound `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigVertexSpec {
    pub b: usize,
    pub routings: BTreeMap<Vertex, BTreeSet<Routing>>,
}

impl BigVertexSpec {
    pub fn none(b: usize) -> Self {
        BigVertexSpec {
            b,
            routings: BTreeMap::new(),
        }
    }

    pub fn is_big(&self, v: Vertex) -> bool {
        self.routings.contains_key(&v)
    }

    pub fn validate(&self, g: &DiGraph, terminals: &[Vertex]) -> Result<(), DpError> {
        if self.b < 2 {
            return Err(DpError::BoundTooSmall(self.b));
        }
        let bad = |m: String| Err(DpError::BadBigVertex(m));
        for (&u, set) in &self.routings {
            if u >= g.n() {
                return bad(format!("big vertex {u} out of range"));
            }
            if terminals.contains(&u) {
                return bad(format!("terminal {u} is a big vertex"));
            }
            for r in set {
                if r.len() > self.b {
                    return bad(format!("routing at {u} has {} > {} traversals", r.len(), self.b));
                }
                if r.windows(2).any(|w| w[0] > w[1]) {
                    return bad(format!("routing at {u} is not sorted"));
                }
                for &(e, f) in r {
                    if e >= g.m() || f >= g.m() || g.head(e) != u || g.tail(f) != u {
                        return bad(format!("routing at {u} uses arcs not incident to it"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The traversals of `u` by the given walks.
pub fn routing_of(paths: &[Path], u: Vertex) -> Routing {
    let mut r = Vec::new();
    for p in paths {
        for i in 1..p.vertices.len().saturating_sub(1) {
            if p.vertices[i] == u {
                r.push((p.arcs[i - 1], p.arcs[i]));
            }
        }
    }
    r.sort_unstable();
    r
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdmissibilityViolation {
    #[error("vertex {vertex} visited {visits} times, congestion is {c}")]
    Congestion { vertex: Vertex, visits: usize, c: usize },
    #[error("big vertex {vertex} used with infeasible routing {routing:?}")]
    Routing { vertex: Vertex, routing: Routing },
}

/// Checks visit counts on ordinary vertices and routings at big vertices.
pub fn is_admissible(g: &DiGraph, paths: &[Path], spec: &BigVertexSpec, c: usize) -> Result<(), AdmissibilityViolation> {
    let mut visits = vec![0usize; g.n()];
    for p in paths {
        for &v in &p.vertices {
            visits[v] += 1;
        }
    }
    for v in 0..g.n() {
        if spec.is_big(v) {
            let r = routing_of(paths, v);
            if !r.is_empty() && !spec.routings[&v].contains(&r) {
                return Err(AdmissibilityViolation::Routing { vertex: v, routing: r });
            }
        } else if visits[v] > c {
            return Err(AdmissibilityViolation::Congestion {
                vertex: v,
                visits: visits[v],
                c,
            });
        }
    }
    Ok(())
}

/// One realization per boundary set: fragment arc sequences aligned with
/// the sorted pairs, each starting with its entry arc and ending with its
/// exit arc.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoundTable {
    pub entries: BTreeMap<BoundarySet, Vec<Vec<ArcId>>>,
}

impl BoundTable {
    pub fn unit() -> Self {
        let mut t = BoundTable::default();
        t.entries.insert(BoundarySet::default(), Vec::new());
        t
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> BTreeSet<BoundarySet> {
        self.entries.keys().cloned().collect()
    }

    fn offer(&mut self, mut items: Vec<(ArcPair, Vec<ArcId>)>) {
        items.sort_by(|a, b| a.0.cmp(&b.0));
        let key = BoundarySet(items.iter().map(|x| x.0).collect());
        self.entries.entry(key).or_insert_with(|| items.into_iter().map(|x| x.1).collect());
    }
}

fn multisets(pairs: &[ArcPair], max: usize, start: usize, cur: &mut Vec<ArcPair>, out: &mut Vec<Vec<ArcPair>>) {
    out.push(cur.clone());
    if cur.len() == max {
        return;
    }
    for i in start..pairs.len() {
        cur.push(pairs[i]);
        multisets(pairs, max, i, cur, out);
        cur.pop();
    }
}

/// Bound set of the single vertex `v`.
pub fn singleton_bound(g: &DiGraph, v: Vertex, spec: &BigVertexSpec, c: usize) -> BoundTable {
    let mut t = BoundTable::unit();
    let routings: Vec<Routing> = match spec.routings.get(&v) {
        Some(set) => set.iter().cloned().collect(),
        None => {
            let mut pairs = Vec::new();
            for &e in g.in_arcs(v) {
                for &f in g.out_arcs(v) {
                    pairs.push((e, f));
                }
            }
            pairs.sort_unstable();
            let mut out = Vec::new();
            multisets(&pairs, c, 0, &mut Vec::new(), &mut out);
            out
        }
    };
    for r in routings {
        t.offer(r.iter().map(|&(e, f)| ((e, f), vec![e, f])).collect());
    }
    t
}

/// A way of stitching the pairs of two sides into chains: each chain lists
/// `(side, index)` items, consecutive items sharing a cross arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityWitness {
    pub chains: Vec<Vec<(Side, usize)>>,
}

impl CompatibilityWitness {
    /// Matched cross-arc occurrences: the item ending in a cross arc and the
    /// item starting with it.
    pub fn chi(&self) -> Vec<((Side, usize), (Side, usize))> {
        self.chains
            .iter()
            .flat_map(|ch| ch.windows(2).map(|w| (w[0], w[1])))
            .collect()
    }
}

struct Stitcher<'a> {
    items: [&'a [ArcPair]; 2],
    cross: &'a dyn Fn(ArcId) -> bool,
    used: [Vec<bool>; 2],
    chains: Vec<Vec<(Side, usize)>>,
    limit: usize,
}

fn side_index(s: Side) -> usize {
    match s {
        Side::A => 0,
        Side::B => 1,
    }
}

impl<'a> Stitcher<'a> {
    fn pair(&self, it: (Side, usize)) -> ArcPair {
        self.items[side_index(it.0)][it.1]
    }

    /// Calls `emit` for every complete stitching; stops once it returns `true`.
    fn run(&mut self, emit: &mut dyn FnMut(&[Vec<(Side, usize)>]) -> bool) -> bool {
        let start = [Side::A, Side::B].into_iter().find_map(|s| {
            let si = side_index(s);
            (0..self.items[si].len()).find(|&i| !self.used[si][i] && !(self.cross)(self.items[si][i].0)).map(|i| (s, i))
        });
        let Some(start) = start else {
            let all_used = self.used.iter().all(|u| u.iter().all(|&x| x));
            return all_used && emit(&self.chains);
        };
        if self.chains.len() == self.limit {
            return false;
        }
        self.used[side_index(start.0)][start.1] = true;
        self.chains.push(vec![start]);
        let stop = self.follow(start, emit);
        self.chains.pop();
        self.used[side_index(start.0)][start.1] = false;
        stop
    }

    fn follow(&mut self, cur: (Side, usize), emit: &mut dyn FnMut(&[Vec<(Side, usize)>]) -> bool) -> bool {
        let f = self.pair(cur).1;
        if !(self.cross)(f) {
            return self.run(emit);
        }
        let other = cur.0.other();
        let oi = side_index(other);
        let mut tried: Vec<ArcPair> = Vec::new();
        for j in 0..self.items[oi].len() {
            let p = self.items[oi][j];
            if self.used[oi][j] || p.0 != f || tried.contains(&p) {
                continue;
            }
            tried.push(p);
            self.used[oi][j] = true;
            self.chains.last_mut().unwrap().push((other, j));
            let stop = self.follow((other, j), emit);
            self.chains.last_mut().unwrap().pop();
            self.used[oi][j] = false;
            if stop {
                return true;
            }
        }
        false
    }
}

fn cross_test<'a>(g: &'a DiGraph, in_a: &'a [bool], in_b: &'a [bool]) -> impl Fn(ArcId) -> bool + 'a {
    move |arc| {
        let (t, h) = g.arc(arc);
        (in_a[t] && in_b[h]) || (in_b[t] && in_a[h])
    }
}

fn masks(n: usize, a: &[Vertex], b: &[Vertex]) -> (Vec<bool>, Vec<bool>) {
    let mut in_a = vec![false; n];
    let mut in_b = vec![false; n];
    for &v in a {
        in_a[v] = true;
    }
    for &v in b {
        in_b[v] = true;
    }
    (in_a, in_b)
}

/// Finds a stitching of `ya` (pairs of `A`) and `yb` (pairs of `B`) whose
/// combined boundary is `x`.
pub fn compatible(
    g: &DiGraph,
    x: &BoundarySet,
    ya: &BoundarySet,
    yb: &BoundarySet,
    a: &[Vertex],
    b: &[Vertex],
) -> Option<CompatibilityWitness> {
    let (in_a, in_b) = masks(g.n(), a, b);
    let cross = cross_test(g, &in_a, &in_b);
    let mut st = Stitcher {
        items: [&ya.0, &yb.0],
        cross: &cross,
        used: [vec![false; ya.len()], vec![false; yb.len()]],
        chains: Vec::new(),
        limit: usize::MAX,
    };
    let mut found = None;
    let items = [&ya.0, &yb.0];
    st.run(&mut |chains| {
        let got = BoundarySet::new(
            chains
                .iter()
                .map(|ch| {
                    let first = ch[0];
                    let last = *ch.last().unwrap();
                    (items[side_index(first.0)][first.1].0, items[side_index(last.0)][last.1].1)
                })
                .collect(),
        );
        if &got == x {
            found = Some(CompatibilityWitness { chains: chains.to_vec() });
            true
        } else {
            false
        }
    });
    found
}

/// Bound set of `A ∪ B` from those of the disjoint sets `A` and `B`,
/// keeping only boundary sets with at most `cap` pairs.
pub fn join_bounds(g: &DiGraph, ta: &BoundTable, a: &[Vertex], tb: &BoundTable, b: &[Vertex], cap: usize) -> BoundTable {
    join_filtered(g, ta, a, tb, b, cap, &|_| true, usize::MAX).expect("no entry limit")
}

#[allow(clippy::too_many_arguments)]
fn join_filtered(
    g: &DiGraph,
    ta: &BoundTable,
    a: &[Vertex],
    tb: &BoundTable,
    b: &[Vertex],
    cap: usize,
    keep: &dyn Fn(&[ArcPair]) -> bool,
    limit: usize,
) -> Option<BoundTable> {
    let (in_a, in_b) = masks(g.n(), a, b);
    let cross = cross_test(g, &in_a, &in_b);
    let mut out = BoundTable::default();
    let mut offer = |items: Vec<(ArcPair, Vec<ArcId>)>| {
        let mut pairs: Vec<ArcPair> = items.iter().map(|x| x.0).collect();
        pairs.sort_unstable();
        if keep(&pairs) {
            out.offer(items);
        }
        out.len() > limit
    };
    // Stitching needs the cross arcs leaving one side to be exactly those
    // entering the other, so B entries are grouped by that signature.
    let signature = |y: &BoundarySet| -> (Vec<ArcId>, Vec<ArcId>) {
        let mut ins: Vec<ArcId> = y.0.iter().map(|p| p.0).filter(|&e| cross(e)).collect();
        let mut outs: Vec<ArcId> = y.0.iter().map(|p| p.1).filter(|&f| cross(f)).collect();
        ins.sort_unstable();
        outs.sort_unstable();
        (ins, outs)
    };
    let mut by_signature: HashMap<(Vec<ArcId>, Vec<ArcId>), Vec<(&BoundarySet, &Vec<Vec<ArcId>>)>> = HashMap::new();
    for (yb, fb) in &tb.entries {
        by_signature.entry(signature(yb)).or_default().push((yb, fb));
    }
    for (ya, fa) in &ta.entries {
        let (a_in, a_out) = signature(ya);
        let Some(group) = by_signature.get(&(a_out, a_in)) else { continue };
        for &(yb, fb) in group {
            let frags = [fa, fb];
            let mut st = Stitcher {
                items: [&ya.0, &yb.0],
                cross: &cross,
                used: [vec![false; ya.len()], vec![false; yb.len()]],
                chains: Vec::new(),
                limit: cap,
            };
            let items = [&ya.0, &yb.0];
            let full = st.run(&mut |chains| {
                let stitched = chains
                    .iter()
                    .map(|ch| {
                        let mut arcs: Vec<ArcId> = Vec::new();
                        for &(s, i) in ch {
                            let frag = &frags[side_index(s)][i];
                            let skip = usize::from(!arcs.is_empty());
                            arcs.extend_from_slice(&frag[skip..]);
                        }
                        let first = ch[0];
                        let last = *ch.last().unwrap();
                        let pair = (items[side_index(first.0)][first.1].0, items[side_index(last.0)][last.1].1);
                        (pair, arcs)
                    })
                    .collect();
                offer(stitched)
            });
            if full {
                return None;
            }
        }
    }
    Some(out)
}

/// Bound set of a bag, built by joining its vertices one at a time.
pub fn leaf_bound(g: &DiGraph, bag: &[Vertex], spec: &BigVertexSpec, c: usize, cap: usize) -> BoundTable {
    leaf_filtered(g, bag, spec, c, cap, &|_| true, usize::MAX).expect("no entry limit")
}

fn leaf_filtered(
    g: &DiGraph,
    bag: &[Vertex],
    spec: &BigVertexSpec,
    c: usize,
    cap: usize,
    keep: &dyn Fn(&[ArcPair]) -> bool,
    limit: usize,
) -> Option<BoundTable> {
    // A prefix may hold more fragments than the whole bag: each vertex still
    // to come can join at most its capacity many of them.
    let capacity = |v: Vertex| match spec.routings.get(&v) {
        Some(rs) => rs.iter().map(Vec::len).max().unwrap_or(0),
        None => c,
    };
    let mut rest: usize = bag.iter().map(|&v| capacity(v)).sum();
    let mut acc = BoundTable::unit();
    let mut acc_set: Vec<Vertex> = Vec::new();
    for &v in bag {
        rest -= capacity(v);
        let step_cap = cap.saturating_add(rest);
        acc = join_filtered(g, &acc, &acc_set, &singleton_bound(g, v, spec, c), &[v], step_cap, keep, limit)?;
        acc_set.push(v);
    }
    Some(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DtwAnswer {
    Yes(Linkage),
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpOptions {
    pub c: usize,
    /// Abort once a single bound table exceeds this many entries.
    pub max_states: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions {
            c: 2,
            max_states: 1_000_000,
        }
    }
}

/// Children of `t` ordered so that no arc runs from a later subtree into an
/// earlier one; ties go to the subtree with the smallest vertex.
fn ordered_children(g: &DiGraph, d: &Decomposition, t: usize) -> Result<Vec<usize>, DpError> {
    let kids = &d.children[t];
    let mut owner = vec![usize::MAX; g.n()];
    let sets: Vec<Vec<Vertex>> = kids.iter().map(|&c| d.subtree_vertices(c)).collect();
    for (i, s) in sets.iter().enumerate() {
        for &v in s {
            owner[v] = i;
        }
    }
    let m = kids.len();
    let mut indeg = vec![0usize; m];
    let mut succ = vec![BTreeSet::new(); m];
    for &(u, v) in g.arcs() {
        let (i, j) = (owner[u], owner[v]);
        if i != usize::MAX && j != usize::MAX && i != j && succ[i].insert(j) {
            indeg[j] += 1;
        }
    }
    let key = |i: usize| sets[i].first().copied().unwrap_or(usize::MAX);
    let mut ready: BTreeSet<(usize, usize)> = (0..m).filter(|&i| indeg[i] == 0).map(|i| (key(i), i)).collect();
    let mut order = Vec::with_capacity(m);
    while let Some(&(k, i)) = ready.iter().next() {
        ready.remove(&(k, i));
        order.push(kids[i]);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.insert((key(j), j));
            }
        }
    }
    if order.len() != m {
        return Err(DpError::ChildrenNotOrderable(t));
    }
    Ok(order)
}

fn set_minus(set: &[Vertex], bag: &[Vertex]) -> Vec<Vertex> {
    set.iter().copied().filter(|v| !bag.contains(v)).collect()
}

struct Dp<'a> {
    g: &'a DiGraph,
    k: usize,
    /// Visits allowed at an ordinary vertex; a simple path visits it once.
    c: usize,
    /// Number of times each vertex can be entered or left by the linkage.
    capacity: Vec<usize>,
    d: &'a Decomposition,
    spec: &'a BigVertexSpec,
    opts: DpOptions,
    cap: usize,
}

impl<'a> Dp<'a> {
    /// A restriction of a linkage leaves each outside vertex and enters each
    /// outside vertex at most its capacity many times.
    fn within_capacity(&self, pairs: &[ArcPair]) -> bool {
        let mut out: BTreeMap<Vertex, usize> = BTreeMap::new();
        let mut inc: BTreeMap<Vertex, usize> = BTreeMap::new();
        for &(e, f) in pairs {
            let t = self.g.tail(e);
            let h = self.g.head(f);
            *out.entry(t).or_default() += 1;
            *inc.entry(h).or_default() += 1;
        }
        out.iter().chain(inc.iter()).all(|(&v, &n)| n <= self.capacity[v])
    }

    fn join(&self, ta: &BoundTable, a: &[Vertex], tb: &BoundTable, b: &[Vertex], cap: usize) -> Result<BoundTable, DpError> {
        let limit = self.opts.max_states;
        self.check(join_filtered(self.g, ta, a, tb, b, cap, &|p| self.within_capacity(p), limit))
    }

    fn leaf(&self, bag: &[Vertex]) -> Result<BoundTable, DpError> {
        let limit = self.opts.max_states;
        self.check(leaf_filtered(self.g, bag, self.spec, self.c, self.cap, &|p| self.within_capacity(p), limit))
    }

    fn check(&self, t: Option<BoundTable>) -> Result<BoundTable, DpError> {
        t.ok_or(DpError::StateBudget(self.opts.max_states))
    }

    /// Bound set of the union of the children subtrees of `t`, and that union.
    /// Total capacity of the vertices of `through` outside `inside` that a
    /// walk can pass through.
    fn pass_capacity(&self, through: &[Vertex], inside: &[Vertex]) -> usize {
        through
            .iter()
            .filter(|&&v| inside.binary_search(&v).is_err() && self.g.in_degree(v) > 0 && self.g.out_degree(v) > 0)
            .map(|&v| if self.spec.is_big(v) { self.spec.b } else { self.c })
            .sum()
    }

    /// Fragment cap for the subtree of `t`: consecutive fragments of one
    /// path are joined by a walk through the guard, and each guard vertex
    /// outside the subtree has bounded capacity.
    fn subtree_cap(&self, t: usize, subtree: &[Vertex]) -> usize {
        (self.k + self.pass_capacity(&self.d.guards[t], subtree)).min(self.cap)
    }

    /// Bound set of the union of the children subtrees of `t`, and that
    /// union. Children are ordered so that a walk from a later child back to
    /// an earlier one passes the bag of `t` or the guard of `t`, which caps
    /// every prefix union.
    fn children_bound(&self, t: usize) -> Result<(BoundTable, Vec<Vertex>), DpError> {
        let subtree = self.d.subtree_vertices(t);
        let mut through = self.d.guards[t].clone();
        through.extend(&self.d.bags[t]);
        let prefix_cap = (self.k + self.pass_capacity(&through, &set_minus(&subtree, &self.d.bags[t]))).min(self.cap);
        let mut acc = BoundTable::unit();
        let mut set: Vec<Vertex> = Vec::new();
        let mut cap = 0;
        for c in ordered_children(self.g, self.d, t)? {
            let (tab, sub, sub_cap) = self.subtree_bound(c)?;
            cap = (cap + sub_cap).min(prefix_cap);
            acc = self.join(&acc, &set, &tab, &sub, cap)?;
            set.extend(sub);
        }
        Ok((acc, set))
    }

    fn subtree_bound(&self, t: usize) -> Result<(BoundTable, Vec<Vertex>, usize), DpError> {
        let (kids, mut set) = self.children_bound(t)?;
        let bag = &self.d.bags[t];
        set.extend(bag);
        set.sort_unstable();
        let cap = self.subtree_cap(t, &set);
        let own = self.leaf(bag)?;
        let tab = self.join(&kids, &set_minus(&set, bag), &own, bag, cap)?;
        Ok((tab, set, cap))
    }
}

/// Decides a normal-form instance whose terminals all lie in the root bag.
///
/// Without big vertices the returned paths are simple and pass
/// `verify_linkage`; with big vertices they are walks whose traversals of
/// each big vertex form a feasible routing.
pub fn solve_bounded_dtw(inst: &Instance, spec: &BigVertexSpec, d: &Decomposition, opts: DpOptions) -> Result<DtwAnswer, DpError> {
    let g = &inst.g;
    if !inst.is_normal_form() {
        return Err(DpError::NotNormalForm);
    }
    let terminals = inst.terminals();
    spec.validate(g, &terminals)?;
    check_decomposition(g, d)?;
    let root_bag = &d.bags[d.root];
    if let Some(&t) = terminals.iter().find(|t| root_bag.binary_search(t).is_err()) {
        return Err(DpError::TerminalBelowRoot(t));
    }
    let k = inst.k();
    let capacity = (0..g.n())
        .map(|v| {
            if terminals.binary_search(&v).is_ok() {
                1
            } else if spec.is_big(v) {
                spec.b
            } else {
                opts.c.min(k)
            }
        })
        .collect();
    let dp = Dp {
        g,
        k,
        c: opts.c.min(k),
        capacity,
        d,
        spec,
        opts,
        cap: k + spec.b * width(d).width,
    };
    let mut target = Vec::new();
    let mut direct = vec![None; k];
    for (i, &(s, t)) in inst.pairs.iter().enumerate() {
        let e = g.out_arcs(s)[0];
        let f = g.in_arcs(t)[0];
        if e == f {
            direct[i] = Some(e);
        } else if terminals.contains(&g.head(e)) || terminals.contains(&g.tail(f)) {
            return Ok(DtwAnswer::No);
        } else {
            target.push((e, f));
        }
    }
    let (kids, set) = dp.children_bound(d.root)?;
    let rest: Vec<Vertex> = root_bag.iter().copied().filter(|v| !terminals.contains(v)).collect();
    let own = dp.leaf(&rest)?;
    let table = dp.join(&kids, &set, &own, &rest, target.len())?;
    let key = BoundarySet::new(target);
    let Some(frags) = table.entries.get(&key) else {
        return Ok(DtwAnswer::No);
    };
    let mut paths = Vec::with_capacity(k);
    for (i, &(s, _)) in inst.pairs.iter().enumerate() {
        let arcs: Vec<ArcId> = match direct[i] {
            Some(e) => vec![e],
            None => {
                let e = g.out_arcs(s)[0];
                let pos = key.0.iter().position(|p| p.0 == e).expect("target pair present");
                frags[pos].clone()
            }
        };
        let walk = Path::from_arcs(g, s, &arcs);
        paths.push(if spec.routings.is_empty() { walk.loop_erased() } else { walk });
    }
    Ok(DtwAnswer::Yes(Linkage { paths }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(pairs: &[ArcPair]) -> BoundarySet {
        BoundarySet::new(pairs.to_vec())
    }

    #[test]
    fn split_examples() {
        // path 1,2,3,4,5 as vertices 0..5
        let g = DiGraph::from_arcs(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let p = Path::from_arcs(&g, 0, &[0, 1, 2, 3]);
        let t = split(&g, &[p.clone()], &[2]).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].e, t[0].f, t[0].path.vertices.clone()), (1, 2, vec![2]));
        assert!(split(&g, &[p.clone()], &[]).unwrap().is_empty());
        assert!(split(&g, &[p.clone()], &[0]).is_err());
        assert_eq!(boundary(&g, &[p.clone(), p], &[2]).unwrap(), bs(&[(1, 2), (1, 2)]));
    }

    #[test]
    fn split_with_two_intervals() {
        // P = (1,2,5,3,4,6) with S = {2,3,4}; vertex v is id v-1
        let arcs = [(0, 1), (1, 4), (4, 2), (2, 3), (3, 5)];
        let g = DiGraph::from_arcs(6, &arcs).unwrap();
        let p = Path::from_arcs(&g, 0, &[0, 1, 2, 3, 4]);
        let t = split(&g, &[p], &[1, 2, 3]).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!((t[0].e, t[0].f), (0, 1));
        assert_eq!((t[1].e, t[1].f, t[1].path.vertices.clone()), (2, 4, vec![2, 3]));
    }

    #[test]
    fn admissibility() {
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let p = Path::from_arcs(&g, 0, &[0, 1]);
        assert!(is_admissible(&g, &[p.clone(), p.clone()], &BigVertexSpec::none(4), 2).is_ok());
        let mut spec = BigVertexSpec::none(4);
        spec.routings.insert(1, BTreeSet::from([vec![(0, 1), (0, 1)]]));
        assert!(matches!(is_admissible(&g, &[p.clone()], &spec, 2), Err(AdmissibilityViolation::Routing { vertex: 1, .. })));
        assert!(is_admissible(&g, &[p.clone(), p], &spec, 2).is_ok());
        assert!(is_admissible(&g, &[], &spec, 2).is_ok());
    }

    #[test]
    fn middle_vertex_bound() {
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let t = leaf_bound(&g, &[1], &BigVertexSpec::none(4), 2, 10);
        assert_eq!(t.keys(), BTreeSet::from([bs(&[]), bs(&[(0, 1)]), bs(&[(0, 1), (0, 1)])]));
        assert_eq!(leaf_bound(&g, &[], &BigVertexSpec::none(4), 2, 10).keys(), BTreeSet::from([bs(&[])]));
    }

    #[test]
    fn join_composes_a_chain() {
        // 0 -> 1 -> 2 -> 3 with A = {1}, B = {2}
        let g = DiGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let spec = BigVertexSpec::none(4);
        let ta = singleton_bound(&g, 1, &spec, 1);
        let tb = singleton_bound(&g, 2, &spec, 1);
        let j = join_bounds(&g, &ta, &[1], &tb, &[2], 10);
        assert_eq!(j.keys(), BTreeSet::from([bs(&[]), bs(&[(0, 2)])]));
        assert_eq!(j.entries[&bs(&[(0, 2)])], vec![vec![0, 1, 2]]);
        let w = compatible(&g, &bs(&[(0, 2)]), &bs(&[(0, 1)]), &bs(&[(1, 2)]), &[1], &[2]).unwrap();
        assert_eq!(w.chi(), vec![((Side::A, 0), (Side::B, 0))]);
        assert!(compatible(&g, &bs(&[]), &bs(&[(0, 1)]), &bs(&[]), &[1], &[2]).is_none());
    }

    #[test]
    fn join_without_cross_arcs_is_union() {
        let g = DiGraph::from_arcs(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        let spec = BigVertexSpec::none(4);
        let ta = singleton_bound(&g, 1, &spec, 1);
        let tb = singleton_bound(&g, 3, &spec, 1);
        let j = join_bounds(&g, &ta, &[1], &tb, &[3], 10);
        assert_eq!(j.keys(), BTreeSet::from([bs(&[]), bs(&[(0, 1)]), bs(&[(2, 3)]), bs(&[(0, 1), (2, 3)])]));
    }

    #[test]
    fn solves_path_and_respects_big_vertex() {
        // s=0 -> 1 -> 2 -> t=3
        let g = DiGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let inst = Instance::new(g.clone(), vec![(0, 3)], 1);
        let mut d = Decomposition::new(vec![0, 3]);
        let c = d.add_child(0, vec![1], vec![]);
        d.add_child(c, vec![2], vec![]);
        let ans = solve_bounded_dtw(&inst, &BigVertexSpec::none(4), &d, DpOptions::default()).unwrap();
        assert_eq!(ans, DtwAnswer::Yes(Linkage { paths: vec![Path::from_arcs(&g, 0, &[0, 1, 2])] }));
        let mut spec = BigVertexSpec::none(4);
        spec.routings.insert(1, BTreeSet::from([vec![(0, 1), (0, 1)]]));
        assert_eq!(solve_bounded_dtw(&inst, &spec, &d, DpOptions::default()).unwrap(), DtwAnswer::No);
    }
}
