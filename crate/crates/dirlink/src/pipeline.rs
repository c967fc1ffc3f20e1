//! Reduction along small separations and the three-pair congestion-2 solver.
//!
//! The solver prunes useless vertices, contracts the far sides of
//! separations of order one, contracts the far sides of a compatible family
//! of order-two separations into big vertices with tables of feasible
//! routings, and runs the bounded-width dynamic program on what is left.
//! Solutions are lifted back step by step and verified in the input graph.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::dp::{solve_bounded_dtw, ArcPair, BigVertexSpec, DpError, DpOptions, DtwAnswer, Routing};
use crate::dtw::{decompose_with_root, width, DecompOutcome};
use crate::graph::{
    bfs_path, coreachable, denormalize_linkage, normalize, prune_useless, reachable, verify_linkage, ArcId, DiGraph, Instance,
    Linkage, Path, Vertex, Violation,
};
use crate::separation::{intersect, is_subset, union, Separation, Side};
use crate::special::{solve_special, KstcInstance, SpecialAnswer};
use crate::uncross::{uncross, MajorityTags, Uncrossed};

/// Tuning knobs of [`solve_3hi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    /// Largest bag size tried when decomposing the reduced graph.
    pub kmax: usize,
    /// Separations with a smaller far interior are not contracted.
    pub min_far: usize,
    pub dp: DpOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            kmax: 4,
            min_far: 1,
            dp: DpOptions::default(),
        }
    }
}

fn mask(n: usize, set: &[Vertex]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

fn members(m: &[bool]) -> Vec<Vertex> {
    (0..m.len()).filter(|&v| m[v]).collect()
}

/// The largest terminal-free set that no arc leaves (`forward`) or enters
/// (otherwise) except through `cut`.
fn closed_far_side(g: &DiGraph, cut: &[Vertex], terminals: &[bool], forward: bool) -> Vec<Vertex> {
    let banned = mask(g.n(), cut);
    let mut far = vec![false; g.n()];
    for w in 0..g.n() {
        if banned[w] || terminals[w] || far[w] {
            continue;
        }
        let r = if forward {
            reachable(g, &[w], &banned)
        } else {
            coreachable(g, &[w], &banned)
        };
        if (0..g.n()).all(|v| !r[v] || !terminals[v]) {
            for v in 0..g.n() {
                far[v] |= r[v];
            }
        }
    }
    members(&far)
}

fn touches(g: &DiGraph, far: &[bool], v: Vertex) -> bool {
    g.out_arcs(v).iter().any(|&a| far[g.head(a)]) || g.in_arcs(v).iter().any(|&a| far[g.tail(a)])
}

/// All separations of order one or two whose separator avoids the
/// terminals, with every terminal in `A \ B` and every separator vertex
/// adjacent to the non-empty far interior.
///
/// For each separator and each direction of the cross arcs only the largest
/// far interior is listed. The result is sorted by decreasing far interior,
/// then by separator.
pub fn enumerate_2separations(g: &DiGraph, terminals: &[Vertex]) -> Vec<Separation> {
    let n = g.n();
    let is_terminal = mask(n, terminals);
    let inner: Vec<Vertex> = (0..n).filter(|&v| !is_terminal[v]).collect();
    let mut cuts: Vec<Vec<Vertex>> = inner.iter().map(|&u| vec![u]).collect();
    for (i, &u) in inner.iter().enumerate() {
        for &v in &inner[i + 1..] {
            cuts.push(vec![u, v]);
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for cut in &cuts {
        for forward in [true, false] {
            let far = closed_far_side(g, cut, &is_terminal, forward);
            if far.is_empty() {
                continue;
            }
            let far_mask = mask(n, &far);
            if !cut.iter().all(|&u| touches(g, &far_mask, u)) || !seen.insert((cut.clone(), far.clone())) {
                continue;
            }
            let a: Vec<Vertex> = (0..n).filter(|&v| !far_mask[v]).collect();
            let b = union(&far, cut);
            out.push(Separation::new(g, &a, &b, Side::A).expect("closed sets give separations"));
        }
    }
    out.sort_by(|x, y| {
        let key = |s: &Separation| (std::cmp::Reverse(s.far_interior().len()), s.separator(), s.far_interior());
        key(x).cmp(&key(y))
    });
    out
}

/// A separation of order one cutting a terminal-free part off, if any.
pub fn find_1separation(g: &DiGraph, terminals: &[Vertex]) -> Option<Separation> {
    let is_terminal = mask(g.n(), terminals);
    for v in (0..g.n()).filter(|&v| !is_terminal[v]) {
        for forward in [true, false] {
            let far = closed_far_side(g, &[v], &is_terminal, forward);
            if !far.is_empty() {
                let a: Vec<Vertex> = (0..g.n()).filter(|u| far.binary_search(u).is_err()).collect();
                return Some(Separation::new(g, &a, &union(&far, &[v]), Side::A).expect("closed sets give separations"));
            }
        }
    }
    None
}

/// One contraction of a far interior into its cut vertex.
#[derive(Debug, Clone)]
struct Contraction {
    before: DiGraph,
    far: Vec<Vertex>,
    cut: Vertex,
    old_of_new: Vec<Vertex>,
    arc_old_of_new: Vec<ArcId>,
}

impl Contraction {
    fn lift_path(&self, p: &Path) -> Path {
        let g = &self.before;
        let mut inside = mask(g.n(), &self.far);
        inside[self.cut] = true;
        let banned: Vec<bool> = inside.iter().map(|&x| !x).collect();
        let mut arcs = Vec::new();
        for &a in &p.arcs {
            let orig = self.arc_old_of_new[a];
            let (x, y) = g.arc(orig);
            if x != self.cut && inside[x] {
                arcs.extend(bfs_path(g, self.cut, x, &banned).expect("far side is entered through the cut").arcs);
            }
            arcs.push(orig);
            if y != self.cut && inside[y] {
                arcs.extend(bfs_path(g, y, self.cut, &banned).expect("far side is left through the cut").arcs);
            }
        }
        Path::from_arcs(g, self.old_of_new[p.first()], &arcs).loop_erased()
    }
}

/// An instance without separations of order one, with the contractions
/// that produced it.
#[derive(Debug, Clone)]
pub struct OneSepElimination {
    pub inst: Instance,
    steps: Vec<Contraction>,
}

impl OneSepElimination {
    pub fn contractions(&self) -> usize {
        self.steps.len()
    }

    /// Maps a linkage of the reduced instance to one of the input instance.
    pub fn lift(&self, l: &Linkage) -> Linkage {
        let mut paths = l.paths.clone();
        for step in self.steps.iter().rev() {
            paths = paths.iter().map(|p| step.lift_path(p)).collect();
        }
        Linkage { paths }
    }
}

/// Contracts far interiors of order-one separations into their cut vertex
/// until none is left. Terminals are never cut vertices.
///
/// Every path through a contracted part enters and leaves through the cut
/// vertex, so a linkage of the result lifts to one of the input by routing
/// through the part, and every linkage of the input shortcuts to the result.
/// Expects a pruned instance (see [`prune_useless`]): a far vertex that cannot
/// reach or be reached from the cut vertex would otherwise add shortcuts.
pub fn eliminate_1seps(inst: &Instance) -> OneSepElimination {
    let mut cur = inst.clone();
    let mut steps = Vec::new();
    while let Some(s) = find_1separation(&cur.g, &cur.terminals()) {
        let far = s.far_interior();
        let cut = s.separator()[0];
        let g = &cur.g;
        let far_mask = mask(g.n(), &far);
        let old_of_new: Vec<Vertex> = (0..g.n()).filter(|&v| !far_mask[v]).collect();
        let mut new_of_old = vec![usize::MAX; g.n()];
        for (i, &v) in old_of_new.iter().enumerate() {
            new_of_old[v] = i;
        }
        let rep = |v: Vertex| if far_mask[v] { new_of_old[cut] } else { new_of_old[v] };
        let mut h = DiGraph::new(old_of_new.len());
        let mut arc_old_of_new = Vec::new();
        for (a, &(x, y)) in g.arcs().iter().enumerate() {
            if rep(x) != rep(y) {
                h.add_arc(rep(x), rep(y)).expect("contracted arc is valid");
                arc_old_of_new.push(a);
            }
        }
        let pairs = cur.pairs.iter().map(|&(s, t)| (new_of_old[s], new_of_old[t])).collect();
        let next = Instance::new(h, pairs, cur.c);
        steps.push(Contraction {
            before: cur.g.clone(),
            far,
            cut,
            old_of_new,
            arc_old_of_new,
        });
        cur = next;
    }
    OneSepElimination { inst: cur, steps }
}

/// `B ∩ B' ⊆ A ∩ A'`.
pub fn compatible(s: &Separation, t: &Separation) -> bool {
    is_subset(&intersect(&s.b, &t.b), &intersect(&s.a, &t.a))
}

/// Order two, terminals strictly on the near side, far interior of at least `min_far` vertices.
fn contractible(s: &Separation, terminals: &[Vertex], min_far: usize) -> bool {
    s.order() == 2 && intersect(&s.b, terminals).is_empty() && s.far_interior().len() >= min_far.max(1)
}

/// A far-interior vertex of `s` outside `other`'s far side if there is one.
fn marker(s: &Separation, other: &Separation) -> Vertex {
    let far = s.far_interior();
    far.iter().copied().find(|v| other.b.binary_search(v).is_err()).unwrap_or(far[0])
}

/// Greedily builds a pairwise compatible family from the candidates in
/// order, uncrossing each newcomer against the members it conflicts with.
/// A candidate that cannot be reconciled is dropped.
pub fn select_family(g: &DiGraph, candidates: &[Separation], terminals: &[Vertex], min_far: usize) -> Vec<Separation> {
    let mut family: Vec<Separation> = Vec::new();
    'next: for cand in candidates {
        if !contractible(cand, terminals, min_far) {
            continue;
        }
        let mut s = cand.clone();
        for _ in 0..=2 * g.n() {
            let Some(pos) = family.iter().position(|t| !compatible(t, &s)) else {
                if !family.contains(&s) {
                    family.push(s);
                }
                continue 'next;
            };
            let t = family[pos].clone();
            let tags = MajorityTags {
                first: marker(&t, &s),
                second: marker(&s, &t),
            };
            match uncross(g, &t, &s, terminals, tags) {
                Ok(Uncrossed::Pair(t2, s2)) if t2 == t && s2 == s => continue 'next,
                Ok(Uncrossed::Single(x)) if contractible(&x, terminals, min_far) => {
                    family.remove(pos);
                    s = x;
                }
                Ok(Uncrossed::Pair(t2, s2)) if t2 == t && contractible(&s2, terminals, min_far) => s = s2,
                Ok(Uncrossed::Pair(t2, s2))
                    if s2 == s
                        && contractible(&t2, terminals, min_far)
                        && family.iter().enumerate().all(|(i, f)| i == pos || compatible(f, &t2)) =>
                {
                    family[pos] = t2;
                }
                _ => continue 'next,
            }
        }
    }
    family
}

/// Where an arc of a reduced graph comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcOrigin {
    /// Exactly one original arc.
    Original(ArcId),
    /// Every original arc between a far interior and one separator vertex.
    Collapsed { part: usize },
}

/// One contracted far interior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractedPart {
    /// The fresh vertex in the reduced graph.
    pub c: Vertex,
    pub sep: Separation,
    /// Whether the fresh vertex has its out-arcs (rather than its in-arcs)
    /// only to the separator.
    pub exits_collapsed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("separation {0} does not have order 2")]
    Order(usize),
    #[error("separation {0} has a terminal on its far side or in its separator")]
    Terminal(usize),
    #[error("separation {0} has an empty far interior")]
    EmptyFarSide(usize),
    #[error("separations {0} and {1} are not compatible")]
    Incompatible(usize, usize),
    #[error("separation {index} is invalid: {reason}")]
    Invalid { index: usize, reason: String },
}

/// A graph with the far interiors of compatible separations contracted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SReduction {
    pub reduced: DiGraph,
    pub parts: Vec<ContractedPart>,
    /// Reduced arc of every original arc, `None` inside a far interior.
    pub lambda: Vec<Option<ArcId>>,
    pub origin: Vec<ArcOrigin>,
    /// Reduced vertex of every original vertex outside all far interiors.
    pub new_of_old: Vec<Option<Vertex>>,
    /// Original vertex of every reduced vertex, `None` for fresh vertices.
    pub old_of_new: Vec<Option<Vertex>>,
}

impl SReduction {
    pub fn part_of(&self, v: Vertex) -> Option<usize> {
        self.parts.iter().position(|p| p.c == v)
    }

    /// The collapsed neighbours of every fresh vertex are exactly its separator.
    pub fn check_degree_pattern(&self) -> Result<(), String> {
        let g = &self.reduced;
        for (j, p) in self.parts.iter().enumerate() {
            let mut nbrs: Vec<Vertex> = if p.exits_collapsed {
                g.successors(p.c).collect()
            } else {
                g.predecessors(p.c).collect()
            };
            nbrs.sort_unstable();
            nbrs.dedup();
            let sep: Vec<Vertex> = p.sep.separator().iter().map(|&u| self.new_of_old[u].expect("separator survives")).collect();
            if nbrs != sep {
                return Err(format!("part {j}: collapsed neighbours {nbrs:?}, separator {sep:?}"));
            }
        }
        Ok(())
    }
}

/// Contracts each far interior into a fresh vertex.
///
/// Arcs on the side where cross arcs may run in either direction keep one
/// reduced arc each; arcs on the other side, which all meet the separator,
/// become one arc per separator vertex.
pub fn s_reduce(g: &DiGraph, seps: &[Separation], terminals: &[Vertex]) -> Result<SReduction, ReductionError> {
    for (i, s) in seps.iter().enumerate() {
        s.validate(g).map_err(|e| ReductionError::Invalid {
            index: i,
            reason: e.to_string(),
        })?;
        if s.order() != 2 {
            return Err(ReductionError::Order(i));
        }
        if !intersect(&s.b, terminals).is_empty() {
            return Err(ReductionError::Terminal(i));
        }
        if s.far_interior().is_empty() {
            return Err(ReductionError::EmptyFarSide(i));
        }
        if let Some(j) = (0..i).find(|&j| !compatible(&seps[j], s)) {
            return Err(ReductionError::Incompatible(j, i));
        }
    }
    let n = g.n();
    let mut part = vec![None; n];
    for (j, s) in seps.iter().enumerate() {
        for v in s.far_interior() {
            part[v] = Some(j);
        }
    }
    let mut new_of_old = vec![None; n];
    let mut old_of_new = Vec::new();
    for v in 0..n {
        if part[v].is_none() {
            new_of_old[v] = Some(old_of_new.len());
            old_of_new.push(Some(v));
        }
    }
    let mut parts = Vec::new();
    for s in seps {
        parts.push(ContractedPart {
            c: old_of_new.len(),
            sep: s.clone(),
            exits_collapsed: s.plus == Side::A,
        });
        old_of_new.push(None);
    }
    let rep = |v: Vertex| match part[v] {
        Some(j) => parts[j].c,
        None => new_of_old[v].unwrap(),
    };
    let mut reduced = DiGraph::new(old_of_new.len());
    let mut lambda = vec![None; g.m()];
    let mut origin = Vec::new();
    let mut collapsed: HashMap<(Vertex, Vertex), ArcId> = HashMap::new();
    for (a, &(x, y)) in g.arcs().iter().enumerate() {
        let (rx, ry) = (rep(x), rep(y));
        if rx == ry {
            continue;
        }
        let exit_side = part[x].filter(|&j| parts[j].exits_collapsed);
        let entry_side = part[y].filter(|&j| !parts[j].exits_collapsed);
        let id = match exit_side.or(entry_side) {
            Some(j) => *collapsed.entry((rx, ry)).or_insert_with(|| {
                origin.push(ArcOrigin::Collapsed { part: j });
                reduced.add_arc(rx, ry).expect("reduced arc is valid")
            }),
            None => {
                origin.push(ArcOrigin::Original(a));
                reduced.add_arc(rx, ry).expect("reduced arc is valid")
            }
        };
        lambda[a] = Some(id);
    }
    Ok(SReduction {
        reduced,
        parts,
        lambda,
        origin,
        new_of_old,
        old_of_new,
    })
}

/// Feasible routings of one fresh vertex, each with its realization: for
/// every traversal (aligned with the sorted routing) the original arcs from
/// the entry arc through the far interior to the exit arc.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoutingTable {
    pub routings: BTreeMap<Routing, Vec<Vec<ArcId>>>,
}

/// The routing realized by every multiset of at most four traversals.
///
/// A traversal enters the far interior through one specific arc and leaves
/// towards one separator vertex (or the mirror image when the entries are
/// collapsed). Single traversals and pairs need a connecting path each,
/// larger multisets a congestion-2 linkage from the entry heads to the
/// separator vertices, found by the two-sink solvers.
pub fn compute_feasible_routings(g: &DiGraph, red: &SReduction, j: usize) -> RoutingTable {
    let p = &red.parts[j];
    // Work in the orientation where the exits are collapsed.
    let h = if p.exits_collapsed { g.clone() } else { g.reverse() };
    let far = p.sep.far_interior();
    let far_mask = mask(g.n(), &far);
    let seps = p.sep.separator();
    let entries: Vec<ArcId> = (0..h.m())
        .filter(|&a| far_mask[h.head(a)] && !far_mask[h.tail(a)])
        .collect();
    // The far interior plus the separator, with only arcs out of the far interior.
    let mut keep = far_mask.clone();
    for &u in &seps {
        keep[u] = true;
    }
    let mut d = DiGraph::new(g.n());
    let mut d_arc = Vec::new();
    for (a, &(x, y)) in h.arcs().iter().enumerate() {
        if far_mask[x] && keep[y] {
            d.add_arc(x, y).expect("far arc is valid");
            d_arc.push(a);
        }
    }
    let banned: Vec<bool> = keep.iter().map(|&k| !k).collect();
    let reach: Vec<Vec<bool>> = seps.iter().map(|&u| coreachable(&d, &[u], &banned)).collect();
    let mut types: Vec<(ArcId, usize)> = Vec::new();
    for &e in &entries {
        for (i, r) in reach.iter().enumerate() {
            if r[h.head(e)] {
                types.push((e, i));
            }
        }
    }
    // Reduced traversal of each type, in the orientation of `g`.
    let collapsed: Vec<Option<ArcId>> = seps
        .iter()
        .map(|&u| {
            let ru = red.new_of_old[u].expect("separator survives");
            let arcs = if p.exits_collapsed {
                red.reduced.out_arcs(p.c)
            } else {
                red.reduced.in_arcs(p.c)
            };
            arcs.iter()
                .copied()
                .find(|&a| if p.exits_collapsed { red.reduced.head(a) == ru } else { red.reduced.tail(a) == ru })
        })
        .collect();
    let pair_of = |&(e, i): &(ArcId, usize)| -> ArcPair {
        let lam = red.lambda[e].expect("entry arcs survive");
        let col = collapsed[i].expect("a reachable separator vertex has a collapsed arc");
        if p.exits_collapsed {
            (lam, col)
        } else {
            (col, lam)
        }
    };
    let realize = |combo: &[usize]| -> Option<Vec<Vec<ArcId>>> {
        let mut use_w: HashMap<Vertex, usize> = HashMap::new();
        let mut use_u = [0usize; 2];
        for &t in combo {
            let (e, i) = types[t];
            *use_w.entry(h.head(e)).or_default() += 1;
            use_u[i] += 1;
        }
        if use_w.values().any(|&c| c > 2) || use_u.iter().any(|&c| c > 2) {
            return None;
        }
        let inner: Vec<Path> = if combo.len() <= 2 {
            combo
                .iter()
                .map(|&t| bfs_path(&d, h.head(types[t].0), seps[types[t].1], &banned))
                .collect::<Option<_>>()?
        } else {
            let pairs = combo.iter().map(|&t| (h.head(types[t].0), seps[types[t].1])).collect();
            let kinst = KstcInstance::from_instance(&Instance::new(d.clone(), pairs, 2)).expect("sources and sinks are disjoint");
            match solve_special(&kinst).expect("two sinks and at most two paths per terminal fit a solver").answer {
                SpecialAnswer::Yes(l) => l.paths,
                SpecialAnswer::No => return None,
            }
        };
        Some(
            combo
                .iter()
                .zip(inner)
                .map(|(&t, q)| {
                    let mut arcs = vec![types[t].0];
                    arcs.extend(q.arcs.iter().map(|&a| d_arc[a]));
                    if !p.exits_collapsed {
                        arcs.reverse();
                    }
                    arcs
                })
                .collect(),
        )
    };
    let mut table = RoutingTable::default();
    let mut feasible: HashSet<Vec<usize>> = HashSet::new();
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for size in 1..=4 {
        let mut next = Vec::new();
        for base in &layer {
            let from = base.last().copied().unwrap_or(0);
            for t in from..types.len() {
                let mut combo = base.clone();
                combo.push(t);
                let subs_ok = size <= 2
                    || (0..size).all(|skip| {
                        let sub: Vec<usize> = combo.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect();
                        feasible.contains(&sub)
                    });
                if !subs_ok {
                    continue;
                }
                if let Some(real) = realize(&combo) {
                    let mut items: Vec<(ArcPair, Vec<ArcId>)> = combo.iter().map(|t| pair_of(&types[*t])).zip(real).collect();
                    items.sort_by(|a, b| a.0.cmp(&b.0));
                    let routing: Routing = items.iter().map(|x| x.0).collect();
                    table.routings.entry(routing).or_insert_with(|| items.into_iter().map(|x| x.1).collect());
                    feasible.insert(combo.clone());
                    next.push(combo);
                }
            }
        }
        layer = next;
    }
    table
}

/// The big-vertex specification of a reduction with bound 4.
pub fn big_vertex_spec(red: &SReduction, tables: &[RoutingTable]) -> BigVertexSpec {
    let mut spec = BigVertexSpec::none(4);
    for (p, t) in red.parts.iter().zip(tables) {
        spec.routings.insert(p.c, t.routings.keys().cloned().collect::<BTreeSet<_>>());
    }
    spec
}

/// Replaces every pass through a fresh vertex by its stored realization and
/// erases loops.
pub fn lift_reduced(g: &DiGraph, red: &SReduction, tables: &[RoutingTable], walks: &[Path]) -> Result<Linkage, String> {
    // Hand out the realizations of each part's routing one traversal at a time.
    let mut pools: Vec<Vec<(ArcPair, Vec<ArcId>)>> = Vec::with_capacity(red.parts.len());
    for (j, p) in red.parts.iter().enumerate() {
        let routing = crate::dp::routing_of(walks, p.c);
        if routing.is_empty() {
            pools.push(Vec::new());
            continue;
        }
        let real = tables[j]
            .routings
            .get(&routing)
            .ok_or_else(|| format!("routing {routing:?} of part {j} is not feasible"))?;
        pools.push(routing.into_iter().zip(real.iter().cloned()).collect());
    }
    let mut paths = Vec::with_capacity(walks.len());
    for w in walks {
        let mut taken: Vec<Option<Vec<ArcId>>> = vec![None; w.vertices.len()];
        for i in 1..w.vertices.len().saturating_sub(1) {
            if let Some(j) = red.part_of(w.vertices[i]) {
                let pair = (w.arcs[i - 1], w.arcs[i]);
                let pos = pools[j].iter().position(|x| x.0 == pair).ok_or("traversal without realization")?;
                taken[i] = Some(pools[j].swap_remove(pos).1);
            }
        }
        let mut arcs: Vec<ArcId> = Vec::new();
        for (i, &a) in w.arcs.iter().enumerate() {
            let orig = match red.origin[a] {
                ArcOrigin::Original(o) => o,
                ArcOrigin::Collapsed { .. } => {
                    if let Some(seq) = &taken[i] {
                        *seq.last().unwrap()
                    } else if let Some(seq) = taken.get(i + 1).and_then(|x| x.as_ref()) {
                        seq[0]
                    } else {
                        return Err("collapsed arc at an end of a walk".into());
                    }
                }
            };
            if let Some(seq) = &taken[i] {
                if arcs.last() != Some(&seq[0]) || seq.last() != Some(&orig) {
                    return Err("realization does not match its traversal".into());
                }
                arcs.extend_from_slice(&seq[1..seq.len() - 1]);
            }
            arcs.push(orig);
        }
        let start = red.old_of_new[w.first()].ok_or("walk starts at a fresh vertex")?;
        paths.push(Path::from_arcs(g, start, &arcs).loop_erased());
    }
    Ok(Linkage { paths })
}

/// Text form of a reduction with its routing tables.
pub fn serialize_reduction(red: &SReduction, tables: &[RoutingTable]) -> String {
    let mut s = String::new();
    let g = &red.reduced;
    writeln!(s, "reduced {} {}", g.n(), g.m()).unwrap();
    for (a, &(x, y)) in g.arcs().iter().enumerate() {
        writeln!(s, "arc {a} {x} {y}").unwrap();
    }
    for (j, (p, t)) in red.parts.iter().zip(tables).enumerate() {
        let sep = p.sep.separator();
        let side = if p.exits_collapsed { "out" } else { "in" };
        writeln!(s, "part {j} vertex {} separator {} {} collapsed {side} routings {}", p.c, sep[0], sep[1], t.routings.len()).unwrap();
        let far: Vec<String> = p.sep.far_interior().iter().map(|v| v.to_string()).collect();
        writeln!(s, "far {}", far.join(" ")).unwrap();
        for r in t.routings.keys() {
            let items: Vec<String> = r.iter().map(|(e, f)| format!("{e}>{f}")).collect();
            writeln!(s, "routing {}", items.join(" ")).unwrap();
        }
    }
    for (a, l) in red.lambda.iter().enumerate() {
        if let Some(r) = l {
            writeln!(s, "lambda {a} {r}").unwrap();
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineAnswer {
    Yes(Linkage),
    No,
    Inconclusive(String),
}

/// The answer with the sizes of the intermediate instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineReport {
    pub answer: PipelineAnswer,
    pub one_seps: usize,
    pub separations: usize,
    pub reduced_n: usize,
    pub width: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("expected congestion 2 and at most 3 pairs, got c = {c}, k = {k}")]
    Shape { c: usize, k: usize },
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Dp(DpError),
    #[error("lifting failed: {0}")]
    Lift(String),
    #[error("lifted linkage is invalid: {0}")]
    Invalid(#[from] Violation),
}

/// The full reduction of a normalized, pruned instance.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub elim: OneSepElimination,
    pub red: SReduction,
    pub tables: Vec<RoutingTable>,
    pub inst: Instance,
}

/// Eliminates order-one separations, then contracts a compatible family of
/// order-two separations and computes their routing tables.
pub fn reduce(inst: &Instance, cfg: &PipelineConfig) -> Result<Reduction, PipelineError> {
    let elim = eliminate_1seps(inst);
    let g = &elim.inst.g;
    let terminals = elim.inst.terminals();
    let candidates = enumerate_2separations(g, &terminals);
    let family = select_family(g, &candidates, &terminals, cfg.min_far);
    let red = s_reduce(g, &family, &terminals)?;
    let tables: Vec<RoutingTable> = (0..red.parts.len())
        .into_par_iter()
        .map(|j| compute_feasible_routings(g, &red, j))
        .collect();
    let pairs = elim
        .inst
        .pairs
        .iter()
        .map(|&(s, t)| (red.new_of_old[s].unwrap(), red.new_of_old[t].unwrap()))
        .collect();
    let reduced = Instance::new(red.reduced.clone(), pairs, elim.inst.c);
    Ok(Reduction {
        elim,
        red,
        tables,
        inst: reduced,
    })
}

/// Decides three-pair routing with congestion 2.
///
/// Returns `Inconclusive` when the reduced graph has no decomposition with
/// bags of at most `cfg.kmax` vertices or the dynamic program exceeds its
/// state budget. Every `Yes` carries a linkage verified in `inst`.
pub fn solve_3hi(inst: &Instance, cfg: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    if inst.c != 2 || inst.k() > 3 {
        return Err(PipelineError::Shape { c: inst.c, k: inst.k() });
    }
    let mut report = PipelineReport {
        answer: PipelineAnswer::No,
        one_seps: 0,
        separations: 0,
        reduced_n: 0,
        width: None,
    };
    let norm = normalize(inst);
    let Some(pruned) = prune_useless(&norm) else {
        return Ok(report);
    };
    let r = reduce(&pruned.inst, cfg)?;
    report.one_seps = r.elim.contractions();
    report.separations = r.red.parts.len();
    report.reduced_n = r.inst.g.n();
    let d = match decompose_with_root(&r.inst.g, &r.inst.terminals(), cfg.kmax) {
        DecompOutcome::Decomposition(d) => d,
        DecompOutcome::Certificate(c) => {
            report.answer = PipelineAnswer::Inconclusive(format!("no decomposition with bags of at most {} vertices", c.kmax));
            return Ok(report);
        }
    };
    report.width = Some(width(&d).width);
    let spec = big_vertex_spec(&r.red, &r.tables);
    report.answer = match solve_bounded_dtw(&r.inst, &spec, &d, cfg.dp) {
        Ok(DtwAnswer::No) => PipelineAnswer::No,
        Ok(DtwAnswer::Yes(l)) => {
            let lifted = lift_reduced(&r.elim.inst.g, &r.red, &r.tables, &l.paths).map_err(PipelineError::Lift)?;
            let l = denormalize_linkage(&pruned.lift(&r.elim.lift(&lifted)));
            verify_linkage(inst, &l)?;
            PipelineAnswer::Yes(l)
        }
        Err(DpError::StateBudget(b)) => PipelineAnswer::Inconclusive(format!("a table exceeded {b} entries")),
        Err(e) => return Err(PipelineError::Dp(e)),
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_force_solve, OracleAnswer, SearchBudget};

    #[test]
    fn pendant_blob_is_contracted() {
        // s=0 -> 1 -> t=2, and 1 -> 3 -> 4 -> 1 hangs off vertex 1.
        let g = DiGraph::from_arcs(5, &[(0, 1), (1, 2), (1, 3), (3, 4), (4, 1)]).unwrap();
        let inst = Instance::new(g, vec![(0, 2)], 2);
        let e = eliminate_1seps(&inst);
        assert_eq!(e.contractions(), 1);
        assert_eq!(e.inst.g.n(), 3);
        let s = find_1separation(&inst.g, &inst.terminals()).unwrap();
        assert_eq!(s.far_interior(), vec![3, 4]);
        assert!(find_1separation(&e.inst.g, &e.inst.terminals()).is_none());
    }

    #[test]
    fn lifting_through_a_contraction_routes_inside() {
        // s=0 -> 2 -> 3 -> 1 where {2, 3} only leaves through 1; t=4.
        let g = DiGraph::from_arcs(5, &[(0, 2), (2, 3), (3, 1), (1, 4), (0, 1)]).unwrap();
        let inst = Instance::new(g, vec![(0, 4)], 2);
        let e = eliminate_1seps(&inst);
        assert_eq!(e.inst.g.n(), 3);
        // The reduced graph has two parallel arcs 0 -> 1; take the one from 0 -> 2.
        let first = e.inst.g.out_arcs(0)[0];
        let p = Path::from_arcs(&e.inst.g, 0, &[first, e.inst.g.out_arcs(1)[0]]);
        let l = e.lift(&Linkage { paths: vec![p] });
        assert_eq!(l.paths[0].vertices, vec![0, 2, 3, 1, 4]);
    }

    #[test]
    fn complete_bidirected_graph_has_no_small_separation() {
        let mut arcs = Vec::new();
        for u in 0..5 {
            for v in 0..5 {
                if u != v {
                    arcs.push((u, v));
                }
            }
        }
        let g = DiGraph::from_arcs(5, &arcs).unwrap();
        assert!(enumerate_2separations(&g, &[0, 1]).is_empty());
    }

    /// Terminals 0 -> 1 and 2 -> 3 around the separator {4, 5} with the far
    /// interior {6, 7, 8}.
    fn two_cut() -> (DiGraph, Vec<Vertex>) {
        let arcs = [(0, 4), (0, 6), (2, 5), (6, 7), (7, 8), (8, 4), (8, 5), (6, 5), (4, 1), (5, 3), (2, 7)];
        (DiGraph::from_arcs(9, &arcs).unwrap(), vec![0, 1, 2, 3])
    }

    #[test]
    fn single_separation_gives_one_fresh_vertex() {
        let (g, terms) = two_cut();
        let seps = enumerate_2separations(&g, &terms);
        assert!(seps.iter().all(|s| s.validate(&g).is_ok()));
        let s = seps.iter().find(|s| s.far_interior() == vec![6, 7, 8]).expect("interface separation").clone();
        let red = s_reduce(&g, &[s], &terms).unwrap();
        assert_eq!(red.parts.len(), 1);
        red.check_degree_pattern().unwrap();
        let c = red.parts[0].c;
        assert_eq!(red.reduced.out_degree(c), 2);
        assert_eq!(red.reduced.in_degree(c), 2);
        let empty = s_reduce(&g, &[], &terms).unwrap();
        assert_eq!(empty.reduced, g);
    }

    #[test]
    fn routing_table_matches_paths() {
        let (g, terms) = two_cut();
        let s = Separation::new(&g, &[0, 1, 2, 3, 4, 5], &[4, 5, 6, 7, 8], Side::A).unwrap();
        let red = s_reduce(&g, &[s], &terms).unwrap();
        let t = compute_feasible_routings(&g, &red, 0);
        // Entries: 0 -> 6 and 2 -> 7; 6 reaches both separator vertices, 7 both.
        let singles = t.routings.keys().filter(|r| r.len() == 1).count();
        assert_eq!(singles, 4);
        for (r, real) in &t.routings {
            assert_eq!(r.len(), real.len());
            for seq in real {
                let p = Path::from_arcs(&g, g.tail(seq[0]), seq);
                assert!(p.vertices[1..p.vertices.len() - 1].iter().all(|v| [6, 7, 8].contains(v)));
            }
        }
    }

    #[test]
    fn pipeline_agrees_on_the_two_cut() {
        let (g, _) = two_cut();
        let inst = Instance::new(g, vec![(0, 1), (2, 3)], 2);
        let rep = solve_3hi(&inst, &PipelineConfig::default()).unwrap();
        let oracle = brute_force_solve(&inst, SearchBudget::default()).answer;
        match (&rep.answer, &oracle) {
            (PipelineAnswer::Yes(l), OracleAnswer::Yes(_)) => verify_linkage(&inst, l).unwrap(),
            (PipelineAnswer::No, OracleAnswer::No) => {}
            other => panic!("disagreement {other:?}"),
        }
    }
}
