//! Exhaustive reference solvers for small instances.

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use crate::dp::{BigVertexSpec, BoundarySet, Routing};
use crate::graph::{reachable, verify_linkage, ArcId, DiGraph, Instance, Linkage, Path, Vertex};

/// Limits for an exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: 50_000_000,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleAnswer {
    Yes(Linkage),
    No,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutcome {
    pub answer: OracleAnswer,
    pub nodes: u64,
}

struct Brute<'a> {
    inst: &'a Instance,
    usage: Vec<usize>,
    on_path: Vec<bool>,
    paths: Vec<Path>,
    nodes: u64,
    budget: SearchBudget,
    start: Instant,
    prune: bool,
    timed_out: bool,
}

impl<'a> Brute<'a> {
    fn out_of_budget(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            self.timed_out = true;
        }
        if self.nodes % 4096 == 0 {
            if let Some(limit) = self.budget.time_limit {
                if self.start.elapsed() > limit {
                    self.timed_out = true;
                }
            }
        }
        self.timed_out
    }

    /// Every unfinished path can still reach its sink through unsaturated vertices.
    fn feasible(&self, i: usize, v: Vertex) -> bool {
        let c = self.inst.c;
        let g = &self.inst.g;
        let mut banned: Vec<bool> = (0..g.n()).map(|x| self.usage[x] >= c || self.on_path[x]).collect();
        banned[v] = false;
        if !reachable(g, &[v], &banned)[self.inst.pairs[i].1] {
            return false;
        }
        let saturated: Vec<bool> = (0..g.n()).map(|x| self.usage[x] >= c).collect();
        self.inst.pairs[i + 1..]
            .iter()
            .all(|&(s, t)| reachable(g, &[s], &saturated)[t])
    }

    fn start_path(&mut self, i: usize) -> bool {
        if i == self.inst.k() {
            return true;
        }
        let s = self.inst.pairs[i].0;
        if self.usage[s] >= self.inst.c {
            return false;
        }
        self.usage[s] += 1;
        self.on_path[s] = true;
        let mut p = Path::trivial(s);
        let found = self.extend(i, &mut p);
        self.on_path[s] = false;
        if !found {
            self.usage[s] -= 1;
        }
        found
    }

    fn extend(&mut self, i: usize, p: &mut Path) -> bool {
        if self.out_of_budget() {
            return false;
        }
        let v = p.last();
        let g = &self.inst.g;
        if v == self.inst.pairs[i].1 {
            for &x in &p.vertices {
                self.on_path[x] = false;
            }
            self.paths.push(p.clone());
            if self.start_path(i + 1) {
                return true;
            }
            self.paths.pop();
            for &x in &p.vertices {
                self.on_path[x] = true;
            }
            return false;
        }
        if self.prune && !self.feasible(i, v) {
            return false;
        }
        let arcs = g.out_arcs(v);
        for (idx, &a) in arcs.iter().enumerate() {
            let w = g.head(a);
            if self.on_path[w] || self.usage[w] >= self.inst.c || arcs[..idx].iter().any(|&b| g.head(b) == w) {
                continue;
            }
            self.usage[w] += 1;
            self.on_path[w] = true;
            p.vertices.push(w);
            p.arcs.push(a);
            if self.extend(i, p) {
                return true;
            }
            p.vertices.pop();
            p.arcs.pop();
            self.on_path[w] = false;
            self.usage[w] -= 1;
            if self.timed_out {
                return false;
            }
        }
        false
    }
}

/// Depth-first search over paths in pair order, each extended by its
/// lowest-id arc first, pruning once some remaining sink is cut off by
/// saturated vertices.
pub fn brute_force_solve(inst: &Instance, budget: SearchBudget) -> OracleOutcome {
    brute_force_solve_with(inst, budget, true)
}

pub fn brute_force_solve_with(inst: &Instance, budget: SearchBudget, prune: bool) -> OracleOutcome {
    let n = inst.g.n();
    let mut b = Brute {
        inst,
        usage: vec![0; n],
        on_path: vec![false; n],
        paths: Vec::new(),
        nodes: 0,
        budget,
        start: Instant::now(),
        prune,
        timed_out: false,
    };
    let found = b.start_path(0);
    let answer = if found {
        let l = Linkage { paths: b.paths };
        verify_linkage(inst, &l).expect("search only builds valid linkages");
        OracleAnswer::Yes(l)
    } else if b.timed_out {
        OracleAnswer::Timeout
    } else {
        OracleAnswer::No
    };
    OracleOutcome { answer, nodes: b.nodes }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct FragState {
    visits: Vec<usize>,
    routings: Vec<Routing>,
    bound: Vec<(ArcId, ArcId)>,
    open: Option<(ArcId, ArcId)>,
}

struct BoundSearch<'a> {
    g: &'a DiGraph,
    inside: Vec<bool>,
    big_index: Vec<Option<usize>>,
    tables: Vec<&'a BTreeSet<Routing>>,
    c: usize,
    cap: usize,
    seen: HashSet<FragState>,
    out: BTreeSet<BoundarySet>,
}

fn sub_multiset(small: &[(ArcId, ArcId)], big: &[(ArcId, ArcId)]) -> bool {
    let mut j = 0;
    for x in small {
        while j < big.len() && big[j] < *x {
            j += 1;
        }
        if j == big.len() || big[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

impl<'a> BoundSearch<'a> {
    fn enter(&self, st: &mut FragState, w: Vertex) -> bool {
        match self.big_index[w] {
            Some(_) => true,
            None if st.visits[w] < self.c => {
                st.visits[w] += 1;
                true
            }
            None => false,
        }
    }

    fn traverse(&self, st: &mut FragState, v: Vertex, pair: (ArcId, ArcId)) -> bool {
        let Some(bi) = self.big_index[v] else { return true };
        let r = &mut st.routings[bi];
        r.push(pair);
        r.sort_unstable();
        self.tables[bi].iter().any(|f| sub_multiset(r, f))
    }

    fn explore(&mut self, st: FragState) {
        if !self.seen.insert(st.clone()) {
            return;
        }
        let g = self.g;
        match st.open {
            None => {
                let complete = st
                    .routings
                    .iter()
                    .zip(&self.tables)
                    .all(|(r, t)| r.is_empty() || t.contains(r));
                if complete {
                    self.out.insert(BoundarySet::new(st.bound.clone()));
                }
                if st.bound.len() == self.cap {
                    return;
                }
                for (a, &(u, w)) in g.arcs().iter().enumerate() {
                    if self.inside[u] || !self.inside[w] {
                        continue;
                    }
                    let mut next = st.clone();
                    if self.enter(&mut next, w) {
                        next.open = Some((a, a));
                        self.explore(next);
                    }
                }
            }
            Some((e, last)) => {
                let v = g.head(last);
                for &f in g.out_arcs(v) {
                    let mut next = st.clone();
                    if !self.traverse(&mut next, v, (last, f)) {
                        continue;
                    }
                    let w = g.head(f);
                    if !self.inside[w] {
                        next.bound.push((e, f));
                        next.bound.sort_unstable();
                        next.open = None;
                        self.explore(next);
                    } else if self.enter(&mut next, w) {
                        next.open = Some((e, f));
                        self.explore(next);
                    }
                }
            }
        }
    }
}

/// All boundary sets with at most `cap` pairs of admissible fragment
/// families inside `s`, enumerated one arc at a time.
pub fn brute_force_bound_set(g: &DiGraph, s: &[Vertex], spec: &BigVertexSpec, c: usize, cap: usize) -> BTreeSet<BoundarySet> {
    let mut inside = vec![false; g.n()];
    for &v in s {
        inside[v] = true;
    }
    let mut big_index = vec![None; g.n()];
    let mut tables = Vec::new();
    for (&u, set) in &spec.routings {
        if inside[u] {
            big_index[u] = Some(tables.len());
            tables.push(set);
        }
    }
    let mut search = BoundSearch {
        g,
        inside,
        big_index,
        c,
        cap,
        seen: HashSet::new(),
        out: BTreeSet::new(),
        tables,
    };
    let start = FragState {
        visits: vec![0; g.n()],
        routings: vec![Vec::new(); search.tables.len()],
        bound: Vec::new(),
        open: None,
    };
    search.explore(start);
    search.out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: usize, arcs: &[(Vertex, Vertex)], pairs: &[(Vertex, Vertex)], c: usize) -> Instance {
        Instance::new(DiGraph::from_arcs(n, arcs).unwrap(), pairs.to_vec(), c)
    }

    #[test]
    fn path_graph_is_solvable() {
        let i = inst(3, &[(0, 1), (1, 2)], &[(0, 2)], 1);
        assert!(matches!(brute_force_solve(&i, SearchBudget::default()).answer, OracleAnswer::Yes(_)));
    }

    #[test]
    fn shared_vertex_needs_congestion_two() {
        // s1=0, s2=1 -> m=2 -> t1=3, t2=4
        let arcs = [(0, 2), (1, 2), (2, 3), (2, 4)];
        let one = inst(5, &arcs, &[(0, 3), (1, 4)], 1);
        assert_eq!(brute_force_solve(&one, SearchBudget::default()).answer, OracleAnswer::No);
        let two = inst(5, &arcs, &[(0, 3), (1, 4)], 2);
        assert!(matches!(brute_force_solve(&two, SearchBudget::default()).answer, OracleAnswer::Yes(_)));
    }

    #[test]
    fn tiny_budget_times_out() {
        let arcs = [(0, 2), (1, 2), (2, 3), (2, 4)];
        let i = inst(5, &arcs, &[(0, 3), (1, 4)], 1);
        let b = SearchBudget {
            max_nodes: 1,
            time_limit: None,
        };
        assert_eq!(brute_force_solve(&i, b).answer, OracleAnswer::Timeout);
    }

    #[test]
    fn bound_set_examples() {
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let none = BigVertexSpec::none(4);
        assert_eq!(brute_force_bound_set(&g, &[], &none, 2, 10), BTreeSet::from([BoundarySet::default()]));
        let got = brute_force_bound_set(&g, &[1], &none, 1, 10);
        assert_eq!(got, BTreeSet::from([BoundarySet::default(), BoundarySet::new(vec![(0, 1)])]));
    }
}
