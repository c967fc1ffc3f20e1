//! Directed tree-decompositions: model, validity and niceness checks, width,
//! a text format, and a search-based construction.
//!
//! Decomposition files list one node per line, root first:
//!
//! ```text
//! node <id> bag <v...>
//! edge <parent> <child> guard <v...>
//! ```
//!
//! Vertices are 1-based as in instance files.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::format::ParseError;
use crate::graph::{bfs_path, coreachable, reachable, scc_restricted, DiGraph, Vertex};

/// An arborescence of nodes with bags, and a guard on every tree edge.
///
/// `guards[t]` is the guard of the edge entering `t` (empty for the root).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub bags: Vec<Vec<Vertex>>,
    pub guards: Vec<Vec<Vertex>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error("vertex {0} lies in no bag or in several bags")]
    NotPartition(Vertex),
    #[error("walk {walk:?} leaves and re-enters the subtree below node {child} avoiding its guard")]
    GuardViolated { child: usize, walk: Vec<Vertex> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NiceViolation {
    #[error("subtree below node {0} is not a strong component of the graph minus its guard")]
    NotComponent(usize),
    #[error("a child bag of node {node} meets a guard incident to it at vertex {vertex}")]
    ChildBagMeetsGuard { node: usize, vertex: Vertex },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WidthReport {
    pub width: usize,
    pub node: usize,
}

fn sorted(mut v: Vec<Vertex>) -> Vec<Vertex> {
    v.sort_unstable();
    v.dedup();
    v
}

fn mask(n: usize, set: &[Vertex]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

impl Decomposition {
    pub fn new(root_bag: Vec<Vertex>) -> Self {
        Decomposition {
            root: 0,
            parent: vec![None],
            children: vec![Vec::new()],
            bags: vec![sorted(root_bag)],
            guards: vec![Vec::new()],
        }
    }

    pub fn add_child(&mut self, parent: usize, bag: Vec<Vertex>, guard: Vec<Vertex>) -> usize {
        let t = self.bags.len();
        self.parent.push(Some(parent));
        self.children.push(Vec::new());
        self.bags.push(sorted(bag));
        self.guards.push(sorted(guard));
        self.children[parent].push(t);
        t
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    /// Nodes in preorder from the root.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(t) = stack.pop() {
            out.push(t);
            stack.extend(self.children[t].iter().rev());
        }
        out
    }

    /// `β(T_t)`: all bag vertices in the subtree rooted at `t`, sorted.
    pub fn subtree_vertices(&self, t: usize) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut stack = vec![t];
        while let Some(x) = stack.pop() {
            out.extend(&self.bags[x]);
            stack.extend(&self.children[x]);
        }
        sorted(out)
    }

    /// `Γ(t)`: the bag together with the guards of all incident tree edges.
    pub fn gamma(&self, t: usize) -> Vec<Vertex> {
        let mut out = self.bags[t].clone();
        out.extend(&self.guards[t]);
        for &c in &self.children[t] {
            out.extend(&self.guards[c]);
        }
        sorted(out)
    }

    fn check_tree(&self) -> Result<(), DecompositionError> {
        let bad = |m: &str| Err(DecompositionError::Malformed(m.to_string()));
        let n = self.len();
        if n == 0 || self.parent.len() != n || self.children.len() != n || self.guards.len() != n {
            return bad("inconsistent node tables");
        }
        if self.root >= n || self.parent[self.root].is_some() {
            return bad("root must exist and have no parent");
        }
        for t in 0..n {
            if t != self.root {
                match self.parent[t] {
                    Some(p) if p < n && self.children[p].contains(&t) => {}
                    _ => return bad("non-root node without a consistent parent"),
                }
            }
        }
        if self.preorder().len() != n {
            return bad("not every node is reachable from the root");
        }
        Ok(())
    }
}

pub fn check_decomposition(g: &DiGraph, d: &Decomposition) -> Result<(), DecompositionError> {
    d.check_tree()?;
    let mut owner = vec![0usize; g.n()];
    for bag in &d.bags {
        for &v in bag {
            if v >= g.n() {
                return Err(DecompositionError::Malformed(format!("vertex {v} out of range")));
            }
            owner[v] += 1;
        }
    }
    if let Some(v) = (0..g.n()).find(|&v| owner[v] != 1) {
        return Err(DecompositionError::NotPartition(v));
    }
    for t in 0..d.len() {
        if t == d.root {
            continue;
        }
        let sub = d.subtree_vertices(t);
        let in_sub = mask(g.n(), &sub);
        let banned = mask(g.n(), &d.guards[t]);
        let fwd = reachable(g, &sub, &banned);
        let bwd = coreachable(g, &sub, &banned);
        if let Some(x) = (0..g.n()).find(|&x| !in_sub[x] && fwd[x] && bwd[x]) {
            let out = sub.iter().find_map(|&s| bfs_path(g, s, x, &banned)).expect("x is reachable");
            let back = sub.iter().find_map(|&s| bfs_path(g, x, s, &banned)).expect("x reaches back");
            let mut walk = out.vertices;
            walk.extend(&back.vertices[1..]);
            return Err(DecompositionError::GuardViolated { child: t, walk });
        }
    }
    Ok(())
}

/// Whether `comp` is a strong component of `g` minus `banned`.
fn is_component(g: &DiGraph, comp: &[Vertex], banned: &[bool]) -> bool {
    if comp.is_empty() || comp.iter().any(|&v| banned[v]) {
        return false;
    }
    let inside = mask(g.n(), comp);
    let fwd = reachable(g, &comp[..1], banned);
    let bwd = coreachable(g, &comp[..1], banned);
    (0..g.n()).all(|v| (fwd[v] && bwd[v]) == inside[v])
}

pub fn check_nice(g: &DiGraph, d: &Decomposition) -> Result<(), NiceViolation> {
    for t in 0..d.len() {
        if t != d.root && !is_component(g, &d.subtree_vertices(t), &mask(g.n(), &d.guards[t])) {
            return Err(NiceViolation::NotComponent(t));
        }
        let mut guard: Vec<Vertex> = d.guards[t].clone();
        for &c in &d.children[t] {
            guard.extend(&d.guards[c]);
        }
        let guard = mask(g.n(), &guard);
        for &c in &d.children[t] {
            if let Some(&v) = d.bags[c].iter().find(|&&v| guard[v]) {
                return Err(NiceViolation::ChildBagMeetsGuard { node: t, vertex: v });
            }
        }
    }
    Ok(())
}

pub fn width(d: &Decomposition) -> WidthReport {
    (0..d.len())
        .map(|t| WidthReport {
            width: d.gamma(t).len(),
            node: t,
        })
        .max_by_key(|r| (r.width, std::cmp::Reverse(r.node)))
        .expect("decompositions have a root")
}

/// A region the search could not split: a strong component of the graph
/// minus `guard` for which no bag of at most `kmax` vertices leaves pieces
/// guardable by at most `2 * kmax - 1` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub kmax: usize,
    pub region: Vec<Vertex>,
    pub guard: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompOutcome {
    Decomposition(Decomposition),
    Certificate(Certificate),
}

enum Sub {
    Leaf(Vec<Vertex>),
    Inner(Vec<Vertex>, Vec<(Vec<Vertex>, Sub)>),
}

struct Search<'g> {
    g: &'g DiGraph,
    k: usize,
    failed: HashSet<(Vec<Vertex>, Vec<Vertex>)>,
    stuck: Option<(Vec<Vertex>, Vec<Vertex>)>,
}

fn combinations(items: &[Vertex], size: usize, f: &mut dyn FnMut(&[Vertex]) -> bool) -> bool {
    fn go(items: &[Vertex], size: usize, start: usize, cur: &mut Vec<Vertex>, f: &mut dyn FnMut(&[Vertex]) -> bool) -> bool {
        if cur.len() == size {
            return f(cur);
        }
        for i in start..items.len() {
            if items.len() - i < size - cur.len() {
                break;
            }
            cur.push(items[i]);
            if go(items, size, i + 1, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    go(items, size, 0, &mut Vec::new(), f)
}

impl<'g> Search<'g> {
    /// Drops guard vertices in increasing order while `comp` stays a strong
    /// component of the graph minus the guard.
    fn minimize_guard(&self, comp: &[Vertex], candidates: &[Vertex]) -> Vec<Vertex> {
        let mut banned = mask(self.g.n(), candidates);
        for &v in candidates {
            banned[v] = false;
            if !is_component(self.g, comp, &banned) {
                banned[v] = true;
            }
        }
        candidates.iter().copied().filter(|&v| banned[v]).collect()
    }

    fn build(&mut self, region: &[Vertex], guard: &[Vertex]) -> Option<Sub> {
        let k = self.k;
        if region.len() == 1 || region.len() + guard.len() < 3 * k {
            return Some(Sub::Leaf(region.to_vec()));
        }
        let key = (region.to_vec(), guard.to_vec());
        if self.failed.contains(&key) {
            return None;
        }
        let n = self.g.n();
        let mut found = None;
        let mut locally_splittable = false;
        for size in 1..=k.min(region.len() - 1) {
            let done = combinations(region, size, &mut |z| {
                let mut banned = vec![true; n];
                for &v in region {
                    banned[v] = false;
                }
                for &v in z {
                    banned[v] = true;
                }
                let comps = scc_restricted(self.g, &banned);
                let mut candidates: Vec<Vertex> = guard.iter().chain(z).copied().collect();
                candidates.sort_unstable();
                let guards: Vec<Vec<Vertex>> = comps.iter().map(|c| self.minimize_guard(c, &candidates)).collect();
                if guards.iter().any(|gd| gd.len() > 2 * k - 1) {
                    return false;
                }
                locally_splittable = true;
                let mut kids = Vec::with_capacity(comps.len());
                for (c, gd) in comps.iter().zip(guards) {
                    match self.build(c, &gd) {
                        Some(s) => kids.push((gd, s)),
                        None => return false,
                    }
                }
                found = Some(Sub::Inner(z.to_vec(), kids));
                true
            });
            if done {
                return found;
            }
        }
        if !locally_splittable {
            self.stuck = Some(key.clone());
        }
        self.failed.insert(key);
        None
    }
}

fn attach(d: &mut Decomposition, parent: usize, guard: Vec<Vertex>, sub: Sub) {
    match sub {
        Sub::Leaf(bag) => {
            d.add_child(parent, bag, guard);
        }
        Sub::Inner(bag, kids) => {
            let t = d.add_child(parent, bag, guard);
            for (gd, s) in kids {
                attach(d, t, gd, s);
            }
        }
    }
}

fn into_root(sub: Sub) -> Decomposition {
    match sub {
        Sub::Leaf(bag) => Decomposition::new(bag),
        Sub::Inner(bag, kids) => {
            let mut d = Decomposition::new(bag);
            for (gd, s) in kids {
                attach(&mut d, 0, gd, s);
            }
            d
        }
    }
}

/// Searches for a nice decomposition of width at most `3 * kmax - 1`.
///
/// Each region (a strong component of the graph minus its guard) either
/// becomes a leaf bag or is split by the lexicographically first bag of at
/// most `kmax` vertices whose removal leaves strong components that can be
/// guarded by at most `2 * kmax - 1` vertices and decomposed recursively.
pub fn compute_decomposition(g: &DiGraph, kmax: usize) -> DecompOutcome {
    assert!(kmax >= 1, "kmax must be positive");
    let mut search = Search {
        g,
        k: kmax,
        failed: HashSet::new(),
        stuck: None,
    };
    let none = vec![false; g.n()];
    let comps = scc_restricted(g, &none);
    let all: Vec<Vertex> = (0..g.n()).collect();
    let built = if comps.len() == 1 {
        search.build(&all, &[]).map(into_root)
    } else {
        let mut d = Decomposition::new(Vec::new());
        let mut ok = true;
        for c in &comps {
            match search.build(c, &[]) {
                Some(sub) => attach(&mut d, 0, Vec::new(), sub),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        ok.then_some(d)
    };
    match built {
        Some(d) => DecompOutcome::Decomposition(d),
        None => {
            let (region, guard) = search.stuck.unwrap_or((all, Vec::new()));
            DecompOutcome::Certificate(Certificate { kmax, region, guard })
        }
    }
}

/// Tries `kmax = 1, 2, ...` up to `limit` and returns the first decomposition.
pub fn compute_smallest(g: &DiGraph, limit: usize) -> DecompOutcome {
    let mut last = None;
    for k in 1..=limit {
        match compute_decomposition(g, k) {
            DecompOutcome::Decomposition(d) => return DecompOutcome::Decomposition(d),
            cert => last = Some(cert),
        }
    }
    last.expect("limit must be positive")
}

/// Decomposes the graph minus `root` and adds `root` to the root bag.
///
/// Every vertex of `root` must be a source or a sink, so no walk passes
/// through it and the guards found without it remain valid.
pub fn decompose_with_root(g: &DiGraph, root: &[Vertex], limit: usize) -> DecompOutcome {
    debug_assert!(root.iter().all(|&v| g.in_degree(v) == 0 || g.out_degree(v) == 0));
    let keep: Vec<bool> = (0..g.n()).map(|v| !root.contains(&v)).collect();
    let sub = g.induced(&keep);
    let back = |vs: &[Vertex]| -> Vec<Vertex> { vs.iter().map(|&v| sub.old_of_new[v]).collect() };
    match compute_smallest(&sub.g, limit) {
        DecompOutcome::Certificate(c) => DecompOutcome::Certificate(Certificate {
            kmax: c.kmax,
            region: sorted(back(&c.region)),
            guard: sorted(back(&c.guard)),
        }),
        DecompOutcome::Decomposition(inner) => {
            let mut bag = back(&inner.bags[inner.root]);
            bag.extend(root);
            let mut d = Decomposition::new(bag);
            let mut stack: Vec<(usize, usize)> = inner.children[inner.root].iter().map(|&c| (c, d.root)).collect();
            while let Some((t, p)) = stack.pop() {
                let id = d.add_child(p, back(&inner.bags[t]), back(&inner.guards[t]));
                stack.extend(inner.children[t].iter().map(|&c| (c, id)));
            }
            DecompOutcome::Decomposition(d)
        }
    }
}

pub fn parse_decomposition(text: &str) -> Result<Decomposition, ParseError> {
    let err = |line: usize, msg: String| ParseError { line, msg };
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut pending: Vec<(usize, String, String, Vec<Vertex>)> = Vec::new();
    let mut bags: Vec<Vec<Vertex>> = Vec::new();
    let verts = |line: usize, toks: &[&str]| -> Result<Vec<Vertex>, ParseError> {
        toks.iter()
            .map(|t| match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(err(line, format!("invalid vertex `{t}`"))),
            })
            .collect()
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "node" => {
                if toks.len() < 3 || toks[2] != "bag" {
                    return Err(err(line, "expected `node <id> bag <v...>`".into()));
                }
                if ids.insert(toks[1].to_string(), bags.len()).is_some() {
                    return Err(err(line, format!("duplicate node `{}`", toks[1])));
                }
                bags.push(verts(line, &toks[3..])?);
            }
            "edge" => {
                if toks.len() < 4 || toks[3] != "guard" {
                    return Err(err(line, "expected `edge <parent> <child> guard <v...>`".into()));
                }
                pending.push((line, toks[1].to_string(), toks[2].to_string(), verts(line, &toks[4..])?));
            }
            other => return Err(err(line, format!("unknown line type `{other}`"))),
        }
    }
    if bags.is_empty() {
        return Err(err(0, "no nodes".into()));
    }
    let n = bags.len();
    let mut parent = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut guards = vec![Vec::new(); n];
    for (line, p, c, guard) in pending {
        let lookup = |name: &str| ids.get(name).copied().ok_or_else(|| err(line, format!("unknown node `{name}`")));
        let (p, c) = (lookup(&p)?, lookup(&c)?);
        if c == 0 || parent[c].is_some() {
            return Err(err(line, "every non-root node needs exactly one parent".into()));
        }
        parent[c] = Some(p);
        children[p].push(c);
        guards[c] = sorted(guard);
    }
    let dd = Decomposition {
        root: 0,
        parent,
        children,
        bags: bags.into_iter().map(sorted).collect(),
        guards,
    };
    dd.check_tree().map_err(|e| err(0, e.to_string()))?;
    Ok(dd)
}

pub fn serialize_decomposition(d: &Decomposition) -> String {
    let one = |vs: &[Vertex]| vs.iter().map(|v| format!(" {}", v + 1)).collect::<String>();
    let mut out = String::new();
    let order = d.preorder();
    let mut id = vec![0; d.len()];
    for (i, &t) in order.iter().enumerate() {
        id[t] = i;
    }
    for &t in &order {
        writeln!(out, "node {} bag{}", id[t], one(&d.bags[t])).unwrap();
    }
    for &t in &order {
        if let Some(p) = d.parent[t] {
            writeln!(out, "edge {} {} guard{}", id[p], id[t], one(&d.guards[t])).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_cyl_grid;

    fn cycle(n: usize) -> DiGraph {
        let arcs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        DiGraph::from_arcs(n, &arcs).unwrap()
    }

    /// Chain of singleton bags, deepest node first in topological order.
    fn dag_chain(order: &[Vertex]) -> Decomposition {
        let mut d = Decomposition::new(vec![order[0]]);
        let mut t = 0;
        for &v in &order[1..] {
            t = d.add_child(t, vec![v], Vec::new());
        }
        d
    }

    #[test]
    fn dag_chain_in_reverse_topological_order() {
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let d = dag_chain(&[2, 1, 0]);
        check_decomposition(&g, &d).unwrap();
        assert_eq!(width(&d).width, 1);
    }

    #[test]
    fn two_cycle_without_guard_is_invalid() {
        let g = cycle(2);
        let d = dag_chain(&[0, 1]);
        match check_decomposition(&g, &d) {
            Err(DecompositionError::GuardViolated { child, walk }) => {
                assert_eq!(child, 1);
                assert_eq!(walk, vec![1, 0, 1]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_bag_is_nice() {
        let g = cycle(4);
        let d = Decomposition::new((0..4).collect());
        check_decomposition(&g, &d).unwrap();
        check_nice(&g, &d).unwrap();
        assert_eq!(width(&d).width, 4);
    }

    #[test]
    fn subtree_that_is_not_strongly_connected_is_not_nice() {
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let d = dag_chain(&[2, 1, 0]);
        check_decomposition(&g, &d).unwrap();
        assert_eq!(check_nice(&g, &d), Err(NiceViolation::NotComponent(1)));
        let mut flat = Decomposition::new(Vec::new());
        for v in 0..3 {
            flat.add_child(0, vec![v], Vec::new());
        }
        check_nice(&g, &flat).unwrap();
    }

    #[test]
    fn computes_cycle_and_dag() {
        let g = cycle(6);
        let DecompOutcome::Decomposition(d) = compute_decomposition(&g, 1) else { panic!() };
        check_decomposition(&g, &d).unwrap();
        check_nice(&g, &d).unwrap();
        assert!(width(&d).width <= 2);
        let dag = DiGraph::from_arcs(4, &[(0, 1), (1, 2), (0, 3), (3, 2)]).unwrap();
        let DecompOutcome::Decomposition(d) = compute_decomposition(&dag, 1) else { panic!() };
        check_decomposition(&dag, &d).unwrap();
        assert_eq!(width(&d).width, 1);
    }

    #[test]
    fn grid_is_certified_at_order_one() {
        let g = gen_cyl_grid(3).g;
        assert!(matches!(compute_decomposition(&g, 1), DecompOutcome::Certificate(_)));
    }

    #[test]
    fn format_round_trip() {
        let mut d = Decomposition::new(vec![0, 1]);
        let c = d.add_child(0, vec![2], vec![1]);
        d.add_child(c, vec![3], vec![]);
        let text = serialize_decomposition(&d);
        assert_eq!(text, "node 0 bag 1 2\nnode 1 bag 3\nnode 2 bag 4\nedge 0 1 guard 2\nedge 1 2 guard\n");
        assert_eq!(parse_decomposition(&text).unwrap(), d);
    }
}
