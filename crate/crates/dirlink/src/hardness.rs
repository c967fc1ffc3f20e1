//! Reduction from 3-SAT to disjoint paths with congestion `c`.
//!
//! Each literal position of the formula gets a switch gadget. The `c` red
//! pairs read an assignment off the variable gadgets and pick a satisfied
//! position per clause; the `2c - 1` blue pairs cross every switch and force
//! the red paths to agree with the blue routing inside each switch.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{DiGraph, Instance, Linkage, Path, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HardnessError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("clause {clause} has {len} literals, expected 3")]
    Width { clause: usize, len: usize },
    #[error("literal {lit} out of range for {n} variables")]
    Literal { lit: i32, n: usize },
    #[error("variable {0} does not occur in both polarities")]
    Polarity(usize),
    #[error("congestion must be at least 2, got {0}")]
    Congestion(usize),
    #[error("assignment has {got} values for {n} variables")]
    AssignmentLength { got: usize, n: usize },
    #[error("assignment falsifies clause {0}")]
    Unsatisfied(usize),
    #[error("{0} variables is too many for exhaustive search")]
    TooLarge(usize),
    #[error("unknown switch vertex {0}")]
    Label(String),
    #[error("malformed linkage: {0}")]
    Linkage(String),
}

/// A formula in 3-CNF. Literal `+i` is variable `i` (1-based), `-i` its negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub n: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn new(n: usize, clauses: Vec<[i32; 3]>) -> Result<Self, HardnessError> {
        for cl in &clauses {
            for &lit in cl {
                if lit == 0 || lit.unsigned_abs() as usize > n {
                    return Err(HardnessError::Literal { lit, n });
                }
            }
        }
        Ok(CnfFormula { n, clauses })
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    /// Literal at 0-based position `j`, positions numbered clause by clause.
    pub fn literal(&self, j: usize) -> i32 {
        self.clauses[j / 3][j % 3]
    }

    pub fn positions(&self) -> usize {
        3 * self.m()
    }

    pub fn literal_true(lit: i32, beta: &[bool]) -> bool {
        beta[lit.unsigned_abs() as usize - 1] == (lit > 0)
    }

    /// Index of the first clause falsified by `beta`.
    pub fn falsified_clause(&self, beta: &[bool]) -> Option<usize> {
        self.clauses
            .iter()
            .position(|cl| !cl.iter().any(|&l| Self::literal_true(l, beta)))
    }

    pub fn satisfied_by(&self, beta: &[bool]) -> bool {
        beta.len() == self.n && self.falsified_clause(beta).is_none()
    }

    /// Variables (1-based) missing a positive or a negated occurrence.
    pub fn one_sided(&self) -> Vec<usize> {
        (1..=self.n)
            .filter(|&v| {
                let lits = self.clauses.iter().flatten();
                let pos = lits.clone().any(|&l| l == v as i32);
                let neg = lits.clone().any(|&l| l == -(v as i32));
                !(pos && neg)
            })
            .collect()
    }

    /// Appends `(x or x or not x)` for every one-sided variable `x`.
    pub fn balance_polarities(&self) -> CnfFormula {
        let mut out = self.clone();
        for v in self.one_sided() {
            let v = v as i32;
            out.clauses.push([v, v, -v]);
        }
        out
    }

    pub fn parse_dimacs(text: &str) -> Result<Self, HardnessError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('c') || body.starts_with('%') {
                continue;
            }
            if body.starts_with('p') {
                let f: Vec<&str> = body.split_whitespace().collect();
                let parsed = match f.as_slice() {
                    ["p", "cnf", n, m] => n.parse().ok().zip(m.parse().ok()),
                    _ => None,
                };
                let Some(h) = parsed else {
                    return Err(HardnessError::Parse { line, msg: "expected `p cnf <vars> <clauses>`".into() });
                };
                if header.is_some() {
                    return Err(HardnessError::Parse { line, msg: "duplicate header".into() });
                }
                header = Some(h);
                continue;
            }
            let Some((n, _)) = header else {
                return Err(HardnessError::Parse { line, msg: "clause before header".into() });
            };
            for tok in body.split_whitespace() {
                let lit: i32 = tok
                    .parse()
                    .map_err(|_| HardnessError::Parse { line, msg: format!("bad literal `{tok}`") })?;
                if lit == 0 {
                    let cl = std::mem::take(&mut current);
                    let arr: [i32; 3] = cl
                        .as_slice()
                        .try_into()
                        .map_err(|_| HardnessError::Width { clause: clauses.len() + 1, len: cl.len() })?;
                    clauses.push(arr);
                } else {
                    if lit.unsigned_abs() as usize > n {
                        return Err(HardnessError::Literal { lit, n });
                    }
                    current.push(lit);
                }
            }
        }
        let Some((n, m)) = header else {
            return Err(HardnessError::Parse { line: 0, msg: "missing header".into() });
        };
        if !current.is_empty() {
            return Err(HardnessError::Parse { line: 0, msg: "last clause is not terminated by 0".into() });
        }
        if clauses.len() != m {
            return Err(HardnessError::Parse {
                line: 0,
                msg: format!("header announces {m} clauses, found {}", clauses.len()),
            });
        }
        CnfFormula::new(n, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n, self.m());
        for cl in &self.clauses {
            out.push_str(&format!("{} {} {} 0\n", cl[0], cl[1], cl[2]));
        }
        out
    }
}

/// Lexicographically first satisfying assignment (false before true, `x1`
/// most significant), or `None` if the formula is unsatisfiable.
pub fn sat_brute(phi: &CnfFormula) -> Result<Option<Vec<bool>>, HardnessError> {
    if phi.n > 24 {
        return Err(HardnessError::TooLarge(phi.n));
    }
    let n = phi.n;
    Ok((0u32..1 << n)
        .map(|mask| (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect::<Vec<bool>>())
        .find(|beta| phi.satisfied_by(beta)))
}

/// Named vertices of one switch gadget.
///
/// Red paths leave at `a` and enter at `d`; blue paths enter at `b` and `x`
/// and leave at `e` and `y`. The arcs into `u`, `u'` and out of `v`, `v'`
/// connect the switch to variable and clause gadgets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchPorts {
    pub a: Vertex,
    pub b: Vertex,
    pub d: Vertex,
    pub e: Vertex,
    pub f: Vertex,
    pub f_prime: Vertex,
    pub g: Vertex,
    pub g_prime: Vertex,
    pub h: Vertex,
    pub h_prime: Vertex,
    pub u: Vertex,
    pub u_prime: Vertex,
    pub v: Vertex,
    pub v_prime: Vertex,
    pub x: Vertex,
    pub y: Vertex,
    pub z: Vertex,
    pub p: Vec<Vertex>,
    pub q: Vec<Vertex>,
    pub l: Vec<Vertex>,
    pub r: Vec<Vertex>,
    pub w: Vec<Vertex>,
    pub w_prime: Vec<Vertex>,
}

impl SwitchPorts {
    /// Every vertex with its label; chain members are numbered from 1.
    pub fn labelled(&self) -> Vec<(String, Vertex)> {
        let mut out: Vec<(String, Vertex)> = [
            ("a", self.a),
            ("b", self.b),
            ("d", self.d),
            ("e", self.e),
            ("f", self.f),
            ("f'", self.f_prime),
            ("g", self.g),
            ("g'", self.g_prime),
            ("h", self.h),
            ("h'", self.h_prime),
            ("u", self.u),
            ("u'", self.u_prime),
            ("v", self.v),
            ("v'", self.v_prime),
            ("x", self.x),
            ("y", self.y),
            ("z", self.z),
        ]
        .iter()
        .map(|&(s, v)| (s.to_string(), v))
        .collect();
        for (name, chain) in [
            ("p", &self.p),
            ("q", &self.q),
            ("l", &self.l),
            ("r", &self.r),
            ("w", &self.w),
            ("w'", &self.w_prime),
        ] {
            for (i, &v) in chain.iter().enumerate() {
                out.push((format!("{name}{}", i + 1), v));
            }
        }
        out
    }

    pub fn vertex(&self, label: &str) -> Option<Vertex> {
        self.labelled().into_iter().find(|(s, _)| s == label).map(|(_, v)| v)
    }
}

pub fn switch_vertex_count(c: usize) -> usize {
    6 * c + 17
}

pub fn switch_arc_count(c: usize) -> usize {
    16 * c + 18
}

/// Appends a switch for congestion `c` to `g`.
pub fn add_switch(g: &mut DiGraph, c: usize) -> SwitchPorts {
    let [a, b, d, e, f, f_prime, gg, g_prime, h, h_prime, u, u_prime, v, v_prime, x, y, z] = [(); 17].map(|_| g.add_vertex());
    let mut chain = || (0..c).map(|_| g.add_vertex()).collect::<Vec<_>>();
    let (p, q, l, r, w, w_prime) = (chain(), chain(), chain(), chain(), chain(), chain());
    let s = SwitchPorts {
        a,
        b,
        d,
        e,
        f,
        f_prime,
        g: gg,
        g_prime,
        h,
        h_prime,
        u,
        u_prime,
        v,
        v_prime,
        x,
        y,
        z,
        p,
        q,
        l,
        r,
        w,
        w_prime,
    };
    let mut arcs: Vec<(Vertex, Vertex)> = Vec::with_capacity(switch_arc_count(c));
    for i in 0..c {
        arcs.push((s.p[i], s.a));
        arcs.push((s.q[i], s.p[i]));
        arcs.push((s.x, s.r[i]));
        arcs.push((s.r[i], s.l[i]));
        arcs.push((s.l[i], s.f));
        arcs.push((s.g, s.w[i]));
        arcs.push((s.g_prime, s.w_prime[i]));
    }
    arcs.push((s.l[0], s.q[0]));
    for i in 1..c {
        arcs.push((s.r[0], s.q[i]));
        arcs.push((s.p[i - 1], s.p[i]));
        arcs.push((s.q[i - 1], s.q[i]));
        arcs.push((s.l[i], s.l[i - 1]));
        arcs.push((s.r[i], s.r[i - 1]));
        arcs.push((s.w[i - 1], s.w[i]));
        arcs.push((s.w_prime[i - 1], s.w_prime[i]));
        arcs.push((s.w[i - 1], s.z));
        arcs.push((s.w_prime[i - 1], s.z));
    }
    let last = c - 1;
    arcs.extend([
        (s.b, s.p[0]),
        (s.b, s.q[0]),
        (s.p[last], s.x),
        (s.y, s.l[last]),
        (s.z, s.r[last]),
        (s.q[last], s.f_prime),
        (s.f, s.w[0]),
        (s.f, s.w_prime[0]),
        (s.f_prime, s.w[0]),
        (s.f_prime, s.w_prime[0]),
        (s.w[last], s.y),
        (s.w_prime[last], s.y),
        (s.w[last], s.g),
        (s.w_prime[last], s.g_prime),
        (s.v, s.g),
        (s.h, s.v),
        (s.u, s.h),
        (s.d, s.h),
        (s.u, s.e),
        (s.v_prime, s.g_prime),
        (s.h_prime, s.v_prime),
        (s.u_prime, s.h_prime),
        (s.d, s.h_prime),
        (s.u_prime, s.e),
        (s.g, s.u_prime),
        (s.g_prime, s.u),
    ]);
    for (t, h) in arcs {
        g.add_arc(t, h).unwrap();
    }
    s
}

pub fn build_switch(c: usize) -> (DiGraph, SwitchPorts) {
    let mut g = DiGraph::new(0);
    let s = add_switch(&mut g, c);
    (g, s)
}

/// Where the pieces of a reduced instance live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionMap {
    pub c: usize,
    /// Literal at each position, positions numbered clause by clause.
    pub positions: Vec<i32>,
    /// The switch of each position.
    pub switches: Vec<SwitchPorts>,
    /// Variable junctions, `n + 1` of them.
    pub junctions: Vec<Vertex>,
    /// Clause junctions, `m + 1` of them.
    pub clause_junctions: Vec<Vertex>,
    pub sources: Vec<Vertex>,
    pub sinks: Vec<Vertex>,
    /// Debug label of every vertex, e.g. `S3.w'2` or `j1`.
    pub labels: Vec<String>,
}

pub fn reduced_vertex_count(n: usize, m: usize, c: usize) -> usize {
    3 * m * switch_vertex_count(c) + n + m + 6 * c
}

/// Builds the `3c - 1` pair instance of congestion `c` that is a
/// yes-instance exactly when `phi` is satisfiable. Every variable must occur
/// in both polarities (see [`CnfFormula::balance_polarities`]).
pub fn reduce_sat(phi: &CnfFormula, c: usize) -> Result<(Instance, ReductionMap), HardnessError> {
    if c < 2 {
        return Err(HardnessError::Congestion(c));
    }
    if let Some(&v) = phi.one_sided().first() {
        return Err(HardnessError::Polarity(v));
    }
    let k = 3 * c - 1;
    let npos = phi.positions();
    let mut g = DiGraph::new(2 * k);
    let mut labels: Vec<String> = (1..=k).map(|i| format!("s{i}")).chain((1..=k).map(|i| format!("t{i}"))).collect();
    let sources: Vec<Vertex> = (0..k).collect();
    let sinks: Vec<Vertex> = (k..2 * k).collect();
    let mut switches = Vec::with_capacity(npos);
    for j in 0..npos {
        let s = add_switch(&mut g, c);
        let mut named = s.labelled();
        named.sort_by_key(|&(_, v)| v);
        labels.extend(named.into_iter().map(|(name, _)| format!("S{}.{name}", j + 1)));
        switches.push(s);
    }
    let junctions: Vec<Vertex> = (0..=phi.n).map(|_| g.add_vertex()).collect();
    labels.extend((1..=phi.n + 1).map(|i| format!("j{i}")));
    let clause_junctions: Vec<Vertex> = (0..=phi.m()).map(|_| g.add_vertex()).collect();
    labels.extend((1..=phi.m() + 1).map(|i| format!("o{i}")));

    let mut arcs = Vec::new();
    let first = &switches[0];
    let last = &switches[npos - 1];
    for i in 0..c {
        arcs.push((first.a, sinks[i]));
        arcs.push((sources[i], junctions[0]));
    }
    for i in c..2 * c {
        arcs.push((sources[i], first.b));
    }
    for i in 2 * c..k {
        arcs.push((sources[i], first.x));
    }
    for w in switches.windows(2) {
        arcs.push((w[1].a, w[0].d));
        arcs.push((w[0].e, w[1].b));
        arcs.push((w[0].y, w[1].x));
    }
    for i in c..k {
        arcs.push((last.y, sinks[i]));
        arcs.push((last.e, sinks[i]));
    }
    arcs.push((junctions[phi.n], clause_junctions[0]));
    arcs.push((clause_junctions[phi.m()], last.d));
    for var in 1..=phi.n {
        for sign in [1, -1] {
            let chain = occurrences(phi, sign * var as i32);
            arcs.push((junctions[var - 1], switches[chain[0]].u));
            for pair in chain.windows(2) {
                arcs.push((switches[pair[0]].v, switches[pair[1]].u));
            }
            arcs.push((switches[*chain.last().unwrap()].v, junctions[var]));
        }
    }
    for ci in 0..phi.m() {
        for j in 3 * ci..3 * ci + 3 {
            arcs.push((clause_junctions[ci], switches[j].u_prime));
            arcs.push((switches[j].v_prime, clause_junctions[ci + 1]));
        }
    }
    for (t, h) in arcs {
        g.add_arc(t, h).unwrap();
    }
    let pairs = sources.iter().copied().zip(sinks.iter().copied()).collect();
    let rmap = ReductionMap {
        c,
        positions: (0..npos).map(|j| phi.literal(j)).collect(),
        switches,
        junctions,
        clause_junctions,
        sources,
        sinks,
        labels,
    };
    Ok((Instance::new(g, pairs, c), rmap))
}

fn occurrences(phi: &CnfFormula, lit: i32) -> Vec<usize> {
    (0..phi.positions()).filter(|&j| phi.literal(j) == lit).collect()
}

/// The explicit solution induced by a satisfying assignment.
pub fn construct_witness(
    inst: &Instance,
    phi: &CnfFormula,
    beta: &[bool],
    rmap: &ReductionMap,
) -> Result<Linkage, HardnessError> {
    if beta.len() != phi.n {
        return Err(HardnessError::AssignmentLength { got: beta.len(), n: phi.n });
    }
    if let Some(ci) = phi.falsified_clause(beta) {
        return Err(HardnessError::Unsatisfied(ci + 1));
    }
    let c = rmap.c;
    let sw = &rmap.switches;
    let agrees: Vec<bool> = rmap.positions.iter().map(|&l| CnfFormula::literal_true(l, beta)).collect();
    let mut seqs: Vec<Vec<Vertex>> = Vec::with_capacity(3 * c - 1);

    // Red paths: variable gadgets along falsified literals, one satisfied
    // position per clause, then back through every switch.
    for alpha in 0..c {
        let mut s = vec![rmap.sources[alpha], rmap.junctions[0]];
        for var in 1..=phi.n {
            let falsified = if beta[var - 1] { -(var as i32) } else { var as i32 };
            for j in occurrences(phi, falsified) {
                s.extend([sw[j].u, sw[j].h, sw[j].v]);
            }
            s.push(rmap.junctions[var]);
        }
        s.push(rmap.clause_junctions[0]);
        for ci in 0..phi.m() {
            let j = (3 * ci..3 * ci + 3).find(|&j| agrees[j]).unwrap();
            s.extend([sw[j].u_prime, sw[j].h_prime, sw[j].v_prime, rmap.clause_junctions[ci + 1]]);
        }
        for j in (0..sw.len()).rev() {
            let t = &sw[j];
            if agrees[j] {
                s.extend([t.d, t.h, t.v, t.g, t.w[alpha]]);
            } else {
                s.extend([t.d, t.h_prime, t.v_prime, t.g_prime, t.w_prime[alpha]]);
            }
            if alpha == c - 1 {
                s.push(t.y);
                s.extend(t.l.iter().rev());
                s.extend([t.q[0], t.p[0]]);
            } else {
                s.push(t.z);
                s.extend(t.r.iter().rev());
                s.extend([t.q[alpha + 1], t.p[alpha + 1]]);
            }
            s.push(t.a);
        }
        s.push(rmap.sinks[alpha]);
        seqs.push(s);
    }

    // Blue paths from b: the q chain (or the p chain for the last one), then
    // the w side opposite to the red paths.
    for i in c..2 * c {
        let mut s = vec![rmap.sources[i]];
        for (j, t) in sw.iter().enumerate() {
            s.push(t.b);
            if i < 2 * c - 1 {
                s.extend(&t.q);
                s.push(t.f_prime);
            } else {
                s.extend(&t.p);
                s.extend([t.x, t.r[c - 1], t.l[c - 1], t.f]);
            }
            if agrees[j] {
                s.extend(&t.w_prime);
                s.extend([t.g_prime, t.u]);
            } else {
                s.extend(&t.w);
                s.extend([t.g, t.u_prime]);
            }
            s.push(t.e);
        }
        s.push(rmap.sinks[i]);
        seqs.push(s);
    }

    // Blue paths from x: the same w side as the red paths, out at y.
    for i in 2 * c..3 * c - 1 {
        let lane = i - 2 * c;
        let mut s = vec![rmap.sources[i]];
        for (j, t) in sw.iter().enumerate() {
            s.extend([t.x, t.r[lane], t.l[lane], t.f]);
            s.extend(if agrees[j] { &t.w } else { &t.w_prime });
            s.push(t.y);
        }
        s.push(rmap.sinks[i]);
        seqs.push(s);
    }

    let paths = seqs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Path::from_vertices(&inst.g, s).ok_or_else(|| HardnessError::Linkage(format!("path {} is not a walk", i + 1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Linkage { paths })
}

/// Reads the assignment off the first path: a variable is false when the
/// path leaves its junction into the chain of positive occurrences and true
/// when it enters the chain of negated ones.
pub fn extract_assignment(l: &Linkage, phi: &CnfFormula, rmap: &ReductionMap) -> Result<Vec<bool>, HardnessError> {
    let path = l.paths.first().ok_or_else(|| HardnessError::Linkage("empty linkage".into()))?;
    (1..=phi.n)
        .map(|var| {
            let at = path
                .vertices
                .iter()
                .position(|&v| v == rmap.junctions[var - 1])
                .ok_or_else(|| HardnessError::Linkage(format!("first path misses junction j{var}")))?;
            let next = path.vertices.get(at + 1).copied();
            let head = |lit: i32| occurrences(phi, lit).first().map(|&j| rmap.switches[j].u);
            if next.is_some() && next == head(var as i32) {
                Ok(false)
            } else if next.is_some() && next == head(-(var as i32)) {
                Ok(true)
            } else {
                Err(HardnessError::Linkage(format!("first path enters no chain of variable {var}")))
            }
        })
        .collect()
}

/// Boundary conditions of an exhaustive switch check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchSetup {
    pub c: usize,
    /// Blue paths entering at `b`.
    pub b_paths: usize,
    /// Blue paths entering at `x`.
    pub x_paths: usize,
    /// Labels of vertices no path may use.
    pub banned: Vec<String>,
    /// Restrict to shortcut-free paths.
    pub minimal: bool,
    /// Search nodes before the report is returned as incomplete.
    pub max_nodes: u64,
}

impl SwitchSetup {
    pub fn standard(c: usize) -> Self {
        SwitchSetup {
            c,
            b_paths: c,
            x_paths: c - 1,
            banned: Vec::new(),
            minimal: false,
            max_nodes: u64::MAX,
        }
    }
}

/// Outcome of [`verify_switch_lemma`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SwitchReport {
    pub c: usize,
    /// Feasible routings enumerated.
    pub routings: u64,
    /// Routings violating at least one conclusion.
    pub violations: u64,
    /// Routings whose red paths do not all pass `h` or all pass `h'`.
    pub mixed: u64,
    /// Routings saturating `g` and `h`.
    pub unprimed: u64,
    /// Routings saturating `g'` and `h'`.
    pub primed: u64,
    pub nodes: u64,
    pub complete: bool,
    /// Red paths, then blue paths from `b`, then from `x`.
    pub counterexample: Option<Vec<Path>>,
    /// Failed conclusions of the counterexample.
    pub failed: Vec<String>,
}

/// Enumerates every routing inside a single switch of `c` red paths leaving
/// at `a` and the blue paths entering at `b` and `x`, all with capacity `c`,
/// and checks the switch conclusions on each: red paths enter at `d`, `c - 1`
/// blue paths leave at `y` and `c` at `e`, `x` and `y` are saturated, and
/// exactly one of the pairs `{g, h}` and `{g', h'}` is saturated.
///
/// With `minimal` set, paths are shortcut-free: no arc joins two
/// non-consecutive vertices of a path in forward direction. Any routing can
/// be shortened into such a one without raising the load of a vertex.
pub fn verify_switch_lemma(setup: &SwitchSetup) -> Result<SwitchReport, HardnessError> {
    let c = setup.c;
    if c < 2 {
        return Err(HardnessError::Congestion(c));
    }
    let (g, s) = build_switch(c);
    let mut banned = vec![false; g.n()];
    for label in &setup.banned {
        let v = s.vertex(label).ok_or_else(|| HardnessError::Label(label.clone()))?;
        banned[v] = true;
    }
    let m = setup.minimal;
    let red = simple_paths(&g, &[s.b, s.x, s.d, s.u, s.u_prime], &[s.a], &banned, m);
    let exits = [s.e, s.y, s.v, s.v_prime];
    let from_b = simple_paths(&g, &[s.b], &exits, &banned, m);
    let from_x = simple_paths(&g, &[s.x], &exits, &banned, m);

    let mut slots: Vec<(&[Vec<Vertex>], bool)> = Vec::new();
    for (group, count) in [(&red, c), (&from_b, setup.b_paths), (&from_x, setup.x_paths)] {
        for i in 0..count {
            slots.push((group.as_slice(), i > 0));
        }
    }
    let shared = Shared {
        g: &g,
        s: &s,
        c,
        red: c,
        slots: &slots,
        nodes: AtomicU64::new(0),
        max_nodes: setup.max_nodes,
        aborted: AtomicBool::new(false),
        report: Mutex::new(SwitchReport { c, ..SwitchReport::default() }),
    };
    let first = slots.first().map_or(0, |s| s.0.len());
    (0..first).into_par_iter().for_each(|i| {
        let mut usage = vec![0usize; g.n()];
        let mut chosen = Vec::with_capacity(slots.len());
        if shared.place(0, i, &mut usage, &mut chosen) {
            shared.descend(1, &mut usage, &mut chosen);
            shared.remove(0, i, &mut usage, &mut chosen);
        }
    });
    let mut report = shared.report.into_inner().unwrap();
    report.nodes = shared.nodes.load(Ordering::Relaxed);
    report.complete = !shared.aborted.load(Ordering::Relaxed);
    Ok(report)
}

struct Shared<'a> {
    g: &'a DiGraph,
    s: &'a SwitchPorts,
    c: usize,
    red: usize,
    slots: &'a [(&'a [Vec<Vertex>], bool)],
    nodes: AtomicU64,
    max_nodes: u64,
    aborted: AtomicBool,
    report: Mutex<SwitchReport>,
}

impl Shared<'_> {
    fn place(&self, slot: usize, idx: usize, usage: &mut [usize], chosen: &mut Vec<usize>) -> bool {
        let path = &self.slots[slot].0[idx];
        if path.iter().any(|&v| usage[v] >= self.c) {
            return false;
        }
        for &v in path {
            usage[v] += 1;
        }
        chosen.push(idx);
        true
    }

    fn remove(&self, slot: usize, idx: usize, usage: &mut [usize], chosen: &mut Vec<usize>) {
        for &v in &self.slots[slot].0[idx] {
            usage[v] -= 1;
        }
        chosen.pop();
    }

    fn descend(&self, slot: usize, usage: &mut [usize], chosen: &mut Vec<usize>) {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.max_nodes {
            self.aborted.store(true, Ordering::Relaxed);
            return;
        }
        if slot == self.slots.len() {
            self.judge(usage, chosen);
            return;
        }
        let (cands, same_group) = self.slots[slot];
        let from = if same_group { chosen[slot - 1] } else { 0 };
        for idx in from..cands.len() {
            if self.place(slot, idx, usage, chosen) {
                self.descend(slot + 1, usage, chosen);
                self.remove(slot, idx, usage, chosen);
            }
        }
    }

    fn judge(&self, usage: &[usize], chosen: &[usize]) {
        let (s, c) = (self.s, self.c);
        let paths: Vec<&Vec<Vertex>> = chosen.iter().enumerate().map(|(slot, &i)| &self.slots[slot].0[i]).collect();
        let (red, blue) = paths.split_at(self.red);
        let sat = |v: Vertex| usage[v] >= c;
        let mut failed = Vec::new();
        if red.iter().any(|p| p[0] != s.d) {
            failed.push("a red path does not enter at d");
        }
        if blue.iter().filter(|p| *p.last().unwrap() == s.y).count() != c - 1 {
            failed.push("blue paths leaving at y are not c-1");
        }
        if blue.iter().filter(|p| *p.last().unwrap() == s.e).count() != c {
            failed.push("blue paths leaving at e are not c");
        }
        if !sat(s.x) || !sat(s.y) {
            failed.push("x or y not saturated");
        }
        let unprimed = sat(s.g) && sat(s.h);
        let primed = sat(s.g_prime) && sat(s.h_prime);
        if unprimed == primed {
            failed.push("not exactly one of {g,h} and {g',h'} saturated");
        }
        let through = |v: Vertex| red.iter().filter(|p| p.contains(&v)).count();
        let unanimous = (through(s.h) == c && through(s.h_prime) == 0) || (through(s.h_prime) == c && through(s.h) == 0);

        let mut rep = self.report.lock().unwrap();
        rep.routings += 1;
        rep.unprimed += unprimed as u64;
        rep.primed += primed as u64;
        rep.mixed += !unanimous as u64;
        if !failed.is_empty() {
            rep.violations += 1;
            if rep.counterexample.is_none() {
                rep.counterexample = Some(paths.iter().map(|p| Path::from_vertices(self.g, p).unwrap()).collect());
                rep.failed = failed.iter().map(|f| f.to_string()).collect();
            }
        }
    }
}

/// Simple paths from a start to an end vertex avoiding `banned`, optionally
/// without forward arcs between non-consecutive vertices.
fn simple_paths(g: &DiGraph, starts: &[Vertex], ends: &[Vertex], banned: &[bool], minimal: bool) -> Vec<Vec<Vertex>> {
    struct Walk<'a> {
        g: &'a DiGraph,
        ends: &'a [Vertex],
        banned: &'a [bool],
        minimal: bool,
    }
    fn go(w: &Walk, on: &mut [bool], cur: &mut Vec<Vertex>, out: &mut Vec<Vec<Vertex>>) {
        let g = w.g;
        let v = *cur.last().unwrap();
        if w.ends.contains(&v) {
            out.push(cur.clone());
        }
        for x in g.successors(v) {
            if w.banned[x] || on[x] {
                continue;
            }
            if w.minimal && cur[..cur.len() - 1].iter().any(|&y| g.find_arc(y, x).is_some()) {
                continue;
            }
            on[x] = true;
            cur.push(x);
            go(w, on, cur, out);
            cur.pop();
            on[x] = false;
        }
    }
    let walk = Walk { g, ends, banned, minimal };
    let mut out = Vec::new();
    let mut on = vec![false; g.n()];
    for &st in starts {
        if banned[st] {
            continue;
        }
        on[st] = true;
        go(&walk, &mut on, &mut vec![st], &mut out);
        on[st] = false;
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::verify_linkage;

    fn fig_formula() -> CnfFormula {
        CnfFormula::new(3, vec![[1, -2, 3], [-1, 2, 3], [-1, -2, -3]]).unwrap()
    }

    /// Out-neighbours of the c = 2 switch, transcribed vertex by vertex.
    const SWITCH_TWO: &[(&str, &[&str])] = &[
        ("a", &[]),
        ("b", &["p1", "q1"]),
        ("p1", &["a", "p2"]),
        ("p2", &["a", "x"]),
        ("q1", &["p1", "q2"]),
        ("q2", &["p2", "f'"]),
        ("x", &["r1", "r2"]),
        ("r1", &["l1", "q2"]),
        ("r2", &["l2", "r1"]),
        ("l1", &["f", "q1"]),
        ("l2", &["f", "l1"]),
        ("y", &["l2"]),
        ("z", &["r2"]),
        ("f", &["w1", "w'1"]),
        ("f'", &["w1", "w'1"]),
        ("w1", &["z", "w2"]),
        ("w2", &["y", "g"]),
        ("w'1", &["z", "w'2"]),
        ("w'2", &["y", "g'"]),
        ("g", &["w1", "w2", "u'"]),
        ("g'", &["w'1", "w'2", "u"]),
        ("v", &["g"]),
        ("v'", &["g'"]),
        ("h", &["v"]),
        ("h'", &["v'"]),
        ("u", &["h", "e"]),
        ("u'", &["h'", "e"]),
        ("d", &["h", "h'"]),
        ("e", &[]),
    ];

    #[test]
    fn switch_matches_the_transcribed_table() {
        let (g, s) = build_switch(2);
        assert_eq!(g.n(), 29);
        assert_eq!(g.m(), switch_arc_count(2));
        let mut built: Vec<(String, String)> = Vec::new();
        let names = s.labelled();
        let name = |v: Vertex| names.iter().find(|(_, x)| *x == v).unwrap().0.clone();
        for &(t, h) in g.arcs() {
            built.push((name(t), name(h)));
        }
        let mut table: Vec<(String, String)> = SWITCH_TWO
            .iter()
            .flat_map(|(t, hs)| hs.iter().map(move |h| (t.to_string(), h.to_string())))
            .collect();
        built.sort();
        table.sort();
        assert_eq!(built, table);
    }

    #[test]
    fn switch_size_is_linear_in_c() {
        for c in 2..7 {
            let (g, s) = build_switch(c);
            assert_eq!(g.n(), switch_vertex_count(c));
            assert_eq!(g.m(), switch_arc_count(c));
            assert!(s.p.iter().all(|&p| g.find_arc(p, s.a).is_some()));
            assert!(s.r.iter().all(|&r| g.find_arc(s.x, r).is_some()));
            assert!(g.find_arc(s.l[0], s.q[0]).is_some());
        }
    }

    #[test]
    fn dimacs_round_trip_and_errors() {
        let phi = fig_formula();
        assert_eq!(CnfFormula::parse_dimacs(&phi.to_dimacs()).unwrap(), phi);
        let spread = "c two lines\np cnf 2 1\n1 -2\n2 0\n";
        assert_eq!(CnfFormula::parse_dimacs(spread).unwrap().clauses, vec![[1, -2, 2]]);
        assert!(matches!(CnfFormula::parse_dimacs("p cnf 2 1\n1 2 0\n"), Err(HardnessError::Width { .. })));
        assert!(matches!(CnfFormula::parse_dimacs("p cnf 2 1\n1 2 3 0\n"), Err(HardnessError::Literal { .. })));
        assert!(CnfFormula::parse_dimacs("1 2 3 0\n").is_err());
    }

    #[test]
    fn sat_brute_small_cases() {
        let x = CnfFormula::new(1, vec![[1, 1, 1]]).unwrap();
        assert_eq!(sat_brute(&x).unwrap(), Some(vec![true]));
        let unsat = CnfFormula::new(1, vec![[1, 1, 1], [-1, -1, -1]]).unwrap();
        assert_eq!(sat_brute(&unsat).unwrap(), None);
        assert_eq!(sat_brute(&fig_formula()).unwrap(), Some(vec![false, false, false]));
    }

    #[test]
    fn balancing_adds_tautologies_for_one_sided_variables() {
        let phi = CnfFormula::new(3, vec![[1, 2, -2]]).unwrap();
        assert_eq!(phi.one_sided(), vec![1, 3]);
        let b = phi.balance_polarities();
        assert_eq!(b.clauses[1..], [[1, 1, -1], [3, 3, -3]]);
        assert!(b.one_sided().is_empty());
        assert_eq!(reduce_sat(&phi, 2).unwrap_err(), HardnessError::Polarity(1));
    }

    #[test]
    fn reduction_size_and_terminal_degrees() {
        let phi = fig_formula();
        let (inst, rmap) = reduce_sat(&phi, 2).unwrap();
        assert_eq!(rmap.switches.len(), 9);
        assert_eq!(inst.k(), 5);
        assert_eq!(inst.g.n(), reduced_vertex_count(3, 3, 2));
        assert_eq!(rmap.labels.len(), inst.g.n());
        for &(s, t) in &inst.pairs {
            assert_eq!(inst.g.out_degree(s), 1);
            assert_eq!(inst.g.in_degree(s), 0);
            assert!(inst.g.in_degree(t) >= 1);
        }
        assert_eq!(rmap.labels[rmap.switches[2].w_prime[1]], "S3.w'2");
    }

    #[test]
    fn witness_is_valid_and_round_trips() {
        let phi = fig_formula();
        let (inst, rmap) = reduce_sat(&phi, 2).unwrap();
        let beta = vec![true, true, false];
        let l = construct_witness(&inst, &phi, &beta, &rmap).unwrap();
        verify_linkage(&inst, &l).unwrap();
        let back = extract_assignment(&l, &phi, &rmap).unwrap();
        assert!(phi.satisfied_by(&back));
        assert_eq!(
            construct_witness(&inst, &phi, &[true, true, true], &rmap).unwrap_err(),
            HardnessError::Unsatisfied(3)
        );
    }

    #[test]
    fn witness_for_larger_congestion() {
        let phi = fig_formula();
        for c in 3..5 {
            let (inst, rmap) = reduce_sat(&phi, c).unwrap();
            let l = construct_witness(&inst, &phi, &[false, false, true], &rmap).unwrap();
            verify_linkage(&inst, &l).unwrap();
        }
    }

    #[test]
    fn banning_h_prime_forces_the_unprimed_side() {
        let mut setup = SwitchSetup::standard(2);
        setup.banned = vec!["h'".into()];
        let rep = verify_switch_lemma(&setup).unwrap();
        assert!(rep.complete);
        assert!(rep.routings > 0);
        assert_eq!(rep.unprimed, rep.routings);
        assert_eq!(rep.violations, 0);
    }
}
