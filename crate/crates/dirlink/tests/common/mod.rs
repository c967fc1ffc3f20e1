#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use dirlink::dp::{BigVertexSpec, Routing};
use dirlink::generators::{gen_random, rng};
use dirlink::graph::{DiGraph, Instance, Vertex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A graph, a vertex set `S` split into two parts, and big vertices inside `S`.
pub struct BoundFixture {
    pub g: DiGraph,
    pub a: Vec<Vertex>,
    pub b: Vec<Vertex>,
    pub spec: BigVertexSpec,
}

impl BoundFixture {
    /// Truncation for one part's table that keeps the join exact: a union
    /// family with at most `cap` fragments has at most `cap` plus the visits
    /// to the other part fragments inside this part.
    pub fn part_cap(&self, other: &[Vertex], c: usize, cap: usize) -> usize {
        cap + other.iter().map(|&v| if self.spec.is_big(v) { self.spec.b } else { c }).sum::<usize>()
    }

    pub fn set(&self) -> Vec<Vertex> {
        let mut s: Vec<Vertex> = self.a.iter().chain(&self.b).copied().collect();
        s.sort_unstable();
        s
    }
}

fn random_routings(g: &DiGraph, u: Vertex, b: usize, r: &mut ChaCha8Rng) -> BTreeSet<Routing> {
    let mut out = BTreeSet::new();
    let ins = g.in_arcs(u);
    let outs = g.out_arcs(u);
    if ins.is_empty() || outs.is_empty() {
        return out;
    }
    for _ in 0..r.gen_range(1..=3) {
        let len = r.gen_range(1..=b);
        let mut routing: Routing = (0..len).map(|_| (*ins.choose(r).unwrap(), *outs.choose(r).unwrap())).collect();
        routing.sort_unstable();
        out.insert(routing);
    }
    out
}

/// Random fixture with `n <= max_n`, `|S| <= max_s`, arc probability drawn
/// from `p` and, when `big`, up to two big vertices in `S` with routings of
/// at most `b` traversals.
pub fn bound_fixture(seed: u64, max_n: usize, max_s: usize, b: usize, big: bool, p: Range<f64>) -> BoundFixture {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_n);
    let g = gen_random(n, r.gen_range(p), seed ^ 0x5eed);
    let mut verts: Vec<Vertex> = (0..n).collect();
    verts.shuffle(&mut r);
    let size = r.gen_range(1..=max_s.min(n - 1));
    let s = &verts[..size];
    let cut = r.gen_range(0..=size);
    let mut spec = BigVertexSpec::none(b);
    if big {
        for &u in s.iter().take(r.gen_range(1..=2)) {
            spec.routings.insert(u, random_routings(&g, u, b, &mut r));
        }
    }
    BoundFixture {
        g,
        a: s[..cut].to_vec(),
        b: s[cut..].to_vec(),
        spec,
    }
}

/// Random instance on `n` vertices with `k` pairs; terminals may repeat.
pub fn random_instance(r: &mut ChaCha8Rng, n: usize, k: usize, c: usize, p: f64) -> Instance {
    let g = gen_random(n, p, r.gen());
    let pairs = (0..k).map(|_| (r.gen_range(0..n), r.gen_range(0..n))).collect();
    Instance::new(g, pairs, c)
}

/// Every digraph without loops on `n` vertices, as arc lists.
pub fn all_digraphs(n: usize) -> impl Iterator<Item = DiGraph> {
    let slots: Vec<(Vertex, Vertex)> = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).collect();
    (0u64..1 << slots.len()).map(move |mask| {
        let arcs: Vec<(Vertex, Vertex)> = slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a).collect();
        DiGraph::from_arcs(n, &arcs).unwrap()
    })
}

pub fn count_by<T: Ord + Clone>(items: impl IntoIterator<Item = T>) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for x in items {
        *m.entry(x).or_default() += 1;
    }
    m
}
