//! Polynomial cases of congestion-2 routing with few distinct sources or sinks.
//!
//! An instance names distinct sources `x`, distinct sinks `y` and, for every
//! path `i`, its source `x[sigma[i]]` and sink `y[tau[i]]`. Three paths from
//! two sources, four paths from two sources, and the reversed shapes (two
//! sinks) are solved through cut-vertex sequences.

use thiserror::Error;

use crate::graph::{bfs_path, DiGraph, Instance, Linkage, Path, Vertex};
use crate::menger::{cut_sequence_in, cut_sequence_paths, CutSequence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KstcInstance {
    pub g: DiGraph,
    pub x: Vec<Vertex>,
    pub y: Vec<Vertex>,
    pub sigma: Vec<usize>,
    pub tau: Vec<usize>,
    pub c: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("expected (k, s, t, c) = {expected}, got ({k}, {s}, {t}, {c})")]
    Mismatch {
        expected: &'static str,
        k: usize,
        s: usize,
        t: usize,
        c: usize,
    },
    #[error("source/sink assignment is not surjective")]
    NotSurjective,
    #[error("terminal {0} repeated or shared between sources and sinks")]
    RepeatedTerminal(Vertex),
    #[error("terminal {0} out of range")]
    OutOfRange(Vertex),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecialAnswer {
    Yes(Linkage),
    No,
}

/// An answer with the number of cut sequences computed on the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub answer: SpecialAnswer,
    pub rounds: usize,
}

impl KstcInstance {
    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    /// The equivalent routing instance with one pair per path.
    pub fn to_instance(&self) -> Instance {
        let pairs = self
            .sigma
            .iter()
            .zip(&self.tau)
            .map(|(&a, &b)| (self.x[a], self.y[b]))
            .collect();
        Instance::new(self.g.clone(), pairs, self.c)
    }

    /// Groups the pairs of `inst` by distinct source and sink, in order of
    /// first appearance. Fails if a vertex is both a source and a sink.
    pub fn from_instance(inst: &Instance) -> Result<KstcInstance, ShapeError> {
        let mut x: Vec<Vertex> = Vec::new();
        let mut y: Vec<Vertex> = Vec::new();
        let mut sigma = Vec::new();
        let mut tau = Vec::new();
        for &(s, t) in &inst.pairs {
            let pos = |list: &mut Vec<Vertex>, v| match list.iter().position(|&w| w == v) {
                Some(p) => p,
                None => {
                    list.push(v);
                    list.len() - 1
                }
            };
            sigma.push(pos(&mut x, s));
            tau.push(pos(&mut y, t));
        }
        let k = KstcInstance {
            g: inst.g.clone(),
            x,
            y,
            sigma,
            tau,
            c: inst.c,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), ShapeError> {
        let n = self.g.n();
        let mut seen = vec![false; n];
        for &v in self.x.iter().chain(&self.y) {
            if v >= n {
                return Err(ShapeError::OutOfRange(v));
            }
            if seen[v] {
                return Err(ShapeError::RepeatedTerminal(v));
            }
            seen[v] = true;
        }
        let onto = |f: &[usize], size: usize| (0..size).all(|j| f.contains(&j)) && f.iter().all(|&j| j < size);
        if self.sigma.len() != self.tau.len() || !onto(&self.sigma, self.x.len()) || !onto(&self.tau, self.y.len()) {
            return Err(ShapeError::NotSurjective);
        }
        Ok(())
    }

    fn check_shape(&self, expected: &'static str, ok: bool) -> Result<(), ShapeError> {
        self.validate()?;
        if ok {
            Ok(())
        } else {
            Err(ShapeError::Mismatch {
                expected,
                k: self.k(),
                s: self.x.len(),
                t: self.y.len(),
                c: self.c,
            })
        }
    }

    /// Path indices grouped by source.
    fn by_source(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.x.len()];
        for (i, &a) in self.sigma.iter().enumerate() {
            groups[a].push(i);
        }
        groups
    }

    fn reversed(&self) -> KstcInstance {
        KstcInstance {
            g: self.g.reverse(),
            x: self.y.clone(),
            y: self.x.clone(),
            sigma: self.tau.clone(),
            tau: self.sigma.clone(),
            c: self.c,
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

fn place(paths: &mut [Option<Path>], i: usize, p: Path) {
    paths[i] = Some(p);
}

fn linkage(paths: Vec<Option<Path>>) -> SpecialAnswer {
    SpecialAnswer::Yes(Linkage {
        paths: paths.into_iter().map(|p| p.expect("every path placed")).collect(),
    })
}

/// Three paths from two sources with congestion 2.
pub fn solve_3_from_2(inst: &KstcInstance) -> Result<Outcome, ShapeError> {
    let t = inst.y.len();
    inst.check_shape("(3, 2, 2..=3, 2)", inst.k() == 3 && inst.x.len() == 2 && (2..=3).contains(&t) && inst.c == 2)?;
    let groups = inst.by_source();
    let (pair, single) = if groups[0].len() == 2 { (&groups[0], groups[1][0]) } else { (&groups[1], groups[0][0]) };
    let (i1, i2) = (pair[0], pair[1]);
    let x1 = inst.x[inst.sigma[i1]];
    let x2 = inst.x[inst.sigma[single]];
    let (y1, y2, y3) = (inst.y[inst.tau[i1]], inst.y[inst.tau[i2]], inst.y[inst.tau[single]]);
    let no = Outcome {
        answer: SpecialAnswer::No,
        rounds: 1,
    };
    let n = inst.g.n();
    let Ok(seq) = cut_sequence_in(&inst.g, &vec![false; n], x1, y1, y2) else {
        return Ok(no);
    };
    // Both paths from x1 pass every cut vertex, so the third path must avoid them all.
    let Some(p3) = bfs_path(&inst.g, x2, y3, &mask(n, &seq.vertices)) else {
        return Ok(no);
    };
    let mut paths = vec![None; 3];
    place(&mut paths, i1, cut_sequence_paths(&seq, 1));
    place(&mut paths, i2, cut_sequence_paths(&seq, 2));
    place(&mut paths, single, p3);
    Ok(Outcome {
        answer: linkage(paths),
        rounds: 1,
    })
}

fn sorted(v: &[Vertex]) -> Vec<Vertex> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

fn avoids(seq: &CutSequence, banned: &[bool]) -> bool {
    (1..=2).all(|i| cut_sequence_paths(seq, i).vertices.iter().all(|&v| !banned[v]))
}

/// Four paths from two sources with congestion 2.
///
/// Alternately recomputes the cut sequence of each source in the graph minus
/// the other source's current cut vertices. Every solution routes both paths
/// of a source through all of its cut vertices, so a target becoming
/// unreachable means no solution; once the paths of both sequences avoid the
/// other sequence they form a solution.
pub fn solve_4_from_2(inst: &KstcInstance) -> Result<Outcome, ShapeError> {
    let t = inst.y.len();
    inst.check_shape("(4, 2, 2..=4, 2)", inst.k() == 4 && inst.x.len() == 2 && (2..=4).contains(&t) && inst.c == 2)?;
    let n = inst.g.n();
    let groups = inst.by_source();
    let mut sink_use = vec![0; inst.y.len()];
    for &b in &inst.tau {
        sink_use[b] += 1;
    }
    if groups.iter().any(|g| g.len() != 2) || sink_use.iter().any(|&u| u > 2) {
        return Ok(Outcome {
            answer: SpecialAnswer::No,
            rounds: 0,
        });
    }
    let side = |g: &Vec<usize>| (inst.x[inst.sigma[g[0]]], inst.y[inst.tau[g[0]]], inst.y[inst.tau[g[1]]]);
    let ends = [side(&groups[0]), side(&groups[1])];
    let mut seqs: [Option<CutSequence>; 2] = [None, None];
    let mut sets: [Vec<Vertex>; 2] = [vec![ends[0].0], vec![ends[1].0]];
    let mut rounds = 0;
    let mut turn = 0;
    loop {
        assert!(rounds <= 2 * n + 2, "cut sequences must grow every round");
        let other = 1 - turn;
        let banned = mask(n, &sets[other]);
        let (x, ya, yb) = ends[turn];
        rounds += 1;
        let Ok(seq) = cut_sequence_in(&inst.g, &banned, x, ya, yb) else {
            return Ok(Outcome {
                answer: SpecialAnswer::No,
                rounds,
            });
        };
        let new_set = sorted(&seq.vertices);
        let old_set = sorted(&sets[turn]);
        assert!(
            old_set.iter().all(|v| new_set.binary_search(v).is_ok()),
            "cut sequences only grow"
        );
        if let Some(prev) = &seqs[other] {
            if avoids(prev, &mask(n, &new_set)) {
                let mut paths = vec![None; 4];
                for (side, s) in [(turn, &seq), (other, prev)] {
                    place(&mut paths, groups[side][0], cut_sequence_paths(s, 1));
                    place(&mut paths, groups[side][1], cut_sequence_paths(s, 2));
                }
                return Ok(Outcome {
                    answer: linkage(paths),
                    rounds,
                });
            }
            assert!(rounds <= 2 || new_set.len() > old_set.len(), "cut sequences strictly grow");
        }
        sets[turn] = new_set;
        seqs[turn] = Some(seq);
        turn = other;
    }
}

/// The two-sink shapes, solved on the reversed graph.
pub fn solve_reversed(inst: &KstcInstance) -> Result<Outcome, ShapeError> {
    let (k, s) = (inst.k(), inst.x.len());
    let ok = inst.y.len() == 2 && inst.c == 2 && ((k == 3 && (2..=3).contains(&s)) || (k == 4 && (2..=4).contains(&s)));
    inst.check_shape("(3, 2..=3, 2, 2) or (4, 2..=4, 2, 2)", ok)?;
    let rev = inst.reversed();
    let out = if k == 3 { solve_3_from_2(&rev)? } else { solve_4_from_2(&rev)? };
    let answer = match out.answer {
        SpecialAnswer::Yes(l) => SpecialAnswer::Yes(Linkage {
            paths: l.paths.iter().map(Path::reversed).collect(),
        }),
        SpecialAnswer::No => SpecialAnswer::No,
    };
    Ok(Outcome {
        answer,
        rounds: out.rounds,
    })
}

/// Dispatches to whichever solver accepts the shape, if any.
pub fn solve_special(inst: &KstcInstance) -> Option<Outcome> {
    if inst.validate().is_err() || inst.c != 2 {
        return None;
    }
    let (k, s, t) = (inst.k(), inst.x.len(), inst.y.len());
    match (k, s, t) {
        (3, 2, 2..=3) => solve_3_from_2(inst).ok(),
        (4, 2, 2..=4) => solve_4_from_2(inst).ok(),
        (3, 3, 2) | (4, 3..=4, 2) => solve_reversed(inst).ok(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::verify_linkage;

    fn kstc(n: usize, arcs: &[(Vertex, Vertex)], x: &[Vertex], y: &[Vertex], sigma: &[usize], tau: &[usize]) -> KstcInstance {
        KstcInstance {
            g: DiGraph::from_arcs(n, arcs).unwrap(),
            x: x.to_vec(),
            y: y.to_vec(),
            sigma: sigma.to_vec(),
            tau: tau.to_vec(),
            c: 2,
        }
    }

    fn assert_yes(inst: &KstcInstance, out: &Outcome) {
        match &out.answer {
            SpecialAnswer::Yes(l) => verify_linkage(&inst.to_instance(), l).unwrap(),
            SpecialAnswer::No => panic!("expected a solution"),
        }
    }

    #[test]
    fn three_paths_with_disjoint_branches() {
        // x1=0 -> y1=2, y2=3 via separate arcs; x2=1 -> y3=4 directly
        let inst = kstc(5, &[(0, 2), (0, 3), (1, 4)], &[0, 1], &[2, 3, 4], &[0, 0, 1], &[0, 1, 2]);
        assert_yes(&inst, &solve_3_from_2(&inst).unwrap());
    }

    #[test]
    fn third_path_blocked_by_cut_vertex() {
        // x1=0 -> m=2 -> {y1=3, y2=4}; x2=1 can only reach y3=5 through m
        let arcs = [(0, 2), (2, 3), (2, 4), (1, 2), (2, 5)];
        let inst = kstc(6, &arcs, &[0, 1], &[3, 4, 5], &[0, 0, 1], &[0, 1, 2]);
        assert_eq!(solve_3_from_2(&inst).unwrap().answer, SpecialAnswer::No);
    }

    #[test]
    fn four_paths_immediate_exit() {
        let arcs = [(0, 2), (0, 3), (1, 4), (1, 5)];
        let inst = kstc(6, &arcs, &[0, 1], &[2, 3, 4, 5], &[0, 0, 1, 1], &[0, 1, 2, 3]);
        let out = solve_4_from_2(&inst).unwrap();
        assert_yes(&inst, &out);
        assert_eq!(out.rounds, 2);
    }

    #[test]
    fn four_paths_sharing_a_cut_vertex() {
        // both sources must pass m=2
        let arcs = [(0, 2), (1, 2), (2, 3), (2, 4), (2, 5), (2, 6)];
        let inst = kstc(7, &arcs, &[0, 1], &[3, 4, 5, 6], &[0, 0, 1, 1], &[0, 1, 2, 3]);
        assert_eq!(solve_4_from_2(&inst).unwrap().answer, SpecialAnswer::No);
    }

    #[test]
    fn three_sinks_equal_is_rejected() {
        let arcs = [(0, 2), (1, 2)];
        let inst = kstc(3, &arcs, &[0, 1], &[2], &[0, 0, 1, 1], &[0, 0, 0, 0]);
        assert!(solve_4_from_2(&inst).is_err());
        let inst = kstc(4, &[(0, 2), (1, 2), (0, 3), (1, 3)], &[0, 1], &[2, 3], &[0, 0, 1, 1], &[0, 0, 0, 1]);
        assert_eq!(solve_4_from_2(&inst).unwrap().answer, SpecialAnswer::No);
    }

    #[test]
    fn reversal_matches_forward() {
        let arcs = [(2, 0), (3, 0), (4, 1)];
        let inst = kstc(5, &arcs, &[2, 3, 4], &[0, 1], &[0, 1, 2], &[0, 0, 1]);
        assert_yes(&inst, &solve_reversed(&inst).unwrap());
        let blocked = kstc(6, &[(3, 2), (4, 2), (2, 0), (2, 1), (5, 2)], &[3, 4, 5], &[0, 1], &[0, 1, 2], &[0, 0, 1]);
        assert_eq!(solve_reversed(&blocked).unwrap().answer, SpecialAnswer::No);
    }

    #[test]
    fn shape_errors() {
        let inst = kstc(3, &[], &[0], &[1, 2], &[0, 0, 0], &[0, 1, 1]);
        assert!(matches!(solve_3_from_2(&inst), Err(ShapeError::Mismatch { .. })));
        let inst = kstc(3, &[], &[0, 1], &[1, 2], &[0, 0, 1], &[0, 1, 1]);
        assert_eq!(solve_3_from_2(&inst), Err(ShapeError::RepeatedTerminal(1)));
    }
}
