use dirlink::dp::{join_bounds, leaf_bound, BigVertexSpec};
use dirlink::dtw::{check_decomposition, check_nice, compute_decomposition, DecompOutcome};
use dirlink::format::{parse_instance, serialize_instance};
use dirlink::generators::{gen_cyl_grid, gen_cyl_wall, gen_random, rng};
use dirlink::graph::{
    denormalize_linkage, normalize, prune_useless, reachable, strongly_connected_components, verify_linkage,
    CongestionProfile, DiGraph, Instance, Vertex,
};
use dirlink::hardness::{reduce_sat, reduced_vertex_count, CnfFormula};
use dirlink::menger::{cut_sequence, disjoint_paths_or_separator, MengerResult, Mode, Nearest};
use dirlink::oracle::{brute_force_solve, brute_force_solve_with, OracleAnswer, SearchBudget};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn instance(n: usize, p: f64, k: usize, c: usize, seed: u64) -> Instance {
    let g = gen_random(n, p, seed);
    let mut r = rng(seed ^ 0x9e37);
    let pairs = (0..k).map(|_| (r.gen_range(0..n), r.gen_range(0..n))).collect();
    Instance::new(g, pairs, c)
}

fn small_instance() -> impl Strategy<Value = Instance> {
    (2usize..=7, 0.1f64..0.5, 1usize..=3, 1usize..=3, any::<u64>())
        .prop_map(|(n, p, k, c, seed)| instance(n, p, k, c, seed))
}

fn decided(inst: &Instance, prune: bool) -> Option<bool> {
    match brute_force_solve_with(inst, SearchBudget::default(), prune).answer {
        OracleAnswer::Yes(_) => Some(true),
        OracleAnswer::No => Some(false),
        OracleAnswer::Timeout => None,
    }
}

fn mask(n: usize, set: &[Vertex]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialization_round_trips(inst in small_instance()) {
        prop_assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn normalization_gives_degree_one_terminals(inst in small_instance()) {
        let norm = normalize(&inst);
        prop_assert!(norm.is_normal_form());
        prop_assert_eq!(norm.g.n(), inst.g.n() + 2 * inst.k());
        prop_assert_eq!(norm.g.m(), inst.g.m() + 2 * inst.k());
        prop_assert_eq!(&norm.g.arcs()[..inst.g.m()], inst.g.arcs());
    }

    #[test]
    fn witnesses_respect_congestion(inst in small_instance()) {
        if let OracleAnswer::Yes(l) = brute_force_solve(&inst, SearchBudget::default()).answer {
            prop_assert!(verify_linkage(&inst, &l).is_ok());
            prop_assert!(CongestionProfile::of(inst.g.n(), &l.paths).max() <= inst.c);
        }
        let norm = normalize(&inst);
        if let OracleAnswer::Yes(l) = brute_force_solve(&norm, SearchBudget::default()).answer {
            prop_assert!(verify_linkage(&inst, &denormalize_linkage(&l)).is_ok());
        }
    }

    #[test]
    fn pruning_is_idempotent(inst in small_instance()) {
        if let Some(once) = prune_useless(&inst) {
            let twice = prune_useless(&once.inst).expect("terminals survive a second pass");
            prop_assert_eq!(twice.inst, once.inst);
        }
    }

    #[test]
    fn more_congestion_never_hurts(inst in small_instance()) {
        let looser = Instance::new(inst.g.clone(), inst.pairs.clone(), inst.c + 1);
        if let (Some(true), Some(answer)) = (decided(&inst, true), decided(&looser, true)) {
            prop_assert!(answer);
        }
    }

    #[test]
    fn pruning_does_not_change_answers(inst in small_instance()) {
        let (with, without) = (decided(&inst, true), decided(&inst, false));
        if with.is_some() && without.is_some() {
            prop_assert_eq!(with, without);
        }
    }

    #[test]
    fn menger_answers_validate(
        n in 2usize..=8, p in 0.1f64..0.6, seed in any::<u64>(), k in 1usize..=4, internal in any::<bool>(),
    ) {
        let g = gen_random(n, p, seed);
        let mut vs: Vec<Vertex> = (0..n).collect();
        vs.shuffle(&mut rng(seed));
        let (s, t) = if internal { (vec![vs[0]], vec![vs[1]]) } else { (vec![vs[0]], vec![vs[n - 1]]) };
        let mode = if internal { Mode::Internal } else { Mode::Disjoint };
        match disjoint_paths_or_separator(&g, &s, &t, k, mode, Nearest::Source) {
            MengerResult::Paths(paths) => {
                prop_assert_eq!(paths.len(), k);
                let ends = mask(n, &[s.clone(), t.clone()].concat());
                let mut used = vec![false; n];
                for q in &paths {
                    prop_assert!(s.contains(&q.first()) && t.contains(&q.last()));
                    prop_assert!(q.is_simple());
                    for (i, &v) in q.vertices.iter().enumerate() {
                        let end = i == 0 || i + 1 == q.vertices.len();
                        if mode == Mode::Internal && end && ends[v] {
                            continue;
                        }
                        prop_assert!(!used[v], "vertex {} shared", v);
                        used[v] = true;
                    }
                }
            }
            MengerResult::Separation(sep) => {
                prop_assert!(sep.validate(&g).is_ok());
                prop_assert!(sep.order() < k);
                prop_assert!(s.iter().all(|v| sep.a.contains(v)) && t.iter().all(|v| sep.b.contains(v)));
                if mode == Mode::Internal {
                    prop_assert!(sep.separator().iter().all(|v| !s.contains(v) && !t.contains(v)));
                }
            }
        }
    }

    #[test]
    fn cut_sequences_are_unique_and_separate(n in 3usize..=9, p in 0.15f64..0.5, seed in any::<u64>()) {
        let g = gen_random(n, p, seed);
        let (s, t1, t2) = (0, n - 2, n - 1);
        let Ok(seq) = cut_sequence(&g, s, t1, t2) else { return Ok(()) };
        let mut arcs = g.arcs().to_vec();
        arcs.shuffle(&mut rng(seed.wrapping_add(1)));
        let shuffled = DiGraph::from_arcs(n, &arcs).unwrap();
        prop_assert_eq!(&cut_sequence(&shuffled, s, t1, t2).unwrap().vertices, &seq.vertices);
        for &v in seq.vertices.iter().filter(|&&v| v != s) {
            let reach = reachable(&g, &[s], &mask(n, &[v]));
            prop_assert!(!reach[t1] && !reach[t2], "cut vertex {} does not separate", v);
        }
    }

    #[test]
    fn decompositions_are_valid_and_nice(n in 1usize..=9, p in 0.1f64..0.5, seed in any::<u64>()) {
        let g = gen_random(n, p, seed);
        if let DecompOutcome::Decomposition(d) = compute_decomposition(&g, 3) {
            prop_assert!(check_decomposition(&g, &d).is_ok());
            prop_assert!(check_nice(&g, &d).is_ok());
            let mut seen = vec![0usize; n];
            for bag in &d.bags {
                for &v in bag {
                    seen[v] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&x| x == 1));
        }
    }

    #[test]
    fn bound_sets_ignore_input_order(n in 2usize..=6, p in 0.2f64..0.6, seed in any::<u64>()) {
        let g = gen_random(n, p, seed);
        let spec = BigVertexSpec::none(2);
        let mut bag: Vec<Vertex> = (0..n).collect();
        let straight = leaf_bound(&g, &bag, &spec, 2, 3).keys();
        bag.shuffle(&mut rng(seed));
        prop_assert_eq!(&leaf_bound(&g, &bag, &spec, 2, 3).keys(), &straight);
        let (a, b) = bag.split_at(n / 2);
        let (ta, tb) = (leaf_bound(&g, a, &spec, 2, 8), leaf_bound(&g, b, &spec, 2, 8));
        let ab = join_bounds(&g, &ta, a, &tb, b, 3).keys();
        let ba = join_bounds(&g, &tb, b, &ta, a, 3).keys();
        prop_assert_eq!(&ab, &ba);
        prop_assert_eq!(&ab, &straight);
    }
}

#[test]
fn walls_have_maximum_degree_three() {
    for k in 1..=8 {
        let w = gen_cyl_wall(k);
        for v in 0..w.g.n() {
            let deg = w.g.in_degree(v) + w.g.out_degree(v);
            assert!((2..=3).contains(&deg), "k={k} vertex {v} degree {deg}");
        }
        assert_eq!(strongly_connected_components(&w.g).len(), 1, "k={k}");
    }
}

#[test]
fn grids_are_strongly_connected() {
    for k in 1..=8 {
        let grid = gen_cyl_grid(k);
        assert_eq!(grid.g.n(), 2 * k * k);
        assert_eq!(strongly_connected_components(&grid.g).len(), 1, "k={k}");
    }
}

#[test]
fn reduction_size_is_linear_in_clauses() {
    let mut sizes = Vec::new();
    for m in 1..=6 {
        let clauses: Vec<[i32; 3]> = (0..m).map(|j| if j % 2 == 0 { [1, -1, 2] } else { [-2, 2, -1] }).collect();
        let phi = CnfFormula::new(2, clauses).unwrap().balance_polarities();
        let (inst, _) = reduce_sat(&phi, 2).unwrap();
        assert_eq!(inst.g.n(), reduced_vertex_count(2, phi.m(), 2));
        sizes.push(inst.g.n());
    }
    // Only m = 1 needs a balancing clause, so the steps from m = 2 on are equal.
    let step = sizes[2] - sizes[1];
    assert!(sizes[1..].windows(2).all(|w| w[1] - w[0] == step), "{sizes:?}");
}
