//! The bounded-width dynamic program on random instances, compared with the
//! exhaustive oracle.

use dirlink::dp::{solve_bounded_dtw, BigVertexSpec, DpOptions, DtwAnswer};
use dirlink::dtw::{decompose_with_root, width, DecompOutcome};
use dirlink::generators::{gen_random, rng};
use dirlink::graph::{normalize, Instance};
use dirlink::oracle::{brute_force_solve, OracleAnswer, SearchBudget};
use rand::Rng;

fn main() {
    let mut r = rng(2024);
    for i in 0..8 {
        let n = r.gen_range(5..=9);
        let g = gen_random(n, 0.25, r.gen());
        let pairs = (0..2).map(|_| (r.gen_range(0..n), r.gen_range(0..n))).collect();
        let inst = normalize(&Instance::new(g, pairs, 2));
        let DecompOutcome::Decomposition(d) = decompose_with_root(&inst.g, &inst.terminals(), 4) else {
            println!("{i}: no decomposition");
            continue;
        };
        let dp = solve_bounded_dtw(&inst, &BigVertexSpec::none(4), &d, DpOptions::default()).unwrap();
        let oracle = brute_force_solve(&inst, SearchBudget::default()).answer;
        println!(
            "{i}: n={} width={} dp={} oracle={}",
            inst.g.n(),
            width(&d).width,
            if matches!(dp, DtwAnswer::Yes(_)) { "yes" } else { "no" },
            if matches!(oracle, OracleAnswer::Yes(_)) { "yes" } else { "no" }
        );
    }
}
