use dirlink::dp::{solve_bounded_dtw, BigVertexSpec, DpOptions, DtwAnswer};
use dirlink::dtw::{check_nice, decompose_with_root, DecompOutcome};
use dirlink::generators::{gen_random, rng};
use dirlink::graph::{normalize, verify_linkage, Instance};
use dirlink::oracle::{brute_force_solve, OracleAnswer, SearchBudget};
use rand::Rng;

#[test]
fn dp_agrees_with_search_on_random_instances() {
    let mut r = rng(11);
    for seed in 0..120u64 {
        let n = r.gen_range(2..=9);
        let k = r.gen_range(1..=3usize);
        let p = r.gen_range(0.1..0.3);
        let g = gen_random(n, p, seed);
        let pairs = (0..k).map(|_| (r.gen_range(0..n), r.gen_range(0..n))).collect();
        let inst = normalize(&Instance::new(g, pairs, 2));
        let DecompOutcome::Decomposition(d) = decompose_with_root(&inst.g, &inst.terminals(), 4) else {
            panic!("seed {seed}: no decomposition of width at most 11");
        };
        check_nice(&inst.g, &d).unwrap();
        let dp = solve_bounded_dtw(&inst, &BigVertexSpec::none(4), &d, DpOptions::default()).unwrap();
        let bf = brute_force_solve(&inst, SearchBudget::default()).answer;
        match (&dp, &bf) {
            (DtwAnswer::Yes(l), OracleAnswer::Yes(_)) => verify_linkage(&inst, l).unwrap(),
            (DtwAnswer::No, OracleAnswer::No) => {}
            _ => panic!("seed {seed}: dp {dp:?} vs search {bf:?}"),
        }
    }
}
