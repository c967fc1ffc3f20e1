//! Three congestion-2 paths from two sources, checked against the oracle.

use dirlink::graph::{verify_linkage, DiGraph};
use dirlink::oracle::{brute_force_solve, OracleAnswer, SearchBudget};
use dirlink::special::{solve_3_from_2, solve_4_from_2, KstcInstance, SpecialAnswer};

fn main() {
    // x1 = 0 reaches y1 = 3 and y2 = 4 through the shared vertex 2;
    // x2 = 1 reaches y3 = 4 directly or through 2.
    let arcs = [(0, 2), (2, 3), (2, 4), (1, 4), (1, 2)];
    let g = DiGraph::from_arcs(5, &arcs).unwrap();
    let three = KstcInstance {
        g: g.clone(),
        x: vec![0, 1],
        y: vec![3, 4],
        sigma: vec![0, 0, 1],
        tau: vec![0, 1, 1],
        c: 2,
    };
    report("three paths", &three, solve_3_from_2(&three).unwrap().answer);
    let four = KstcInstance {
        sigma: vec![0, 0, 1, 1],
        tau: vec![0, 1, 1, 0],
        ..three
    };
    report("four paths", &four, solve_4_from_2(&four).unwrap().answer);
}

fn report(name: &str, inst: &KstcInstance, answer: SpecialAnswer) {
    let plain = inst.to_instance();
    let oracle = matches!(brute_force_solve(&plain, SearchBudget::default()).answer, OracleAnswer::Yes(_));
    match answer {
        SpecialAnswer::Yes(l) => {
            verify_linkage(&plain, &l).unwrap();
            let vs: Vec<_> = l.paths.iter().map(|p| p.vertices.clone()).collect();
            println!("{name}: yes {vs:?} (oracle agrees: {oracle})");
        }
        SpecialAnswer::No => println!("{name}: no (oracle agrees: {})", !oracle),
    }
}
