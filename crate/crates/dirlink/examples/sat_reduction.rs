//! Reduces a 3-CNF formula to congestion-2 routing, builds the witness for a
//! satisfying assignment and reads the assignment back.

use dirlink::graph::verify_linkage;
use dirlink::hardness::{construct_witness, extract_assignment, reduce_sat, sat_brute, CnfFormula};

fn main() {
    let phi = CnfFormula::parse_dimacs("p cnf 3 2\n1 -2 3 0\n-1 2 2 0\n").unwrap();
    let balanced = phi.balance_polarities();
    let (inst, rmap) = reduce_sat(&balanced, 2).unwrap();
    println!("formula: n={} m={} -> {} vertices, {} arcs, {} pairs", phi.n, phi.m(), inst.g.n(), inst.g.m(), inst.k());
    let beta = sat_brute(&balanced).unwrap().expect("satisfiable");
    println!("assignment {beta:?}");
    let l = construct_witness(&inst, &balanced, &beta, &rmap).unwrap();
    verify_linkage(&inst, &l).expect("witness is a valid linkage");
    for (i, p) in l.paths.iter().enumerate() {
        println!("path {}: {} vertices", i + 1, p.vertices.len());
    }
    let back = extract_assignment(&l, &balanced, &rmap).unwrap();
    println!("read back {back:?}, satisfies: {}", phi.satisfied_by(&back));
}
