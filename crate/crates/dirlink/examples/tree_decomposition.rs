//! Directed tree decompositions of cycles, grids and walls.

use dirlink::dtw::{check_decomposition, check_nice, compute_smallest, serialize_decomposition, width, DecompOutcome};
use dirlink::generators::{gen_cyl_grid, gen_cyl_wall};
use dirlink::graph::DiGraph;

fn main() {
    let cycle = DiGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    show("4-cycle", &cycle);
    show("grid of order 2", &gen_cyl_grid(2).g);
    show("wall of order 2", &gen_cyl_wall(2).g);
}

fn show(name: &str, g: &DiGraph) {
    match compute_smallest(g, 4) {
        DecompOutcome::Decomposition(d) => {
            check_decomposition(g, &d).expect("valid");
            check_nice(g, &d).expect("nice");
            println!("{name}: {} nodes, width {}", d.len(), width(&d).width);
            print!("{}", serialize_decomposition(&d));
        }
        DecompOutcome::Certificate(c) => println!("{name}: no decomposition with bags <= {}; stuck region {:?}", c.kmax, c.region),
    }
}
