//! Disjoint paths or a minimum separator, and the cut-vertex sequence from a
//! source to two targets.

use dirlink::graph::DiGraph;
use dirlink::menger::{cut_sequence, disjoint_paths_or_separator, Mode, MengerResult, Nearest};

fn main() {
    // Two routes 0 -> 5 that both pass vertex 3.
    let arcs = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 6), (4, 5), (6, 5)];
    let g = DiGraph::from_arcs(7, &arcs).unwrap();
    for k in [1, 2] {
        match disjoint_paths_or_separator(&g, &[0], &[5], k, Mode::Internal, Nearest::Source) {
            MengerResult::Paths(ps) => {
                let vs: Vec<_> = ps.iter().map(|p| p.vertices.clone()).collect();
                println!("k={k}: paths {vs:?}");
            }
            MengerResult::Separation(s) => println!("k={k}: separator {:?} (A = {:?})", s.separator(), s.a),
        }
    }
    let seq = cut_sequence(&g, 0, 4, 6).expect("both targets reachable");
    println!("cut vertices from 0 towards 4 and 6: {:?}", seq.vertices);
}
