//! Quadrants, corner separations and uncrossing of two 2-separations.

use dirlink::graph::DiGraph;
use dirlink::separation::{Separation, Side};
use dirlink::uncross::{corner_separations, crosses, quadrants, uncross, MajorityTags};

fn main() {
    // Terminal 0 on top; far parts around 3 and 4 overlap in 5 and 6.
    let arcs = [(0, 1), (0, 2), (1, 3), (2, 4), (3, 5), (4, 5), (1, 6), (2, 6), (5, 6)];
    let g = DiGraph::from_arcs(7, &arcs).unwrap();
    let s1 = Separation::new(&g, &[0, 1, 2, 4], &[1, 2, 3, 5, 6], Side::A).unwrap();
    let s2 = Separation::new(&g, &[0, 1, 2, 3], &[1, 2, 4, 5, 6], Side::A).unwrap();
    let q = quadrants(&s1, &s2);
    println!("top {:?} left {:?} right {:?} bottom {:?}", q.top, q.left, q.right, q.bottom);
    println!("crossing: {}", crosses(&s1, &s2));
    let (top, bottom) = corner_separations(&g, &s1, &s2).unwrap();
    println!("corners: top separator {:?}, bottom separator {:?}", top.separator(), bottom.separator());
    let out = uncross(&g, &s1, &s2, &[0], MajorityTags { first: 3, second: 4 }).unwrap();
    println!("uncrossed: {out:?}");
}
