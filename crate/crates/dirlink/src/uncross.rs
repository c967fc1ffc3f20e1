//! Quadrants of separation pairs, corner separations and uncrossing.

use thiserror::Error;

use crate::graph::{DiGraph, Vertex};
use crate::separation::{intersect, is_subset, minus, union, Separation, SeparationError, Side};

/// The four intersections of two separations with their corners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadrantDecomposition {
    pub top: Vec<Vertex>,
    pub left: Vec<Vertex>,
    pub right: Vec<Vertex>,
    pub bottom: Vec<Vertex>,
    /// `[top, left, right, bottom]`, each intersected with both separators.
    pub corners: [Vec<Vertex>; 4],
}

impl QuadrantDecomposition {
    pub fn quadrants(&self) -> [&[Vertex]; 4] {
        [&self.top, &self.left, &self.right, &self.bottom]
    }
}

/// `top = A1∩A2`, `left = A1∩B2`, `right = B1∩A2`, `bottom = B1∩B2`.
pub fn quadrants(s1: &Separation, s2: &Separation) -> QuadrantDecomposition {
    let seps = union(&s1.separator(), &s2.separator());
    let top = intersect(&s1.a, &s2.a);
    let left = intersect(&s1.a, &s2.b);
    let right = intersect(&s1.b, &s2.a);
    let bottom = intersect(&s1.b, &s2.b);
    let corners = [&top, &left, &right, &bottom].map(|q| intersect(q, &seps));
    QuadrantDecomposition {
        top,
        left,
        right,
        bottom,
        corners,
    }
}

/// Every quadrant has a vertex outside both separators.
pub fn crosses(s1: &Separation, s2: &Separation) -> bool {
    let q = quadrants(s1, s2);
    q.quadrants().iter().zip(&q.corners).all(|(quad, corner)| quad.len() > corner.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UncrossError {
    #[error("separation {0} is not oriented from its first side")]
    Orientation(usize),
    #[error("input {index} is invalid: {reason}")]
    BadInput { index: usize, reason: String },
    #[error("an order-{} separation cuts a terminal-free part off", .0.order())]
    SmallSeparation(Separation),
    #[error("majority markers: {0}")]
    Majority(String),
    #[error("postcondition failed: {0}")]
    Postcondition(String),
}

fn build(g: &DiGraph, a: &[Vertex], b: &[Vertex]) -> Separation {
    Separation::new(g, a, b, Side::A).expect("corner sides are separations")
}

/// `X_T = (A1∩A2, B1∪B2)` and `X_B = (A1∪A2, B1∩B2)` for two separations
/// oriented from `A`.
pub fn corner_separations(g: &DiGraph, s1: &Separation, s2: &Separation) -> Result<(Separation, Separation), UncrossError> {
    for (i, s) in [s1, s2].into_iter().enumerate() {
        if s.plus != Side::A {
            return Err(UncrossError::Orientation(i + 1));
        }
    }
    let top = Separation::new(g, &intersect(&s1.a, &s2.a), &union(&s1.b, &s2.b), Side::A);
    let bottom = Separation::new(g, &union(&s1.a, &s2.a), &intersect(&s1.b, &s2.b), Side::A);
    let bad = |e: SeparationError| UncrossError::Postcondition(format!("corner is not a separation: {e}"));
    let (top, bottom) = (top.map_err(bad)?, bottom.map_err(bad)?);
    if top.order() + bottom.order() > s1.order() + s2.order() {
        return Err(UncrossError::Postcondition("corner orders exceed the input orders".into()));
    }
    Ok((top, bottom))
}

/// One vertex standing for the far part of each separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MajorityTags {
    pub first: Vertex,
    pub second: Vertex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Uncrossed {
    /// A separation whose far side holds both far sides.
    Single(Separation),
    /// Two separations with disjoint far interiors, one of them an input.
    Pair(Separation, Separation),
}

fn separates(s: &Separation, x: Vertex, y: Vertex) -> bool {
    let near = s.near_interior();
    let far = s.far_interior();
    let side = |v: Vertex| (near.binary_search(&v).is_ok(), far.binary_search(&v).is_ok());
    matches!((side(x), side(y)), ((true, _), (_, true)) | ((_, true), (true, _)))
}

/// A separation with terminals in `A` and a non-empty far interior, if its
/// order is at most one.
fn small(s: Separation) -> Option<Separation> {
    (s.order() <= 1 && !s.far_interior().is_empty()).then_some(s)
}

/// Uncrosses two separations of order at most two that both keep
/// `terminals` on their `A` side.
///
/// Returns a single separation containing both far sides when one exists
/// among the candidates, and otherwise a pair with disjoint far interiors in
/// which one input is kept verbatim and the far side of each output still
/// contains its marker. Fails with the offending separation when the graph
/// has a separation of order at most one that the argument excludes.
pub fn uncross(g: &DiGraph, s1: &Separation, s2: &Separation, terminals: &[Vertex], tags: MajorityTags) -> Result<Uncrossed, UncrossError> {
    for (i, s) in [s1, s2].into_iter().enumerate() {
        let bad = |reason: String| UncrossError::BadInput { index: i + 1, reason };
        s.validate(g).map_err(|e| bad(e.to_string()))?;
        if s.order() > 2 {
            return Err(bad(format!("order {} exceeds 2", s.order())));
        }
        if !is_subset(terminals, &s.a) {
            return Err(bad("a terminal lies outside A".into()));
        }
    }
    if s1.b.binary_search(&tags.first).is_err() || s2.b.binary_search(&tags.second).is_err() {
        return Err(UncrossError::Majority("each marker must lie on the far side of its separation".into()));
    }
    if !separates(s1, tags.first, tags.second) && !separates(s2, tags.first, tags.second) {
        return Err(UncrossError::Majority("neither separation separates the markers".into()));
    }
    let out = uncross_cases(g, s1, s2, tags)?;
    check_uncrossed(g, s1, s2, terminals, tags, &out)?;
    Ok(out)
}

fn uncross_cases(g: &DiGraph, s1: &Separation, s2: &Separation, tags: MajorityTags) -> Result<Uncrossed, UncrossError> {
    if is_subset(&s1.b, &s2.b) {
        return Ok(Uncrossed::Single(s2.clone()));
    }
    if is_subset(&s2.b, &s1.b) {
        return Ok(Uncrossed::Single(s1.clone()));
    }
    if intersect(&s1.far_interior(), &s2.far_interior()).is_empty() {
        return Ok(Uncrossed::Pair(s1.clone(), s2.clone()));
    }
    if s1.plus == s2.plus {
        // Both orientations give the same two corners.
        let top = build(g, &intersect(&s1.a, &s2.a), &union(&s1.b, &s2.b));
        if top.order() <= 2 {
            return Ok(Uncrossed::Single(top));
        }
        let bottom = build(g, &union(&s1.a, &s2.a), &intersect(&s1.b, &s2.b));
        return Err(small(bottom).map_or_else(
            || UncrossError::Postcondition("top corner has order above 2".into()),
            UncrossError::SmallSeparation,
        ));
    }
    // Mixed orientation: make the first separation the one oriented from A.
    let swap = s1.plus != Side::A;
    let (p, q, mp, mq) = if swap {
        (s2, s1, tags.second, tags.first)
    } else {
        (s1, s2, tags.first, tags.second)
    };
    if minus(&intersect(&p.a, &q.b), &q.a).is_empty() {
        return Ok(Uncrossed::Single(p.clone()));
    }
    if minus(&intersect(&p.b, &q.a), &p.a).is_empty() {
        return Ok(Uncrossed::Single(q.clone()));
    }
    // X_T = (A_p ∩ B_q, A_q ∪ B_p) read from the terminal side.
    let top = build(g, &union(&q.a, &p.b), &intersect(&p.a, &q.b));
    let bottom = build(g, &union(&p.a, &q.b), &intersect(&q.a, &p.b));
    for corner in [&top, &bottom] {
        if corner.order() != 2 {
            return Err(small(corner.clone()).map_or_else(
                || UncrossError::Postcondition(format!("corner has order {}", corner.order())),
                UncrossError::SmallSeparation,
            ));
        }
    }
    let in_top = |v: Vertex| top.far_interior().binary_search(&v).is_ok();
    let in_bottom = |v: Vertex| bottom.far_interior().binary_search(&v).is_ok();
    let (p2, q2) = if in_top(mq) {
        (p.clone(), top)
    } else if in_bottom(mp) {
        (bottom, q.clone())
    } else {
        return Err(UncrossError::Majority("markers lie in neither the top nor the bottom quadrant".into()));
    };
    Ok(if swap {
        Uncrossed::Pair(q2, p2)
    } else {
        Uncrossed::Pair(p2, q2)
    })
}

/// Checks the outcome against the guarantees of [`uncross`].
pub fn check_uncrossed(
    g: &DiGraph,
    s1: &Separation,
    s2: &Separation,
    terminals: &[Vertex],
    tags: MajorityTags,
    out: &Uncrossed,
) -> Result<(), UncrossError> {
    let fail = |m: &str| Err(UncrossError::Postcondition(m.into()));
    let outs: Vec<&Separation> = match out {
        Uncrossed::Single(s) => vec![s],
        Uncrossed::Pair(a, b) => vec![a, b],
    };
    for s in &outs {
        if s.validate(g).is_err() {
            return fail("output is not a separation");
        }
        if s.order() > 2 {
            return fail("output order exceeds 2");
        }
        if !is_subset(terminals, &s.a) {
            return fail("a terminal left the A side");
        }
    }
    match out {
        Uncrossed::Single(s) => {
            if !is_subset(&union(&s1.far_interior(), &s2.far_interior()), &s.b) {
                return fail("single output misses part of a far side");
            }
        }
        Uncrossed::Pair(a, b) => {
            if !intersect(&a.far_interior(), &b.far_interior()).is_empty() {
                return fail("far interiors intersect");
            }
            if a != s1 && b != s2 {
                return fail("neither input was kept");
            }
            if a.b.binary_search(&tags.first).is_err() || b.b.binary_search(&tags.second).is_err() {
                return fail("a marker left its far side");
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sep(g: &DiGraph, a: &[Vertex], b: &[Vertex]) -> Separation {
        Separation::new(g, a, b, Side::A).unwrap()
    }

    #[test]
    fn quadrants_cover_and_equal_inputs_do_not_cross() {
        let g = DiGraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let s = sep(&g, &[0, 1, 2], &[2, 3]);
        let q = quadrants(&s, &s);
        assert_eq!(q.left, vec![2]);
        assert_eq!(q.right, vec![2]);
        assert!(!crosses(&s, &s));
        let (top, bottom) = corner_separations(&g, &s, &s).unwrap();
        assert_eq!((top.clone(), bottom), (s.clone(), s));
    }

    /// Terminal 0 on top, far parts 3 and 4 overlapping in 5.
    fn crossing_fixture() -> (DiGraph, Separation, Separation) {
        // 0 -> 1, 0 -> 2; 1 -> 3, 2 -> 4; 3 -> 5, 4 -> 5; 5 -> 6 (bottom); 1,2 -> 6
        let arcs = [(0, 1), (0, 2), (1, 3), (2, 4), (3, 5), (4, 5), (1, 6), (2, 6), (5, 6)];
        let g = DiGraph::from_arcs(7, &arcs).unwrap();
        let s1 = sep(&g, &[0, 1, 2, 4], &[1, 2, 3, 5, 6]);
        let s2 = sep(&g, &[0, 1, 2, 3], &[1, 2, 4, 5, 6]);
        (g, s1, s2)
    }

    #[test]
    fn aligned_crossing_pair_merges_into_top_corner() {
        let (g, s1, s2) = crossing_fixture();
        let tags = MajorityTags { first: 3, second: 4 };
        let out = uncross(&g, &s1, &s2, &[0], tags).unwrap();
        let Uncrossed::Single(s) = out else { panic!("expected one separation") };
        assert_eq!(s.a, vec![0, 1, 2]);
        assert_eq!(s.separator(), vec![1, 2]);
    }

    #[test]
    fn nested_inputs_return_the_outer_one() {
        let (g, s1, _) = crossing_fixture();
        let inner = sep(&g, &[0, 1, 2, 3, 4], &[1, 2, 5, 6]);
        let tags = MajorityTags { first: 3, second: 5 };
        assert_eq!(uncross(&g, &s1, &inner, &[0], tags), Ok(Uncrossed::Single(s1)));
    }

    #[test]
    fn mixed_orientation_keeps_one_input() {
        let arcs = [(0, 4), (1, 4), (2, 5), (5, 3), (5, 6), (6, 2)];
        let g = DiGraph::from_arcs(7, &arcs).unwrap();
        let s1 = sep(&g, &[0, 1, 2, 5, 6], &[1, 2, 3, 4]);
        let s2 = sep(&g, &[0, 1, 2, 4, 6], &[1, 2, 3, 5]);
        assert_eq!((s1.plus, s2.plus), (Side::A, Side::B));
        assert!(crosses(&s1, &s2));
        let tags = MajorityTags { first: 4, second: 5 };
        let Ok(Uncrossed::Pair(a, b)) = uncross(&g, &s1, &s2, &[0], tags) else { panic!("expected a pair") };
        assert_eq!(a, s1);
        assert_eq!((b.a, b.b), (vec![0, 1, 2, 3, 4, 6], vec![1, 2, 5]));
    }

    #[test]
    fn corner_orientation_is_required() {
        let (g, s1, _) = crossing_fixture();
        let s = s1.swapped();
        assert_eq!(corner_separations(&g, &s, &s1), Err(UncrossError::Orientation(1)));
    }
}
