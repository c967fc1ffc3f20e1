//! Directed separations `(A, B)` with their orientation.

use thiserror::Error;

use crate::graph::{DiGraph, Vertex};

/// One of the two sides of a separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeparationError {
    #[error("sides do not cover vertex {0}")]
    NotCovering(Vertex),
    #[error("cross arcs run in both directions (e.g. arc {0})")]
    BothDirections(usize),
    #[error("arc {0} leaves the side marked as receiving")]
    WrongOrientation(usize),
    #[error("vertex {0} out of range")]
    OutOfRange(Vertex),
}

/// A pair of vertex sets covering `V` with cross arcs in at most one direction.
///
/// `plus` names the side cross arcs may leave from. When there are no cross
/// arcs at all the choice is made by the caller (see [`Separation::new`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Separation {
    pub a: Vec<Vertex>,
    pub b: Vec<Vertex>,
    pub plus: Side,
}

/// Counts of cross arcs `A\B -> B\A` and `B\A -> A\B`, with one example arc each.
fn cross_arcs(g: &DiGraph, in_a: &[bool], in_b: &[bool]) -> (Option<usize>, Option<usize>) {
    let mut ab = None;
    let mut ba = None;
    for (id, &(u, v)) in g.arcs().iter().enumerate() {
        let u_only_a = in_a[u] && !in_b[u];
        let u_only_b = in_b[u] && !in_a[u];
        let v_only_a = in_a[v] && !in_b[v];
        let v_only_b = in_b[v] && !in_a[v];
        if u_only_a && v_only_b && ab.is_none() {
            ab = Some(id);
        }
        if u_only_b && v_only_a && ba.is_none() {
            ba = Some(id);
        }
    }
    (ab, ba)
}

fn mask(n: usize, set: &[Vertex]) -> Result<Vec<bool>, SeparationError> {
    let mut m = vec![false; n];
    for &v in set {
        if v >= n {
            return Err(SeparationError::OutOfRange(v));
        }
        m[v] = true;
    }
    Ok(m)
}

impl Separation {
    /// Orients `(a, b)` from its cross arcs; `ambiguous` is used when none exist.
    pub fn new(g: &DiGraph, a: &[Vertex], b: &[Vertex], ambiguous: Side) -> Result<Self, SeparationError> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        a.sort_unstable();
        a.dedup();
        b.sort_unstable();
        b.dedup();
        let in_a = mask(g.n(), &a)?;
        let in_b = mask(g.n(), &b)?;
        if let Some(v) = (0..g.n()).find(|&v| !in_a[v] && !in_b[v]) {
            return Err(SeparationError::NotCovering(v));
        }
        let plus = match cross_arcs(g, &in_a, &in_b) {
            (Some(x), Some(_)) => return Err(SeparationError::BothDirections(x)),
            (Some(_), None) => Side::A,
            (None, Some(_)) => Side::B,
            (None, None) => ambiguous,
        };
        Ok(Separation { a, b, plus })
    }

    pub fn validate(&self, g: &DiGraph) -> Result<(), SeparationError> {
        let in_a = mask(g.n(), &self.a)?;
        let in_b = mask(g.n(), &self.b)?;
        if let Some(v) = (0..g.n()).find(|&v| !in_a[v] && !in_b[v]) {
            return Err(SeparationError::NotCovering(v));
        }
        match (cross_arcs(g, &in_a, &in_b), self.plus) {
            ((Some(x), Some(_)), _) => Err(SeparationError::BothDirections(x)),
            ((_, Some(x)), Side::A) | ((Some(x), _), Side::B) => Err(SeparationError::WrongOrientation(x)),
            _ => Ok(()),
        }
    }

    pub fn separator(&self) -> Vec<Vertex> {
        intersect(&self.a, &self.b)
    }

    pub fn order(&self) -> usize {
        self.separator().len()
    }

    /// `B \ A`.
    pub fn far_interior(&self) -> Vec<Vertex> {
        minus(&self.b, &self.a)
    }

    /// `A \ B`.
    pub fn near_interior(&self) -> Vec<Vertex> {
        minus(&self.a, &self.b)
    }

    pub fn side(&self, s: Side) -> &[Vertex] {
        match s {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    /// `(B, A)` with the same `plus` set.
    pub fn swapped(&self) -> Separation {
        Separation {
            a: self.b.clone(),
            b: self.a.clone(),
            plus: self.plus.other(),
        }
    }
}

pub fn intersect(x: &[Vertex], y: &[Vertex]) -> Vec<Vertex> {
    x.iter().copied().filter(|v| y.binary_search(v).is_ok()).collect()
}

pub fn minus(x: &[Vertex], y: &[Vertex]) -> Vec<Vertex> {
    x.iter().copied().filter(|v| y.binary_search(v).is_err()).collect()
}

pub fn union(x: &[Vertex], y: &[Vertex]) -> Vec<Vertex> {
    let mut u: Vec<Vertex> = x.iter().chain(y).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

pub fn is_subset(x: &[Vertex], y: &[Vertex]) -> bool {
    x.iter().all(|v| y.binary_search(v).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_follows_cross_arcs() {
        // cross arc 0 -> 2 with separator {1}
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let s = Separation::new(&g, &[0, 1], &[1, 2], Side::B).unwrap();
        assert_eq!(s.plus, Side::A);
        assert_eq!(s.separator(), vec![1]);
        let h = DiGraph::from_arcs(3, &[(0, 2), (2, 0)]).unwrap();
        assert_eq!(
            Separation::new(&h, &[0, 1], &[1, 2], Side::A),
            Err(SeparationError::BothDirections(0))
        );
        let iso = DiGraph::new(3);
        assert_eq!(Separation::new(&iso, &[0, 1], &[1, 2], Side::B).unwrap().plus, Side::B);
    }

    #[test]
    fn validate_checks_cover_and_orientation() {
        let g = DiGraph::from_arcs(3, &[(0, 2)]).unwrap();
        let s = Separation {
            a: vec![0],
            b: vec![2],
            plus: Side::A,
        };
        assert_eq!(s.validate(&g), Err(SeparationError::NotCovering(1)));
        let s = Separation {
            a: vec![0, 1],
            b: vec![1, 2],
            plus: Side::B,
        };
        assert_eq!(s.validate(&g), Err(SeparationError::WrongOrientation(0)));
    }
}
