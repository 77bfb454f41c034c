//! Divisors: finitely supported integer combinations of graph points.
//!
//! A [`Divisor`] stores only its non-zero coefficients, keyed by normalized
//! [`GraphPoint`]s, so structural equality is equality of divisors. Degrees
//! and coefficients are plain machine integers; offsets and the circle class
//! invariant are exact rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num::Zero;
use thiserror::Error;

use crate::graph::{GraphError, GraphPoint, MetricGraph};
use crate::ratio::Q;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DivisorError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("the graph is not a single cycle")]
    NotACycle,
}

/// Finitely supported integer-valued function on the points of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Divisor {
    coeffs: BTreeMap<GraphPoint, i64>,
}

impl Divisor {
    pub fn zero() -> Self {
        Divisor::default()
    }

    /// Builds a divisor from (point, coefficient) pairs, summing repeats.
    pub fn from_entries(entries: impl IntoIterator<Item = (GraphPoint, i64)>) -> Self {
        let mut d = Divisor::zero();
        for (p, c) in entries {
            d.add_at(p, c);
        }
        d
    }

    /// A single chip at `p`.
    pub fn single(p: GraphPoint) -> Self {
        Divisor::from_entries([(p, 1)])
    }

    pub fn coeff(&self, p: &GraphPoint) -> i64 {
        self.coeffs.get(p).copied().unwrap_or(0)
    }

    /// Adds `c` to the coefficient at `p`, dropping the entry when it
    /// becomes zero.
    pub fn add_at(&mut self, p: GraphPoint, c: i64) {
        if c == 0 {
            return;
        }
        match self.coeffs.entry(p) {
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == 0 {
                    slot.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
        }
    }

    /// Support points with their non-zero coefficients, in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&GraphPoint, i64)> {
        self.coeffs.iter().map(|(p, c)| (p, *c))
    }

    pub fn support(&self) -> impl Iterator<Item = &GraphPoint> {
        self.coeffs.keys()
    }

    pub fn support_size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of all coefficients.
    pub fn degree(&self) -> i64 {
        self.coeffs.values().sum()
    }

    /// Sum of the coefficients at points satisfying `pred`.
    pub fn restrict_degree(&self, pred: impl Fn(&GraphPoint) -> bool) -> i64 {
        self.coeffs
            .iter()
            .filter(|(p, _)| pred(p))
            .map(|(_, c)| *c)
            .sum()
    }

    pub fn is_effective(&self) -> bool {
        self.coeffs.values().all(|c| *c >= 0)
    }

    /// True when every coefficient away from `p` is non-negative.
    pub fn is_effective_off(&self, p: &GraphPoint) -> bool {
        self.coeffs.iter().all(|(q, c)| *c >= 0 || q == p)
    }

    /// The effective divisor `max(-D, 0)`, so `D + neg_part(D) >= 0`.
    pub fn neg_part(&self) -> Divisor {
        Divisor::from_entries(
            self.coeffs
                .iter()
                .filter(|(_, c)| **c < 0)
                .map(|(p, c)| (p.clone(), -*c)),
        )
    }

    /// The effective divisor `max(D, 0)`.
    pub fn pos_part(&self) -> Divisor {
        Divisor::from_entries(
            self.coeffs
                .iter()
                .filter(|(_, c)| **c > 0)
                .map(|(p, c)| (p.clone(), *c)),
        )
    }

    pub fn scaled(&self, k: i64) -> Divisor {
        Divisor::from_entries(self.coeffs.iter().map(|(p, c)| (p.clone(), c * k)))
    }

    /// Checks that every support point lies on `g`.
    pub fn validate_on(&self, g: &MetricGraph) -> Result<(), DivisorError> {
        for p in self.support() {
            g.check_point(p)?;
        }
        Ok(())
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, c) in &self.coeffs {
            if !first {
                write!(f, " ")?;
            }
            if *c >= 0 && !first {
                write!(f, "+")?;
            }
            write!(f, "{c}[{p}]")?;
            first = false;
        }
        Ok(())
    }
}

impl Add for &Divisor {
    type Output = Divisor;
    fn add(self, rhs: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, c) in rhs.iter() {
            out.add_at(p.clone(), c);
        }
        out
    }
}

impl Sub for &Divisor {
    type Output = Divisor;
    fn sub(self, rhs: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, c) in rhs.iter() {
            out.add_at(p.clone(), -c);
        }
        out
    }
}

impl Neg for &Divisor {
    type Output = Divisor;
    fn neg(self) -> Divisor {
        self.scaled(-1)
    }
}

/// Arc-length coordinates of a graph that is a single cycle: every vertex
/// has valence 2, the genus is 1, and there are no rays.
///
/// Positions are measured from the lexicographically smallest vertex along
/// the incident edge with the smaller id, so they are deterministic for a
/// fixed graph.
pub struct CycleCoordinates {
    positions: BTreeMap<String, Q>,
    directions: BTreeMap<String, EdgePlacement>,
    circumference: Q,
}

struct EdgePlacement {
    start: Q,
    forward: bool,
    length: Q,
}

impl CycleCoordinates {
    pub fn new(g: &MetricGraph) -> Result<Self, DivisorError> {
        if g.genus() != 1 || g.has_rays() {
            return Err(DivisorError::NotACycle);
        }
        for v in g.vertex_ids() {
            if g.valence(v) != 2 {
                return Err(DivisorError::NotACycle);
            }
        }

        let base = g.base_vertex().clone();
        let mut positions: BTreeMap<String, Q> = BTreeMap::new();
        let mut directions: BTreeMap<String, EdgePlacement> = BTreeMap::new();
        positions.insert(base.clone(), Q::zero());

        // Walk the cycle once, starting along the smallest incident edge id.
        let mut at = base.clone();
        let mut pos = Q::zero();
        let mut prev_edge: Option<String> = None;
        loop {
            let next = g
                .edges()
                .filter(|(id, e)| {
                    (e.ends.0 == at || e.ends.1 == at) && Some(*id) != prev_edge.as_ref()
                })
                .map(|(id, _)| id.clone())
                .min();
            let next = match next {
                Some(id) => id,
                None => return Err(DivisorError::NotACycle),
            };
            let edge = g.edge(&next).expect("edge id came from the graph");
            let forward = edge.ends.0 == at;
            directions.insert(
                next.clone(),
                EdgePlacement {
                    start: pos.clone(),
                    forward,
                    length: edge.length.clone(),
                },
            );
            pos = &pos + &edge.length;
            at = if forward {
                edge.ends.1.clone()
            } else {
                edge.ends.0.clone()
            };
            prev_edge = Some(next);
            if at == base {
                break;
            }
            positions.insert(at.clone(), pos.clone());
        }
        if directions.len() != g.edge_count() {
            return Err(DivisorError::NotACycle);
        }

        Ok(CycleCoordinates {
            positions,
            directions,
            circumference: pos,
        })
    }

    pub fn circumference(&self) -> &Q {
        &self.circumference
    }

    /// Arc position of a point, in `[0, circumference)`.
    pub fn position(&self, p: &GraphPoint) -> Result<Q, DivisorError> {
        let raw = match p {
            GraphPoint::Vertex(v) => self
                .positions
                .get(v)
                .cloned()
                .ok_or_else(|| DivisorError::Graph(GraphError::UnknownVertex(v.clone())))?,
            GraphPoint::OnEdge(e, t) => {
                let placement = self
                    .directions
                    .get(e)
                    .ok_or_else(|| DivisorError::Graph(GraphError::UnknownEdge(e.clone())))?;
                if placement.forward {
                    &placement.start + t
                } else {
                    &placement.start + &(&placement.length - t)
                }
            }
            GraphPoint::OnRay(r, _) => {
                return Err(DivisorError::Graph(GraphError::UnknownRay(r.clone())))
            }
        };
        Ok(self.reduce_mod(&raw))
    }

    fn reduce_mod(&self, x: &Q) -> Q {
        let l = &self.circumference;
        let q = (x / l).floor();
        x - &(l * &q)
    }
}

/// Invariant classifying divisors on a cycle up to linear equivalence: the
/// sum of coefficient-weighted arc positions, reduced modulo the
/// circumference. Two divisors on the same cycle are linearly equivalent
/// exactly when their degrees and invariants both agree.
pub fn circle_class_invariant(g: &MetricGraph, d: &Divisor) -> Result<Q, DivisorError> {
    d.validate_on(g)?;
    let coords = CycleCoordinates::new(g)?;
    let mut acc = Q::zero();
    for (p, c) in d.iter() {
        let pos = coords.position(p)?;
        acc = &acc + &(&pos * &crate::ratio::qi(c));
    }
    Ok(coords.reduce_mod(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{circle4, theta};
    use crate::ratio::{q, qi};

    fn w() -> GraphPoint {
        GraphPoint::OnEdge("e".to_owned(), qi(2))
    }

    #[test]
    fn degree_and_coefficients() {
        let d = Divisor::from_entries([
            (GraphPoint::vertex("v0"), 1),
            (w(), 2),
        ]);
        assert_eq!(d.degree(), 3);
        assert_eq!(d.coeff(&w()), 2);
        assert_eq!(d.coeff(&GraphPoint::vertex("nowhere")), 0);
        assert_eq!(Divisor::zero().degree(), 0);

        let mixed = Divisor::from_entries([
            (GraphPoint::vertex("u"), 2),
            (GraphPoint::vertex("v"), -1),
        ]);
        assert_eq!(mixed.degree(), 1);
    }

    #[test]
    fn entries_cancel_to_nothing() {
        let mut d = Divisor::single(w());
        d.add_at(w(), -1);
        assert!(d.is_zero());
        assert_eq!(d, Divisor::zero());
    }

    #[test]
    fn restriction_splits_the_degree() {
        let d = Divisor::from_entries([
            (GraphPoint::vertex("v0"), 1),
            (w(), 2),
            (GraphPoint::OnEdge("e".to_owned(), qi(3)), -1),
        ]);
        let on_vertices = d.restrict_degree(|p| matches!(p, GraphPoint::Vertex(_)));
        let on_interiors = d.restrict_degree(|p| matches!(p, GraphPoint::OnEdge(..)));
        assert_eq!(on_vertices, 1);
        assert_eq!(on_interiors, 1);
        assert_eq!(on_vertices + on_interiors, d.degree());
        assert_eq!(d.restrict_degree(|_| false), 0);
    }

    #[test]
    fn effectivity_and_parts() {
        let d = Divisor::from_entries([
            (GraphPoint::vertex("v0"), 2),
            (w(), -3),
        ]);
        assert!(!d.is_effective());
        assert!(d.is_effective_off(&w()));
        assert_eq!(d.neg_part(), Divisor::from_entries([(w(), 3)]));
        assert_eq!(d.pos_part(), Divisor::from_entries([(GraphPoint::vertex("v0"), 2)]));
        assert_eq!(&d + &d.neg_part(), d.pos_part());
    }

    #[test]
    fn arithmetic_is_coefficientwise() {
        let a = Divisor::from_entries([(GraphPoint::vertex("v0"), 1), (w(), 2)]);
        let b = Divisor::from_entries([(w(), -2), (GraphPoint::vertex("v0"), 4)]);
        let sum = &a + &b;
        assert_eq!(sum, Divisor::from_entries([(GraphPoint::vertex("v0"), 5)]));
        assert_eq!(&sum - &b, a);
        assert_eq!(&(-&a) + &a, Divisor::zero());
        assert_eq!(a.scaled(3).degree(), 9);
    }

    #[test]
    fn validates_support_against_the_graph() {
        let g = circle4();
        let good = Divisor::from_entries([(GraphPoint::vertex("v0"), 1), (w(), 1)]);
        assert!(good.validate_on(&g).is_ok());
        let bad = Divisor::single(GraphPoint::OnEdge("e".to_owned(), qi(9)));
        assert!(bad.validate_on(&g).is_err());
    }

    #[test]
    fn circle_invariant_matches_hand_computation() {
        let g = circle4();
        let three_w = Divisor::from_entries([(w(), 3)]);
        assert_eq!(circle_class_invariant(&g, &three_w).unwrap(), qi(2));

        let two_base = Divisor::from_entries([(GraphPoint::vertex("v0"), 2)]);
        assert_eq!(circle_class_invariant(&g, &two_base).unwrap(), qi(0));

        let split = Divisor::from_entries([
            (GraphPoint::OnEdge("e".to_owned(), qi(1)), 1),
            (GraphPoint::OnEdge("e".to_owned(), qi(3)), 1),
        ]);
        assert_eq!(circle_class_invariant(&g, &split).unwrap(), qi(0));

        let anti = Divisor::single(GraphPoint::OnEdge("e".to_owned(), q(7, 2)));
        assert_eq!(circle_class_invariant(&g, &anti).unwrap(), q(7, 2));
    }

    #[test]
    fn circle_invariant_rejects_non_cycles() {
        let t = theta();
        let d = Divisor::single(GraphPoint::vertex("u"));
        assert_eq!(
            circle_class_invariant(&t, &d).unwrap_err(),
            DivisorError::NotACycle
        );
    }

    #[test]
    fn multi_vertex_cycles_get_deterministic_positions() {
        let g = MetricGraph::unweighted(
            &["a", "b", "c", "d"],
            vec![
                ("e0", "a", "b", qi(1)),
                ("e1", "b", "c", qi(1)),
                ("e2", "c", "d", qi(1)),
                ("e3", "d", "a", qi(1)),
            ],
        )
        .unwrap();
        let coords = CycleCoordinates::new(&g).unwrap();
        assert_eq!(coords.circumference(), &qi(4));
        assert_eq!(coords.position(&GraphPoint::vertex("a")).unwrap(), qi(0));
        assert_eq!(coords.position(&GraphPoint::vertex("d")).unwrap(), qi(3));
        let d = Divisor::single(GraphPoint::OnEdge("e2".to_owned(), q(1, 2)));
        assert_eq!(circle_class_invariant(&g, &d).unwrap(), q(5, 2));
    }
}
