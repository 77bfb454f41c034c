//! Piecewise linear functions with integer slopes, their orders, and their
//! principal divisors.
//!
//! A [`PLFunction`] assigns to every edge and every ray of a graph a
//! [`Profile`]: the value at offset 0 and a list of `(offset, slope)` breaks.
//! A slope applies from its break offset up to the next break (on rays the
//! last slope extends to infinity). Profiles are normalized on construction,
//! so two functions are equal as maps exactly when they are structurally
//! equal.
//!
//! The order of a function at a point is the sum of its outgoing slopes
//! there. Away from the support of the principal divisor the order is zero;
//! on rays the slope at infinity is reported separately as a ledger entry,
//! one per ray, equal to minus the terminal slope, so that the finite degree
//! and the ledger always sum to zero.

use std::collections::BTreeMap;

use num::Zero;
use thiserror::Error;

use crate::divisor::Divisor;
use crate::graph::{GraphError, GraphPoint, MetricGraph};
use crate::ratio::{fmt_q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("profile for {id:?} is malformed: {reason}")]
    BadProfile { id: String, reason: String },
    #[error("missing profile for {0:?}")]
    MissingProfile(String),
    #[error("profile given for unknown id {0:?}")]
    ForeignProfile(String),
    #[error("values disagree at vertex {vertex:?}: {values:?}")]
    Discontinuous { vertex: String, values: Vec<String> },
}

/// Restriction of a piecewise linear function to one edge or ray.
///
/// Invariants, enforced by [`Profile::new`]: `breaks` is non-empty, the
/// first offset is 0, offsets strictly increase, and consecutive slopes
/// differ. On an edge every offset is strictly below the edge length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Profile {
    pub start: Q,
    pub breaks: Vec<(Q, i64)>,
}

impl Profile {
    pub fn new(start: Q, breaks: Vec<(Q, i64)>) -> Result<Profile, String> {
        if breaks.is_empty() {
            return Err("no slope segments".to_owned());
        }
        if !breaks[0].0.is_zero() {
            return Err("first break must sit at offset 0".to_owned());
        }
        for pair in breaks.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return Err(format!(
                    "break offsets must strictly increase ({} then {})",
                    fmt_q(&pair[0].0),
                    fmt_q(&pair[1].0)
                ));
            }
        }
        Ok(Profile { start, breaks }.normalized())
    }

    /// Constant profile.
    pub fn constant(c: Q) -> Profile {
        Profile {
            start: c,
            breaks: vec![(Q::zero(), 0)],
        }
    }

    /// Single affine piece.
    pub fn line(start: Q, slope: i64) -> Profile {
        Profile {
            start,
            breaks: vec![(Q::zero(), slope)],
        }
    }

    fn normalized(mut self) -> Profile {
        let mut merged: Vec<(Q, i64)> = Vec::with_capacity(self.breaks.len());
        for (off, slope) in self.breaks.drain(..) {
            match merged.last() {
                Some((_, s)) if *s == slope => {}
                _ => merged.push((off, slope)),
            }
        }
        Profile {
            start: self.start,
            breaks: merged,
        }
    }

    /// Value at offset `t >= 0`.
    pub fn value_at(&self, t: &Q) -> Q {
        let mut value = self.start.clone();
        for (i, (off, slope)) in self.breaks.iter().enumerate() {
            let hi = self.breaks.get(i + 1).map(|(o, _)| o);
            let upper = match hi {
                Some(h) if h < t => h.clone(),
                _ => t.clone(),
            };
            if upper > *off {
                value = &value + &(&(&upper - off) * &crate::ratio::qi(*slope));
            }
            if hi.map_or(true, |h| h >= t) {
                break;
            }
        }
        value
    }

    /// Slope immediately after offset `t`.
    pub fn slope_after(&self, t: &Q) -> i64 {
        let mut slope = self.breaks[0].1;
        for (off, s) in &self.breaks {
            if off <= t {
                slope = *s;
            } else {
                break;
            }
        }
        slope
    }

    /// Slope immediately before offset `t > 0`.
    pub fn slope_before(&self, t: &Q) -> i64 {
        let mut slope = self.breaks[0].1;
        for (off, s) in &self.breaks {
            if off < t {
                slope = *s;
            } else {
                break;
            }
        }
        slope
    }

    pub fn last_slope(&self) -> i64 {
        self.breaks.last().expect("profiles are non-empty").1
    }

    /// Pointwise `a * self + b * other` over a common domain.
    pub fn scaled_plus(&self, a: i64, other: &Profile, b: i64) -> Profile {
        let mut offsets: Vec<Q> = Vec::new();
        for (off, _) in self.breaks.iter().chain(other.breaks.iter()) {
            if !offsets.contains(off) {
                offsets.push(off.clone());
            }
        }
        offsets.sort();
        let breaks = offsets
            .into_iter()
            .map(|off| {
                let slope = a * self.slope_after(&off) + b * other.slope_after(&off);
                (off, slope)
            })
            .collect();
        let start = &(&self.start * &crate::ratio::qi(a)) + &(&other.start * &crate::ratio::qi(b));
        Profile { start, breaks }.normalized()
    }

    /// Pointwise minimum with `other`. `upper` bounds the domain for edge
    /// profiles; `None` means the domain extends to infinity.
    pub fn min_with(&self, other: &Profile, upper: Option<&Q>) -> Profile {
        let mut offsets: Vec<Q> = Vec::new();
        for (off, _) in self.breaks.iter().chain(other.breaks.iter()) {
            if upper.map_or(true, |u| off < u) && !offsets.contains(off) {
                offsets.push(off.clone());
            }
        }
        offsets.sort();

        let start = self.start.clone().min(other.start.clone());
        let mut pieces: Vec<(Q, i64)> = Vec::new();
        for (i, lo) in offsets.iter().enumerate() {
            let hi = offsets.get(i + 1).cloned().or_else(|| upper.cloned());
            let va = self.value_at(lo);
            let vb = other.value_at(lo);
            let sa = self.slope_after(lo);
            let sb = other.slope_after(lo);
            // Winner on (lo, lo + eps): smaller value, ties by smaller slope.
            let a_wins = va < vb || (va == vb && sa <= sb);
            let (wv, ws, ls) = if a_wins { (va, sa, sb) } else { (vb, sb, sa) };
            let lv = if a_wins {
                other.value_at(lo)
            } else {
                self.value_at(lo)
            };
            pieces.push((lo.clone(), ws));
            if ws > ls {
                // The loser has the smaller slope and takes over at the
                // crossing offset, if that falls inside this segment.
                let gap = &lv - &wv;
                let closing = crate::ratio::qi(ws - ls);
                let cross = lo + &(&gap / &closing);
                let inside = cross > *lo && hi.as_ref().map_or(true, |h| cross < *h);
                if inside {
                    pieces.push((cross, ls));
                }
            }
        }
        Profile { start, breaks: pieces }.normalized()
    }

    /// The same segment traversed from the far end of a domain of length
    /// `len`.
    pub fn reversed(&self, len: &Q) -> Profile {
        let start = self.value_at(len);
        let mut breaks: Vec<(Q, i64)> = Vec::new();
        for (i, (off, slope)) in self.breaks.iter().enumerate().rev() {
            let hi = self
                .breaks
                .get(i + 1)
                .map(|(o, _)| o.clone())
                .unwrap_or_else(|| len.clone());
            breaks.push((len - &hi, -slope));
            let _ = off;
        }
        Profile { start, breaks }.normalized()
    }

    /// Joins a profile on `[0, at]` with one on `[at, ...]`; the second
    /// profile's offsets shift by `at`. Values must agree at the seam.
    pub fn concat(first: &Profile, second: &Profile, at: &Q) -> Profile {
        debug_assert_eq!(first.value_at(at), second.start);
        let mut breaks: Vec<(Q, i64)> = first
            .breaks
            .iter()
            .filter(|(off, _)| off < at)
            .cloned()
            .collect();
        for (off, slope) in &second.breaks {
            breaks.push((off + at, *slope));
        }
        Profile {
            start: first.start.clone(),
            breaks,
        }
        .normalized()
    }

    /// Break offsets strictly inside `(0, upper)`, or all of them for rays.
    fn interior_offsets(&self) -> impl Iterator<Item = &Q> {
        self.breaks.iter().skip(1).map(|(off, _)| off)
    }
}

/// Orders of a principal divisor, split into its finite part and one ledger
/// entry per ray recording the order at the ray's infinite end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrincipalParts {
    pub finite: Divisor,
    pub ray_orders: BTreeMap<String, i64>,
}

impl PrincipalParts {
    /// True when the finite part is effective relative to `base` and no ray
    /// carries a positive order at infinity.
    pub fn ledger_admissible(&self) -> bool {
        self.ray_orders.values().all(|v| *v <= 0)
    }
}

/// Continuous piecewise linear function with integer slopes on a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLFunction {
    edges: BTreeMap<String, Profile>,
    rays: BTreeMap<String, Profile>,
    /// Value on a graph that has neither edges nor rays.
    lone_value: Option<Q>,
}

impl PLFunction {
    /// Assembles a function from per-edge and per-ray profiles and validates
    /// totality, offset ranges, and continuity at every vertex.
    pub fn from_parts(
        g: &MetricGraph,
        edges: BTreeMap<String, Profile>,
        rays: BTreeMap<String, Profile>,
    ) -> Result<PLFunction, PlError> {
        for id in edges.keys() {
            if g.edge(id).is_none() {
                return Err(PlError::ForeignProfile(id.clone()));
            }
        }
        for id in rays.keys() {
            if g.ray_base(id).is_none() {
                return Err(PlError::ForeignProfile(id.clone()));
            }
        }
        for id in g.edge_ids() {
            let profile = edges.get(id).ok_or_else(|| PlError::MissingProfile(id.clone()))?;
            let len = &g.edge(id).expect("id from graph").length;
            if let Some((off, _)) = profile.breaks.iter().find(|(off, _)| off >= len) {
                return Err(PlError::BadProfile {
                    id: id.clone(),
                    reason: format!("break at {} is not below the length {}", fmt_q(off), fmt_q(len)),
                });
            }
        }
        for id in g.ray_ids() {
            if !rays.contains_key(id) {
                return Err(PlError::MissingProfile(id.clone()));
            }
        }

        let lone_value = if g.edge_count() == 0 && !g.has_rays() {
            Some(Q::zero())
        } else {
            None
        };
        let f = PLFunction { edges, rays, lone_value };
        f.check_continuity(g)?;
        Ok(f)
    }

    /// The zero function.
    pub fn zero(g: &MetricGraph) -> PLFunction {
        PLFunction::constant(g, Q::zero())
    }

    /// The constant function with value `c`.
    pub fn constant(g: &MetricGraph, c: Q) -> PLFunction {
        let edges = g
            .edge_ids()
            .map(|id| (id.clone(), Profile::constant(c.clone())))
            .collect();
        let rays = g
            .ray_ids()
            .map(|id| (id.clone(), Profile::constant(c.clone())))
            .collect();
        let lone_value = if g.edge_count() == 0 && !g.has_rays() {
            Some(c)
        } else {
            None
        };
        PLFunction { edges, rays, lone_value }
    }

    pub fn edge_profile(&self, e: &str) -> Option<&Profile> {
        self.edges.get(e)
    }

    pub fn ray_profile(&self, r: &str) -> Option<&Profile> {
        self.rays.get(r)
    }

    pub fn profiles(&self) -> (&BTreeMap<String, Profile>, &BTreeMap<String, Profile>) {
        (&self.edges, &self.rays)
    }

    fn check_continuity(&self, g: &MetricGraph) -> Result<(), PlError> {
        for v in g.vertex_ids() {
            let mut values: Vec<Q> = Vec::new();
            for (id, edge) in g.edges() {
                let profile = &self.edges[id];
                if edge.ends.0 == *v {
                    values.push(profile.start.clone());
                }
                if edge.ends.1 == *v {
                    values.push(profile.value_at(&edge.length));
                }
            }
            for id in g.ray_ids() {
                if g.ray_base(id) == Some(v) {
                    values.push(self.rays[id].start.clone());
                }
            }
            if values.windows(2).any(|w| w[0] != w[1]) {
                return Err(PlError::Discontinuous {
                    vertex: v.clone(),
                    values: values.iter().map(fmt_q).collect(),
                });
            }
        }
        Ok(())
    }

    /// Value at a point.
    pub fn value_at(&self, g: &MetricGraph, p: &GraphPoint) -> Result<Q, PlError> {
        g.check_point(p)?;
        match p {
            GraphPoint::Vertex(v) => Ok(self.vertex_value(g, v)),
            GraphPoint::OnEdge(e, t) => Ok(self.edges[e].value_at(t)),
            GraphPoint::OnRay(r, t) => Ok(self.rays[r].value_at(t)),
        }
    }

    /// Value at a vertex, read from any incident profile end.
    pub fn vertex_value(&self, g: &MetricGraph, v: &str) -> Q {
        for (id, edge) in g.edges() {
            if edge.ends.0 == v {
                return self.edges[id].start.clone();
            }
            if edge.ends.1 == v {
                return self.edges[id].value_at(&edge.length);
            }
        }
        for (id, profile) in &self.rays {
            if g.ray_base(id).map(String::as_str) == Some(v) {
                return profile.start.clone();
            }
        }
        self.lone_value.clone().unwrap_or_else(Q::zero)
    }

    /// Sum of the outgoing slopes at `p`.
    pub fn order_at(&self, g: &MetricGraph, p: &GraphPoint) -> Result<i64, PlError> {
        g.check_point(p)?;
        Ok(match p {
            GraphPoint::Vertex(v) => {
                let mut ord = 0;
                for (id, edge) in g.edges() {
                    let profile = &self.edges[id];
                    if edge.ends.0 == *v {
                        ord += profile.slope_after(&Q::zero());
                    }
                    if edge.ends.1 == *v {
                        ord -= profile.slope_before(&edge.length);
                    }
                }
                for (id, profile) in &self.rays {
                    if g.ray_base(id) == Some(v) {
                        ord += profile.slope_after(&Q::zero());
                    }
                }
                ord
            }
            GraphPoint::OnEdge(e, t) => {
                let profile = &self.edges[e];
                profile.slope_after(t) - profile.slope_before(t)
            }
            GraphPoint::OnRay(r, t) => {
                let profile = &self.rays[r];
                profile.slope_after(t) - profile.slope_before(t)
            }
        })
    }

    /// The divisor of the function: finite orders plus one ledger entry per
    /// ray for the order at infinity. The finite degree and the ledger sum
    /// to zero.
    pub fn principal_divisor(&self, g: &MetricGraph) -> PrincipalParts {
        let mut finite = Divisor::zero();
        for v in g.vertex_ids() {
            let p = GraphPoint::Vertex(v.clone());
            let ord = self.order_at(g, &p).expect("vertices lie on the graph");
            finite.add_at(p, ord);
        }
        for (id, profile) in &self.edges {
            for off in profile.interior_offsets() {
                let p = GraphPoint::OnEdge(id.clone(), off.clone());
                let ord = profile.slope_after(off) - profile.slope_before(off);
                finite.add_at(p, ord);
            }
        }
        let mut ray_orders = BTreeMap::new();
        for (id, profile) in &self.rays {
            for off in profile.interior_offsets() {
                let p = GraphPoint::OnRay(id.clone(), off.clone());
                let ord = profile.slope_after(off) - profile.slope_before(off);
                finite.add_at(p, ord);
            }
            ray_orders.insert(id.clone(), -profile.last_slope());
        }
        debug_assert_eq!(
            finite.degree() + ray_orders.values().sum::<i64>(),
            0,
            "orders of a piecewise linear function sum to zero"
        );
        PrincipalParts { finite, ray_orders }
    }

    /// Pointwise integer combination `a * self + b * other`.
    pub fn combine(g: &MetricGraph, f: &PLFunction, h: &PLFunction, a: i64, b: i64) -> PLFunction {
        let edges = g
            .edge_ids()
            .map(|id| (id.clone(), f.edges[id].scaled_plus(a, &h.edges[id], b)))
            .collect();
        let rays = g
            .ray_ids()
            .map(|id| (id.clone(), f.rays[id].scaled_plus(a, &h.rays[id], b)))
            .collect();
        let lone_value = match (&f.lone_value, &h.lone_value) {
            (Some(x), Some(y)) => {
                Some(&(x * &crate::ratio::qi(a)) + &(y * &crate::ratio::qi(b)))
            }
            _ => None,
        };
        PLFunction { edges, rays, lone_value }
    }

    /// Pointwise minimum of two functions.
    pub fn pointwise_min(g: &MetricGraph, f: &PLFunction, h: &PLFunction) -> PLFunction {
        let edges = g
            .edge_ids()
            .map(|id| {
                let len = &g.edge(id).expect("id from graph").length;
                (id.clone(), f.edges[id].min_with(&h.edges[id], Some(len)))
            })
            .collect();
        let rays = g
            .ray_ids()
            .map(|id| (id.clone(), f.rays[id].min_with(&h.rays[id], None)))
            .collect();
        let lone_value = match (&f.lone_value, &h.lone_value) {
            (Some(x), Some(y)) => Some(x.clone().min(y.clone())),
            _ => None,
        };
        PLFunction { edges, rays, lone_value }
    }

    /// Adds a constant everywhere. The divisor is unchanged.
    pub fn plus_constant(&self, c: &Q) -> PLFunction {
        let mut out = self.clone();
        for profile in out.edges.values_mut() {
            profile.start = &profile.start + c;
        }
        for profile in out.rays.values_mut() {
            profile.start = &profile.start + c;
        }
        if let Some(v) = &mut out.lone_value {
            *v = &*v + c;
        }
        out
    }

    /// If the function is constant, returns its value.
    pub fn constant_value(&self) -> Option<Q> {
        let mut value: Option<Q> = self.lone_value.clone();
        for profile in self.edges.values().chain(self.rays.values()) {
            if profile.breaks.len() != 1 || profile.breaks[0].1 != 0 {
                return None;
            }
            match &value {
                None => value = Some(profile.start.clone()),
                Some(v) if *v == profile.start => {}
                _ => return None,
            }
        }
        value
    }
}

/// Distance to `from`, as a piecewise linear function on the whole graph.
/// Slopes are plus or minus 1 except on plateaus of equidistant routes.
pub fn distance_function(g: &MetricGraph, from: &GraphPoint) -> Result<PLFunction, PlError> {
    g.check_point(from)?;
    let dist = g.vertex_distances(from);
    let mut edges = BTreeMap::new();
    for (id, edge) in g.edges() {
        let len = &edge.length;
        let via_a = Profile::line(dist[&edge.ends.0].clone(), 1);
        let via_b = Profile::line(&dist[&edge.ends.1] + len, -1);
        let around = via_a.min_with(&via_b, Some(len));
        let profile = match from {
            GraphPoint::OnEdge(e, t0) if e == id => {
                // Direct arms on either side of the source point, each
                // competing with routes through the endpoints.
                let left = Profile::line(t0.clone(), -1).min_with(&around, Some(t0));
                let tail_len = len - t0;
                let around_tail = Profile {
                    start: around.value_at(t0),
                    breaks: shifted_breaks(&around, t0),
                }
                .normalized();
                let right = Profile::line(Q::zero(), 1).min_with(&around_tail, Some(&tail_len));
                Profile::concat(&left, &right, t0)
            }
            _ => around,
        };
        edges.insert(id.clone(), profile);
    }
    let mut rays = BTreeMap::new();
    for r in g.ray_ids() {
        let base = g.ray_base(r).expect("id from graph");
        let profile = match from {
            GraphPoint::OnRay(q, t0) if q == r => {
                let left = Profile::line(t0.clone(), -1);
                let right = Profile::line(Q::zero(), 1);
                Profile::concat(&left, &right, t0)
            }
            _ => Profile::line(dist[base].clone(), 1),
        };
        rays.insert(r.clone(), profile);
    }
    PLFunction::from_parts(g, edges, rays)
}

fn shifted_breaks(profile: &Profile, by: &Q) -> Vec<(Q, i64)> {
    let mut out = vec![(Q::zero(), profile.slope_after(by))];
    for (off, slope) in &profile.breaks {
        if off > by {
            out.push((off - by, *slope));
        }
    }
    out
}
