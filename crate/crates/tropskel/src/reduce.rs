//! Reduced divisors on ray-free metric graphs.
//!
//! `reduce_divisor` carries any divisor to the unique representative of its
//! class that is reduced with respect to a base point: effective away from
//! the base, and such that every closed region avoiding the base has a
//! boundary point holding fewer chips than it has escape directions. The
//! computation is a chip sliding process driven by exact burning sweeps, and
//! it returns three things at once: the reduced divisor, a piecewise linear
//! witness `f` with `d + div(f) = reduced`, and a transcript of the moves
//! that were applied.
//!
//! `dhar_oracle` is an independent cross-check for integral inputs: it
//! refines the graph to unit edges and runs the classical discrete chip
//! firing algorithm with pure integer arithmetic, never touching the metric
//! machinery above.

use std::collections::{BTreeMap, BTreeSet};

use num::{Signed, Zero};
use thiserror::Error;

use crate::divisor::Divisor;
use crate::graph::{GraphError, GraphPoint, MetricGraph};
use crate::pl::{distance_function, PLFunction, PlError, Profile};
use crate::ratio::{is_integer, Q};

const PHASE0_LIMIT: usize = 10_000;
const MAIN_LIMIT: usize = 100_000;
const DISCRETE_LIMIT: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pl(#[from] PlError),
    #[error("reduction is defined on ray-free graphs")]
    RaysUnsupported,
    #[error("the input is not integral: {0}")]
    NonIntegral(String),
    #[error("no effective representative: degree {degree} class reduced to a divisor that is negative at the base (genus {genus})")]
    NoEffectiveRepresentative { degree: i64, genus: i64 },
    #[error("iteration limit exceeded in {0}")]
    IterationLimit(&'static str),
}

/// One move of the reduction process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveRecord {
    /// Radial correction: `multiplicity` times the function
    /// `-min(radius, dist(., center))` was added to the running witness.
    Sweep {
        center: GraphPoint,
        radius: Q,
        multiplicity: i64,
    },
    /// Chip slide: every boundary point of the unburnt region sent one chip
    /// a distance of `delta` into each burnt direction.
    Fire {
        delta: Q,
        boundary: Vec<GraphPoint>,
    },
}

/// Outcome of a reduction: the reduced divisor, a witness function with
/// `input + div(witness) = reduced`, and the move transcript.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub reduced: Divisor,
    pub witness: PLFunction,
    pub transcript: Vec<MoveRecord>,
}

fn require_ray_free(g: &MetricGraph) -> Result<(), ReduceError> {
    if g.has_rays() {
        Err(ReduceError::RaysUnsupported)
    } else {
        Ok(())
    }
}

/// Computes the reduced representative of the class of `d` with respect to
/// the base point `v0`, together with a witness and a transcript.
pub fn reduce_divisor(
    g: &MetricGraph,
    d: &Divisor,
    v0: &GraphPoint,
) -> Result<ReductionResult, ReduceError> {
    require_ray_free(g)?;
    g.check_point(v0)?;
    d.validate_on(g).map_err(|_| {
        ReduceError::Graph(GraphError::ForeignPoint("divisor support".to_owned()))
    })?;

    let mut current = d.clone();
    let mut witness = PLFunction::zero(g);
    let mut transcript = Vec::new();

    // Phase one: clear every deficit away from the base, deepest first.
    // A sweep of multiplicity m and radius r raises the swept point by at
    // least m and can create new deficits only strictly closer to the base,
    // so ordering by decreasing radius makes progress.
    let dist_fn = distance_function(g, v0)?;
    for round in 0..=PHASE0_LIMIT {
        let worst = current
            .iter()
            .filter(|(p, c)| *c < 0 && *p != v0)
            .map(|(p, _)| {
                let r = g.distance(p, v0).expect("support points are on the graph");
                (r, p.clone())
            })
            .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
        let Some((radius, point)) = worst else { break };
        if round == PHASE0_LIMIT {
            return Err(ReduceError::IterationLimit("deficit sweeps"));
        }
        let multiplicity = -current.coeff(&point);
        let capped = PLFunction::pointwise_min(g, &dist_fn, &PLFunction::constant(g, radius.clone()));
        let sweep = PLFunction::combine(g, &capped, &capped, -multiplicity, 0);
        current = &current + &sweep.principal_divisor(g).finite;
        witness = PLFunction::combine(g, &witness, &sweep, 1, 1);
        transcript.push(MoveRecord::Sweep {
            center: v0.clone(),
            radius,
            multiplicity,
        });
    }
    debug_assert!(current.is_effective_off(v0));

    // Phase two: burn from the base; as long as somewhere stays unburnt,
    // slide one chip from each boundary point of the unburnt region into
    // every burnt direction, as far as the nearest station.
    for round in 0..=MAIN_LIMIT {
        let state = burn(g, &current, v0);
        if state.all_burnt() {
            break;
        }
        if round == MAIN_LIMIT {
            return Err(ReduceError::IterationLimit("chip slides"));
        }
        let (fire, delta, boundary) = state.fire_function(g)?;
        current = &current + &fire.principal_divisor(g).finite;
        witness = PLFunction::combine(g, &witness, &fire, 1, 1);
        transcript.push(MoveRecord::Fire { delta, boundary });
    }

    debug_assert_eq!(
        &(d + &witness.principal_divisor(g).finite),
        &current,
        "witness must carry the input to the output"
    );
    Ok(ReductionResult {
        reduced: current,
        witness,
        transcript,
    })
}

/// True when `d` is reduced with respect to `v0`: effective away from the
/// base and with no blocked region under burning.
pub fn is_reduced(g: &MetricGraph, d: &Divisor, v0: &GraphPoint) -> Result<bool, ReduceError> {
    require_ray_free(g)?;
    g.check_point(v0)?;
    if !d.is_effective_off(v0) {
        return Ok(false);
    }
    Ok(burn(g, d, v0).all_burnt())
}

/// Reduction at the canonical base, the lexicographically smallest vertex.
pub fn canonical_reduction(g: &MetricGraph, d: &Divisor) -> Result<ReductionResult, ReduceError> {
    let base = GraphPoint::Vertex(g.base_vertex().clone());
    reduce_divisor(g, d, &base)
}

/// Decides linear equivalence. On success returns a witness `f` with
/// `d1 + div(f) = d2`; inequivalent divisors yield `None`.
pub fn is_linearly_equivalent(
    g: &MetricGraph,
    d1: &Divisor,
    d2: &Divisor,
) -> Result<Option<PLFunction>, ReduceError> {
    require_ray_free(g)?;
    if d1.degree() != d2.degree() {
        return Ok(None);
    }
    let r1 = canonical_reduction(g, d1)?;
    let r2 = canonical_reduction(g, d2)?;
    if r1.reduced != r2.reduced {
        return Ok(None);
    }
    // d1 + div(w1) = reduced = d2 + div(w2), so w1 - w2 carries d1 to d2.
    Ok(Some(PLFunction::combine(g, &r1.witness, &r2.witness, 1, -1)))
}

/// True when the class of `d` contains an effective divisor.
pub fn has_effective_representative(g: &MetricGraph, d: &Divisor) -> Result<bool, ReduceError> {
    Ok(canonical_reduction(g, d)?.reduced.is_effective())
}

/// Effective representative of the class of `d`. Classes of degree at least
/// the genus always have one; otherwise the reduced form may be negative at
/// the base and the call reports failure.
pub fn effective_of_bounded_class(g: &MetricGraph, d: &Divisor) -> Result<Divisor, ReduceError> {
    let reduction = canonical_reduction(g, d)?;
    if reduction.reduced.is_effective() {
        Ok(reduction.reduced)
    } else {
        Err(ReduceError::NoEffectiveRepresentative {
            degree: d.degree(),
            genus: g.genus(),
        })
    }
}

/// Effective representative together with its witness.
pub fn effective_reduction(g: &MetricGraph, d: &Divisor) -> Result<ReductionResult, ReduceError> {
    let reduction = canonical_reduction(g, d)?;
    if reduction.reduced.is_effective() {
        Ok(reduction)
    } else {
        Err(ReduceError::NoEffectiveRepresentative {
            degree: d.degree(),
            genus: g.genus(),
        })
    }
}

/// Burning state over the station decomposition of the graph: stations are
/// the vertices, the chip positions, and the base point; the pieces between
/// consecutive stations are atomic.
struct BurnState {
    /// Per edge: ascending station offsets (first 0, last the length) and
    /// the corresponding points.
    stations: BTreeMap<String, (Vec<Q>, Vec<GraphPoint>)>,
    burnt_points: BTreeSet<GraphPoint>,
    burnt_segs: BTreeMap<String, Vec<bool>>,
    station_points: BTreeSet<GraphPoint>,
}

impl BurnState {
    fn all_burnt(&self) -> bool {
        self.station_points.len() == self.burnt_points.len()
            && self.burnt_segs.values().all(|v| v.iter().all(|b| *b))
    }

    /// Unburnt stations adjacent to at least one burnt piece.
    fn boundary(&self) -> Vec<GraphPoint> {
        let mut out: BTreeSet<GraphPoint> = BTreeSet::new();
        for (e, (_, points)) in &self.stations {
            let segs = &self.burnt_segs[e];
            for (i, flag) in segs.iter().enumerate() {
                if !flag {
                    continue;
                }
                for p in [&points[i], &points[i + 1]] {
                    if !self.burnt_points.contains(p) {
                        out.insert(p.clone());
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Builds the slide function for the current state: zero on the unburnt
    /// region, depth `-delta` across the burnt region, with slope 1 wedges
    /// leaving each boundary station. Returns the function, the distance,
    /// and the boundary points.
    fn fire_function(
        &self,
        g: &MetricGraph,
    ) -> Result<(PLFunction, Q, Vec<GraphPoint>), ReduceError> {
        let boundary = self.boundary();
        let mut delta: Option<Q> = None;
        for (e, (offs, points)) in &self.stations {
            let segs = &self.burnt_segs[e];
            for (i, flag) in segs.iter().enumerate() {
                if !flag {
                    continue;
                }
                let lo_unburnt = !self.burnt_points.contains(&points[i]);
                let hi_unburnt = !self.burnt_points.contains(&points[i + 1]);
                if lo_unburnt || hi_unburnt {
                    let len = &offs[i + 1] - &offs[i];
                    if delta.as_ref().map_or(true, |d| len < *d) {
                        delta = Some(len);
                    }
                }
            }
        }
        let delta = delta.expect("a non-exhausted burn has a boundary");
        debug_assert!(delta.is_positive());

        let mut profiles = BTreeMap::new();
        for (e, (offs, points)) in &self.stations {
            let segs = &self.burnt_segs[e];
            let start = if self.burnt_points.contains(&points[0]) {
                -delta.clone()
            } else {
                Q::zero()
            };
            let mut breaks: Vec<(Q, i64)> = Vec::new();
            for (i, flag) in segs.iter().enumerate() {
                let lo = &offs[i];
                let hi = &offs[i + 1];
                if !*flag {
                    breaks.push((lo.clone(), 0));
                    continue;
                }
                let lo_unburnt = !self.burnt_points.contains(&points[i]);
                let hi_unburnt = !self.burnt_points.contains(&points[i + 1]);
                if lo_unburnt {
                    breaks.push((lo.clone(), -1));
                    let turn = lo + &delta;
                    if turn < *hi {
                        breaks.push((turn, 0));
                    }
                } else if hi_unburnt {
                    let turn = hi - &delta;
                    if turn > *lo {
                        breaks.push((lo.clone(), 0));
                        breaks.push((turn, 1));
                    } else {
                        breaks.push((lo.clone(), 1));
                    }
                } else {
                    breaks.push((lo.clone(), 0));
                }
            }
            let profile = Profile::new(start, breaks).map_err(|reason| {
                ReduceError::Pl(PlError::BadProfile {
                    id: e.clone(),
                    reason,
                })
            })?;
            profiles.insert(e.clone(), profile);
        }
        let f = PLFunction::from_parts(g, profiles, BTreeMap::new())?;
        Ok((f, delta, boundary))
    }
}

/// Runs the burning fixpoint: fire starts at the base, crosses a piece as
/// soon as one of its ends is burning, and consumes a station once the
/// number of burning directions there exceeds the chip count.
fn burn(g: &MetricGraph, d: &Divisor, v0: &GraphPoint) -> BurnState {
    let mut stations: BTreeMap<String, (Vec<Q>, Vec<GraphPoint>)> = BTreeMap::new();
    for (id, edge) in g.edges() {
        let mut offs: BTreeSet<Q> = BTreeSet::new();
        offs.insert(Q::zero());
        offs.insert(edge.length.clone());
        let add_interior = |p: &GraphPoint, offs: &mut BTreeSet<Q>| {
            if let GraphPoint::OnEdge(e, t) = p {
                if e == id {
                    offs.insert(t.clone());
                }
            }
        };
        for (p, _) in d.iter() {
            add_interior(p, &mut offs);
        }
        add_interior(v0, &mut offs);
        let offs: Vec<Q> = offs.into_iter().collect();
        let points: Vec<GraphPoint> = offs
            .iter()
            .map(|t| g.edge_point(id, t.clone()).expect("offsets lie on the edge"))
            .collect();
        stations.insert(id.clone(), (offs, points));
    }

    let mut station_points: BTreeSet<GraphPoint> = BTreeSet::new();
    for v in g.vertex_ids() {
        station_points.insert(GraphPoint::Vertex(v.clone()));
    }
    for (_, points) in stations.values() {
        station_points.extend(points.iter().cloned());
    }

    let mut burnt_points: BTreeSet<GraphPoint> = BTreeSet::new();
    burnt_points.insert(v0.clone());
    let mut burnt_segs: BTreeMap<String, Vec<bool>> = stations
        .iter()
        .map(|(e, (offs, _))| (e.clone(), vec![false; offs.len() - 1]))
        .collect();

    loop {
        let mut changed = false;
        for (e, (_, points)) in &stations {
            let segs = burnt_segs.get_mut(e).expect("all edges are present");
            for i in 0..segs.len() {
                if !segs[i]
                    && (burnt_points.contains(&points[i]) || burnt_points.contains(&points[i + 1]))
                {
                    segs[i] = true;
                    changed = true;
                }
            }
        }
        let mut arrivals: BTreeMap<&GraphPoint, i64> = BTreeMap::new();
        for (e, (_, points)) in &stations {
            let segs = &burnt_segs[e];
            for (i, flag) in segs.iter().enumerate() {
                if !flag {
                    continue;
                }
                for p in [&points[i], &points[i + 1]] {
                    if !burnt_points.contains(p) {
                        *arrivals.entry(p).or_insert(0) += 1;
                    }
                }
            }
        }
        let mut newly: Vec<GraphPoint> = Vec::new();
        for (p, n) in arrivals {
            if *p != *v0 && n > d.coeff(p) {
                newly.push(p.clone());
            }
        }
        for p in newly {
            burnt_points.insert(p);
            changed = true;
        }
        if !changed {
            break;
        }
    }

    BurnState {
        stations,
        burnt_points,
        burnt_segs,
        station_points,
    }
}

/// Independent discrete cross-check: unit-refines an integral graph and
/// reduces by integer chip firing. Requires integral edge lengths, lattice
/// support, and a lattice base point.
pub fn dhar_oracle(
    g: &MetricGraph,
    d: &Divisor,
    v0: &GraphPoint,
) -> Result<Divisor, ReduceError> {
    require_ray_free(g)?;
    g.check_point(v0)?;
    d.validate_on(g).map_err(|_| {
        ReduceError::Graph(GraphError::ForeignPoint("divisor support".to_owned()))
    })?;
    for (id, edge) in g.edges() {
        if !is_integer(&edge.length) {
            return Err(ReduceError::NonIntegral(format!(
                "edge {id:?} has a fractional length"
            )));
        }
    }
    let lattice_ok = |p: &GraphPoint| match p {
        GraphPoint::Vertex(_) => true,
        GraphPoint::OnEdge(_, t) => is_integer(t),
        GraphPoint::OnRay(..) => false,
    };
    for p in d.support() {
        if !lattice_ok(p) {
            return Err(ReduceError::NonIntegral(format!(
                "support point {p} is not a lattice point"
            )));
        }
    }
    if !lattice_ok(v0) {
        return Err(ReduceError::NonIntegral(format!(
            "base point {v0} is not a lattice point"
        )));
    }

    // Refine to unit edges.
    let mut cuts: Vec<GraphPoint> = Vec::new();
    for (id, edge) in g.edges() {
        let n = edge.length.to_integer();
        let mut k = num::BigInt::from(1);
        while k < n {
            cuts.push(GraphPoint::OnEdge(id.clone(), Q::from_integer(k.clone())));
            k += 1;
        }
    }
    let (unit, relocation) = g.subdivide(&cuts)?;

    let vertex_of = |p: &GraphPoint| -> String {
        match relocation.relocate(p) {
            GraphPoint::Vertex(v) => v,
            other => unreachable!("lattice points become vertices, got {other}"),
        }
    };
    let q0 = vertex_of(v0);
    let mut chips: BTreeMap<String, i64> =
        unit.vertex_ids().map(|v| (v.clone(), 0)).collect();
    for (p, c) in d.iter() {
        *chips.get_mut(&vertex_of(p)).expect("lattice vertex") += c;
    }

    // Multigraph adjacency without self-loops; a self-loop never crosses a
    // set boundary, so it is invisible to borrowing, burning, and firing.
    let mut adj: BTreeMap<String, BTreeMap<String, i64>> =
        unit.vertex_ids().map(|v| (v.clone(), BTreeMap::new())).collect();
    for (_, edge) in unit.edges() {
        let (a, b) = (&edge.ends.0, &edge.ends.1);
        if a == b {
            continue;
        }
        *adj.get_mut(a).unwrap().entry(b.clone()).or_insert(0) += 1;
        *adj.get_mut(b).unwrap().entry(a.clone()).or_insert(0) += 1;
    }

    // Hop distances from the base; unit lengths make them metric distances.
    let mut dist: BTreeMap<String, u64> = BTreeMap::new();
    dist.insert(q0.clone(), 0);
    let mut frontier = vec![q0.clone()];
    while let Some(v) = frontier.pop() {
        let dv = dist[&v];
        let mut next: Vec<String> = Vec::new();
        for u in adj[&v].keys() {
            if !dist.contains_key(u) {
                dist.insert(u.clone(), dv + 1);
                next.push(u.clone());
            }
        }
        // Process in rounds to keep the BFS order exact.
        frontier.splice(0..0, next);
    }

    // Stage one: layered borrowing, outermost layer first. Borrowing the
    // ball of radius k-1 raises every layer-k vertex by its edge count into
    // the ball and touches no deeper layer.
    let max_layer = dist.values().copied().max().unwrap_or(0);
    for k in (1..=max_layer).rev() {
        let mut rounds: i64 = 0;
        for (v, c) in &chips {
            if dist[v] == k && *c < 0 {
                let gain: i64 = adj[v]
                    .iter()
                    .filter(|(u, _)| dist[*u] < k)
                    .map(|(_, m)| *m)
                    .sum();
                debug_assert!(gain >= 1, "layered vertices reach inward");
                let need = crate::ratio::ceil_div(i128::from(-*c), i128::from(gain)) as i64;
                rounds = rounds.max(need);
            }
        }
        if rounds == 0 {
            continue;
        }
        let mut delta: BTreeMap<String, i64> = BTreeMap::new();
        for (v, nbrs) in &adj {
            if dist[v] < k {
                for (u, m) in nbrs {
                    if dist[u] >= k {
                        *delta.entry(v.clone()).or_insert(0) -= m * rounds;
                        *delta.entry(u.clone()).or_insert(0) += m * rounds;
                    }
                }
            }
        }
        for (v, dcv) in delta {
            *chips.get_mut(&v).unwrap() += dcv;
        }
    }
    debug_assert!(chips.iter().all(|(v, c)| *c >= 0 || *v == q0));

    // Stage two: classical burning and firing until everything burns.
    for round in 0..=DISCRETE_LIMIT {
        let mut burnt: BTreeSet<String> = BTreeSet::new();
        burnt.insert(q0.clone());
        loop {
            let mut changed = false;
            for v in unit.vertex_ids() {
                if burnt.contains(v) {
                    continue;
                }
                let arrivals: i64 = adj[v]
                    .iter()
                    .filter(|(u, _)| burnt.contains(*u))
                    .map(|(_, m)| *m)
                    .sum();
                if arrivals > chips[v] {
                    burnt.insert(v.clone());
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if burnt.len() == unit.vertex_count() {
            break;
        }
        if round == DISCRETE_LIMIT {
            return Err(ReduceError::IterationLimit("discrete firing"));
        }
        for (v, nbrs) in &adj {
            if burnt.contains(v) {
                continue;
            }
            for (u, m) in nbrs {
                if burnt.contains(u) {
                    *chips.get_mut(v).unwrap() -= m;
                    *chips.get_mut(u).unwrap() += m;
                }
            }
        }
    }

    let mut out = Divisor::zero();
    for (v, c) in chips {
        if c != 0 {
            out.add_at(relocation.restore(&GraphPoint::Vertex(v)), c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{circle4, circle_with_ray, dumbbell, path3, theta, unit_theta};
    use crate::divisor::circle_class_invariant;
    use crate::ratio::q;

    fn v(id: &str) -> GraphPoint {
        GraphPoint::vertex(id)
    }

    fn on(e: &str, num: i64, den: i64) -> GraphPoint {
        GraphPoint::OnEdge(e.to_owned(), q(num, den))
    }

    #[test]
    fn three_chips_opposite_the_base_split() {
        let g = circle4();
        let d = Divisor::from_entries([(on("e", 2, 1), 3)]);
        let r = reduce_divisor(&g, &d, &v("v0")).unwrap();
        let expected = Divisor::from_entries([(v("v0"), 2), (on("e", 2, 1), 1)]);
        assert_eq!(r.reduced, expected);
        assert_eq!(
            &(&d + &r.witness.principal_divisor(&g).finite),
            &r.reduced
        );
        assert!(is_reduced(&g, &r.reduced, &v("v0")).unwrap());
        assert!(!r.transcript.is_empty());
    }

    #[test]
    fn saturated_vertex_stays_put() {
        let g = unit_theta();
        let d = Divisor::from_entries([(v("v"), 2)]);
        let r = reduce_divisor(&g, &d, &v("u")).unwrap();
        assert_eq!(r.reduced, d);
        assert!(r.transcript.is_empty());
        assert_eq!(r.witness, PLFunction::zero(&g));
    }

    #[test]
    fn zero_divisor_is_already_reduced() {
        let g = theta();
        let r = reduce_divisor(&g, &Divisor::zero(), &v("u")).unwrap();
        assert!(r.reduced.is_zero());
        assert!(r.transcript.is_empty());
    }

    #[test]
    fn chip_at_the_far_end_of_a_path_walks_to_the_base() {
        let g = path3();
        let d = Divisor::single(v("v3"));
        let r = reduce_divisor(&g, &d, &v("v0")).unwrap();
        assert_eq!(r.reduced, Divisor::single(v("v0")));
        assert_eq!(dhar_oracle(&g, &d, &v("v0")).unwrap(), r.reduced);
    }

    #[test]
    fn deficits_are_cleared_before_sliding() {
        let g = circle4();
        // One debt opposite the base, covered by three chips at the base.
        let d = Divisor::from_entries([(v("v0"), 3), (on("e", 2, 1), -1)]);
        let r = reduce_divisor(&g, &d, &v("v0")).unwrap();
        assert!(r.reduced.is_effective());
        assert_eq!(r.reduced.degree(), 2);
        assert!(is_reduced(&g, &r.reduced, &v("v0")).unwrap());
        assert_eq!(
            circle_class_invariant(&g, &r.reduced).unwrap(),
            circle_class_invariant(&g, &d).unwrap()
        );
        assert!(r
            .transcript
            .iter()
            .any(|m| matches!(m, MoveRecord::Sweep { .. })));
    }

    #[test]
    fn reduction_is_idempotent_and_class_invariant() {
        let g = theta();
        let d = Divisor::from_entries([(on("c", 5, 2), 2), (v("v"), 1)]);
        let r = reduce_divisor(&g, &d, &v("u")).unwrap();
        let again = reduce_divisor(&g, &r.reduced, &v("u")).unwrap();
        assert_eq!(again.reduced, r.reduced);
        assert!(again.transcript.is_empty());

        // Perturbing by a principal divisor does not change the outcome.
        let tent = distance_function(&g, &v("u")).unwrap();
        let principal = tent.principal_divisor(&g).finite;
        let r2 = reduce_divisor(&g, &(&d + &principal), &v("u")).unwrap();
        assert_eq!(r2.reduced, r.reduced);
    }

    #[test]
    fn base_coefficient_respects_the_genus_bound() {
        let g = theta();
        let d = Divisor::from_entries([(v("v"), 4)]);
        let r = reduce_divisor(&g, &d, &v("u")).unwrap();
        assert!(r.reduced.coeff(&v("u")) >= d.degree() - g.genus());
    }

    #[test]
    fn interior_base_points_work() {
        let g = circle4();
        let base = on("e", 1, 2);
        let d = Divisor::from_entries([(on("e", 3, 1), 2)]);
        let r = reduce_divisor(&g, &d, &base).unwrap();
        assert!(is_reduced(&g, &r.reduced, &base).unwrap());
        assert_eq!(
            circle_class_invariant(&g, &r.reduced).unwrap(),
            circle_class_invariant(&g, &d).unwrap()
        );
    }

    #[test]
    fn equivalence_on_the_circle_follows_the_invariant() {
        let g = circle4();
        let split = Divisor::from_entries([(on("e", 1, 1), 1), (on("e", 3, 1), 1)]);
        let both = Divisor::from_entries([(v("v0"), 2)]);
        let witness = is_linearly_equivalent(&g, &split, &both).unwrap().unwrap();
        assert_eq!(&(&split + &witness.principal_divisor(&g).finite), &both);

        let d1 = Divisor::from_entries([(v("v0"), 1), (on("e", 2, 1), 1)]);
        assert!(is_linearly_equivalent(&g, &d1, &both).unwrap().is_none());

        // Same divisor: the identity witness is constant.
        let w = is_linearly_equivalent(&g, &both, &both).unwrap().unwrap();
        assert_eq!(w.principal_divisor(&g).finite, Divisor::zero());
    }

    #[test]
    fn degree_mismatch_is_never_equivalent() {
        let g = circle4();
        let a = Divisor::single(v("v0"));
        let b = Divisor::from_entries([(v("v0"), 2)]);
        assert!(is_linearly_equivalent(&g, &a, &b).unwrap().is_none());
    }

    #[test]
    fn effectivity_queries() {
        let g = circle4();
        let point = Divisor::single(on("e", 3, 2));
        assert!(has_effective_representative(&g, &point).unwrap());

        let difference = &Divisor::single(on("e", 1, 1)) - &Divisor::single(on("e", 2, 1));
        assert!(!has_effective_representative(&g, &difference).unwrap());
        assert!(matches!(
            effective_of_bounded_class(&g, &difference),
            Err(ReduceError::NoEffectiveRepresentative { .. })
        ));

        let rep = effective_of_bounded_class(&g, &point).unwrap();
        assert!(rep.is_effective());
        assert_eq!(rep.degree(), 1);
    }

    #[test]
    fn effective_representatives_at_the_genus_bound() {
        let t = theta();
        let d = &Divisor::from_entries([(v("v"), 3)])
            - &Divisor::single(on("b", 1, 1));
        assert_eq!(d.degree(), 2);
        let rep = effective_of_bounded_class(&t, &d).unwrap();
        assert!(rep.is_effective());

        let db = dumbbell();
        let d = Divisor::from_entries([(on("l2", 1, 1), 2)]);
        let rep = effective_of_bounded_class(&db, &d).unwrap();
        assert!(rep.is_effective());
        assert_eq!(rep.degree(), 2);
    }

    #[test]
    fn oracle_agrees_on_hand_checked_cases() {
        let g = circle4();
        let d = Divisor::from_entries([(on("e", 2, 1), 3)]);
        let expected = Divisor::from_entries([(v("v0"), 2), (on("e", 2, 1), 1)]);
        assert_eq!(dhar_oracle(&g, &d, &v("v0")).unwrap(), expected);

        let t = unit_theta();
        let d = Divisor::from_entries([(v("v"), 2)]);
        assert_eq!(dhar_oracle(&t, &d, &v("u")).unwrap(), d);

        assert_eq!(
            dhar_oracle(&t, &Divisor::zero(), &v("u")).unwrap(),
            Divisor::zero()
        );
    }

    #[test]
    fn oracle_handles_negative_inputs() {
        let g = circle4();
        let d = Divisor::from_entries([(v("v0"), 4), (on("e", 2, 1), -2)]);
        let out = dhar_oracle(&g, &d, &v("v0")).unwrap();
        let metric = reduce_divisor(&g, &d, &v("v0")).unwrap().reduced;
        assert_eq!(out, metric);
        assert_eq!(out.degree(), 2);
    }

    #[test]
    fn oracle_rejects_non_integral_inputs() {
        let g = theta();
        let fractional = Divisor::single(on("c", 1, 2));
        assert!(matches!(
            dhar_oracle(&g, &fractional, &v("u")),
            Err(ReduceError::NonIntegral(_))
        ));

        let h = MetricGraph::unweighted(&["a", "b"], vec![("x", "a", "b", q(3, 2))]).unwrap();
        assert!(matches!(
            dhar_oracle(&h, &Divisor::zero(), &v("a")),
            Err(ReduceError::NonIntegral(_))
        ));
    }

    #[test]
    fn rays_are_rejected() {
        let g = circle_with_ray();
        let d = Divisor::single(v("v0"));
        assert!(matches!(
            reduce_divisor(&g, &d, &v("v0")),
            Err(ReduceError::RaysUnsupported)
        ));
        assert!(matches!(
            dhar_oracle(&g, &d, &v("v0")),
            Err(ReduceError::RaysUnsupported)
        ));
    }
}
