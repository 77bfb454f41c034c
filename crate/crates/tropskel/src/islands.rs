//! Weighted structure of a metric graph: canonical vertices and chains,
//! islands, and the construction of well-spread effective divisors.
//!
//! The canonical vertex set collects the points where the graph is not
//! locally a line: vertices of valence other than two, vertices of positive
//! weight, and ray bases. The canonical edges are the chains of input edges
//! running between canonical vertices. Removing the interiors of the
//! disconnecting chains splits the graph into islands. Island genera are
//! non-negative and sum to the weighted genus of the graph; an island can
//! have weighted genus zero even under the standing assumption (no point of
//! valence one and weight zero), namely a weightless vertex all of whose
//! canonical edges are disconnecting.
//!
//! `good_effective_divisor` turns any class of degree at least the weighted
//! genus into an effective representative that touches every island and
//! puts at most one chip in the interior of any canonical edge, none in the
//! interior of a disconnecting one.

use std::collections::{BTreeMap, BTreeSet};

use num::{Signed, Zero};
use thiserror::Error;

use crate::divisor::Divisor;
use crate::graph::{EdgeType, GraphError, GraphPoint, MetricGraph};
use crate::ratio::{fmt_q, Q};
use crate::reduce::{effective_of_bounded_class, ReduceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IslandError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("island analysis is defined on ray-free graphs")]
    RaysUnsupported,
    #[error("vertex {0:?} has valence 1 and weight 0")]
    AssumptionViolated(String),
    #[error("weighted genus {0} is below 2")]
    GenusTooSmall(i64),
    #[error("degree {degree} is below the weighted genus {weighted_genus}")]
    DegreeTooSmall { degree: i64, weighted_genus: i64 },
    #[error("the island containing vertex {0:?} has weighted genus 0")]
    GenusZeroIsland(String),
}

/// Genus of the underlying graph plus the total vertex weight.
pub fn weighted_genus(g: &MetricGraph) -> i64 {
    g.genus() + g.total_weight() as i64
}

/// One canonical edge: a maximal chain of input edges whose interior
/// vertices all have valence 2 and weight 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    /// Smallest input edge id on the chain.
    pub id: String,
    /// Input edges in traversal order; the flag records whether the edge is
    /// traversed from its first end to its second.
    pub segments: Vec<(String, bool)>,
    /// Canonical vertices at offset 0 and at the full length. Equal for a
    /// chain that closes into a loop.
    pub ends: (String, String),
    /// Non-canonical vertices strictly inside, in traversal order.
    pub interior_vertices: Vec<String>,
    pub length: Q,
    pub kind: EdgeType,
}

impl Chain {
    /// Point at chain offset `t`, with `0 <= t <= length`. Offsets at
    /// segment boundaries normalize to vertex points.
    pub fn point_at(&self, g: &MetricGraph, t: &Q) -> Result<GraphPoint, GraphError> {
        if t.is_negative() || *t > self.length {
            return Err(GraphError::OffsetOutOfRange {
                id: self.id.clone(),
                offset: fmt_q(t),
            });
        }
        let mut acc = Q::zero();
        for (seg, forward) in &self.segments {
            let len = &g.edge(seg).expect("chain segments exist").length;
            let upto = &acc + len;
            if *t <= upto {
                let local = t - &acc;
                let off = if *forward { local } else { len - &local };
                return g.edge_point(seg, off);
            }
            acc = upto;
        }
        unreachable!("offset {t} is within the chain length");
    }

    /// Chain offset of `p`, or `None` when `p` does not lie on the chain.
    /// The shared end of a closed chain reports offset 0.
    pub fn offset_of(&self, g: &MetricGraph, p: &GraphPoint) -> Option<Q> {
        if let GraphPoint::Vertex(v) = p {
            if *v == self.ends.0 {
                return Some(Q::zero());
            }
            if *v == self.ends.1 {
                return Some(self.length.clone());
            }
        }
        let mut acc = Q::zero();
        for (seg, forward) in &self.segments {
            let len = &g.edge(seg).expect("chain segments exist").length;
            match p {
                GraphPoint::OnEdge(e, t) if e == seg => {
                    let local = if *forward { t.clone() } else { len - t };
                    return Some(&acc + &local);
                }
                GraphPoint::Vertex(v) => {
                    let far = if *forward {
                        &g.edge(seg).unwrap().ends.1
                    } else {
                        &g.edge(seg).unwrap().ends.0
                    };
                    if far == v && self.interior_vertices.contains(v) {
                        return Some(&acc + len);
                    }
                }
                _ => {}
            }
            acc = &acc + len;
        }
        None
    }

    /// Total coefficient of `d` strictly inside the chain.
    pub fn interior_degree(&self, d: &Divisor) -> i64 {
        d.restrict_degree(|p| match p {
            GraphPoint::OnEdge(e, _) => self.segments.iter().any(|(s, _)| s == e),
            GraphPoint::Vertex(v) => self.interior_vertices.contains(v),
            GraphPoint::OnRay(..) => false,
        })
    }
}

/// Canonical vertices and chains of a graph. `bare_circle` marks the one
/// shape with no canonical vertex at all: a ray-free weightless circle.
#[derive(Debug, Clone)]
pub struct CanonicalStructure {
    pub vertices: BTreeSet<String>,
    pub chains: BTreeMap<String, Chain>,
    pub bare_circle: bool,
}

/// Computes the canonical structure. Chains are keyed by their smallest
/// input edge id; a multi-segment chain is oriented so that its edge-id
/// sequence is lexicographically smallest, a single segment keeps the input
/// orientation.
pub fn canonical_structure(g: &MetricGraph) -> CanonicalStructure {
    let ray_bases: BTreeSet<&String> = g.ray_ids().filter_map(|r| g.ray_base(r)).collect();
    let vertices: BTreeSet<String> = g
        .vertex_ids()
        .filter(|v| {
            g.valence(v) != 2 || g.vertex_weight(v).unwrap_or(0) > 0 || ray_bases.contains(v)
        })
        .cloned()
        .collect();
    if vertices.is_empty() {
        return CanonicalStructure {
            vertices,
            chains: BTreeMap::new(),
            bare_circle: true,
        };
    }

    // All (edge, end index) slots at a vertex; a loop contributes both.
    let slots_at = |v: &str| -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for (id, edge) in g.edges() {
            if edge.ends.0 == v {
                out.push((id.clone(), 0));
            }
            if edge.ends.1 == v {
                out.push((id.clone(), 1));
            }
        }
        out
    };
    let end_of = |e: &str, i: usize| -> String {
        let edge = g.edge(e).expect("walk stays on known edges");
        if i == 0 {
            edge.ends.0.clone()
        } else {
            edge.ends.1.clone()
        }
    };

    let mut assigned: BTreeSet<String> = BTreeSet::new();
    let mut chains: BTreeMap<String, Chain> = BTreeMap::new();
    for (start_id, _) in g.edges() {
        if assigned.contains(start_id) {
            continue;
        }
        let mut seq: Vec<(String, bool)> = vec![(start_id.clone(), true)];

        // Extend past the tail while it is not canonical. The triple tracks
        // the slot through which the walk arrived, so parallel edges stay
        // unambiguous.
        let mut tail_slot = (start_id.clone(), 1usize);
        while !vertices.contains(&end_of(&tail_slot.0, tail_slot.1)) {
            let tail = end_of(&tail_slot.0, tail_slot.1);
            let (f, i) = slots_at(&tail)
                .into_iter()
                .find(|s| *s != tail_slot)
                .expect("non-canonical vertices have exactly two slots");
            seq.push((f.clone(), i == 0));
            tail_slot = (f, 1 - i);
        }
        let mut head_slot = (start_id.clone(), 0usize);
        while !vertices.contains(&end_of(&head_slot.0, head_slot.1)) {
            let head = end_of(&head_slot.0, head_slot.1);
            let (f, i) = slots_at(&head)
                .into_iter()
                .find(|s| *s != head_slot)
                .expect("non-canonical vertices have exactly two slots");
            seq.insert(0, (f.clone(), i == 1));
            head_slot = (f, 1 - i);
        }

        if seq.len() > 1 {
            let ids: Vec<&String> = seq.iter().map(|(e, _)| e).collect();
            let rev: Vec<&String> = ids.iter().rev().copied().collect();
            if rev < ids {
                seq.reverse();
                for (_, forward) in &mut seq {
                    *forward = !*forward;
                }
            }
        }

        let first = &seq[0];
        let last = seq.last().expect("chains are non-empty");
        let head = end_of(&first.0, if first.1 { 0 } else { 1 });
        let tail = end_of(&last.0, if last.1 { 1 } else { 0 });
        let interior_vertices: Vec<String> = seq
            .iter()
            .take(seq.len() - 1)
            .map(|(e, forward)| end_of(e, if *forward { 1 } else { 0 }))
            .collect();
        let length = seq
            .iter()
            .fold(Q::zero(), |acc, (e, _)| &acc + &g.edge(e).unwrap().length);
        let id = seq
            .iter()
            .map(|(e, _)| e.clone())
            .min()
            .expect("chains are non-empty");
        let kind = g
            .classify_edge(&seq[0].0)
            .expect("chain segments exist");
        for (e, _) in &seq {
            assigned.insert(e.clone());
        }
        chains.insert(
            id.clone(),
            Chain {
                id,
                segments: seq,
                ends: (head, tail),
                interior_vertices,
                length,
                kind,
            },
        );
    }

    CanonicalStructure {
        vertices,
        chains,
        bare_circle: false,
    }
}

/// One island: a connected component left after deleting the interiors of
/// all disconnecting chains. Islands carry their input vertices, the input
/// edges lying fully inside, and their weighted genus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Island {
    pub vertices: BTreeSet<String>,
    pub edges: BTreeSet<String>,
    pub weighted_genus: i64,
}

impl Island {
    pub fn contains_point(&self, p: &GraphPoint) -> bool {
        match p {
            GraphPoint::Vertex(v) => self.vertices.contains(v),
            GraphPoint::OnEdge(e, _) => self.edges.contains(e),
            GraphPoint::OnRay(..) => false,
        }
    }

    /// Total coefficient of `d` on the island.
    pub fn degree_of(&self, d: &Divisor) -> i64 {
        d.restrict_degree(|p| self.contains_point(p))
    }
}

/// Islands sorted by their smallest vertex, and the ids of the
/// disconnecting chains whose interiors were removed.
#[derive(Debug, Clone)]
pub struct IslandDecomposition {
    pub islands: Vec<Island>,
    pub bridges: Vec<String>,
}

impl IslandDecomposition {
    /// Index of the island containing `p`, or `None` for points in the
    /// interior of a disconnecting chain.
    pub fn island_containing(&self, p: &GraphPoint) -> Option<usize> {
        self.islands.iter().position(|i| i.contains_point(p))
    }
}

fn assumption_violation(g: &MetricGraph) -> Option<String> {
    g.vertex_ids()
        .find(|v| g.valence(v) == 1 && g.vertex_weight(v) == Some(0))
        .cloned()
}

/// Decomposes the graph into islands. Requires a ray-free graph with no
/// vertex of valence 1 and weight 0. The island genera sum to the weighted
/// genus; a single weightless vertex met only by disconnecting chains forms
/// an island of weighted genus 0.
pub fn islands(g: &MetricGraph) -> Result<IslandDecomposition, IslandError> {
    if g.has_rays() {
        return Err(IslandError::RaysUnsupported);
    }
    if let Some(v) = assumption_violation(g) {
        return Err(IslandError::AssumptionViolated(v));
    }
    let canon = canonical_structure(g);
    if canon.bare_circle {
        return Ok(IslandDecomposition {
            islands: vec![Island {
                vertices: g.vertex_ids().cloned().collect(),
                edges: g.edge_ids().cloned().collect(),
                weighted_genus: weighted_genus(g),
            }],
            bridges: Vec::new(),
        });
    }

    let mut skip_edges: BTreeSet<String> = BTreeSet::new();
    let mut skip_vertices: BTreeSet<String> = BTreeSet::new();
    let mut bridges: Vec<String> = Vec::new();
    for (id, chain) in &canon.chains {
        if chain.kind == EdgeType::Disconnected {
            bridges.push(id.clone());
            skip_edges.extend(chain.segments.iter().map(|(e, _)| e.clone()));
            skip_vertices.extend(chain.interior_vertices.iter().cloned());
        }
    }

    let mut islands_out = Vec::new();
    for comp in g.vertex_components(&skip_edges, &skip_vertices) {
        let edges: BTreeSet<String> = g
            .edges()
            .filter(|(id, e)| {
                !skip_edges.contains(*id)
                    && comp.contains(&e.ends.0)
                    && comp.contains(&e.ends.1)
            })
            .map(|(id, _)| id.clone())
            .collect();
        let metric_genus = edges.len() as i64 - comp.len() as i64 + 1;
        let weight: i64 = comp
            .iter()
            .map(|v| g.vertex_weight(v).unwrap_or(0) as i64)
            .sum();
        islands_out.push(Island {
            vertices: comp,
            edges,
            weighted_genus: metric_genus + weight,
        });
    }
    debug_assert_eq!(
        islands_out.iter().map(|i| i.weighted_genus).sum::<i64>(),
        weighted_genus(g),
        "island genera add up to the weighted genus"
    );
    Ok(IslandDecomposition {
        islands: islands_out,
        bridges,
    })
}

/// Effective representative of a class whose degree reaches the weighted
/// genus. Weights only raise the degree threshold; the computation runs on
/// the underlying graph.
pub fn weighted_riemann(g: &MetricGraph, d: &Divisor) -> Result<Divisor, IslandError> {
    if g.has_rays() {
        return Err(IslandError::RaysUnsupported);
    }
    Ok(effective_of_bounded_class(g, d)?)
}

fn induced_subgraph(g: &MetricGraph, keep: &BTreeSet<String>) -> MetricGraph {
    let vertices = keep
        .iter()
        .map(|v| (v.clone(), g.vertex_weight(v).unwrap_or(0)))
        .collect();
    let edges = g
        .edges()
        .filter(|(_, e)| keep.contains(&e.ends.0) && keep.contains(&e.ends.1))
        .map(|(id, e)| (id.clone(), e.ends.0.clone(), e.ends.1.clone(), e.length.clone()))
        .collect();
    MetricGraph::new(vertices, edges, Vec::new())
        .expect("a component induces a valid connected graph")
}

fn restrict_divisor(d: &Divisor, vertices: &BTreeSet<String>, edges: &BTreeSet<String>) -> Divisor {
    Divisor::from_entries(d.iter().filter_map(|(p, c)| {
        let inside = match p {
            GraphPoint::Vertex(v) => vertices.contains(v),
            GraphPoint::OnEdge(e, _) => edges.contains(e),
            GraphPoint::OnRay(..) => false,
        };
        inside.then(|| (p.clone(), c))
    }))
}

/// Moves every chip off the interiors of disconnecting chains, sliding each
/// to its nearer chain end (ties go to the offset-0 end). Any two points of
/// a disconnecting chain are linearly equivalent, so the class is kept.
fn clear_bridge_interiors(g: &MetricGraph, canon: &CanonicalStructure, d: &mut Divisor) {
    for chain in canon.chains.values() {
        if chain.kind != EdgeType::Disconnected {
            continue;
        }
        let moves: Vec<(GraphPoint, i64, Q)> = d
            .iter()
            .filter_map(|(p, c)| {
                let t = chain.offset_of(g, p)?;
                (t.is_positive() && t < chain.length).then(|| (p.clone(), c, t))
            })
            .collect();
        for (p, c, t) in moves {
            let target = if &t + &t <= chain.length {
                chain.point_at(g, &Q::zero())
            } else {
                chain.point_at(g, &chain.length)
            }
            .expect("chain ends are valid points");
            d.add_at(p, -c);
            d.add_at(target, c);
        }
    }
}

/// Redistributes an effective divisor so that every island receives at
/// least its weighted genus, recursing over the disconnecting chains in id
/// order. At each split the side already holding its genus donates the
/// surplus across the chain; ties donate away from the side with the
/// smaller end vertex.
fn spread_over_islands(g: &MetricGraph, e: Divisor) -> Result<Divisor, IslandError> {
    if weighted_genus(g) <= 1 {
        return Ok(e);
    }
    let canon = canonical_structure(g);
    let bridges: Vec<&Chain> = canon
        .chains
        .values()
        .filter(|c| c.kind == EdgeType::Disconnected)
        .collect();
    if bridges.is_empty() {
        return Ok(e);
    }
    let mut e = e;
    clear_bridge_interiors(g, &canon, &mut e);

    let first = bridges[0];
    let skip_edges: BTreeSet<String> = first.segments.iter().map(|(s, _)| s.clone()).collect();
    let skip_vertices: BTreeSet<String> = first.interior_vertices.iter().cloned().collect();
    let comps = g.vertex_components(&skip_edges, &skip_vertices);
    let side_of = |v: &String| -> BTreeSet<String> {
        comps
            .iter()
            .find(|c| c.contains(v))
            .expect("chain ends survive the split")
            .clone()
    };
    let (v1, v2) = (&first.ends.0, &first.ends.1);
    let sub1 = induced_subgraph(g, &side_of(v1));
    let sub2 = induced_subgraph(g, &side_of(v2));
    let d1 = restrict_divisor(&e, &side_of(v1), &sub1.edge_ids().cloned().collect());
    let d2 = restrict_divisor(&e, &side_of(v2), &sub2.edge_ids().cloned().collect());
    debug_assert_eq!(d1.degree() + d2.degree(), e.degree());

    let (g1, g2) = (weighted_genus(&sub1), weighted_genus(&sub2));
    let ok1 = d1.degree() >= g1;
    let ok2 = d2.degree() >= g2;
    debug_assert!(ok1 || ok2, "one side always holds its genus");
    // The donor side keeps exactly its genus; the receiver absorbs the rest.
    let donor_is_first = if ok1 && ok2 { v1 > v2 } else { ok1 };
    let (donor_sub, donor_div, donor_end, recv_sub, recv_div, recv_end) = if donor_is_first {
        (&sub1, &d1, v1, &sub2, &d2, v2)
    } else {
        (&sub2, &d2, v2, &sub1, &d1, v1)
    };
    let surplus = donor_div.degree() - weighted_genus(donor_sub);
    let recv_in = &(recv_div.clone())
        + &Divisor::from_entries([(GraphPoint::Vertex(recv_end.clone()), surplus)]);
    let donor_class = &(donor_div.clone())
        - &Divisor::from_entries([(GraphPoint::Vertex(donor_end.clone()), surplus)]);
    let donor_eff = effective_of_bounded_class(donor_sub, &donor_class)?;

    let recv_out = spread_over_islands(recv_sub, recv_in)?;
    let donor_out = spread_over_islands(donor_sub, donor_eff)?;
    Ok(&recv_out + &donor_out)
}

/// Pushes chips outward along every connected-type chain until at most one
/// remains strictly inside. Both outer chips move the same distance, so
/// each pass is a linear-equivalence move supported on the chain.
fn spread_onto_ends(g: &MetricGraph, canon: &CanonicalStructure, mut e: Divisor) -> Divisor {
    for chain in canon.chains.values() {
        if chain.kind == EdgeType::Disconnected {
            continue;
        }
        loop {
            let mut interior: Vec<(Q, i64)> = e
                .iter()
                .filter_map(|(p, c)| {
                    let t = chain.offset_of(g, p)?;
                    (t.is_positive() && t < chain.length).then(|| (t, c))
                })
                .collect();
            interior.sort();
            if interior.iter().map(|(_, c)| c).sum::<i64>() <= 1 {
                break;
            }
            let t1 = interior.first().map(|(t, _)| t.clone()).unwrap();
            let t2 = interior.last().map(|(t, _)| t.clone()).unwrap();
            let m = (t1.clone()).min(&chain.length - &t2);
            let at = |t: &Q| chain.point_at(g, t).expect("spread offsets stay on the chain");
            e.add_at(at(&t1), -1);
            e.add_at(at(&t2), -1);
            e.add_at(at(&(&t1 - &m)), 1);
            e.add_at(at(&(&t2 + &m)), 1);
        }
    }
    e
}

/// Effective representative of `d` adapted to the island structure: it is
/// effective, holds at least one chip on every island, keeps the interiors
/// of disconnecting chains empty, and carries at most one chip in the
/// interior of any other canonical edge. Requires weighted genus at least
/// 2, degree at least the weighted genus, the standing assumption, and
/// positive weighted genus on every island; a genus-zero island could stay
/// empty, since the redistribution only guarantees each island its genus.
pub fn good_effective_divisor(g: &MetricGraph, d: &Divisor) -> Result<Divisor, IslandError> {
    if g.has_rays() {
        return Err(IslandError::RaysUnsupported);
    }
    if let Some(v) = assumption_violation(g) {
        return Err(IslandError::AssumptionViolated(v));
    }
    let genus = weighted_genus(g);
    if genus < 2 {
        return Err(IslandError::GenusTooSmall(genus));
    }
    if d.degree() < genus {
        return Err(IslandError::DegreeTooSmall {
            degree: d.degree(),
            weighted_genus: genus,
        });
    }
    for island in &islands(g)?.islands {
        if island.weighted_genus < 1 {
            let v = island.vertices.iter().next().expect("islands are nonempty");
            return Err(IslandError::GenusZeroIsland(v.clone()));
        }
    }
    d.validate_on(g)
        .map_err(|_| IslandError::Graph(GraphError::ForeignPoint("divisor support".to_owned())))?;

    let effective = effective_of_bounded_class(g, d)?;
    let spread = spread_over_islands(g, effective)?;
    let out = spread_onto_ends(g, &canonical_structure(g), spread);
    debug_assert!(check_good_conditions(g, &out)?.all_hold());
    Ok(out)
}

/// Measured degrees behind the three output conditions of
/// [`good_effective_divisor`], for reporting and verification.
#[derive(Debug, Clone)]
pub struct GoodConditions {
    pub effective: bool,
    /// Chip count per island, parallel to [`islands`].
    pub island_degrees: Vec<i64>,
    /// Interior degree per disconnecting chain.
    pub bridge_interior_degrees: BTreeMap<String, i64>,
    /// Interior degree per connected-type chain.
    pub connected_interior_degrees: BTreeMap<String, i64>,
}

impl GoodConditions {
    pub fn all_hold(&self) -> bool {
        self.effective
            && self.island_degrees.iter().all(|d| *d >= 1)
            && self.bridge_interior_degrees.values().all(|d| *d == 0)
            && self.connected_interior_degrees.values().all(|d| *d <= 1)
    }
}

/// Measures a divisor against the island structure.
pub fn check_good_conditions(g: &MetricGraph, e: &Divisor) -> Result<GoodConditions, IslandError> {
    let decomposition = islands(g)?;
    let canon = canonical_structure(g);
    let mut bridge_interior_degrees = BTreeMap::new();
    let mut connected_interior_degrees = BTreeMap::new();
    for (id, chain) in &canon.chains {
        let deg = chain.interior_degree(e);
        if chain.kind == EdgeType::Disconnected {
            bridge_interior_degrees.insert(id.clone(), deg);
        } else {
            connected_interior_degrees.insert(id.clone(), deg);
        }
    }
    Ok(GoodConditions {
        effective: e.is_effective(),
        island_degrees: decomposition
            .islands
            .iter()
            .map(|i| i.degree_of(e))
            .collect(),
        bridge_interior_degrees,
        connected_interior_degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{circle4, dumbbell, path3, theta};
    use crate::ratio::{q, qi};
    use crate::reduce::is_linearly_equivalent;

    fn v(id: &str) -> GraphPoint {
        GraphPoint::vertex(id)
    }

    fn on(e: &str, num: i64, den: i64) -> GraphPoint {
        GraphPoint::OnEdge(e.to_owned(), q(num, den))
    }

    fn weight_only(w: u64) -> MetricGraph {
        MetricGraph::new(vec![("v".to_owned(), w)], Vec::new(), Vec::new()).unwrap()
    }

    fn loop_bridge_weight() -> MetricGraph {
        MetricGraph::new(
            vec![("a".to_owned(), 0), ("b".to_owned(), 1)],
            vec![
                ("l".to_owned(), "a".to_owned(), "a".to_owned(), qi(2)),
                ("br".to_owned(), "a".to_owned(), "b".to_owned(), qi(1)),
            ],
            Vec::new(),
        )
        .unwrap()
    }

    fn triple_chain() -> MetricGraph {
        MetricGraph::unweighted(
            &["a", "b", "c"],
            vec![
                ("la", "a", "a", qi(2)),
                ("lb", "b", "b", qi(2)),
                ("lc", "c", "c", qi(2)),
                ("b1", "a", "b", qi(1)),
                ("b2", "b", "c", qi(1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn weighted_genus_adds_weights_to_the_betti_number() {
        assert_eq!(weighted_genus(&circle4()), 1);
        assert_eq!(weighted_genus(&weight_only(2)), 2);
        assert_eq!(weighted_genus(&dumbbell()), 2);
        assert_eq!(weighted_genus(&loop_bridge_weight()), 2);
    }

    #[test]
    fn circle_has_no_canonical_vertices() {
        let canon = canonical_structure(&circle4());
        assert!(canon.bare_circle);
        assert!(canon.vertices.is_empty());
        assert!(canon.chains.is_empty());
    }

    #[test]
    fn theta_chains_are_its_edges() {
        let canon = canonical_structure(&theta());
        assert_eq!(
            canon.vertices,
            ["u", "v"].iter().map(|s| s.to_string()).collect()
        );
        assert_eq!(canon.chains.len(), 3);
        for (id, chain) in &canon.chains {
            assert_eq!(chain.segments, vec![(id.clone(), true)]);
            assert_eq!(chain.kind, EdgeType::Connected);
        }
    }

    #[test]
    fn dumbbell_has_one_disconnecting_chain() {
        let canon = canonical_structure(&dumbbell());
        assert_eq!(canon.chains["br"].kind, EdgeType::Disconnected);
        assert_eq!(canon.chains["l1"].kind, EdgeType::Connected);
        assert_eq!(canon.chains["l1"].ends, ("v1".to_owned(), "v1".to_owned()));
    }

    #[test]
    fn valence_two_vertices_melt_into_chains() {
        let canon = canonical_structure(&path3());
        assert_eq!(canon.chains.len(), 1);
        let chain = &canon.chains["p0"];
        assert_eq!(
            chain.segments,
            vec![
                ("p0".to_owned(), true),
                ("p1".to_owned(), true),
                ("p2".to_owned(), true)
            ]
        );
        assert_eq!(chain.ends, ("v0".to_owned(), "v3".to_owned()));
        assert_eq!(chain.interior_vertices, vec!["v1".to_owned(), "v2".to_owned()]);
        assert_eq!(chain.length, qi(3));
        assert_eq!(chain.kind, EdgeType::Disconnected);
    }

    #[test]
    fn chain_orientation_follows_the_smaller_id_sequence() {
        // The middle edge points against the walk; offsets must still grow
        // monotonically along the chain.
        let g = MetricGraph::unweighted(
            &["x", "y", "m1", "m2"],
            vec![
                ("a", "x", "m1", qi(1)),
                ("b", "m2", "m1", qi(1)),
                ("c", "m2", "y", qi(1)),
                ("d", "x", "y", qi(1)),
                ("e", "x", "y", qi(1)),
            ],
        )
        .unwrap();
        let canon = canonical_structure(&g);
        let chain = &canon.chains["a"];
        assert_eq!(
            chain.segments,
            vec![
                ("a".to_owned(), true),
                ("b".to_owned(), false),
                ("c".to_owned(), true)
            ]
        );
        assert_eq!(chain.ends, ("x".to_owned(), "y".to_owned()));
        assert_eq!(chain.point_at(&g, &q(3, 2)).unwrap(), on("b", 1, 2));
        assert_eq!(chain.offset_of(&g, &on("b", 1, 2)), Some(q(3, 2)));
        assert_eq!(chain.offset_of(&g, &v("m2")), Some(qi(2)));
        assert_eq!(chain.point_at(&g, &qi(3)).unwrap(), v("y"));
    }

    #[test]
    fn island_decompositions() {
        let d = islands(&dumbbell()).unwrap();
        assert_eq!(d.islands.len(), 2);
        assert_eq!(d.bridges, vec!["br".to_owned()]);
        assert!(d.islands.iter().all(|i| i.weighted_genus == 1));
        assert_eq!(d.island_containing(&v("v1")), Some(0));
        assert_eq!(d.island_containing(&on("br", 1, 2)), None);

        let t = islands(&theta()).unwrap();
        assert_eq!(t.islands.len(), 1);
        assert!(t.bridges.is_empty());

        let lb = islands(&loop_bridge_weight()).unwrap();
        assert_eq!(lb.islands.len(), 2);
        assert_eq!(
            lb.islands.iter().map(|i| i.weighted_genus).sum::<i64>(),
            2
        );

        let c = islands(&circle4()).unwrap();
        assert_eq!(c.islands.len(), 1);
        assert_eq!(c.islands[0].weighted_genus, 1);
    }

    #[test]
    fn dangling_paths_violate_the_assumption() {
        assert!(matches!(
            islands(&path3()),
            Err(IslandError::AssumptionViolated(_))
        ));
    }

    #[test]
    fn riemann_representatives() {
        let g = dumbbell();
        let d = Divisor::from_entries([(on("l2", 1, 1), 2)]);
        let rep = weighted_riemann(&g, &d).unwrap();
        assert!(rep.is_effective());
        assert_eq!(rep.degree(), 2);

        let w = weight_only(2);
        let d = Divisor::from_entries([(v("v"), 2)]);
        assert_eq!(weighted_riemann(&w, &d).unwrap(), d);

        let t = theta();
        let d = Divisor::from_entries([(on("a", 1, 2), 1), (on("c", 2, 1), 1)]);
        assert!(weighted_riemann(&t, &d).unwrap().is_effective());
    }

    #[test]
    fn chips_spread_symmetrically_onto_chain_ends() {
        let g = theta();
        let canon = canonical_structure(&g);

        let e = Divisor::from_entries([(on("c", 1, 1), 1), (on("c", 2, 1), 1)]);
        let out = spread_onto_ends(&g, &canon, e.clone());
        assert_eq!(out, Divisor::from_entries([(v("u"), 1), (v("v"), 1)]));
        assert!(is_linearly_equivalent(&g, &e, &out).unwrap().is_some());

        let e = Divisor::from_entries([(on("c", 1, 2), 1), (on("c", 1, 1), 1)]);
        let out = spread_onto_ends(&g, &canon, e);
        assert_eq!(
            out,
            Divisor::from_entries([(v("u"), 1), (on("c", 3, 2), 1)])
        );

        let e = Divisor::from_entries([(on("c", 1, 1), 2)]);
        let out = spread_onto_ends(&g, &canon, e);
        assert_eq!(out, Divisor::from_entries([(v("u"), 1), (on("c", 2, 1), 1)]));
    }

    #[test]
    fn good_divisor_covers_both_dumbbell_islands() {
        let g = dumbbell();
        let d = Divisor::from_entries([(on("l2", 1, 1), 2)]);
        let e = good_effective_divisor(&g, &d).unwrap();
        assert_eq!(e, Divisor::from_entries([(v("v1"), 1), (v("v2"), 1)]));
        assert!(is_linearly_equivalent(&g, &d, &e).unwrap().is_some());
        assert!(check_good_conditions(&g, &e).unwrap().all_hold());
    }

    #[test]
    fn good_divisor_without_bridges_is_a_riemann_representative() {
        let g = theta();
        let d = Divisor::from_entries([(on("c", 3, 2), 2)]);
        let e = good_effective_divisor(&g, &d).unwrap();
        let report = check_good_conditions(&g, &e).unwrap();
        assert!(report.all_hold());
        assert!(is_linearly_equivalent(&g, &d, &e).unwrap().is_some());
    }

    #[test]
    fn good_divisor_recurses_through_nested_bridges() {
        let g = triple_chain();
        let d = Divisor::from_entries([(v("a"), 3)]);
        let e = good_effective_divisor(&g, &d).unwrap();
        assert_eq!(
            e,
            Divisor::from_entries([(v("a"), 1), (v("b"), 1), (v("c"), 1)])
        );
        assert!(is_linearly_equivalent(&g, &d, &e).unwrap().is_some());
    }

    #[test]
    fn good_divisor_clears_bridge_chips() {
        let g = dumbbell();
        let d = Divisor::from_entries([(on("br", 1, 2), 2)]);
        let e = good_effective_divisor(&g, &d).unwrap();
        let report = check_good_conditions(&g, &e).unwrap();
        assert!(report.all_hold());
        assert_eq!(report.bridge_interior_degrees["br"], 0);
        assert!(is_linearly_equivalent(&g, &d, &e).unwrap().is_some());
    }

    #[test]
    fn good_divisor_rejects_bad_inputs() {
        assert!(matches!(
            good_effective_divisor(&circle4(), &Divisor::from_entries([(v("v0"), 2)])),
            Err(IslandError::GenusTooSmall(1))
        ));
        assert!(matches!(
            good_effective_divisor(&dumbbell(), &Divisor::single(v("v1"))),
            Err(IslandError::DegreeTooSmall { .. })
        ));
        assert!(matches!(
            good_effective_divisor(&path3(), &Divisor::from_entries([(v("v0"), 3)])),
            Err(IslandError::AssumptionViolated(_))
        ));
    }

    #[test]
    fn weightless_branch_vertices_form_genus_zero_islands() {
        // Star with a weightless center: the assumption holds, yet the
        // center is its own island of genus 0 and the occupancy condition
        // cannot be met by any divisor of degree equal to the genus.
        let star = MetricGraph::new(
            vec![
                ("c".to_owned(), 0),
                ("l1".to_owned(), 1),
                ("l2".to_owned(), 1),
                ("l3".to_owned(), 1),
            ],
            vec![
                ("e1".to_owned(), "c".to_owned(), "l1".to_owned(), qi(1)),
                ("e2".to_owned(), "c".to_owned(), "l2".to_owned(), qi(1)),
                ("e3".to_owned(), "c".to_owned(), "l3".to_owned(), qi(1)),
            ],
            Vec::new(),
        )
        .unwrap();
        assert_eq!(weighted_genus(&star), 3);

        let dec = islands(&star).unwrap();
        assert_eq!(dec.islands.len(), 4);
        assert_eq!(dec.islands.iter().map(|i| i.weighted_genus).sum::<i64>(), 3);
        let center = dec
            .islands
            .iter()
            .find(|i| i.vertices.contains("c"))
            .unwrap();
        assert_eq!(center.weighted_genus, 0);
        assert_eq!(center.vertices.len(), 1);

        assert_eq!(
            good_effective_divisor(&star, &Divisor::from_entries([(v("l1"), 3)])),
            Err(IslandError::GenusZeroIsland("c".to_owned()))
        );
    }
}
