//! Builders for single-purpose piecewise linear coordinates and the
//! synthesis pipeline assembling them into a certified map.
//!
//! Each builder produces one function with an exact sign or isometry
//! contract: steps across bridges, tents over non-bridge edges, tents
//! confined to half an edge, plateaus separating two vertices, and ramps
//! escorting a ray to infinity. The pipeline budgets every construction
//! against a fixed divisor class, pairs it with a reduction witness so the
//! induced divisors stay effective, and hands the deduplicated coordinate
//! list to the verifier.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num::{Signed, Zero};
use thiserror::Error;

use crate::divisor::Divisor;
use crate::graph::{EdgeType, GraphError, GraphPoint, MetricGraph};
use crate::islands::{canonical_structure, islands};
use crate::pl::{distance_function, PLFunction, PlError, Profile};
use crate::ratio::{q, qi, Q};
use crate::reduce::{canonical_reduction, ReduceError};
use crate::trop::{assemble_map, TropError, TropMap};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pl(#[from] PlError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Trop(#[from] TropError),
    #[error("edge {0:?} does not disconnect the graph")]
    NotABridge(String),
    #[error("edge {0:?} disconnects the graph")]
    NotConnectedType(String),
    #[error("{0:?} is not an end of the chosen edge")]
    NotAnEnd(String),
    #[error("separating a pair needs two distinct edges, got {0:?} twice")]
    SameEdge(String),
    #[error("separating a pair needs two distinct vertices, got {0:?} twice")]
    SameVertex(String),
    #[error("the degree budget must be at least 1, got {0}")]
    DegreeTooSmall(i64),
    #[error("no effective divisor in the budget class supports the {construction}")]
    Infeasible { construction: String },
}

/// Outcome of a budget-constrained search: either a function meeting the
/// contract, or the constraint that admitted no effective divisor.
#[derive(Debug, Clone)]
pub enum Separation {
    Function(PLFunction),
    Infeasible { constraint: String },
}

/// Builds a function from explicit profiles on a few edges and rays,
/// extended by the matching constant everywhere else. Vertex values are
/// propagated from the supported pieces across the rest of the graph.
fn complete_function(
    g: &MetricGraph,
    special_edges: BTreeMap<String, Profile>,
    special_rays: BTreeMap<String, Profile>,
) -> Result<PLFunction, SynthError> {
    let mut values: BTreeMap<String, Q> = BTreeMap::new();
    for (id, profile) in &special_edges {
        let edge = g.edge(id).expect("builders use ids from the graph");
        values.insert(edge.ends.0.clone(), profile.value_at(&Q::zero()));
        values.insert(edge.ends.1.clone(), profile.value_at(&edge.length));
    }
    for (id, profile) in &special_rays {
        let base = g.ray_base(id).expect("builders use ids from the graph");
        values.insert(base.clone(), profile.value_at(&Q::zero()));
    }
    let mut changed = true;
    while changed {
        changed = false;
        for (id, edge) in g.edges() {
            if special_edges.contains_key(id) {
                continue;
            }
            let (a, b) = (&edge.ends.0, &edge.ends.1);
            match (values.get(a).cloned(), values.get(b).cloned()) {
                (Some(va), None) => {
                    values.insert(b.clone(), va);
                    changed = true;
                }
                (None, Some(vb)) => {
                    values.insert(a.clone(), vb);
                    changed = true;
                }
                _ => {}
            }
        }
    }
    let value_of = |v: &String| -> Q {
        values
            .get(v)
            .cloned()
            .expect("connected graphs value every vertex")
    };
    let edges = g
        .edges()
        .map(|(id, edge)| {
            let profile = special_edges
                .get(id)
                .cloned()
                .unwrap_or_else(|| Profile::constant(value_of(&edge.ends.0)));
            (id.clone(), profile)
        })
        .collect();
    let rays = g
        .ray_ids()
        .map(|id| {
            let profile = special_rays.get(id).cloned().unwrap_or_else(|| {
                Profile::constant(value_of(g.ray_base(id).expect("id from graph")))
            });
            (id.clone(), profile)
        })
        .collect();
    Ok(PLFunction::from_parts(g, edges, rays)?)
}

/// Step across a bridge: 0 on the whole component of `head`, slope 1 along
/// the bridge, constant equal to the bridge length beyond. Its divisor is
/// `[head] − [tail]`.
pub fn synth_edge_disconnected(
    g: &MetricGraph,
    e: &str,
    head: &str,
) -> Result<PLFunction, SynthError> {
    let edge = g
        .edge(e)
        .ok_or_else(|| GraphError::UnknownEdge(e.to_owned()))?;
    if g.classify_edge(e)? != EdgeType::Disconnected {
        return Err(SynthError::NotABridge(e.to_owned()));
    }
    if head != edge.ends.0 && head != edge.ends.1 {
        return Err(SynthError::NotAnEnd(head.to_owned()));
    }
    let profile = if head == edge.ends.0 {
        Profile::line(Q::zero(), 1)
    } else {
        Profile::line(edge.length.clone(), -1)
    };
    complete_function(g, BTreeMap::from([(e.to_owned(), profile)]), BTreeMap::new())
}

/// Tent over a non-bridge edge: the distance along the edge to the nearer
/// endpoint, 0 off the edge. Isometric on each half; the divisor is
/// `[v1] + [v2] − 2[mid]`.
pub fn synth_edge_connected(g: &MetricGraph, e: &str) -> Result<PLFunction, SynthError> {
    let edge = g
        .edge(e)
        .ok_or_else(|| GraphError::UnknownEdge(e.to_owned()))?;
    if g.classify_edge(e)? != EdgeType::Connected {
        return Err(SynthError::NotConnectedType(e.to_owned()));
    }
    let half = &edge.length / &qi(2);
    let profile =
        Profile::new(Q::zero(), vec![(Q::zero(), 1), (half, -1)]).expect("tent breaks are sorted");
    complete_function(g, BTreeMap::from([(e.to_owned(), profile)]), BTreeMap::new())
}

/// Tent confined to one half of a non-bridge edge: vanishes on the closed
/// other half and off the edge, positive exactly on the chosen open half,
/// peak a quarter of the edge length high.
pub fn synth_half_separator(
    g: &MetricGraph,
    e: &str,
    upper: bool,
) -> Result<PLFunction, SynthError> {
    let edge = g
        .edge(e)
        .ok_or_else(|| GraphError::UnknownEdge(e.to_owned()))?;
    if g.classify_edge(e)? != EdgeType::Connected {
        return Err(SynthError::NotConnectedType(e.to_owned()));
    }
    let len = &edge.length;
    let half = len / &qi(2);
    let breaks = if upper {
        vec![
            (Q::zero(), 0),
            (half.clone(), 1),
            (len * &q(3, 4), -1),
        ]
    } else {
        vec![(Q::zero(), 1), (len / &qi(4), -1), (half, 0)]
    };
    let profile = Profile::new(Q::zero(), breaks).expect("half-tent breaks are sorted");
    complete_function(g, BTreeMap::from([(e.to_owned(), profile)]), BTreeMap::new())
}

/// Separates a non-bridge edge from any other edge: positive exactly on the
/// relative interior of `e`, zero everywhere else including all of
/// `f_edge`. The tent over `e` does this for every other edge at once.
pub fn synth_edge_pair_separator(
    g: &MetricGraph,
    e: &str,
    f_edge: &str,
) -> Result<PLFunction, SynthError> {
    if g.edge(f_edge).is_none() {
        return Err(SynthError::Graph(GraphError::UnknownEdge(
            f_edge.to_owned(),
        )));
    }
    if e == f_edge {
        return Err(SynthError::SameEdge(e.to_owned()));
    }
    synth_edge_connected(g, e)
}

/// Half the length of the shortest edge touching `center`; the ball of
/// this radius around `center` stays inside the star of incident edges.
fn star_radius(g: &MetricGraph, center: &str) -> Q {
    let mut best: Option<Q> = None;
    for (_, edge) in g.edges() {
        if edge.ends.0 == center || edge.ends.1 == center {
            if best.as_ref().map_or(true, |b| edge.length < *b) {
                best = Some(edge.length.clone());
            }
        }
    }
    &best.expect("separated vertices touch an edge") / &qi(2)
}

/// The two plateau candidates with value positive at `v1` and 0 at `v2`:
/// a ramp out of `v2` levelling off before it can reach `v1`, and a bump
/// around `v1` too small to reach `v2`.
fn plateau_candidates(
    p: &MetricGraph,
    v1: &str,
    v2: &str,
) -> Result<Vec<PLFunction>, SynthError> {
    let rho_a = star_radius(p, v2);
    let dist2 = distance_function(p, &GraphPoint::Vertex(v2.to_owned()))?;
    let ramp = PLFunction::pointwise_min(p, &dist2, &PLFunction::constant(p, rho_a));

    let rho_b = star_radius(p, v1);
    let dist1 = distance_function(p, &GraphPoint::Vertex(v1.to_owned()))?;
    let near = PLFunction::pointwise_min(p, &dist1, &PLFunction::constant(p, rho_b.clone()));
    let bump = PLFunction::combine(p, &PLFunction::constant(p, rho_b), &near, 1, -1);
    Ok(vec![ramp, bump])
}

/// Extends a function on the ray-free copy back to the full graph by the
/// constant continuation along every ray.
fn lift(g: &MetricGraph, p: &MetricGraph, f: &PLFunction) -> Result<PLFunction, SynthError> {
    if !g.has_rays() {
        return Ok(f.clone());
    }
    let (edges, _) = f.profiles();
    let rays = g
        .ray_ids()
        .map(|r| {
            let base = g.ray_base(r).expect("id from graph");
            (r.clone(), Profile::constant(f.vertex_value(p, base)))
        })
        .collect();
    Ok(PLFunction::from_parts(g, edges.clone(), rays)?)
}

/// Reduction witness fitting one construction into the budget class:
/// `class + div(w) = E` with `E` effective and `E + div(r)` effective too.
/// `None` when the class has no such representative.
fn budget_witness(
    p: &MetricGraph,
    class: &Divisor,
    r: &PLFunction,
    g: &MetricGraph,
) -> Result<Option<PLFunction>, SynthError> {
    let parts = r.principal_divisor(g);
    debug_assert!(
        parts.ledger_admissible(),
        "synthesized coordinates never descend toward an end"
    );
    let neg = parts.finite.neg_part();
    let target = class - &neg;
    let reduction = canonical_reduction(p, &target)?;
    if reduction.reduced.is_effective() {
        Ok(Some(reduction.witness))
    } else {
        Ok(None)
    }
}

/// Function positive at `v1` and non-positive at `v2` whose poles fit in
/// the budget class: a step across a separating bridge when the two
/// vertices lie on opposite sides of one, otherwise a plateau around one
/// of them. Infeasibility is a value, not an error.
pub fn synth_vertex_separator(
    g: &MetricGraph,
    v1: &str,
    v2: &str,
    class: &Divisor,
) -> Result<Separation, SynthError> {
    if v1 == v2 {
        return Err(SynthError::SameVertex(v1.to_owned()));
    }
    for v in [v1, v2] {
        if g.vertex_weight(v).is_none() {
            return Err(SynthError::Graph(GraphError::UnknownVertex(v.to_owned())));
        }
    }
    let p = g.without_rays();
    let mut candidates: Vec<PLFunction> = Vec::new();
    for (id, edge) in p.edges() {
        if p.classify_edge(id)? != EdgeType::Disconnected {
            continue;
        }
        let skip: BTreeSet<String> = BTreeSet::from([id.clone()]);
        let comps = p.vertex_components(&skip, &BTreeSet::new());
        let side = |v: &str| comps.iter().position(|c| c.contains(v));
        if side(v1) == side(v2) {
            continue;
        }
        // 0 on the side of v2, so the value at v1 is the bridge length.
        let head = if side(edge.ends.0.as_str()) == side(v2) {
            edge.ends.0.clone()
        } else {
            edge.ends.1.clone()
        };
        candidates.push(synth_edge_disconnected(g, id, &head)?);
    }
    for f in plateau_candidates(&p, v1, v2)? {
        candidates.push(lift(g, &p, &f)?);
    }
    for f in candidates {
        debug_assert!(f.vertex_value(g, v1).is_positive());
        debug_assert!(!f.vertex_value(g, v2).is_positive());
        if budget_witness(&p, class, &f, g)?.is_some() {
            return Ok(Separation::Function(f));
        }
    }
    Ok(Separation::Infeasible {
        constraint: format!(
            "no effective divisor in the budget class absorbs the poles of a function \
             separating {v1} from {v2}"
        ),
    })
}

/// Vertices of the compact core: everything left after repeatedly deleting
/// weightless vertices with a single incident edge direction. At least one
/// vertex always survives; a tree strips down to a single vertex.
pub fn core_vertices(g: &MetricGraph) -> BTreeSet<String> {
    let mut kept: BTreeSet<String> = g.vertex_ids().cloned().collect();
    let mut kept_edges: BTreeSet<String> = g.edge_ids().cloned().collect();
    loop {
        let leaf = kept
            .iter()
            .find(|v| {
                g.vertex_weight(v) == Some(0) && {
                    let degree: usize = kept_edges
                        .iter()
                        .map(|e| {
                            let ends = &g.edge(e).expect("id from graph").ends;
                            usize::from(ends.0 == **v) + usize::from(ends.1 == **v)
                        })
                        .sum();
                    degree == 1
                }
            })
            .cloned();
        match leaf {
            Some(v) => {
                kept.remove(&v);
                kept_edges.retain(|e| {
                    let ends = &g.edge(e).expect("id from graph").ends;
                    ends.0 != v && ends.1 != v
                });
            }
            None => break,
        }
    }
    kept
}

/// Escorts one ray to infinity: 0 on the core, slope 1 along the unique
/// path from the core to the ray base and out along the ray, constant on
/// every branch and every other ray hanging off that path.
pub fn synth_end_function(g: &MetricGraph, r: &str) -> Result<PLFunction, SynthError> {
    let base = g
        .ray_base(r)
        .ok_or_else(|| GraphError::UnknownRay(r.to_owned()))?
        .clone();
    let core = core_vertices(g);

    let mut values: BTreeMap<String, Q> = core.iter().map(|v| (v.clone(), Q::zero())).collect();
    let mut path_edges: BTreeSet<String> = BTreeSet::new();
    if !values.contains_key(&base) {
        // The stripped region is a forest, so the walk from the base to the
        // core follows a unique edge path. Breadth-first discovery from the
        // base leaves parent links pointing back toward the base.
        let mut parent: BTreeMap<String, (String, String)> = BTreeMap::new();
        let mut queue = VecDeque::from([base.clone()]);
        let mut attach: Option<String> = None;
        'search: while let Some(v) = queue.pop_front() {
            for (id, edge) in g.edges() {
                let other = if edge.ends.0 == v {
                    &edge.ends.1
                } else if edge.ends.1 == v {
                    &edge.ends.0
                } else {
                    continue;
                };
                if parent.contains_key(other) || *other == base {
                    continue;
                }
                parent.insert(other.clone(), (v.clone(), id.clone()));
                if core.contains(other) {
                    attach = Some(other.clone());
                    break 'search;
                }
                queue.push_back(other.clone());
            }
        }
        let attach = attach.expect("connected graphs reach the core");
        let mut cursor = attach;
        while cursor != base {
            let (toward_base, edge_id) = parent
                .get(&cursor)
                .expect("every path vertex was discovered")
                .clone();
            let len = &g.edge(&edge_id).expect("id from graph").length;
            let here = values
                .get(&cursor)
                .expect("values grow outward from the core")
                .clone();
            values.insert(toward_base.clone(), &here + len);
            path_edges.insert(edge_id);
            cursor = toward_base;
        }
    }

    // Branches hanging off the path or the core are locally constant.
    let mut changed = true;
    while changed {
        changed = false;
        for (id, edge) in g.edges() {
            if path_edges.contains(id) {
                continue;
            }
            let (a, b) = (&edge.ends.0, &edge.ends.1);
            match (values.get(a).cloned(), values.get(b).cloned()) {
                (Some(va), None) => {
                    values.insert(b.clone(), va);
                    changed = true;
                }
                (None, Some(vb)) => {
                    values.insert(a.clone(), vb);
                    changed = true;
                }
                _ => {}
            }
        }
    }

    let edges = g
        .edges()
        .map(|(id, edge)| {
            let va = values[&edge.ends.0].clone();
            let profile = if path_edges.contains(id) {
                let vb = &values[&edge.ends.1];
                if *vb == &va + &edge.length {
                    Profile::line(va, 1)
                } else {
                    debug_assert_eq!(va, vb + &edge.length);
                    Profile::line(va, -1)
                }
            } else {
                Profile::constant(va)
            };
            (id.clone(), profile)
        })
        .collect();
    let rays = g
        .ray_ids()
        .map(|id| {
            let start = values[g.ray_base(id).expect("id from graph")].clone();
            let profile = if id == r {
                Profile::line(start, 1)
            } else {
                Profile::constant(start)
            };
            (id.clone(), profile)
        })
        .collect();
    Ok(PLFunction::from_parts(g, edges, rays)?)
}

/// Ordered traversal of a weightless circle from the base vertex: segments
/// with a forward flag and the cumulative offset where each begins, plus
/// the total circumference.
fn circle_walk(p: &MetricGraph) -> (Vec<(String, bool, Q)>, Q) {
    let start = p.base_vertex().clone();
    let slots_at = |v: &str| -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for (id, edge) in p.edges() {
            if edge.ends.0 == v {
                out.push((id.clone(), 0));
            }
            if edge.ends.1 == v {
                out.push((id.clone(), 1));
            }
        }
        out.sort();
        out
    };
    let mut segments = Vec::new();
    let mut offset = Q::zero();
    let mut slot = slots_at(&start)
        .into_iter()
        .next()
        .expect("circles have edges");
    loop {
        let edge = p.edge(&slot.0).expect("id from graph");
        let forward = slot.1 == 0;
        segments.push((slot.0.clone(), forward, offset.clone()));
        offset = &offset + &edge.length;
        let arrive = if forward { &edge.ends.1 } else { &edge.ends.0 };
        if *arrive == start {
            break;
        }
        let arrive_slot = (slot.0.clone(), if forward { 1 } else { 0 });
        slot = slots_at(arrive)
            .into_iter()
            .find(|s| *s != arrive_slot)
            .expect("circle vertices have two slots");
    }
    (segments, offset)
}

/// Restriction of a chain-coordinate profile to the window
/// `[from, from + len]`, reparameterized to start at 0.
fn restrict(chain: &Profile, from: &Q, len: &Q) -> Profile {
    let mut breaks = vec![(Q::zero(), chain.slope_after(from))];
    let hi = from + len;
    for (off, slope) in &chain.breaks {
        if *off > *from && *off < hi {
            breaks.push((off - from, *slope));
        }
    }
    Profile::new(chain.value_at(from), breaks).expect("restricted breaks stay sorted")
}

/// Realizes a function given by one profile over the circle coordinate.
fn circle_function(p: &MetricGraph, chain: &Profile) -> Result<PLFunction, SynthError> {
    let (segments, _) = circle_walk(p);
    let mut edges = BTreeMap::new();
    for (id, forward, off) in segments {
        let len = p.edge(&id).expect("id from graph").length.clone();
        let restricted = restrict(chain, &off, &len);
        let profile = if forward {
            restricted
        } else {
            restricted.reversed(&len)
        };
        edges.insert(id, profile);
    }
    Ok(PLFunction::from_parts(p, edges, BTreeMap::new())?)
}

fn is_new_coordinate(g: &MetricGraph, kept: &[PLFunction], f: &PLFunction) -> bool {
    if f.constant_value().is_some() {
        return false;
    }
    kept.iter()
        .all(|k| PLFunction::combine(g, f, k, 1, -1).constant_value().is_none())
}

/// Assembles a certified map of degree `d`: every construction the
/// verification needs is budgeted against the class of `d` chips at the
/// base vertex, paired with a reduction witness keeping its induced
/// divisor effective, and deduplicated up to an additive constant.
///
/// Fails with the first construction whose divisor constraint has no
/// effective solution.
pub fn synthesize_faithful(g: &MetricGraph, d: i64) -> Result<TropMap, SynthError> {
    if d < 1 {
        return Err(SynthError::DegreeTooSmall(d));
    }
    let p = g.without_rays();
    let class = Divisor::from_entries([(GraphPoint::Vertex(p.base_vertex().clone()), d)]);
    let base_reduction = canonical_reduction(&p, &class)?;
    let base = base_reduction.reduced;
    let w0 = base_reduction.witness;
    debug_assert!(base.is_effective());

    let mut constructions: Vec<(String, Vec<PLFunction>)> = Vec::new();
    if canonical_structure(&p).bare_circle {
        let (_, total) = circle_walk(&p);
        let half = &total / &qi(2);
        let tent = Profile::new(Q::zero(), vec![(Q::zero(), 1), (half.clone(), -1)])
            .expect("tent breaks are sorted");
        constructions.push((
            "tent around the circle".to_owned(),
            vec![lift(g, &p, &circle_function(&p, &tent)?)?],
        ));
        let lower = Profile::new(
            Q::zero(),
            vec![(Q::zero(), 1), (&total / &qi(4), -1), (half.clone(), 0)],
        )
        .expect("half-tent breaks are sorted");
        let upper = Profile::new(
            Q::zero(),
            vec![(Q::zero(), 0), (half, 1), (&total * &q(3, 4), -1)],
        )
        .expect("half-tent breaks are sorted");
        let mut variants = Vec::new();
        for shape in [lower, upper] {
            let f = circle_function(&p, &shape)?;
            let negated = PLFunction::combine(&p, &f, &f, -1, 0);
            variants.push(lift(g, &p, &f)?);
            variants.push(lift(g, &p, &negated)?);
        }
        constructions.push(("half separator on the circle".to_owned(), variants));
    } else {
        let mut connected: Vec<String> = Vec::new();
        for (id, edge) in p.edges() {
            match p.classify_edge(id)? {
                EdgeType::Disconnected => {
                    let head = if edge.ends.0 <= edge.ends.1 {
                        &edge.ends.0
                    } else {
                        &edge.ends.1
                    };
                    constructions.push((
                        format!("step across bridge {id}"),
                        vec![synth_edge_disconnected(g, id, head)?],
                    ));
                }
                EdgeType::Connected => connected.push(id.clone()),
            }
        }
        for id in &connected {
            constructions.push((
                format!("tent on edge {id}"),
                vec![synth_edge_connected(g, id)?],
            ));
        }
        for id in &connected {
            let mut variants = Vec::new();
            for upper in [false, true] {
                let f = synth_half_separator(g, id, upper)?;
                let negated = PLFunction::combine(g, &f, &f, -1, 0);
                variants.push(f);
                variants.push(negated);
            }
            constructions.push((format!("half separator on edge {id}"), variants));
        }
        if let Ok(decomposition) = islands(&p) {
            let canonical: Vec<String> =
                canonical_structure(g).vertices.into_iter().collect();
            for (i, v1) in canonical.iter().enumerate() {
                for v2 in canonical.iter().skip(i + 1) {
                    let home =
                        |v: &str| decomposition.island_containing(&GraphPoint::Vertex(v.to_owned()));
                    let (h1, h2) = (home(v1), home(v2));
                    if h1.is_none() || h1 != h2 {
                        continue;
                    }
                    let candidates = plateau_candidates(&p, v1, v2)?
                        .iter()
                        .map(|f| lift(g, &p, f))
                        .collect::<Result<Vec<_>, _>>()?;
                    constructions.push((
                        format!("separator for vertices {v1} and {v2}"),
                        candidates,
                    ));
                }
            }
        }
    }
    for ray in g.ray_ids() {
        constructions.push((
            format!("end function for ray {ray}"),
            vec![synth_end_function(g, ray)?],
        ));
    }

    let mut kept: Vec<PLFunction> = Vec::new();
    for (name, candidates) in constructions {
        let mut fitted = None;
        for f in candidates {
            if let Some(witness) = budget_witness(&p, &class, &f, g)? {
                fitted = Some((f, witness));
                break;
            }
        }
        let Some((f, witness)) = fitted else {
            return Err(SynthError::Infeasible { construction: name });
        };
        let shift = lift(g, &p, &PLFunction::combine(&p, &witness, &w0, 1, -1))?;
        let paired = PLFunction::combine(g, &shift, &f, 1, 1);
        for coordinate in [shift, paired] {
            if is_new_coordinate(g, &kept, &coordinate) {
                kept.push(coordinate);
            }
        }
    }
    Ok(assemble_map(g, base, kept)?)
}
