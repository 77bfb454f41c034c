//! Vertex-weighted metric graphs with exact rational edge lengths and
//! optional rays.
//!
//! A [`MetricGraph`] is a finite connected multigraph (loops and parallel
//! edges are allowed) in which every edge carries a positive rational length
//! and every vertex carries a non-negative integer weight. A ray is a
//! half-infinite edge attached to a single base vertex; it adds one direction
//! to the valence of its base but no genus and no finite length.
//!
//! Points of the underlying metric space are addressed by [`GraphPoint`]:
//! either a vertex, an interior point of an edge at a rational offset, or an
//! interior point of a ray. Offsets are measured from the first endpoint of
//! the edge (respectively from the base of the ray), and boundary offsets
//! normalize to the vertex itself, so each point has exactly one
//! representation and structural equality coincides with geometric equality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{Signed, Zero};
use thiserror::Error;

use crate::ratio::{fmt_q, Q};

/// Errors raised while building or querying a metric graph.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("a metric graph needs at least one vertex")]
    EmptyVertexSet,
    #[error("identifier {0:?} is empty")]
    EmptyId(String),
    #[error("identifier {0:?} is used more than once")]
    DuplicateId(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("unknown ray {0:?}")]
    UnknownRay(String),
    #[error("edge {edge:?} has non-positive length {length}")]
    NonPositiveLength { edge: String, length: String },
    #[error("the graph is not connected")]
    Disconnected,
    #[error("offset {offset} lies outside {id:?}")]
    OffsetOutOfRange { id: String, offset: String },
    #[error("point {0} is not an edge-interior point")]
    NotEdgeInterior(String),
    #[error("point {0} does not lie on this graph")]
    ForeignPoint(String),
}

/// Finite edge of a metric graph. `ends.0` is the offset-zero endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub ends: (String, String),
    pub length: Q,
}

impl Edge {
    /// True when both endpoints coincide.
    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }
}

/// Point of the metric space underlying a graph.
///
/// The derived ordering (vertices first, then edge points by edge id and
/// offset, then ray points) is the canonical point order used for
/// deterministic tie-breaking throughout the crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraphPoint {
    /// A vertex, by id.
    Vertex(String),
    /// Interior point of an edge, at offset strictly between 0 and the length.
    OnEdge(String, Q),
    /// Interior point of a ray, at offset strictly greater than 0.
    OnRay(String, Q),
}

impl GraphPoint {
    pub fn vertex(id: impl Into<String>) -> Self {
        GraphPoint::Vertex(id.into())
    }
}

impl fmt::Display for GraphPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphPoint::Vertex(v) => write!(f, "{v}"),
            GraphPoint::OnEdge(e, t) => write!(f, "{e}@{}", fmt_q(t)),
            GraphPoint::OnRay(r, t) => write!(f, "{r}@{}", fmt_q(t)),
        }
    }
}

/// Type of a finite edge: removing the open edge either keeps the graph
/// connected or splits it into exactly two components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeType {
    Connected,
    Disconnected,
}

/// Connected vertex-weighted metric graph with optional rays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricGraph {
    vertices: BTreeMap<String, u64>,
    edges: BTreeMap<String, Edge>,
    rays: BTreeMap<String, String>,
}

impl MetricGraph {
    /// Builds a graph from its parts and validates every structural
    /// invariant: ids are non-empty and unique across vertices, edges, and
    /// rays; edge endpoints and ray bases exist; edge lengths are positive;
    /// the graph is connected.
    pub fn new(
        vertices: Vec<(String, u64)>,
        edges: Vec<(String, String, String, Q)>,
        rays: Vec<(String, String)>,
    ) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::EmptyVertexSet);
        }
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut claim = |id: &str| -> Result<(), GraphError> {
            if id.is_empty() {
                return Err(GraphError::EmptyId(id.to_owned()));
            }
            if !seen.insert(id.to_owned()) {
                return Err(GraphError::DuplicateId(id.to_owned()));
            }
            Ok(())
        };

        let mut vmap = BTreeMap::new();
        for (id, weight) in vertices {
            claim(&id)?;
            vmap.insert(id, weight);
        }
        let mut emap = BTreeMap::new();
        for (id, a, b, length) in edges {
            claim(&id)?;
            if !vmap.contains_key(&a) {
                return Err(GraphError::UnknownVertex(a));
            }
            if !vmap.contains_key(&b) {
                return Err(GraphError::UnknownVertex(b));
            }
            if !length.is_positive() {
                return Err(GraphError::NonPositiveLength {
                    edge: id,
                    length: fmt_q(&length),
                });
            }
            emap.insert(id, Edge { ends: (a, b), length });
        }
        let mut rmap = BTreeMap::new();
        for (id, base) in rays {
            claim(&id)?;
            if !vmap.contains_key(&base) {
                return Err(GraphError::UnknownVertex(base));
            }
            rmap.insert(id, base);
        }

        let graph = MetricGraph {
            vertices: vmap,
            edges: emap,
            rays: rmap,
        };
        if !graph.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }

    /// Convenience constructor for unweighted, ray-free graphs.
    pub fn unweighted(
        vertices: &[&str],
        edges: Vec<(&str, &str, &str, Q)>,
    ) -> Result<Self, GraphError> {
        MetricGraph::new(
            vertices.iter().map(|v| (v.to_string(), 0)).collect(),
            edges
                .into_iter()
                .map(|(id, a, b, l)| (id.to_string(), a.to_string(), b.to_string(), l))
                .collect(),
            Vec::new(),
        )
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = &String> {
        self.vertices.keys()
    }

    pub fn vertex_weight(&self, v: &str) -> Option<u64> {
        self.vertices.get(v).copied()
    }

    pub fn total_weight(&self) -> u64 {
        self.vertices.values().sum()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = &String> {
        self.edges.keys()
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&String, &Edge)> {
        self.edges.iter()
    }

    pub fn ray_ids(&self) -> impl Iterator<Item = &String> {
        self.rays.keys()
    }

    pub fn ray_base(&self, id: &str) -> Option<&String> {
        self.rays.get(id)
    }

    pub fn has_rays(&self) -> bool {
        !self.rays.is_empty()
    }

    /// Copy with every ray removed; vertices and edges are untouched.
    pub fn without_rays(&self) -> MetricGraph {
        MetricGraph::new(
            self.vertices
                .iter()
                .map(|(v, w)| (v.clone(), *w))
                .collect(),
            self.edges
                .iter()
                .map(|(id, e)| (id.clone(), e.ends.0.clone(), e.ends.1.clone(), e.length.clone()))
                .collect(),
            vec![],
        )
        .expect("removing rays keeps the graph valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Lexicographically smallest vertex id, the canonical base point.
    pub fn base_vertex(&self) -> &String {
        self.vertices.keys().next().expect("graphs are non-empty")
    }

    /// Number of directions at `v`: loops count twice, rays count once.
    pub fn valence(&self, v: &str) -> usize {
        let mut n = 0;
        for edge in self.edges.values() {
            if edge.ends.0 == v {
                n += 1;
            }
            if edge.ends.1 == v {
                n += 1;
            }
        }
        n + self.rays.values().filter(|base| base.as_str() == v).count()
    }

    /// First Betti number of the finite part, `#edges - #vertices + 1`.
    pub fn genus(&self) -> i64 {
        self.edges.len() as i64 - self.vertices.len() as i64 + 1
    }

    /// The vertex `v` as a point.
    pub fn vertex_point(&self, v: &str) -> Result<GraphPoint, GraphError> {
        if self.vertices.contains_key(v) {
            Ok(GraphPoint::Vertex(v.to_owned()))
        } else {
            Err(GraphError::UnknownVertex(v.to_owned()))
        }
    }

    /// The point of edge `e` at offset `t`, with `0 <= t <= length`.
    /// Boundary offsets normalize to the corresponding endpoint vertex.
    pub fn edge_point(&self, e: &str, t: Q) -> Result<GraphPoint, GraphError> {
        let edge = self
            .edges
            .get(e)
            .ok_or_else(|| GraphError::UnknownEdge(e.to_owned()))?;
        if t.is_negative() || t > edge.length {
            return Err(GraphError::OffsetOutOfRange {
                id: e.to_owned(),
                offset: fmt_q(&t),
            });
        }
        if t.is_zero() {
            Ok(GraphPoint::Vertex(edge.ends.0.clone()))
        } else if t == edge.length {
            Ok(GraphPoint::Vertex(edge.ends.1.clone()))
        } else {
            Ok(GraphPoint::OnEdge(e.to_owned(), t))
        }
    }

    /// The point of ray `r` at offset `t >= 0`; offset 0 is the base vertex.
    pub fn ray_point(&self, r: &str, t: Q) -> Result<GraphPoint, GraphError> {
        let base = self
            .rays
            .get(r)
            .ok_or_else(|| GraphError::UnknownRay(r.to_owned()))?;
        if t.is_negative() {
            return Err(GraphError::OffsetOutOfRange {
                id: r.to_owned(),
                offset: fmt_q(&t),
            });
        }
        if t.is_zero() {
            Ok(GraphPoint::Vertex(base.clone()))
        } else {
            Ok(GraphPoint::OnRay(r.to_owned(), t))
        }
    }

    /// Checks that `p` is a normalized point of this graph.
    pub fn check_point(&self, p: &GraphPoint) -> Result<(), GraphError> {
        match p {
            GraphPoint::Vertex(v) => {
                if self.vertices.contains_key(v) {
                    Ok(())
                } else {
                    Err(GraphError::ForeignPoint(p.to_string()))
                }
            }
            GraphPoint::OnEdge(e, t) => {
                let edge = self
                    .edges
                    .get(e)
                    .ok_or_else(|| GraphError::ForeignPoint(p.to_string()))?;
                if t.is_positive() && *t < edge.length {
                    Ok(())
                } else {
                    Err(GraphError::ForeignPoint(p.to_string()))
                }
            }
            GraphPoint::OnRay(r, t) => {
                if self.rays.contains_key(r) && t.is_positive() {
                    Ok(())
                } else {
                    Err(GraphError::ForeignPoint(p.to_string()))
                }
            }
        }
    }

    /// Midpoint of edge `e`.
    pub fn middle_point(&self, e: &str) -> Result<GraphPoint, GraphError> {
        let edge = self
            .edges
            .get(e)
            .ok_or_else(|| GraphError::UnknownEdge(e.to_owned()))?;
        let half = &edge.length / crate::ratio::qi(2);
        self.edge_point(e, half)
    }

    fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.vertices.keys().cloned());
        for edge in self.edges.values() {
            uf.union(&edge.ends.0, &edge.ends.1);
        }
        uf.component_count() == 1
    }

    /// Classifies edge `e` by the connectivity of the complement of its
    /// interior. Loops are always of connected type; for other edges the
    /// complement is connected exactly when the endpoints stay joined
    /// through the remaining edges.
    pub fn classify_edge(&self, e: &str) -> Result<EdgeType, GraphError> {
        let edge = self
            .edges
            .get(e)
            .ok_or_else(|| GraphError::UnknownEdge(e.to_owned()))?;
        if edge.is_loop() {
            return Ok(EdgeType::Connected);
        }
        let mut uf = UnionFind::new(self.vertices.keys().cloned());
        for (id, other) in &self.edges {
            if id != e {
                uf.union(&other.ends.0, &other.ends.1);
            }
        }
        if uf.same(&edge.ends.0, &edge.ends.1) {
            Ok(EdgeType::Connected)
        } else {
            Ok(EdgeType::Disconnected)
        }
    }

    /// Shortest-path distances from `from` to every vertex.
    pub fn vertex_distances(&self, from: &GraphPoint) -> BTreeMap<String, Q> {
        let mut seed: BTreeMap<String, Q> = BTreeMap::new();
        let push_seed = |map: &mut BTreeMap<String, Q>, v: &String, d: Q| {
            match map.get(v) {
                Some(old) if *old <= d => {}
                _ => {
                    map.insert(v.clone(), d);
                }
            }
        };
        match from {
            GraphPoint::Vertex(v) => push_seed(&mut seed, v, Q::zero()),
            GraphPoint::OnEdge(e, t) => {
                let edge = &self.edges[e];
                push_seed(&mut seed, &edge.ends.0, t.clone());
                push_seed(&mut seed, &edge.ends.1, &edge.length - t);
            }
            GraphPoint::OnRay(r, t) => {
                let base = &self.rays[r];
                push_seed(&mut seed, base, t.clone());
            }
        }

        // Dijkstra over the vertex set; graphs are small, so a linear scan
        // for the next frontier vertex keeps the arithmetic exact and simple.
        let mut dist = seed;
        let mut done: BTreeSet<String> = BTreeSet::new();
        loop {
            let next = dist
                .iter()
                .filter(|(v, _)| !done.contains(*v))
                .min_by(|a, b| a.1.cmp(b.1).then_with(|| a.0.cmp(b.0)))
                .map(|(v, d)| (v.clone(), d.clone()));
            let Some((v, d)) = next else { break };
            done.insert(v.clone());
            for edge in self.edges.values() {
                let reach = |map: &mut BTreeMap<String, Q>, u: &String| {
                    let cand = &d + &edge.length;
                    match map.get(u) {
                        Some(old) if *old <= cand => {}
                        _ => {
                            map.insert(u.clone(), cand);
                        }
                    }
                };
                if edge.ends.0 == v {
                    reach(&mut dist, &edge.ends.1);
                }
                if edge.ends.1 == v {
                    reach(&mut dist, &edge.ends.0);
                }
            }
        }
        dist
    }

    /// Exact shortest-path distance between two points.
    pub fn distance(&self, x: &GraphPoint, y: &GraphPoint) -> Result<Q, GraphError> {
        self.check_point(x)?;
        self.check_point(y)?;
        if x == y {
            return Ok(Q::zero());
        }
        let mut best: Option<Q> = None;
        let mut offer = |cand: Q| match &best {
            Some(b) if *b <= cand => {}
            _ => best = Some(cand),
        };
        match (x, y) {
            (GraphPoint::OnEdge(e, s), GraphPoint::OnEdge(f, t)) if e == f => {
                offer((s - t).abs());
            }
            (GraphPoint::OnRay(r, s), GraphPoint::OnRay(q, t)) if r == q => {
                offer((s - t).abs());
            }
            _ => {}
        }
        let dist = self.vertex_distances(x);
        match y {
            GraphPoint::Vertex(v) => offer(dist[v].clone()),
            GraphPoint::OnEdge(e, t) => {
                let edge = &self.edges[e];
                offer(&dist[&edge.ends.0] + t);
                offer(&dist[&edge.ends.1] + &(&edge.length - t));
            }
            GraphPoint::OnRay(r, t) => {
                let base = &self.rays[r];
                offer(&dist[base] + t);
            }
        }
        Ok(best.expect("connected graphs have finite distances"))
    }

    /// Splits edges at the given interior points. Returns the refined graph
    /// together with a [`Relocation`] translating points between the two.
    /// The metric space, its genus, and all distances are unchanged.
    pub fn subdivide(&self, points: &[GraphPoint]) -> Result<(MetricGraph, Relocation), GraphError> {
        let mut cuts: BTreeMap<String, BTreeSet<Q>> = BTreeMap::new();
        for p in points {
            self.check_point(p)?;
            match p {
                GraphPoint::OnEdge(e, t) => {
                    cuts.entry(e.clone()).or_default().insert(t.clone());
                }
                other => return Err(GraphError::NotEdgeInterior(other.to_string())),
            }
        }

        let mut vertices: Vec<(String, u64)> =
            self.vertices.iter().map(|(v, w)| (v.clone(), *w)).collect();
        let mut taken: BTreeSet<String> = self.vertices.keys().cloned().collect();
        taken.extend(self.edges.keys().cloned());
        taken.extend(self.rays.keys().cloned());
        let fresh = |stem: String, taken: &mut BTreeSet<String>| -> String {
            let mut name = stem;
            while taken.contains(&name) {
                name.push('\'');
            }
            taken.insert(name.clone());
            name
        };

        let mut edges: Vec<(String, String, String, Q)> = Vec::new();
        let mut records: BTreeMap<String, CutRecord> = BTreeMap::new();
        for (id, edge) in &self.edges {
            match cuts.get(id) {
                None => {
                    edges.push((
                        id.clone(),
                        edge.ends.0.clone(),
                        edge.ends.1.clone(),
                        edge.length.clone(),
                    ));
                }
                Some(offsets) => {
                    let offsets: Vec<Q> = offsets.iter().cloned().collect();
                    let mut names = Vec::new();
                    for t in &offsets {
                        let name = fresh(format!("{id}@{}", fmt_q(t)), &mut taken);
                        vertices.push((name.clone(), 0));
                        names.push(name);
                    }
                    let mut segment_ids = Vec::new();
                    let mut prev_vertex = edge.ends.0.clone();
                    let mut prev_off = Q::zero();
                    for (i, t) in offsets.iter().enumerate() {
                        let seg = fresh(format!("{id}#{i}"), &mut taken);
                        edges.push((seg.clone(), prev_vertex, names[i].clone(), t - &prev_off));
                        segment_ids.push(seg);
                        prev_vertex = names[i].clone();
                        prev_off = t.clone();
                    }
                    let seg = fresh(format!("{id}#{}", offsets.len()), &mut taken);
                    edges.push((seg.clone(), prev_vertex, edge.ends.1.clone(), &edge.length - &prev_off));
                    segment_ids.push(seg);
                    records.insert(
                        id.clone(),
                        CutRecord {
                            offsets,
                            vertex_names: names,
                            segment_ids,
                        },
                    );
                }
            }
        }
        let rays: Vec<(String, String)> =
            self.rays.iter().map(|(r, b)| (r.clone(), b.clone())).collect();
        let refined = MetricGraph::new(vertices, edges, rays)?;
        Ok((refined, Relocation { records }))
    }

    /// Groups vertices into connected components, ignoring the edges in
    /// `skip_edges` and dropping the vertices in `skip_vertices` entirely.
    /// Components are returned sorted by their smallest member.
    pub fn vertex_components(
        &self,
        skip_edges: &BTreeSet<String>,
        skip_vertices: &BTreeSet<String>,
    ) -> Vec<BTreeSet<String>> {
        let kept = self
            .vertices
            .keys()
            .filter(|v| !skip_vertices.contains(*v))
            .cloned();
        let mut uf = UnionFind::new(kept);
        for (id, edge) in &self.edges {
            if skip_edges.contains(id)
                || skip_vertices.contains(&edge.ends.0)
                || skip_vertices.contains(&edge.ends.1)
            {
                continue;
            }
            uf.union(&edge.ends.0, &edge.ends.1);
        }
        uf.components()
    }

    /// Removes one point from the metric space and reports the resulting
    /// connected components; see [`Puncture`].
    pub fn puncture(&self, center: &GraphPoint) -> Result<Puncture, GraphError> {
        self.check_point(center)?;
        let mut uf: UnionFind<PunctureToken> = UnionFind::new(std::iter::empty());
        for v in self.vertices.keys() {
            if GraphPoint::Vertex(v.clone()) != *center {
                uf.add(PunctureToken::V(v.clone()));
            }
        }
        match center {
            GraphPoint::Vertex(c) => {
                for (id, edge) in &self.edges {
                    let at0 = edge.ends.0 == *c;
                    let at1 = edge.ends.1 == *c;
                    if at0 && at1 {
                        uf.add(PunctureToken::Inner(id.clone()));
                    } else if !at0 && !at1 {
                        uf.union(
                            &PunctureToken::V(edge.ends.0.clone()),
                            &PunctureToken::V(edge.ends.1.clone()),
                        );
                    }
                }
                for (id, base) in &self.rays {
                    if base == c {
                        uf.add(PunctureToken::Inner(format!("ray:{id}")));
                    }
                }
            }
            GraphPoint::OnEdge(e0, _) => {
                for (id, edge) in &self.edges {
                    if id == e0 {
                        continue;
                    }
                    uf.union(
                        &PunctureToken::V(edge.ends.0.clone()),
                        &PunctureToken::V(edge.ends.1.clone()),
                    );
                }
                let edge = &self.edges[e0];
                uf.add(PunctureToken::Lo(e0.clone()));
                uf.add(PunctureToken::Hi(e0.clone()));
                uf.union(&PunctureToken::Lo(e0.clone()), &PunctureToken::V(edge.ends.0.clone()));
                uf.union(&PunctureToken::Hi(e0.clone()), &PunctureToken::V(edge.ends.1.clone()));
            }
            GraphPoint::OnRay(r0, _) => {
                for edge in self.edges.values() {
                    uf.union(
                        &PunctureToken::V(edge.ends.0.clone()),
                        &PunctureToken::V(edge.ends.1.clone()),
                    );
                }
                uf.add(PunctureToken::Hi(r0.clone()));
                uf.add(PunctureToken::Lo(r0.clone()));
                let base = &self.rays[r0];
                uf.union(&PunctureToken::Lo(r0.clone()), &PunctureToken::V(base.clone()));
            }
        }
        Ok(Puncture {
            graph: self.clone(),
            center: center.clone(),
            uf,
        })
    }
}

/// Record of one subdivision: where each original edge was cut, which new
/// vertices mark the cuts, and which segment edges replaced it.
#[derive(Debug, Clone)]
pub struct CutRecord {
    pub offsets: Vec<Q>,
    pub vertex_names: Vec<String>,
    pub segment_ids: Vec<String>,
}

/// Point translation between a graph and one of its subdivisions.
#[derive(Debug, Clone)]
pub struct Relocation {
    records: BTreeMap<String, CutRecord>,
}

impl Relocation {
    /// Maps a point of the original graph to the refined graph.
    pub fn relocate(&self, p: &GraphPoint) -> GraphPoint {
        match p {
            GraphPoint::OnEdge(e, t) => match self.records.get(e) {
                None => p.clone(),
                Some(rec) => {
                    let mut prev_off = Q::zero();
                    for (i, cut) in rec.offsets.iter().enumerate() {
                        if t == cut {
                            return GraphPoint::Vertex(rec.vertex_names[i].clone());
                        }
                        if t < cut {
                            return GraphPoint::OnEdge(rec.segment_ids[i].clone(), t - &prev_off);
                        }
                        prev_off = cut.clone();
                    }
                    GraphPoint::OnEdge(rec.segment_ids[rec.offsets.len()].clone(), t - &prev_off)
                }
            },
            other => other.clone(),
        }
    }

    /// Maps a point of the refined graph back to the original graph.
    pub fn restore(&self, p: &GraphPoint) -> GraphPoint {
        match p {
            GraphPoint::Vertex(v) => {
                for (edge, rec) in &self.records {
                    if let Some(i) = rec.vertex_names.iter().position(|n| n == v) {
                        return GraphPoint::OnEdge(edge.clone(), rec.offsets[i].clone());
                    }
                }
                p.clone()
            }
            GraphPoint::OnEdge(seg, t) => {
                for (edge, rec) in &self.records {
                    if let Some(i) = rec.segment_ids.iter().position(|s| s == seg) {
                        let base = if i == 0 { Q::zero() } else { rec.offsets[i - 1].clone() };
                        return GraphPoint::OnEdge(edge.clone(), &base + t);
                    }
                }
                p.clone()
            }
            other => other.clone(),
        }
    }

    /// Cut record for one original edge, if it was subdivided.
    pub fn record(&self, edge: &str) -> Option<&CutRecord> {
        self.records.get(edge)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum PunctureToken {
    V(String),
    Lo(String),
    Hi(String),
    Inner(String),
}

/// Connected components of a graph with one point removed.
///
/// Component ids are arbitrary but stable for a fixed graph and center. The
/// component of a point is queried with [`Puncture::component_of`]; the
/// center itself belongs to no component.
#[derive(Debug, Clone)]
pub struct Puncture {
    graph: MetricGraph,
    center: GraphPoint,
    uf: UnionFind<PunctureToken>,
}

impl Puncture {
    pub fn center(&self) -> &GraphPoint {
        &self.center
    }

    /// Component id of `p`, or `None` when `p` is the removed center.
    pub fn component_of(&self, p: &GraphPoint) -> Option<usize> {
        if *p == self.center {
            return None;
        }
        let token = match p {
            GraphPoint::Vertex(v) => PunctureToken::V(v.clone()),
            GraphPoint::OnEdge(e, t) => {
                let edge = self.graph.edge(e).expect("point was validated");
                match &self.center {
                    GraphPoint::OnEdge(c, tc) if c == e => {
                        if t < tc {
                            PunctureToken::Lo(e.clone())
                        } else {
                            PunctureToken::Hi(e.clone())
                        }
                    }
                    GraphPoint::Vertex(c) => {
                        let at0 = edge.ends.0 == *c;
                        let at1 = edge.ends.1 == *c;
                        if at0 && at1 {
                            PunctureToken::Inner(e.clone())
                        } else if at0 {
                            PunctureToken::V(edge.ends.1.clone())
                        } else {
                            PunctureToken::V(edge.ends.0.clone())
                        }
                    }
                    _ => PunctureToken::V(edge.ends.0.clone()),
                }
            }
            GraphPoint::OnRay(r, t) => {
                let base = self.graph.ray_base(r).expect("point was validated");
                match &self.center {
                    GraphPoint::OnRay(c, tc) if c == r => {
                        if t < tc {
                            PunctureToken::V(base.clone())
                        } else {
                            PunctureToken::Hi(r.clone())
                        }
                    }
                    GraphPoint::Vertex(c) if c == base => PunctureToken::Inner(format!("ray:{r}")),
                    _ => PunctureToken::V(base.clone()),
                }
            }
        };
        Some(self.uf.component_id(&token))
    }

    /// True when `a` and `b` lie in the same component of the punctured graph.
    pub fn same_component(&self, a: &GraphPoint, b: &GraphPoint) -> bool {
        match (self.component_of(a), self.component_of(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }
}

/// Minimal union-find over ordered keys with deterministic component ids.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind<K: Ord + Clone> {
    parent: BTreeMap<K, K>,
}

impl<K: Ord + Clone> UnionFind<K> {
    pub fn new(keys: impl Iterator<Item = K>) -> Self {
        let mut parent = BTreeMap::new();
        for k in keys {
            parent.insert(k.clone(), k);
        }
        UnionFind { parent }
    }

    pub fn add(&mut self, k: K) {
        self.parent.entry(k.clone()).or_insert(k);
    }

    pub fn find(&self, k: &K) -> K {
        let mut cur = k.clone();
        loop {
            let p = self.parent[&cur].clone();
            if p == cur {
                return cur;
            }
            cur = p;
        }
    }

    pub fn union(&mut self, a: &K, b: &K) {
        self.add(a.clone());
        self.add(b.clone());
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // Smaller root wins so that representatives are deterministic.
            if ra < rb {
                self.parent.insert(rb, ra);
            } else {
                self.parent.insert(ra, rb);
            }
        }
    }

    pub fn same(&self, a: &K, b: &K) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn component_count(&self) -> usize {
        self.parent.keys().filter(|k| self.parent[*k] == **k).count()
    }

    /// Dense component index of the class of `k`, by sorted root order.
    pub fn component_id(&self, k: &K) -> usize {
        let root = self.find(k);
        self.parent
            .keys()
            .filter(|x| self.parent[*x] == **x)
            .position(|x| *x == root)
            .expect("key is present")
    }

    pub fn components(&self) -> Vec<BTreeSet<K>>
    where
        K: Ord,
    {
        let mut by_root: BTreeMap<K, BTreeSet<K>> = BTreeMap::new();
        for k in self.parent.keys() {
            by_root.entry(self.find(k)).or_default().insert(k.clone());
        }
        by_root.into_values().collect()
    }
}
