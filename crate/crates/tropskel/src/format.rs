//! JSON documents for graphs, divisors, functions, maps, and certificates.
//!
//! Documents are written with the schema tag `"tropskel/1"` and accepted
//! without one. Rationals travel as reduced `"p/q"` strings, with the
//! denominator omitted when it is 1, so files are bit-exact and diffable.
//! Readers validate everything against the graph they are paired with:
//! unknown ids, out-of-range offsets, and discontinuous profiles are
//! rejected, not repaired.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divisor::{Divisor, DivisorError};
use crate::graph::{GraphError, GraphPoint, MetricGraph};
use crate::pl::{PLFunction, PlError, Profile};
use crate::ratio::{fmt_q, parse_q, RatioError};
use crate::trop::{assemble_map, FaithfulnessCertificate, TropError, TropMap};

/// Schema tag written into every document.
pub const SCHEMA: &str = "tropskel/1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Ratio(#[from] RatioError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error(transparent)]
    Pl(#[from] PlError),
    #[error(transparent)]
    Trop(#[from] TropError),
    #[error("unsupported schema {0:?}, expected \"tropskel/1\"")]
    BadSchema(String),
    #[error("{0:?} names neither a vertex, an edge, nor a ray")]
    UnknownPoint(String),
}

fn check_schema(tag: &Option<String>) -> Result<(), FormatError> {
    match tag {
        Some(s) if s != SCHEMA => Err(FormatError::BadSchema(s.clone())),
        _ => Ok(()),
    }
}

#[derive(Serialize, Deserialize)]
struct VertexDto {
    id: String,
    #[serde(default, skip_serializing_if = "weight_is_zero")]
    weight: u64,
}

fn weight_is_zero(w: &u64) -> bool {
    *w == 0
}

#[derive(Serialize, Deserialize)]
struct EdgeDto {
    id: String,
    ends: [String; 2],
    length: String,
}

#[derive(Serialize, Deserialize)]
struct RayDto {
    id: String,
    base: String,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    vertices: Vec<VertexDto>,
    #[serde(default)]
    edges: Vec<EdgeDto>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    rays: Vec<RayDto>,
}

fn graph_doc(g: &MetricGraph) -> GraphDoc {
    GraphDoc {
        schema: Some(SCHEMA.to_owned()),
        vertices: g
            .vertex_ids()
            .map(|id| VertexDto {
                id: id.clone(),
                weight: g.vertex_weight(id).expect("id from graph"),
            })
            .collect(),
        edges: g
            .edges()
            .map(|(id, e)| EdgeDto {
                id: id.clone(),
                ends: [e.ends.0.clone(), e.ends.1.clone()],
                length: fmt_q(&e.length),
            })
            .collect(),
        rays: g
            .ray_ids()
            .map(|id| RayDto {
                id: id.clone(),
                base: g.ray_base(id).expect("id from graph").clone(),
            })
            .collect(),
    }
}

fn graph_of_doc(doc: GraphDoc) -> Result<MetricGraph, FormatError> {
    check_schema(&doc.schema)?;
    let vertices = doc.vertices.into_iter().map(|v| (v.id, v.weight)).collect();
    let edges = doc
        .edges
        .into_iter()
        .map(|e| {
            let [a, b] = e.ends;
            Ok((e.id, a, b, parse_q(&e.length)?))
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    let rays = doc.rays.into_iter().map(|r| (r.id, r.base)).collect();
    Ok(MetricGraph::new(vertices, edges, rays)?)
}

pub fn graph_to_json(g: &MetricGraph) -> String {
    serde_json::to_string_pretty(&graph_doc(g)).expect("document types always serialize")
}

pub fn graph_from_json(text: &str) -> Result<MetricGraph, FormatError> {
    graph_of_doc(serde_json::from_str(text)?)
}

/// Point locator inside divisor documents: a vertex by id, or an interior
/// point of an edge or ray by id and offset.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LocatorDto {
    Vertex { vertex: String },
    Edge { edge: String, off: String },
    Ray { ray: String, off: String },
}

fn locator(p: &GraphPoint) -> LocatorDto {
    match p {
        GraphPoint::Vertex(v) => LocatorDto::Vertex { vertex: v.clone() },
        GraphPoint::OnEdge(e, t) => LocatorDto::Edge {
            edge: e.clone(),
            off: fmt_q(t),
        },
        GraphPoint::OnRay(r, t) => LocatorDto::Ray {
            ray: r.clone(),
            off: fmt_q(t),
        },
    }
}

fn point_of_locator(g: &MetricGraph, loc: LocatorDto) -> Result<GraphPoint, FormatError> {
    let p = match loc {
        LocatorDto::Vertex { vertex } => g.vertex_point(&vertex)?,
        LocatorDto::Edge { edge, off } => g.edge_point(&edge, parse_q(&off)?)?,
        LocatorDto::Ray { ray, off } => g.ray_point(&ray, parse_q(&off)?)?,
    };
    Ok(p)
}

#[derive(Serialize, Deserialize)]
struct EntryDto {
    at: LocatorDto,
    coeff: i64,
}

fn divisor_entries(d: &Divisor) -> Vec<EntryDto> {
    d.iter()
        .map(|(p, c)| EntryDto {
            at: locator(p),
            coeff: c,
        })
        .collect()
}

fn divisor_of_entries(g: &MetricGraph, entries: Vec<EntryDto>) -> Result<Divisor, FormatError> {
    let mut d = Divisor::zero();
    for e in entries {
        d.add_at(point_of_locator(g, e.at)?, e.coeff);
    }
    d.validate_on(g)?;
    Ok(d)
}

#[derive(Serialize)]
struct DivisorDoc {
    schema: &'static str,
    divisor: Vec<EntryDto>,
}

/// Accepted divisor inputs: the wrapped document or a bare entry list.
#[derive(Deserialize)]
#[serde(untagged)]
enum DivisorInput {
    Bare(Vec<EntryDto>),
    Wrapped {
        schema: Option<String>,
        divisor: Vec<EntryDto>,
    },
}

pub fn divisor_to_json(d: &Divisor) -> String {
    let doc = DivisorDoc {
        schema: SCHEMA,
        divisor: divisor_entries(d),
    };
    serde_json::to_string_pretty(&doc).expect("document types always serialize")
}

pub fn divisor_from_json(g: &MetricGraph, text: &str) -> Result<Divisor, FormatError> {
    let entries = match serde_json::from_str(text)? {
        DivisorInput::Bare(entries) => entries,
        DivisorInput::Wrapped { schema, divisor } => {
            check_schema(&schema)?;
            divisor
        }
    };
    divisor_of_entries(g, entries)
}

#[derive(Serialize, Deserialize)]
struct BreakDto {
    off: String,
    slope: i64,
}

#[derive(Serialize, Deserialize)]
struct ProfileDto {
    start: String,
    breaks: Vec<BreakDto>,
}

fn profile_dto(p: &Profile) -> ProfileDto {
    ProfileDto {
        start: fmt_q(&p.start),
        breaks: p
            .breaks
            .iter()
            .map(|(off, slope)| BreakDto {
                off: fmt_q(off),
                slope: *slope,
            })
            .collect(),
    }
}

fn profile_of_dto(id: &str, dto: ProfileDto) -> Result<Profile, FormatError> {
    let breaks = dto
        .breaks
        .into_iter()
        .map(|b| Ok((parse_q(&b.off)?, b.slope)))
        .collect::<Result<Vec<_>, FormatError>>()?;
    Profile::new(parse_q(&dto.start)?, breaks).map_err(|reason| {
        FormatError::Pl(PlError::BadProfile {
            id: id.to_owned(),
            reason,
        })
    })
}

#[derive(Serialize, Deserialize)]
struct FunctionDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    edges: BTreeMap<String, ProfileDto>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    rays: BTreeMap<String, ProfileDto>,
}

fn function_doc(f: &PLFunction, tagged: bool) -> FunctionDoc {
    let (edges, rays) = f.profiles();
    FunctionDoc {
        schema: tagged.then(|| SCHEMA.to_owned()),
        edges: edges.iter().map(|(id, p)| (id.clone(), profile_dto(p))).collect(),
        rays: rays.iter().map(|(id, p)| (id.clone(), profile_dto(p))).collect(),
    }
}

fn function_of_doc(g: &MetricGraph, doc: FunctionDoc) -> Result<PLFunction, FormatError> {
    check_schema(&doc.schema)?;
    let edges = doc
        .edges
        .into_iter()
        .map(|(id, p)| Ok((profile_of_dto(&id, p)?, id)).map(|(p, id)| (id, p)))
        .collect::<Result<BTreeMap<_, _>, FormatError>>()?;
    let rays = doc
        .rays
        .into_iter()
        .map(|(id, p)| Ok((profile_of_dto(&id, p)?, id)).map(|(p, id)| (id, p)))
        .collect::<Result<BTreeMap<_, _>, FormatError>>()?;
    Ok(PLFunction::from_parts(g, edges, rays)?)
}

pub fn function_to_json(f: &PLFunction) -> String {
    serde_json::to_string_pretty(&function_doc(f, true)).expect("document types always serialize")
}

pub fn function_from_json(g: &MetricGraph, text: &str) -> Result<PLFunction, FormatError> {
    function_of_doc(g, serde_json::from_str(text)?)
}

#[derive(Serialize, Deserialize)]
struct MapDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    graph: GraphDoc,
    base: Vec<EntryDto>,
    functions: Vec<FunctionDoc>,
}

pub fn map_to_json(m: &TropMap) -> String {
    let doc = MapDoc {
        schema: Some(SCHEMA.to_owned()),
        graph: graph_doc(&m.graph),
        base: divisor_entries(&m.base),
        functions: m.functions.iter().map(|f| function_doc(f, false)).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("document types always serialize")
}

/// Reads a map document back and revalidates it: the base divisor and every
/// induced divisor must be effective on the embedded graph.
pub fn map_from_json(text: &str) -> Result<TropMap, FormatError> {
    let doc: MapDoc = serde_json::from_str(text)?;
    check_schema(&doc.schema)?;
    let g = graph_of_doc(doc.graph)?;
    let base = divisor_of_entries(&g, doc.base)?;
    let functions = doc
        .functions
        .into_iter()
        .map(|f| function_of_doc(&g, f))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble_map(&g, base, functions)?)
}

#[derive(Serialize)]
struct CellDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    edge: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ray: Option<String>,
    from: String,
    to: Option<String>,
    vector: Vec<i64>,
    primitive: bool,
}

#[derive(Serialize)]
struct CertificateDoc {
    schema: &'static str,
    verdict: String,
    cells: Vec<CellDto>,
    witness: Option<(LocatorDto, LocatorDto)>,
}

pub fn certificate_to_json(c: &FaithfulnessCertificate) -> String {
    let cells = c
        .cells
        .iter()
        .map(|cell| CellDto {
            edge: (!cell.on_ray).then(|| cell.id.clone()),
            ray: cell.on_ray.then(|| cell.id.clone()),
            from: fmt_q(&cell.from),
            to: cell.to.as_ref().map(fmt_q),
            vector: cell.vector.clone(),
            primitive: cell.primitive,
        })
        .collect();
    let doc = CertificateDoc {
        schema: SCHEMA,
        verdict: c.verdict.to_string(),
        cells,
        witness: c.witness.as_ref().map(|(x, y)| (locator(x), locator(y))),
    };
    serde_json::to_string_pretty(&doc).expect("document types always serialize")
}

/// Parses a point given in the compact command-line form: a bare vertex id,
/// or `id@offset` for an interior point of an edge or ray. The offset is
/// split at the last `@`, so ids containing `@` still resolve.
pub fn parse_point(g: &MetricGraph, text: &str) -> Result<GraphPoint, FormatError> {
    if g.vertex_weight(text).is_some() {
        return Ok(GraphPoint::Vertex(text.to_owned()));
    }
    if let Some(split) = text.rfind('@') {
        let (id, off) = (&text[..split], &text[split + 1..]);
        let t = parse_q(off)?;
        if g.edge(id).is_some() {
            return Ok(g.edge_point(id, t)?);
        }
        if g.ray_base(id).is_some() {
            return Ok(g.ray_point(id, t)?);
        }
    }
    Err(FormatError::UnknownPoint(text.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::ratio::{q, qi};
    use crate::synth::{synth_edge_connected, synthesize_faithful};
    use crate::trop::certify_faithful;

    #[test]
    fn graphs_round_trip_through_json() {
        for name in catalog::NAMES {
            let g = catalog::get(name).unwrap();
            let text = graph_to_json(&g);
            assert_eq!(graph_from_json(&text).unwrap(), g, "{name}");
        }
    }

    #[test]
    fn schema_tags_are_optional_but_checked() {
        let bare = r#"{
            "vertices": [{"id": "x", "weight": 2}],
            "edges": [{"id": "e", "ends": ["x", "x"], "length": "3/2"}]
        }"#;
        let g = graph_from_json(bare).unwrap();
        assert_eq!(g.vertex_weight("x"), Some(2));
        assert_eq!(g.edge("e").unwrap().length, q(3, 2));

        let wrong = bare.replace("\"vertices\"", "\"schema\": \"tropskel/9\", \"vertices\"");
        assert!(matches!(
            graph_from_json(&wrong),
            Err(FormatError::BadSchema(_))
        ));
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(matches!(
            graph_from_json("{not json"),
            Err(FormatError::Json(_))
        ));
        let disconnected = r#"{
            "vertices": [{"id": "a"}, {"id": "b"}],
            "edges": []
        }"#;
        assert!(matches!(
            graph_from_json(disconnected),
            Err(FormatError::Graph(GraphError::Disconnected))
        ));
        let bad_length = r#"{
            "vertices": [{"id": "a"}],
            "edges": [{"id": "e", "ends": ["a", "a"], "length": "0.5"}]
        }"#;
        assert!(matches!(
            graph_from_json(bad_length),
            Err(FormatError::Ratio(_))
        ));
    }

    #[test]
    fn divisors_round_trip_and_validate() {
        let t = catalog::theta();
        let d = Divisor::from_entries([
            (GraphPoint::vertex("u"), 3),
            (t.edge_point("b", q(1, 2)).unwrap(), -2),
        ]);
        let text = divisor_to_json(&d);
        assert_eq!(divisor_from_json(&t, &text).unwrap(), d);

        let bare = r#"[{"at": {"vertex": "v"}, "coeff": 1}]"#;
        let parsed = divisor_from_json(&t, bare).unwrap();
        assert_eq!(parsed.coeff(&GraphPoint::vertex("v")), 1);

        let unknown = r#"[{"at": {"vertex": "zz"}, "coeff": 1}]"#;
        assert!(divisor_from_json(&t, unknown).is_err());
        let out_of_range = r#"[{"at": {"edge": "a", "off": "7"}, "coeff": 1}]"#;
        assert!(divisor_from_json(&t, out_of_range).is_err());
    }

    #[test]
    fn functions_round_trip_with_ray_profiles() {
        let t = catalog::theta();
        let f = synth_edge_connected(&t, "b").unwrap();
        let text = function_to_json(&f);
        assert_eq!(function_from_json(&t, &text).unwrap(), f);

        let cr = catalog::circle_with_ray();
        let escort = crate::synth::synth_end_function(&cr, "r").unwrap();
        let text = function_to_json(&escort);
        assert!(text.contains("\"rays\""));
        assert_eq!(function_from_json(&cr, &text).unwrap(), escort);
    }

    #[test]
    fn maps_round_trip_with_their_graph() {
        let m = synthesize_faithful(&catalog::circle4(), 3).unwrap();
        let text = map_to_json(&m);
        let back = map_from_json(&text).unwrap();
        assert_eq!(back.graph, m.graph);
        assert_eq!(back.base, m.base);
        assert_eq!(back.functions, m.functions);
    }

    #[test]
    fn certificates_expose_verdict_and_cells() {
        let m = synthesize_faithful(&catalog::circle4(), 3).unwrap();
        let cert = certify_faithful(&m);
        let value: serde_json::Value =
            serde_json::from_str(&certificate_to_json(&cert)).unwrap();
        assert_eq!(value["schema"], "tropskel/1");
        assert_eq!(value["verdict"], "faithful");
        assert_eq!(value["witness"], serde_json::Value::Null);
        let cells = value["cells"].as_array().unwrap();
        assert!(!cells.is_empty());
        assert_eq!(cells[0]["edge"], "e");
        assert!(cells[0]["primitive"].as_bool().unwrap());
    }

    #[test]
    fn compact_point_syntax_resolves_against_the_graph() {
        let cr = catalog::circle_with_ray();
        assert_eq!(
            parse_point(&cr, "v0").unwrap(),
            GraphPoint::vertex("v0")
        );
        assert_eq!(
            parse_point(&cr, "e@3/2").unwrap(),
            cr.edge_point("e", q(3, 2)).unwrap()
        );
        assert_eq!(
            parse_point(&cr, "r@5").unwrap(),
            cr.ray_point("r", qi(5)).unwrap()
        );
        assert!(parse_point(&cr, "e@9").is_err());
        assert!(parse_point(&cr, "zz@1").is_err());
        assert!(parse_point(&cr, "zz").is_err());
    }
}
