//! Command line front end over the library: graphs come from the catalog
//! or from files, and every invocation prints one JSON document.
//!
//! Exit codes: 0 on success, 1 when a computation reports a negative
//! outcome (a non-faithful map, an infeasible synthesis, a class with no
//! effective representative, a failing self test), 2 on usage errors and
//! malformed input files. An exit-1 run still prints its full report.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use tropskel::bounds::{t_of_g, BoundReport};
use tropskel::catalog;
use tropskel::checks::run_all_capped;
use tropskel::divisor::Divisor;
use tropskel::format::{
    certificate_to_json, divisor_from_json, divisor_to_json, function_to_json, graph_from_json,
    graph_to_json, map_from_json, map_to_json, parse_point, SCHEMA,
};
use tropskel::graph::{GraphPoint, MetricGraph};
use tropskel::islands::{check_good_conditions, good_effective_divisor, islands, weighted_genus};
use tropskel::ratio::fmt_q;
use tropskel::reduce::{canonical_reduction, reduce_divisor};
use tropskel::synth::synthesize_faithful;
use tropskel::trop::{certify_faithful, verify_unimodular, Cell, TropMap, Verdict};

#[derive(Parser)]
#[command(name = "tropskel", version, about = "Divisors and faithful tropicalization on rational metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Size and genus summary of a graph
    Genus {
        /// Catalog name or path of a graph file
        #[arg(long)]
        graph: String,
    },
    /// Reduced divisor at a base point, with the equivalence witness
    Reduce {
        #[arg(long)]
        graph: String,
        /// Path of a divisor file, or the divisor JSON itself
        #[arg(long)]
        divisor: String,
        /// Base point such as "v0" or "e@3/2"; defaults to the smallest vertex
        #[arg(long)]
        base: Option<String>,
    },
    /// Decide whether a divisor class has an effective representative
    Effective {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        divisor: String,
    },
    /// Island decomposition along the disconnecting chains
    Islands {
        #[arg(long)]
        graph: String,
    },
    /// Effective representative adapted to the island structure
    Gooddiv {
        #[arg(long)]
        graph: String,
        /// Path of a divisor file, or the divisor JSON itself
        #[arg(long)]
        divisor: Option<String>,
        /// Use this many chips at the smallest vertex instead of --divisor
        #[arg(long)]
        degree: Option<i64>,
    },
    /// Synthesize a faithful map of the given degree and certify it
    Synth {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        degree: i64,
    },
    /// Verify a map file and print its certificate
    Verify {
        /// Path of a map file, or the map JSON itself
        #[arg(long)]
        map: String,
    },
    /// Closed-form segment, degree, and genus bounds
    Bounds {
        /// Report only the segment count for this genus
        #[arg(long)]
        genus: Option<i64>,
        /// Curve degree; requires --dim
        #[arg(long)]
        degree: Option<i64>,
        /// Ambient projective dimension
        #[arg(long)]
        dim: Option<i64>,
        /// Use the planar degree bound
        #[arg(long)]
        planar: bool,
    },
    /// Polyline data of the embedded image in one affine chart
    Plotdata {
        /// Path of a map file, or the map JSON itself
        #[arg(long)]
        map: String,
        /// Chart index, 0 through the ambient dimension
        #[arg(long, default_value_t = 0)]
        chart: usize,
    },
    /// List the built-in graphs, or print one as a graph file
    Catalog {
        #[arg(long)]
        name: Option<String>,
    },
    /// Run the randomized invariant suites
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cap each suite at this many cases
        #[arg(long)]
        cases: Option<usize>,
    },
}

/// A failed invocation: usage problems exit 2 with a message on stderr,
/// negative outcomes exit 1 with their JSON report on stdout.
enum Failure {
    Usage(String),
    Report(Value),
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn report(err: impl std::fmt::Display) -> Failure {
    Failure::Report(json!({ "schema": SCHEMA, "error": err.to_string() }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(value) => {
            println!("{}", pretty(&value));
            ExitCode::SUCCESS
        }
        Err(Failure::Report(value)) => {
            println!("{}", pretty(&value));
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

/// Re-parses a document emitted by the format module for embedding.
fn doc(text: String) -> Value {
    serde_json::from_str(&text).expect("emitted documents are valid JSON")
}

/// Reads a flag that is either inline JSON or the path of a JSON file.
fn read_json_arg(what: &str, arg: &str) -> Result<String, Failure> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_owned());
    }
    fs::read_to_string(arg).map_err(|e| usage(format!("cannot read {what} file {arg:?}: {e}")))
}

/// Loads a graph from the catalog by name, or from a graph file.
fn load_graph(arg: &str) -> Result<MetricGraph, Failure> {
    if let Some(g) = catalog::get(arg) {
        return Ok(g);
    }
    let text = read_json_arg("graph", arg)
        .map_err(|_| usage(format!("{arg:?} is neither a catalog graph nor a readable file")))?;
    graph_from_json(&text).map_err(|e| usage(format!("graph {arg:?}: {e}")))
}

fn load_divisor(g: &MetricGraph, arg: &str) -> Result<Divisor, Failure> {
    let text = read_json_arg("divisor", arg)?;
    divisor_from_json(g, &text).map_err(|e| usage(format!("divisor: {e}")))
}

fn load_map(arg: &str) -> Result<TropMap, Failure> {
    let text = read_json_arg("map", arg)?;
    map_from_json(&text).map_err(|e| usage(format!("map: {e}")))
}

fn run(command: Command) -> Result<Value, Failure> {
    match command {
        Command::Genus { graph } => {
            let g = load_graph(&graph)?;
            Ok(json!({
                "schema": SCHEMA,
                "vertices": g.vertex_count(),
                "edges": g.edge_count(),
                "rays": g.ray_ids().count(),
                "genus": g.genus(),
                "total_weight": g.total_weight(),
                "weighted_genus": weighted_genus(&g),
            }))
        }
        Command::Reduce { graph, divisor, base } => {
            let g = load_graph(&graph)?;
            let d = load_divisor(&g, &divisor)?;
            let v0 = match base {
                Some(text) => {
                    parse_point(&g, &text).map_err(|e| usage(format!("base point: {e}")))?
                }
                None => GraphPoint::Vertex(g.base_vertex().clone()),
            };
            let res = reduce_divisor(&g, &d, &v0).map_err(report)?;
            Ok(json!({
                "schema": SCHEMA,
                "base": v0.to_string(),
                "degree": d.degree(),
                "moves": res.transcript.len(),
                "reduced": doc(divisor_to_json(&res.reduced)),
                "witness": doc(function_to_json(&res.witness)),
            }))
        }
        Command::Effective { graph, divisor } => {
            let g = load_graph(&graph)?;
            let d = load_divisor(&g, &divisor)?;
            let res = canonical_reduction(&g, &d).map_err(report)?;
            let effective = res.reduced.is_effective();
            let value = json!({
                "schema": SCHEMA,
                "degree": d.degree(),
                "genus": g.genus(),
                "base": g.base_vertex(),
                "is_effective": effective,
                "representative": doc(divisor_to_json(&res.reduced)),
                "witness": doc(function_to_json(&res.witness)),
            });
            if effective {
                Ok(value)
            } else {
                Err(Failure::Report(value))
            }
        }
        Command::Islands { graph } => {
            let g = load_graph(&graph)?;
            let dec = islands(&g).map_err(report)?;
            let islands_json: Vec<Value> = dec
                .islands
                .iter()
                .map(|i| {
                    json!({
                        "vertices": i.vertices.iter().collect::<Vec<_>>(),
                        "edges": i.edges.iter().collect::<Vec<_>>(),
                        "weighted_genus": i.weighted_genus,
                    })
                })
                .collect();
            Ok(json!({
                "schema": SCHEMA,
                "weighted_genus": weighted_genus(&g),
                "islands": islands_json,
                "bridges": dec.bridges,
            }))
        }
        Command::Gooddiv { graph, divisor, degree } => {
            let g = load_graph(&graph)?;
            let d = match (divisor, degree) {
                (Some(arg), None) => load_divisor(&g, &arg)?,
                (None, Some(deg)) => {
                    Divisor::from_entries([(GraphPoint::Vertex(g.base_vertex().clone()), deg)])
                }
                _ => return Err(usage("pass exactly one of --divisor and --degree")),
            };
            let good = good_effective_divisor(&g, &d).map_err(report)?;
            let cond = check_good_conditions(&g, &good).map_err(report)?;
            Ok(json!({
                "schema": SCHEMA,
                "degree": d.degree(),
                "weighted_genus": weighted_genus(&g),
                "divisor": doc(divisor_to_json(&good)),
                "conditions": {
                    "effective": cond.effective,
                    "island_degrees": cond.island_degrees,
                    "bridge_interior_degrees": cond.bridge_interior_degrees,
                    "connected_interior_degrees": cond.connected_interior_degrees,
                    "all_hold": cond.all_hold(),
                },
            }))
        }
        Command::Synth { graph, degree } => {
            let g = load_graph(&graph)?;
            let m = synthesize_faithful(&g, degree).map_err(report)?;
            let cert = certify_faithful(&m);
            let value = json!({
                "schema": SCHEMA,
                "degree": degree,
                "dimension": m.dimension(),
                "verdict": cert.verdict.to_string(),
                "map": doc(map_to_json(&m)),
                "certificate": doc(certificate_to_json(&cert)),
            });
            if cert.verdict == Verdict::Faithful {
                Ok(value)
            } else {
                Err(Failure::Report(value))
            }
        }
        Command::Verify { map } => {
            let m = load_map(&map)?;
            let cert = certify_faithful(&m);
            let value = doc(certificate_to_json(&cert));
            if cert.verdict == Verdict::Faithful {
                Ok(value)
            } else {
                Err(Failure::Report(value))
            }
        }
        Command::Bounds { genus, degree, dim, planar } => match (genus, degree, dim) {
            (Some(g), None, None) => {
                if planar {
                    return Err(usage("--planar applies to the --degree form"));
                }
                Ok(json!({
                    "schema": SCHEMA,
                    "genus": g,
                    "segments": t_of_g(g).map_err(report)?,
                }))
            }
            (None, Some(d), Some(n)) => {
                let r = BoundReport::for_curve(d, n, planar).map_err(report)?;
                Ok(json!({
                    "schema": SCHEMA,
                    "degree": r.d,
                    "ambient_dim": r.n,
                    "planar": r.planar,
                    "m0": r.m0,
                    "eps0": r.eps0,
                    "genus_bound": r.pi,
                    "segments": r.t_g,
                    "degree_bound": r.d_bound,
                    "segment_bound": r.ell_bound,
                }))
            }
            _ => Err(usage("pass --genus alone, or --degree together with --dim")),
        },
        Command::Plotdata { map, chart } => {
            let m = load_map(&map)?;
            let n = m.dimension();
            if chart > n {
                return Err(usage(format!("chart index {chart} exceeds the dimension {n}")));
            }
            let cells = verify_unimodular(&m).cells;
            let polylines: Vec<Value> = cells.iter().map(|c| polyline(c, chart)).collect();
            Ok(json!({
                "schema": SCHEMA,
                "chart": chart,
                "dimension": n,
                "polylines": polylines,
            }))
        }
        Command::Catalog { name } => match name {
            None => {
                let entries: Vec<Value> = catalog::NAMES
                    .iter()
                    .map(|n| {
                        json!({
                            "name": n,
                            "description": catalog::describe(n).expect("catalog names are described"),
                        })
                    })
                    .collect();
                Ok(json!({ "schema": SCHEMA, "entries": entries }))
            }
            Some(n) => {
                let g = catalog::get(&n)
                    .ok_or_else(|| usage(format!("unknown catalog graph {n:?}")))?;
                Ok(doc(graph_to_json(&g)))
            }
        },
        Command::Selftest { seed, cases } => {
            let outcomes = run_all_capped(seed, cases.unwrap_or(usize::MAX));
            let passed = outcomes.iter().all(|o| o.passed());
            let suites: Vec<Value> = outcomes
                .iter()
                .map(|o| {
                    json!({
                        "name": o.name,
                        "cases": o.cases,
                        "failures": o.failures,
                        "first_failure": o.first_failure,
                    })
                })
                .collect();
            let value = json!({
                "schema": SCHEMA,
                "seed": seed,
                "suites": suites,
                "passed": passed,
            });
            if passed {
                Ok(value)
            } else {
                Err(Failure::Report(value))
            }
        }
    }
}

/// Image of one cell in the requested affine chart. Chart 0 drops the
/// implicit zero coordinate; chart j pins coordinate j instead, so each
/// chart-0 value v becomes v - v_j and the pinned slot turns into -v_j.
fn polyline(cell: &Cell, chart: usize) -> Value {
    let start = to_chart_q(&cell.start, chart);
    let vector = to_chart_i(&cell.vector, chart);
    let mut points = vec![point_strings(&start)];
    if let Some(extent) = cell.extent() {
        let end: Vec<_> = start
            .iter()
            .zip(&vector)
            .map(|(s, v)| s + &(&extent * &tropskel::ratio::qi(*v)))
            .collect();
        points.push(point_strings(&end));
    }
    let mut value = json!({
        "id": cell.id,
        "on_ray": cell.on_ray,
        "from": fmt_q(&cell.from),
        "to": cell.to.as_ref().map(fmt_q),
        "points": points,
    });
    if cell.to.is_none() {
        value["direction"] = json!(vector);
    }
    value
}

fn point_strings(coords: &[tropskel::ratio::Q]) -> Vec<String> {
    coords.iter().map(fmt_q).collect()
}

fn to_chart_q(v: &[tropskel::ratio::Q], chart: usize) -> Vec<tropskel::ratio::Q> {
    if chart == 0 {
        return v.to_vec();
    }
    let pivot = v[chart - 1].clone();
    let mut out = vec![-pivot.clone()];
    for (k, x) in v.iter().enumerate() {
        if k != chart - 1 {
            out.push(x - &pivot);
        }
    }
    out
}

fn to_chart_i(v: &[i64], chart: usize) -> Vec<i64> {
    if chart == 0 {
        return v.to_vec();
    }
    let pivot = v[chart - 1];
    let mut out = vec![-pivot];
    for (k, x) in v.iter().enumerate() {
        if k != chart - 1 {
            out.push(x - pivot);
        }
    }
    out
}
