//! End-to-end runs of the `tropskel` binary: one process per invocation,
//! asserting on exit codes and on the emitted JSON documents.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tropskel::catalog;
use tropskel::format::{graph_from_json, map_from_json, map_to_json};

fn tropskel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropskel"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Scratch file path unique to the calling test, so parallel tests do not
/// clobber each other.
fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("tropskel-cli-test-{name}"))
}

#[test]
fn catalog_lists_entries_and_emits_graph_files() {
    let list = tropskel(&["catalog"]);
    assert_eq!(exit_code(&list), 0);
    let value = stdout_json(&list);
    assert_eq!(value["schema"], "tropskel/1");
    assert_eq!(value["entries"].as_array().unwrap().len(), 6);

    let emit = tropskel(&["catalog", "--name", "theta"]);
    assert_eq!(exit_code(&emit), 0);
    let text = String::from_utf8(emit.stdout).unwrap();
    assert_eq!(graph_from_json(&text).unwrap(), catalog::theta());

    let unknown = tropskel(&["catalog", "--name", "nonesuch"]);
    assert_eq!(exit_code(&unknown), 2);
}

#[test]
fn graph_flags_accept_catalog_names_and_files() {
    let path = scratch("theta-graph.json");
    let emit = tropskel(&["catalog", "--name", "theta"]);
    fs::write(&path, &emit.stdout).unwrap();

    let by_name = tropskel(&["genus", "--graph", "theta"]);
    let by_file = tropskel(&["genus", "--graph", path.to_str().unwrap()]);
    assert_eq!(exit_code(&by_name), 0);
    assert_eq!(stdout_json(&by_name), stdout_json(&by_file));

    let value = stdout_json(&by_name);
    assert_eq!(value["genus"], 2);
    assert_eq!(value["weighted_genus"], 2);
    assert_eq!(value["vertices"], 2);
    assert_eq!(value["edges"], 3);
    assert_eq!(value["rays"], 0);
}

#[test]
fn reduce_emits_the_reduced_divisor_with_a_witness() {
    let divisor = r#"[{"at":{"edge":"l2","off":"1/2"},"coeff":3},{"at":{"vertex":"v1"},"coeff":-1}]"#;
    let out = tropskel(&["reduce", "--graph", "dumbbell", "--divisor", divisor]);
    assert_eq!(exit_code(&out), 0);
    let value = stdout_json(&out);
    assert_eq!(value["degree"], 2);
    assert_eq!(value["base"], "v1");
    assert_eq!(value["reduced"]["schema"], "tropskel/1");
    assert!(value["witness"]["edges"].is_object());

    let rebased = tropskel(&["reduce", "--graph", "dumbbell", "--divisor", divisor, "--base", "v2"]);
    assert_eq!(exit_code(&rebased), 0);
    assert_eq!(stdout_json(&rebased)["base"], "v2");
}

#[test]
fn effective_reports_the_verdict_through_the_exit_code() {
    let yes = tropskel(&["effective", "--graph", "circle4", "--divisor",
        r#"[{"at":{"edge":"e","off":"3"},"coeff":2}]"#]);
    assert_eq!(exit_code(&yes), 0);
    assert_eq!(stdout_json(&yes)["is_effective"], true);

    let no = tropskel(&["effective", "--graph", "circle4", "--divisor",
        r#"[{"at":{"vertex":"v0"},"coeff":-1}]"#]);
    assert_eq!(exit_code(&no), 1);
    assert_eq!(stdout_json(&no)["is_effective"], false);
}

#[test]
fn islands_and_gooddiv_report_the_decomposition() {
    let dec = tropskel(&["islands", "--graph", "dumbbell"]);
    assert_eq!(exit_code(&dec), 0);
    let value = stdout_json(&dec);
    assert_eq!(value["islands"].as_array().unwrap().len(), 2);
    assert_eq!(value["bridges"], serde_json::json!(["br"]));

    let good = tropskel(&["gooddiv", "--graph", "dumbbell", "--degree", "2"]);
    assert_eq!(exit_code(&good), 0);
    let value = stdout_json(&good);
    assert_eq!(value["conditions"]["all_hold"], true);
    assert_eq!(value["conditions"]["island_degrees"], serde_json::json!([1, 1]));

    let neither = tropskel(&["gooddiv", "--graph", "dumbbell"]);
    assert_eq!(exit_code(&neither), 2);

    let rays = tropskel(&["islands", "--graph", "circle-with-ray"]);
    assert_eq!(exit_code(&rays), 1);
    assert!(stdout_json(&rays)["error"].as_str().unwrap().contains("ray"));
}

#[test]
fn synth_verify_and_plotdata_share_the_map_file() {
    let synth = tropskel(&["synth", "--graph", "circle4", "--degree", "3"]);
    assert_eq!(exit_code(&synth), 0);
    let value = stdout_json(&synth);
    assert_eq!(value["verdict"], "faithful");
    assert_eq!(value["certificate"]["verdict"], "faithful");

    // The embedded map document is itself a valid map file and survives a
    // parse and re-emit unchanged.
    let map_text = serde_json::to_string_pretty(&value["map"]).unwrap();
    let map = map_from_json(&map_text).unwrap();
    let reemitted: Value = serde_json::from_str(&map_to_json(&map)).unwrap();
    assert_eq!(reemitted, value["map"]);

    let path = scratch("circle4-map.json");
    fs::write(&path, &map_text).unwrap();
    let verify = tropskel(&["verify", "--map", path.to_str().unwrap()]);
    assert_eq!(exit_code(&verify), 0);
    assert_eq!(stdout_json(&verify)["verdict"], "faithful");

    let plot = tropskel(&["plotdata", "--map", path.to_str().unwrap()]);
    assert_eq!(exit_code(&plot), 0);
    let value = stdout_json(&plot);
    assert_eq!(value["chart"], 0);
    let lines = value["polylines"].as_array().unwrap();
    assert!(!lines.is_empty());
    for line in lines {
        let points = line["points"].as_array().unwrap();
        assert_eq!(points.len(), 2);
        for p in points {
            assert_eq!(p.as_array().unwrap().len(), value["dimension"].as_u64().unwrap() as usize);
        }
    }

    let out_of_range = tropskel(&["plotdata", "--map", path.to_str().unwrap(), "--chart", "9"]);
    assert_eq!(exit_code(&out_of_range), 2);
}

#[test]
fn synth_below_the_bound_reports_the_blocking_construction() {
    let out = tropskel(&["synth", "--graph", "circle4", "--degree", "2"]);
    assert_eq!(exit_code(&out), 1);
    let value = stdout_json(&out);
    assert!(value["error"].as_str().unwrap().contains("half separator"));
}

#[test]
fn bounds_match_the_closed_forms() {
    let quad = tropskel(&["bounds", "--degree", "4", "--dim", "2"]);
    assert_eq!(exit_code(&quad), 0);
    assert_eq!(stdout_json(&quad)["degree_bound"], 2);

    let linear = tropskel(&["bounds", "--degree", "3", "--dim", "2"]);
    assert_eq!(stdout_json(&linear)["degree_bound"], 1);

    let genus = tropskel(&["bounds", "--genus", "2"]);
    assert_eq!(stdout_json(&genus)["segments"], 5);

    let missing = tropskel(&["bounds", "--degree", "4"]);
    assert_eq!(exit_code(&missing), 2);
}

#[test]
fn malformed_files_exit_two_with_a_location() {
    let path = scratch("broken.json");
    fs::write(&path, "{\"vertices\": [}").unwrap();
    let out = tropskel(&["genus", "--graph", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 1"), "missing location: {stderr}");
}

#[test]
fn selftest_smoke_run_passes() {
    let out = tropskel(&["selftest", "--cases", "2", "--seed", "5"]);
    assert_eq!(exit_code(&out), 0);
    let value = stdout_json(&out);
    assert_eq!(value["passed"], true);
    assert_eq!(value["suites"].as_array().unwrap().len(), 7);
}
