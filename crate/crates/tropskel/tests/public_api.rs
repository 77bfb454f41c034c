//! One pass over the public surface from outside the crate: documents in,
//! reduction with a checkable witness, synthesis with a certificate, and
//! documents back out.

use tropskel::bounds::BoundReport;
use tropskel::format::{
    divisor_from_json, graph_from_json, graph_to_json, map_from_json, map_to_json, parse_point,
};
use tropskel::reduce::{is_linearly_equivalent, reduce_divisor};
use tropskel::synth::synthesize_faithful;
use tropskel::trop::{certify_faithful, Verdict};

const GRAPH: &str = r#"{
  "schema": "tropskel/1",
  "vertices": [{"id": "u"}, {"id": "v"}],
  "edges": [
    {"id": "a", "ends": ["u", "v"], "length": "1"},
    {"id": "b", "ends": ["u", "v"], "length": "2"},
    {"id": "c", "ends": ["u", "v"], "length": "3"}
  ]
}"#;

#[test]
fn documents_flow_through_reduction_and_synthesis() {
    let g = graph_from_json(GRAPH).unwrap();
    assert_eq!(g.genus(), 2);
    assert_eq!(graph_from_json(&graph_to_json(&g)).unwrap(), g);

    let d = divisor_from_json(&g, r#"[{"at": {"edge": "c", "off": "5/2"}, "coeff": 4}]"#).unwrap();
    let base = parse_point(&g, "b@1/2").unwrap();
    let res = reduce_divisor(&g, &d, &base).unwrap();
    assert!(res.reduced.is_effective());
    assert_eq!(res.reduced.degree(), 4);
    assert!(is_linearly_equivalent(&g, &d, &res.reduced).unwrap().is_some());

    let map = synthesize_faithful(&g, 5).unwrap();
    let cert = certify_faithful(&map);
    assert_eq!(cert.verdict, Verdict::Faithful);
    for induced in map.induced_divisors() {
        assert!(induced.is_effective());
        assert_eq!(induced.degree(), 5);
    }

    let text = map_to_json(&map);
    let reread = map_from_json(&text).unwrap();
    assert_eq!(map_to_json(&reread), text);
    assert_eq!(certify_faithful(&reread).verdict, Verdict::Faithful);
}

#[test]
fn bound_reports_expose_the_closed_forms() {
    let report = BoundReport::for_curve(5, 3, false).unwrap();
    assert_eq!((report.m0, report.eps0, report.pi), (2, 0, 2));
    assert_eq!(report.t_g, 5);
    assert_eq!(report.d_bound, 3);
    assert_eq!(report.ell_bound, 3);
    let rendered = report.to_string();
    assert!(rendered.contains("degree bound D:     3"), "{rendered}");
}
