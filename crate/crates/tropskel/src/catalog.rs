//! Built-in example graphs, shared by the command line, the randomized
//! suites, and the tests.

use crate::graph::MetricGraph;
use crate::ratio::qi;

/// Canonical names of the built-in graphs, in listing order.
pub const NAMES: [&str; 6] = [
    "circle-4",
    "theta",
    "dumbbell",
    "unit-theta",
    "path-3",
    "circle-with-ray",
];

/// One-line description for each catalog entry.
pub fn describe(name: &str) -> Option<&'static str> {
    match canonical(name)? {
        "circle-4" => Some("circle of circumference 4: one vertex v0, one loop e"),
        "theta" => Some("theta graph: vertices u, v joined by edges a, b, c of lengths 1, 2, 3"),
        "dumbbell" => Some("two loops of length 2 joined by a bridge of length 1"),
        "unit-theta" => Some("theta graph with all three edge lengths equal to 1"),
        "path-3" => Some("path with three unit edges: v0, v1, v2, v3"),
        "circle-with-ray" => Some("circle of circumference 4 with one ray attached at v0"),
        _ => None,
    }
}

fn canonical(name: &str) -> Option<&'static str> {
    match name {
        "circle-4" | "circle4" => Some("circle-4"),
        "theta" => Some("theta"),
        "dumbbell" => Some("dumbbell"),
        "unit-theta" | "unittheta" => Some("unit-theta"),
        "path-3" | "path3" => Some("path-3"),
        "circle-with-ray" | "circlewithray" => Some("circle-with-ray"),
        _ => None,
    }
}

/// Looks up a catalog graph by name (a few spelling aliases are accepted).
pub fn get(name: &str) -> Option<MetricGraph> {
    let g = match canonical(name)? {
        "circle-4" => circle4(),
        "theta" => theta(),
        "dumbbell" => dumbbell(),
        "unit-theta" => unit_theta(),
        "path-3" => path3(),
        "circle-with-ray" => circle_with_ray(),
        _ => return None,
    };
    Some(g)
}

/// Circle of circumference 4: one vertex `v0`, one loop `e`.
pub fn circle4() -> MetricGraph {
    MetricGraph::unweighted(&["v0"], vec![("e", "v0", "v0", qi(4))]).unwrap()
}

/// Theta graph with edge lengths 1, 2, 3.
pub fn theta() -> MetricGraph {
    MetricGraph::unweighted(
        &["u", "v"],
        vec![
            ("a", "u", "v", qi(1)),
            ("b", "u", "v", qi(2)),
            ("c", "u", "v", qi(3)),
        ],
    )
    .unwrap()
}

/// Two loops of length 2 joined by a bridge of length 1.
pub fn dumbbell() -> MetricGraph {
    MetricGraph::unweighted(
        &["v1", "v2"],
        vec![
            ("l1", "v1", "v1", qi(2)),
            ("br", "v1", "v2", qi(1)),
            ("l2", "v2", "v2", qi(2)),
        ],
    )
    .unwrap()
}

/// Theta graph with three unit edges.
pub fn unit_theta() -> MetricGraph {
    MetricGraph::unweighted(
        &["u", "v"],
        vec![
            ("a", "u", "v", qi(1)),
            ("b", "u", "v", qi(1)),
            ("c", "u", "v", qi(1)),
        ],
    )
    .unwrap()
}

/// Path with three unit edges and vertices `v0` through `v3`.
pub fn path3() -> MetricGraph {
    MetricGraph::unweighted(
        &["v0", "v1", "v2", "v3"],
        vec![
            ("p0", "v0", "v1", qi(1)),
            ("p1", "v1", "v2", qi(1)),
            ("p2", "v2", "v3", qi(1)),
        ],
    )
    .unwrap()
}

/// Circle of circumference 4 with one ray attached at `v0`.
pub fn circle_with_ray() -> MetricGraph {
    MetricGraph::new(
        vec![("v0".into(), 0)],
        vec![("e".into(), "v0".into(), "v0".into(), qi(4))],
        vec![("r".into(), "v0".into())],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_entries_build_and_have_descriptions() {
        for name in NAMES {
            let g = get(name).unwrap();
            assert!(g.vertex_count() >= 1);
            assert!(describe(name).is_some());
        }
        assert!(get("circle4").is_some());
        assert!(get("path3").is_some());
        assert!(get("nonesuch").is_none());
    }

    #[test]
    fn catalog_genus_table() {
        assert_eq!(get("circle-4").unwrap().genus(), 1);
        assert_eq!(get("theta").unwrap().genus(), 2);
        assert_eq!(get("dumbbell").unwrap().genus(), 2);
        assert_eq!(get("unit-theta").unwrap().genus(), 2);
        assert_eq!(get("path-3").unwrap().genus(), 0);
        assert_eq!(get("circle-with-ray").unwrap().genus(), 1);
    }
}
