//! Seeded randomized invariant suites shared by the command line self test
//! and the acceptance suite.
//!
//! Each suite draws its cases from a [`ChaCha8Rng`] seeded by the caller,
//! so every run is reproducible. A case that violates its invariant is
//! reported, never panicked: the outcome carries the failure count and the
//! first offending case rendered as text.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::divisor::Divisor;
use crate::graph::{EdgeType, GraphPoint, MetricGraph};
use crate::islands::{check_good_conditions, good_effective_divisor, islands, weighted_genus};
use crate::pl::{distance_function, PLFunction};
use crate::ratio::{q, qi, Q};
use crate::reduce::{
    canonical_reduction, dhar_oracle, is_linearly_equivalent, reduce_divisor,
};
use crate::synth::{synth_edge_connected, synth_edge_disconnected, synthesize_faithful};
use crate::trop::{assemble_map, gcd_of, verify_unimodular};

/// Result of one suite: how many cases ran, how many violated the
/// invariant, and a rendering of the first violation.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl std::fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} of {} cases passed",
            self.name,
            self.cases - self.failures,
            self.cases
        )?;
        if let Some(detail) = &self.first_failure {
            write!(f, " (first failure: {detail})")?;
        }
        Ok(())
    }
}

fn run_cases(
    name: &'static str,
    cases: usize,
    mut case: impl FnMut(usize) -> Result<(), String>,
) -> SuiteOutcome {
    let mut failures = 0;
    let mut first_failure = None;
    for i in 0..cases {
        if let Err(detail) = case(i) {
            failures += 1;
            if first_failure.is_none() {
                first_failure = Some(format!("case {i}: {detail}"));
            }
        }
    }
    SuiteOutcome {
        name,
        cases,
        failures,
        first_failure,
    }
}

/// Random connected multigraph with up to 6 vertices and up to 9 edges;
/// loops and parallel edges are drawn freely. Integral mode keeps every
/// length in `{1, 2, 3}` so the discrete oracle applies.
pub fn random_graph(rng: &mut ChaCha8Rng, integral: bool) -> MetricGraph {
    let n = rng.gen_range(1..=6);
    let mut edges: Vec<(String, String, String, Q)> = Vec::new();
    let length = |rng: &mut ChaCha8Rng| {
        if integral {
            qi(rng.gen_range(1..=3))
        } else {
            q(rng.gen_range(1..=6), rng.gen_range(1..=3))
        }
    };
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        edges.push((
            format!("e{}", edges.len()),
            format!("v{parent}"),
            format!("v{i}"),
            length(rng),
        ));
    }
    let extra_cap = 9 - edges.len();
    let min_extra = usize::from(edges.is_empty());
    let extra = rng.gen_range(min_extra..=extra_cap.max(min_extra));
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        edges.push((
            format!("e{}", edges.len()),
            format!("v{a}"),
            format!("v{b}"),
            length(rng),
        ));
    }
    let vertices = (0..n).map(|i| (format!("v{i}"), 0)).collect();
    MetricGraph::new(vertices, edges, vec![]).expect("generated graphs are connected")
}

/// Random point usable in a divisor: a vertex, or an interior edge point.
/// Lattice mode restricts edge offsets to integers.
fn random_point(rng: &mut ChaCha8Rng, g: &MetricGraph, lattice: bool) -> GraphPoint {
    let vertices: Vec<&String> = g.vertex_ids().collect();
    let edges: Vec<&String> = g.edge_ids().collect();
    if rng.gen_bool(0.4) || edges.is_empty() {
        return GraphPoint::Vertex(vertices[rng.gen_range(0..vertices.len())].clone());
    }
    let id = edges[rng.gen_range(0..edges.len())];
    let len = &g.edge(id).expect("id from graph").length;
    if lattice {
        let whole = len.to_integer();
        let max_off = i64::try_from(&whole - 1u8).expect("small lengths");
        if max_off < 1 {
            return GraphPoint::Vertex(vertices[rng.gen_range(0..vertices.len())].clone());
        }
        let off = qi(rng.gen_range(1..=max_off));
        g.edge_point(id, off).expect("offset is interior")
    } else {
        let off = len * &q(rng.gen_range(1..=3), 4);
        g.edge_point(id, off).expect("offset is interior")
    }
}

/// Random divisor with small support and coefficients in `[-5, 5]`,
/// corrected at a random vertex to hit the requested degree.
pub fn random_divisor(
    rng: &mut ChaCha8Rng,
    g: &MetricGraph,
    degree: i64,
    lattice: bool,
) -> Divisor {
    let mut d = Divisor::zero();
    for _ in 0..rng.gen_range(1..=4) {
        let coeff = loop {
            let c = rng.gen_range(-5..=5);
            if c != 0 {
                break c;
            }
        };
        d.add_at(random_point(rng, g, lattice), coeff);
    }
    let vertices: Vec<&String> = g.vertex_ids().collect();
    let anchor = GraphPoint::Vertex(vertices[rng.gen_range(0..vertices.len())].clone());
    let correction = degree - d.degree();
    d.add_at(anchor, correction);
    d
}

/// Random piecewise linear function: a small integer combination of two
/// distance functions, so its divisor is exactly computable.
fn random_function(rng: &mut ChaCha8Rng, g: &MetricGraph) -> PLFunction {
    let f = distance_function(g, &random_point(rng, g, false)).expect("points lie on the graph");
    let h = distance_function(g, &random_point(rng, g, false)).expect("points lie on the graph");
    let (a, b) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
    PLFunction::combine(g, &f, &h, a, b)
}

fn random_base_vertex(rng: &mut ChaCha8Rng, g: &MetricGraph) -> GraphPoint {
    let vertices: Vec<&String> = g.vertex_ids().collect();
    GraphPoint::Vertex(vertices[rng.gen_range(0..vertices.len())].clone())
}

/// Metric reduction agrees with the discrete chip-firing oracle on the
/// unit subdivision, and its witness carries the input to the output.
pub fn reduction_matches_discrete_oracle(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_cases("reduction matches the discrete oracle", cases, move |_| {
        let g = random_graph(&mut rng, true);
        let degree = rng.gen_range(-3..=8);
        let d = random_divisor(&mut rng, &g, degree, true);
        let v0 = random_base_vertex(&mut rng, &g);
        let metric = reduce_divisor(&g, &d, &v0).map_err(|e| e.to_string())?;
        let discrete = dhar_oracle(&g, &d, &v0).map_err(|e| e.to_string())?;
        if metric.reduced != discrete {
            return Err(format!(
                "metric reduction {:?} disagrees with the oracle {:?}",
                metric.reduced, discrete
            ));
        }
        let carried = &d + &metric.witness.principal_divisor(&g).finite;
        if carried != metric.reduced {
            return Err("witness does not carry the input to the reduction".to_owned());
        }
        Ok(())
    })
}

/// Classes of degree at least the genus have an effective representative,
/// and the reduced form holds at least `deg - g` chips at the base.
pub fn riemann_classes_are_effective(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_cases(
        "degree-genus classes have effective representatives",
        cases,
        move |_| {
            let g = random_graph(&mut rng, false);
            let genus = g.genus();
            let extra = rng.gen_range(0..=4);
            let d = random_divisor(&mut rng, &g, genus + extra, false);
            let reduction = canonical_reduction(&g, &d).map_err(|e| e.to_string())?;
            if !reduction.reduced.is_effective() {
                return Err(format!(
                    "degree {} class has no effective reduced form on a genus {} graph",
                    d.degree(),
                    genus
                ));
            }
            let base = GraphPoint::Vertex(g.base_vertex().clone());
            if reduction.reduced.coeff(&base) < extra {
                return Err(format!(
                    "reduced form holds {} chips at the base, expected at least {}",
                    reduction.reduced.coeff(&base),
                    extra
                ));
            }
            Ok(())
        },
    )
}

/// Random weighted graph satisfying the standing assumption, with weighted
/// genus at least 2 and positive weighted genus on every island.
pub fn random_weighted_graph(rng: &mut ChaCha8Rng) -> MetricGraph {
    let bare = random_graph(rng, false);
    let mut weights: Vec<(String, u64)> = bare
        .vertex_ids()
        .map(|v| {
            let w = if bare.valence(v) == 1 {
                rng.gen_range(1..=2)
            } else {
                rng.gen_range(0..=2)
            };
            (v.clone(), w)
        })
        .collect();
    let genus = bare.genus() + weights.iter().map(|(_, w)| *w as i64).sum::<i64>();
    if genus < 2 {
        weights[0].1 += (2 - genus) as u64;
    }
    let edges: Vec<(String, String, String, Q)> = bare
        .edges()
        .map(|(id, e)| (id.clone(), e.ends.0.clone(), e.ends.1.clone(), e.length.clone()))
        .collect();
    let build = |weights: Vec<(String, u64)>| {
        MetricGraph::new(weights, edges.clone(), vec![])
            .expect("reweighting keeps the graph valid")
    };
    let mut g = build(weights);
    // A genus-0 island is a weightless vertex met only by disconnecting
    // chains; a bump there keeps the canonical structure and raises the
    // island genus, so each pass strictly shrinks the genus-0 count.
    loop {
        let dec = islands(&g).expect("generated graphs meet the island preconditions");
        let Some(island) = dec.islands.iter().find(|i| i.weighted_genus < 1) else {
            return g;
        };
        let bump = island.vertices.iter().next().expect("islands are nonempty").clone();
        let reweighted = g
            .vertex_ids()
            .map(|v| {
                let w = g.vertex_weight(v).expect("vertex ids enumerate the graph");
                (v.clone(), if *v == bump { w + 1 } else { w })
            })
            .collect();
        g = build(reweighted);
    }
}

/// The good-divisor normal form is effective, equivalent to its input, and
/// satisfies the island occupancy and chain interior conditions.
pub fn good_divisors_hold_their_conditions(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_cases(
        "good divisors satisfy the island conditions",
        cases,
        move |_| {
            let g = random_weighted_graph(&mut rng);
            let degree = weighted_genus(&g) + rng.gen_range(0..=4);
            let d = random_divisor(&mut rng, &g, degree, false);
            let good = good_effective_divisor(&g, &d).map_err(|e| e.to_string())?;
            let conditions = check_good_conditions(&g, &good).map_err(|e| e.to_string())?;
            if !conditions.all_hold() {
                return Err(format!("conditions violated: {conditions:?}"));
            }
            match is_linearly_equivalent(&g, &d, &good).map_err(|e| e.to_string())? {
                Some(_) => Ok(()),
                None => Err("normal form left the divisor class".to_owned()),
            }
        },
    )
}

/// Reducing a reduced divisor is the identity, and linearly equivalent
/// inputs reduce to the same representative.
pub fn reduction_idempotent_and_class_invariant(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_cases(
        "reduction is idempotent and class invariant",
        cases,
        move |_| {
            let g = random_graph(&mut rng, false);
            let degree = rng.gen_range(-3..=8);
            let d = random_divisor(&mut rng, &g, degree, false);
            let first = canonical_reduction(&g, &d).map_err(|e| e.to_string())?;
            let again = canonical_reduction(&g, &first.reduced).map_err(|e| e.to_string())?;
            if again.reduced != first.reduced {
                return Err("reduction moved an already reduced divisor".to_owned());
            }
            let f = random_function(&mut rng, &g);
            let shifted = &d + &f.principal_divisor(&g).finite;
            let second = canonical_reduction(&g, &shifted).map_err(|e| e.to_string())?;
            if second.reduced != first.reduced {
                return Err(format!(
                    "equivalent divisors reduced to {:?} and {:?}",
                    first.reduced, second.reduced
                ));
            }
            Ok(())
        },
    )
}

/// `div` is linear: the divisor of an integer combination is the matching
/// combination of divisors.
pub fn principal_divisors_are_additive(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_cases("principal divisors are additive", cases, move |_| {
        let g = random_graph(&mut rng, false);
        let f = random_function(&mut rng, &g);
        let h = random_function(&mut rng, &g);
        let (a, b) = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        let combined = PLFunction::combine(&g, &f, &h, a, b)
            .principal_divisor(&g)
            .finite;
        let expected = &f.principal_divisor(&g).finite.scaled(a)
            + &h.principal_divisor(&g).finite.scaled(b);
        if combined != expected {
            return Err(format!(
                "div({a}f + {b}h) = {combined:?} but {a} div(f) + {b} div(h) = {expected:?}"
            ));
        }
        Ok(())
    })
}

/// The gcd of a direction vector, hence the lattice length of a cell's
/// image, is the same in every chart with finite coordinates.
pub fn chart_transitions_preserve_lattice_length(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_cases(
        "chart transitions preserve lattice length",
        cases,
        move |_| {
            let n = rng.gen_range(1..=5);
            let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-6..=6)).collect();
            let in_chart_zero = gcd_of(&v);
            for j in 0..n {
                // Chart j subtracts coordinate j everywhere and drops it;
                // the implicit zero coordinate becomes -v[j].
                let mut w = vec![-v[j]];
                for (i, vi) in v.iter().enumerate() {
                    if i != j {
                        w.push(vi - v[j]);
                    }
                }
                if gcd_of(&w) != in_chart_zero {
                    return Err(format!(
                        "vector {v:?} has gcd {in_chart_zero} in chart 0 but {} in chart {}",
                        gcd_of(&w),
                        j + 1
                    ));
                }
            }
            Ok(())
        },
    )
}

/// Appending one more budgeted coordinate pair to a synthesized map keeps
/// every cell vector primitive.
pub fn augmentation_preserves_unimodularity(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_cases("augmentation preserves unimodularity", cases, move |_| {
        let g = random_graph(&mut rng, false);
        let max_valence = g
            .vertex_ids()
            .map(|v| g.valence(v))
            .max()
            .expect("graphs have vertices") as i64;
        let d = g.genus() + max_valence.max(2) + 1;
        let m = synthesize_faithful(&g, d).map_err(|e| e.to_string())?;
        if !verify_unimodular(&m).unimodular() {
            return Err("synthesized map is not unimodular before augmentation".to_owned());
        }

        let ids: Vec<&String> = g.edge_ids().collect();
        let id = ids[rng.gen_range(0..ids.len())];
        let r = match g.classify_edge(id).map_err(|e| e.to_string())? {
            EdgeType::Connected => synth_edge_connected(&g, id),
            EdgeType::Disconnected => {
                let head = &g.edge(id).expect("id from graph").ends.0;
                synth_edge_disconnected(&g, id, head)
            }
        }
        .map_err(|e| e.to_string())?;
        let neg = r.principal_divisor(&g).finite.neg_part();
        let target = &m.base - &neg;
        let reduction = canonical_reduction(&g, &target).map_err(|e| e.to_string())?;
        if !reduction.reduced.is_effective() {
            return Err("budget class rejected a tent within the guaranteed degree".to_owned());
        }
        let h = reduction.witness;
        let paired = PLFunction::combine(&g, &h, &r, 1, 1);
        let mut functions = m.functions.clone();
        if h.constant_value().is_none() {
            functions.push(h);
        }
        functions.push(paired);
        let augmented =
            assemble_map(&g, m.base.clone(), functions).map_err(|e| e.to_string())?;
        if !verify_unimodular(&augmented).unimodular() {
            return Err("augmented map lost unimodularity".to_owned());
        }
        Ok(())
    })
}

/// Runs every suite at its default size. The first three back the
/// randomized acceptance criteria; the rest are the property suites.
pub fn run_all(seed: u64) -> Vec<SuiteOutcome> {
    run_all_capped(seed, usize::MAX)
}

/// Runs every suite with each case count capped, for quick smoke runs.
pub fn run_all_capped(seed: u64, cap: usize) -> Vec<SuiteOutcome> {
    vec![
        reduction_matches_discrete_oracle(seed, 200.min(cap)),
        riemann_classes_are_effective(seed.wrapping_add(1), 200.min(cap)),
        good_divisors_hold_their_conditions(seed.wrapping_add(2), 200.min(cap)),
        reduction_idempotent_and_class_invariant(seed.wrapping_add(3), 350.min(cap)),
        principal_divisors_are_additive(seed.wrapping_add(4), 350.min(cap)),
        chart_transitions_preserve_lattice_length(seed.wrapping_add(5), 350.min(cap)),
        augmentation_preserves_unimodularity(seed.wrapping_add(6), 60.min(cap)),
    ]
}
