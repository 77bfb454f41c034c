//! Tropical projective space, piecewise linear maps into it, and exact
//! verification of unimodularity and injectivity.
//!
//! A map is assembled from a base divisor `D0` and functions `f1..fN`; the
//! implicit zeroth coordinate is the zero function, so the image of a point
//! `x` is `(0 : f1(x) : ... : fN(x))`. Each coordinate must respect the
//! divisor budget: `D0 + div(fi)` stays effective on the finite part and no
//! `fi` descends toward the end of a ray.
//!
//! Verification works on a cell decomposition on which every coordinate is
//! affine. A cell passes the isometry check when its slope vector is
//! non-zero with coprime entries; injectivity is decided by exact pairwise
//! intersection of the affine cell images, with a concrete point pair as
//! witness whenever two distinct points share an image.

use std::collections::BTreeSet;
use std::fmt;

use num::{Signed, Zero};
use thiserror::Error;

use crate::divisor::Divisor;
use crate::graph::{GraphError, GraphPoint, MetricGraph};
use crate::pl::{PLFunction, PlError};
use crate::ratio::{fmt_q, q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TropError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pl(#[from] PlError),
    #[error("a point needs at least one finite coordinate")]
    AllInfinite,
    #[error("coordinate {0} is infinite and has no affine chart value")]
    InfiniteCoordinate(usize),
    #[error("coordinate {index} drops the budget below zero at {point}")]
    NotEffective { index: usize, point: String },
    #[error("coordinate {index} descends toward the end of ray {ray:?}")]
    DescendsToInfinity { index: usize, ray: String },
}

/// Point of tropical projective space: homogeneous coordinates over the
/// rationals extended by plus infinity (`None`), up to a common finite
/// shift. Stored in normal form, with the first finite coordinate at 0, so
/// derived equality is projective equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TropPoint {
    coords: Vec<Option<Q>>,
}

impl TropPoint {
    pub fn new(coords: Vec<Option<Q>>) -> Result<TropPoint, TropError> {
        let shift = coords
            .iter()
            .flatten()
            .next()
            .cloned()
            .ok_or(TropError::AllInfinite)?;
        let coords = coords
            .into_iter()
            .map(|c| c.map(|v| &v - &shift))
            .collect();
        Ok(TropPoint { coords })
    }

    pub fn finite(coords: Vec<Q>) -> TropPoint {
        TropPoint::new(coords.into_iter().map(Some).collect())
            .expect("finite coordinates always normalize")
    }

    pub fn coords(&self) -> &[Option<Q>] {
        &self.coords
    }

    /// Dimension `N` of the ambient space with `N + 1` coordinates.
    pub fn dimension(&self) -> usize {
        self.coords.len().saturating_sub(1)
    }

    /// Affine coordinates in the chart where coordinate `i` is pinned to 0:
    /// the tuple of the other coordinates minus coordinate `i`. Requires
    /// every involved coordinate to be finite.
    pub fn chart(&self, i: usize) -> Result<Vec<Q>, TropError> {
        let pivot = self
            .coords
            .get(i)
            .ok_or(TropError::InfiniteCoordinate(i))?
            .as_ref()
            .ok_or(TropError::InfiniteCoordinate(i))?;
        let mut out = Vec::with_capacity(self.dimension());
        for (j, c) in self.coords.iter().enumerate() {
            if j == i {
                continue;
            }
            let v = c.as_ref().ok_or(TropError::InfiniteCoordinate(j))?;
            out.push(v - pivot);
        }
        Ok(out)
    }
}

impl fmt::Display for TropPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .map(|c| match c {
                Some(v) => fmt_q(v),
                None => "inf".to_owned(),
            })
            .collect();
        write!(f, "({})", parts.join(" : "))
    }
}

/// Greatest common divisor of the absolute values, 0 for an all-zero list.
pub fn gcd_of(values: &[i64]) -> i64 {
    values
        .iter()
        .fold(0i64, |acc, v| num::integer::gcd(acc, v.abs()))
}

/// A vector moves at lattice speed 1 exactly when it is non-zero with
/// coprime entries.
pub fn is_primitive(values: &[i64]) -> bool {
    gcd_of(values) == 1
}

/// Piecewise linear map to tropical projective space: a base divisor and
/// the coordinate functions beyond the implicit zero function.
#[derive(Debug, Clone)]
pub struct TropMap {
    pub graph: MetricGraph,
    pub base: Divisor,
    pub functions: Vec<PLFunction>,
    induced: Vec<Divisor>,
}

impl TropMap {
    /// Number of non-trivial coordinates `N`; the image lives in `TP^N`.
    pub fn dimension(&self) -> usize {
        self.functions.len()
    }

    /// Finite parts of the divisors `D0 + div(fi)`, all effective.
    pub fn induced_divisors(&self) -> &[Divisor] {
        &self.induced
    }

    /// Image of a point, `(0 : f1(p) : ... : fN(p))`.
    pub fn evaluate(&self, p: &GraphPoint) -> Result<TropPoint, TropError> {
        let mut coords = Vec::with_capacity(self.functions.len() + 1);
        coords.push(Q::zero());
        for f in &self.functions {
            coords.push(f.value_at(&self.graph, p)?);
        }
        Ok(TropPoint::finite(coords))
    }
}

/// Validates a coordinate family against the budget `base` and assembles
/// the map. Each `base + div(fi)` must be effective away from the ends, and
/// each `fi` must be non-decreasing toward the end of every ray.
pub fn assemble_map(
    g: &MetricGraph,
    base: Divisor,
    functions: Vec<PLFunction>,
) -> Result<TropMap, TropError> {
    base.validate_on(g)
        .map_err(|_| TropError::Graph(GraphError::ForeignPoint("divisor support".to_owned())))?;
    if !base.is_effective() {
        return Err(TropError::NotEffective {
            index: 0,
            point: "the base divisor".to_owned(),
        });
    }
    let mut induced = Vec::with_capacity(functions.len());
    for (k, f) in functions.iter().enumerate() {
        let parts = f.principal_divisor(g);
        let index = k + 1;
        if let Some((ray, _)) = parts.ray_orders.iter().find(|(_, ord)| **ord > 0) {
            return Err(TropError::DescendsToInfinity {
                index,
                ray: ray.clone(),
            });
        }
        let di = &base + &parts.finite;
        if let Some((p, _)) = di.iter().find(|(_, c)| *c < 0) {
            return Err(TropError::NotEffective {
                index,
                point: p.to_string(),
            });
        }
        induced.push(di);
    }
    Ok(TropMap {
        graph: g.clone(),
        base,
        functions,
        induced,
    })
}

/// One affine piece of the map: a parameter interval on an edge or ray
/// together with the image data. `to` is `None` for the unbounded tail
/// cell of a ray.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub id: String,
    pub on_ray: bool,
    pub from: Q,
    pub to: Option<Q>,
    /// Chart-0 image of the cell start, `(f1 .. fN)` at `from`.
    pub start: Vec<Q>,
    /// Slopes `(df1 .. dfN)` per unit of length along the cell.
    pub vector: Vec<i64>,
    pub primitive: bool,
}

impl Cell {
    /// Parameter length, `None` when unbounded.
    pub fn extent(&self) -> Option<Q> {
        self.to.as_ref().map(|t| t - &self.from)
    }

    /// Graph point at parameter `s >= 0` from the cell start.
    pub fn preimage(&self, g: &MetricGraph, s: &Q) -> GraphPoint {
        let off = &self.from + s;
        if self.on_ray {
            g.ray_point(&self.id, off)
        } else {
            g.edge_point(&self.id, off)
        }
        .expect("cell parameters stay on the graph")
    }

    /// Lattice length of the image, `extent * gcd(vector)`.
    pub fn image_lattice_length(&self) -> Option<Q> {
        self.extent().map(|e| &e * &crate::ratio::qi(gcd_of(&self.vector)))
    }
}

/// Decomposes every edge and ray into cells on which all coordinates are
/// affine: cuts at every function breakpoint, and on edges also at the
/// quarter points. Each ray ends with one unbounded cell.
pub fn build_cells(m: &TropMap) -> Vec<Cell> {
    let g = &m.graph;
    let mut cells = Vec::new();
    for (id, edge) in g.edges() {
        let mut offs: BTreeSet<Q> = BTreeSet::new();
        offs.insert(Q::zero());
        offs.insert(edge.length.clone());
        for quarter in 1..4 {
            offs.insert(&edge.length * &q(quarter, 4));
        }
        for f in &m.functions {
            let profile = f.edge_profile(id).expect("maps cover every edge");
            for (off, _) in &profile.breaks {
                if off.is_positive() && *off < edge.length {
                    offs.insert(off.clone());
                }
            }
        }
        let offs: Vec<Q> = offs.into_iter().collect();
        for w in offs.windows(2) {
            cells.push(make_cell(m, id, false, w[0].clone(), Some(w[1].clone())));
        }
    }
    for r in g.ray_ids() {
        let mut offs: BTreeSet<Q> = BTreeSet::new();
        offs.insert(Q::zero());
        for f in &m.functions {
            let profile = f.ray_profile(r).expect("maps cover every ray");
            for (off, _) in &profile.breaks {
                offs.insert(off.clone());
            }
        }
        let offs: Vec<Q> = offs.into_iter().collect();
        for w in offs.windows(2) {
            cells.push(make_cell(m, r, true, w[0].clone(), Some(w[1].clone())));
        }
        let last = offs.last().expect("offset 0 is always present");
        cells.push(make_cell(m, r, true, last.clone(), None));
    }
    cells
}

fn make_cell(m: &TropMap, id: &str, on_ray: bool, from: Q, to: Option<Q>) -> Cell {
    let mut start = Vec::with_capacity(m.functions.len());
    let mut vector = Vec::with_capacity(m.functions.len());
    for f in &m.functions {
        let profile = if on_ray {
            f.ray_profile(id)
        } else {
            f.edge_profile(id)
        }
        .expect("maps cover every edge and ray");
        start.push(profile.value_at(&from));
        vector.push(profile.slope_after(&from));
    }
    let primitive = is_primitive(&vector);
    Cell {
        id: id.to_owned(),
        on_ray,
        from,
        to,
        start,
        vector,
        primitive,
    }
}

/// Per-cell isometry report: a cell passes when its slope vector is
/// primitive, so moving unit length along the cell moves unit lattice
/// length in the image.
#[derive(Debug, Clone)]
pub struct UnimodularityReport {
    pub cells: Vec<Cell>,
    pub failing: Vec<usize>,
}

impl UnimodularityReport {
    pub fn unimodular(&self) -> bool {
        self.failing.is_empty()
    }
}

pub fn verify_unimodular(m: &TropMap) -> UnimodularityReport {
    let cells = build_cells(m);
    let failing = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.primitive)
        .map(|(i, _)| i)
        .collect();
    UnimodularityReport { cells, failing }
}

/// Injectivity verdict with a concrete collision when the map identifies
/// two distinct points.
#[derive(Debug, Clone)]
pub struct InjectivityReport {
    pub witness: Option<(GraphPoint, GraphPoint)>,
}

impl InjectivityReport {
    pub fn injective(&self) -> bool {
        self.witness.is_none()
    }
}

fn parse_thread_count() -> usize {
    std::env::var("TROPSKEL_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get().min(8))
                .unwrap_or(1)
        })
}

pub fn verify_injective(m: &TropMap) -> InjectivityReport {
    let cells = build_cells(m);
    verify_injective_on(m, &cells)
}

/// Runs the pairwise intersection test on a prebuilt decomposition. The
/// sweep over cell pairs is split across threads; the reported witness is
/// the one from the smallest pair index, so the result does not depend on
/// the thread count.
pub fn verify_injective_on(m: &TropMap, cells: &[Cell]) -> InjectivityReport {
    let g = &m.graph;
    // A cell whose image is a single point collapses its whole extent.
    for cell in cells {
        if cell.vector.iter().all(|v| *v == 0) {
            let inside = match cell.extent() {
                Some(e) => &e / &crate::ratio::qi(2),
                None => crate::ratio::qi(1),
            };
            return InjectivityReport {
                witness: Some((
                    cell.preimage(g, &Q::zero()),
                    cell.preimage(g, &inside),
                )),
            };
        }
    }

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..cells.len() {
        for j in (i + 1)..cells.len() {
            pairs.push((i, j));
        }
    }
    let threads = parse_thread_count().min(pairs.len().max(1));
    let chunk = pairs.len().div_ceil(threads).max(1);

    let best = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (which, piece) in pairs.chunks(chunk).enumerate() {
            let base = which * chunk;
            handles.push(scope.spawn(move || {
                for (rank, (i, j)) in piece.iter().enumerate() {
                    if let Some(w) = cell_collision(g, &cells[*i], &cells[*j]) {
                        return Some((base + rank, w));
                    }
                }
                None
            }));
        }
        handles
            .into_iter()
            .filter_map(|h| h.join().expect("verification threads do not panic"))
            .min_by_key(|(rank, _)| *rank)
    });
    InjectivityReport {
        witness: best.map(|(_, w)| w),
    }
}

/// Finds a pair of distinct points in two cells with the same image, if
/// one exists. All arithmetic is exact.
fn cell_collision(g: &MetricGraph, a: &Cell, b: &Cell) -> Option<(GraphPoint, GraphPoint)> {
    let n = a.vector.len();
    let va = &a.vector;
    let vb = &b.vector;
    // Offset between the two affine starts, c = b.start - a.start.
    let c: Vec<Q> = (0..n).map(|k| &b.start[k] - &a.start[k]).collect();

    // Parallel test by integer cross-multiplication.
    let pivot = (0..n).find(|k| va[*k] != 0).expect("zero cells are filtered");
    let parallel = (0..n).all(|k| {
        i128::from(va[pivot]) * i128::from(vb[k]) == i128::from(va[k]) * i128::from(vb[pivot])
    });

    if parallel {
        if vb.iter().all(|v| *v == 0) {
            return None;
        }
        // Collinear iff the start offset is a rational multiple of va.
        let mu = &c[pivot] / &crate::ratio::qi(va[pivot]);
        if (0..n).any(|k| c[k] != &mu * &crate::ratio::qi(va[k])) {
            return None;
        }
        // b(t) = a(mu + lambda t); map b's parameter range into a's.
        let lambda = q(vb[pivot], va[pivot]);
        let b_end = b.extent().map(|e| &mu + &(&lambda * &e));
        let (blo, bhi) = if lambda.is_positive() {
            (Some(mu.clone()), b_end)
        } else {
            (b_end, Some(mu.clone()))
        };
        let lo = match &blo {
            Some(v) => v.clone().max(Q::zero()),
            None => Q::zero(),
        };
        let hi = match (bhi, a.extent()) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (Some(x), None) => Some(x),
            (None, y) => y,
        };
        let s_star = match hi {
            Some(hi) if hi < lo => return None,
            Some(hi) if hi == lo => lo,
            Some(hi) => (&lo + &hi) / crate::ratio::qi(2),
            None => &lo + &crate::ratio::qi(1),
        };
        let t_star = &(&s_star - &mu) / &lambda;
        let x = a.preimage(g, &s_star);
        let y = b.preimage(g, &t_star);
        return (x != y).then_some((x, y));
    }

    // Rank 2: solve a 2x2 system from a pair of independent rows, then
    // verify the remaining coordinates and the parameter ranges.
    let (i, j) = {
        let mut found = None;
        'outer: for i in 0..n {
            for j in (i + 1)..n {
                let det = i128::from(va[i]) * i128::from(-vb[j])
                    - i128::from(-vb[i]) * i128::from(va[j]);
                if det != 0 {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        found.expect("non-parallel vectors have an invertible minor")
    };
    let (ai, bi) = (crate::ratio::qi(va[i]), crate::ratio::qi(-vb[i]));
    let (aj, bj) = (crate::ratio::qi(va[j]), crate::ratio::qi(-vb[j]));
    let det = &(&ai * &bj) - &(&bi * &aj);
    let s = &(&(&c[i] * &bj) - &(&bi * &c[j])) / &det;
    let t = &(&(&ai * &c[j]) - &(&c[i] * &aj)) / &det;
    for k in 0..n {
        let lhs = &s * &crate::ratio::qi(va[k]);
        let rhs = &c[k] + &(&t * &crate::ratio::qi(vb[k]));
        if lhs != rhs {
            return None;
        }
    }
    if s.is_negative() || t.is_negative() {
        return None;
    }
    if let Some(e) = a.extent() {
        if s > e {
            return None;
        }
    }
    if let Some(e) = b.extent() {
        if t > e {
            return None;
        }
    }
    let x = a.preimage(g, &s);
    let y = b.preimage(g, &t);
    (x != y).then_some((x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Unimodular and injective: an isometry onto the image.
    Faithful,
    /// Every cell is an isometry but two points share an image.
    UnimodularOnly,
    /// Some cell distorts the lattice metric.
    Fails,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Faithful => "faithful",
            Verdict::UnimodularOnly => "unimodular-only",
            Verdict::Fails => "fails",
        };
        f.write_str(s)
    }
}

/// Full verification output: the cell decomposition with per-cell flags,
/// the verdict, and a collision witness when one exists.
#[derive(Debug, Clone)]
pub struct FaithfulnessCertificate {
    pub cells: Vec<Cell>,
    pub verdict: Verdict,
    pub witness: Option<(GraphPoint, GraphPoint)>,
}

pub fn certify_faithful(m: &TropMap) -> FaithfulnessCertificate {
    let report = verify_unimodular(m);
    let injectivity = verify_injective_on(m, &report.cells);
    let verdict = if !report.unimodular() {
        Verdict::Fails
    } else if injectivity.injective() {
        Verdict::Faithful
    } else {
        Verdict::UnimodularOnly
    };
    FaithfulnessCertificate {
        cells: report.cells,
        verdict,
        witness: injectivity.witness,
    }
}
