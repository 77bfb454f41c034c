//! Closed-form degree and dimension bounds for embedded tropical curves.
//!
//! Everything here is exact integer arithmetic; every ceiling is computed
//! by integer division. The three quantities are the minimal number of
//! segments `t(g)` a genus `g` skeleton needs, the degree bound `D(d, N)`
//! controlling bounded-degree limits, and Castelnuovo's genus bound
//! `pi(d, N)` with its division split `d - 1 = m0 (N - 1) + eps0`.

use thiserror::Error;

use crate::ratio::ceil_div;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("genus must be non-negative, got {0}")]
    NegativeGenus(i64),
    #[error("degree must be at least 1, got {0}")]
    BadDegree(i64),
    #[error("ambient dimension must be at least {1}, got {0}")]
    DimensionTooSmall(i64, i64),
    #[error("Castelnuovo's bound needs d >= N, got d = {d} and N = {n}")]
    DegreeBelowDimension { d: i64, n: i64 },
}

/// Minimal number of edges in a generic trivalent model: 1 in genus 0,
/// 3 in genus 1, and `3g - 1` from genus 2 on.
pub fn t_of_g(g: i64) -> Result<i64, BoundsError> {
    match g {
        _ if g < 0 => Err(BoundsError::NegativeGenus(g)),
        0 => Ok(1),
        1 => Ok(3),
        _ => Ok(3 * g - 1),
    }
}

/// Degree bound for bounded-degree limits: `max{ceil((3d^2 - 9d + 4) / 2d), 1}`
/// in the plane (or whenever the planar flag is forced), `max{d - 2, 1}`
/// in higher ambient dimension.
pub fn d_bound(d: i64, n: i64, planar: bool) -> Result<i64, BoundsError> {
    if d < 1 {
        return Err(BoundsError::BadDegree(d));
    }
    if n < 1 {
        return Err(BoundsError::DimensionTooSmall(n, 1));
    }
    let value = if n <= 2 || planar {
        let (d, two_d) = (i128::from(d), 2 * i128::from(d));
        i64::try_from(ceil_div(3 * d * d - 9 * d + 4, two_d)).expect("bound fits in 64 bits")
    } else {
        d - 2
    };
    Ok(value.max(1))
}

/// Castelnuovo's division split and genus bound: `m0 = (d-1) div (N-1)`,
/// `eps0 = (d-1) mod (N-1)`, and `pi = m0 (m0 - 1) / 2 * (N-1) + m0 eps0`.
pub fn castelnuovo(d: i64, n: i64) -> Result<(i64, i64, i64), BoundsError> {
    if n < 3 {
        return Err(BoundsError::DimensionTooSmall(n, 3));
    }
    if d < n {
        return Err(BoundsError::DegreeBelowDimension { d, n });
    }
    let (m0, eps0, pi) = castelnuovo_split(d, n);
    Ok((m0, eps0, pi))
}

/// Division split without the `N >= 3` precondition; at `N = 2` the genus
/// bound degenerates to the plane-curve genus `(d-1)(d-2)/2`.
fn castelnuovo_split(d: i64, n: i64) -> (i64, i64, i64) {
    let m0 = (d - 1) / (n - 1);
    let eps0 = (d - 1) % (n - 1);
    let (m, e, k) = (i128::from(m0), i128::from(eps0), i128::from(n - 1));
    let pi = m * (m - 1) / 2 * k + m * e;
    debug_assert_eq!(
        2 * pi,
        (m + 1) * (e + i128::from(d) - 1) - 2 * (i128::from(d) - 1)
    );
    (m0, eps0, i64::try_from(pi).expect("genus bound fits in 64 bits"))
}

/// Lower bound on the number of segments any degree `d` realization of a
/// genus `g` curve needs per coordinate: `ceil(t(g) / d)` in the plane,
/// additionally at least `d + 1 - N` in higher ambient dimension.
pub fn ell_bound(g: i64, d: i64, n: i64) -> Result<i64, BoundsError> {
    if d < 1 {
        return Err(BoundsError::BadDegree(d));
    }
    let per_coordinate =
        i64::try_from(ceil_div(i128::from(t_of_g(g)?), i128::from(d))).expect("small quotient");
    if n <= 2 {
        Ok(per_coordinate)
    } else {
        Ok(per_coordinate.max(d + 1 - n))
    }
}

/// True when the degree bound dominates the segment bound at the
/// Castelnuovo genus: `D(d, N) >= ell(pi(d, N), d, N)`.
pub fn check_bound_consistency(d: i64, n: i64) -> Result<bool, BoundsError> {
    if n < 3 {
        return Err(BoundsError::DimensionTooSmall(n, 3));
    }
    if d < n {
        return Err(BoundsError::DegreeBelowDimension { d, n });
    }
    let (_, _, pi) = castelnuovo(d, n)?;
    Ok(d_bound(d, n, false)? >= ell_bound(pi, d, n)?)
}

/// Every bound evaluated at one `(d, N)` pair, with the genus taken from
/// Castelnuovo's bound (the plane-curve genus when `N = 2`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub d: i64,
    pub n: i64,
    pub planar: bool,
    pub m0: i64,
    pub eps0: i64,
    pub pi: i64,
    pub t_g: i64,
    pub d_bound: i64,
    pub ell_bound: i64,
}

impl BoundReport {
    pub fn for_curve(d: i64, n: i64, planar: bool) -> Result<BoundReport, BoundsError> {
        if d < 1 {
            return Err(BoundsError::BadDegree(d));
        }
        if n < 2 {
            return Err(BoundsError::DimensionTooSmall(n, 2));
        }
        let (m0, eps0, pi) = castelnuovo_split(d, n);
        Ok(BoundReport {
            d,
            n,
            planar,
            m0,
            eps0,
            pi,
            t_g: t_of_g(pi)?,
            d_bound: d_bound(d, n, planar)?,
            ell_bound: ell_bound(pi, d, n)?,
        })
    }
}

impl std::fmt::Display for BoundReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "degree d:           {}", self.d)?;
        writeln!(f, "ambient dim N:      {}", self.n)?;
        writeln!(f, "planar:             {}", self.planar)?;
        writeln!(f, "m0, eps0:           {}, {}", self.m0, self.eps0)?;
        writeln!(f, "genus bound pi:     {}", self.pi)?;
        writeln!(f, "segments t(pi):     {}", self.t_g)?;
        writeln!(f, "degree bound D:     {}", self.d_bound)?;
        write!(f, "segment bound ell:  {}", self.ell_bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_counts_match_the_small_genera() {
        assert_eq!(t_of_g(0).unwrap(), 1);
        assert_eq!(t_of_g(1).unwrap(), 3);
        assert_eq!(t_of_g(2).unwrap(), 5);
        assert_eq!(t_of_g(3).unwrap(), 8);
        assert_eq!(t_of_g(10).unwrap(), 29);
        assert!(matches!(t_of_g(-1), Err(BoundsError::NegativeGenus(-1))));
    }

    #[test]
    fn segment_counts_never_decrease() {
        let mut last = 0;
        for g in 0..=200 {
            let t = t_of_g(g).unwrap();
            assert!(t >= last, "t({g}) dropped");
            last = t;
        }
    }

    #[test]
    fn degree_bounds_match_the_worked_cases() {
        assert_eq!(d_bound(3, 2, true).unwrap(), 1);
        assert_eq!(d_bound(4, 2, true).unwrap(), 2);
        assert_eq!(d_bound(5, 2, true).unwrap(), 4);
        assert_eq!(d_bound(3, 2, false).unwrap(), 1);
        assert_eq!(d_bound(4, 2, false).unwrap(), 2);
        assert_eq!(d_bound(1, 2, false).unwrap(), 1);
        assert_eq!(d_bound(2, 2, false).unwrap(), 1);
        assert_eq!(d_bound(6, 3, false).unwrap(), 4);
        assert_eq!(d_bound(3, 5, false).unwrap(), 1);
        assert!(d_bound(0, 2, false).is_err());
        assert!(d_bound(3, 0, false).is_err());
    }

    #[test]
    fn castelnuovo_splits_the_degree() {
        assert_eq!(castelnuovo(4, 3).unwrap(), (1, 1, 1));
        assert_eq!(castelnuovo(6, 3).unwrap(), (2, 1, 4));
        for n in 3..=12 {
            let (m0, eps0, pi) = castelnuovo(n, n).unwrap();
            assert_eq!((m0, eps0, pi), (1, 0, 0), "rational normal curve N={n}");
        }
        for d in 3..=60 {
            for n in 3..=d {
                let (m0, eps0, pi) = castelnuovo(d, n).unwrap();
                assert_eq!(d - 1, m0 * (n - 1) + eps0);
                assert!((0..n - 1).contains(&eps0));
                assert!(pi >= 0);
            }
        }
        assert!(matches!(
            castelnuovo(5, 2),
            Err(BoundsError::DimensionTooSmall(2, 3))
        ));
        assert!(matches!(
            castelnuovo(3, 4),
            Err(BoundsError::DegreeBelowDimension { d: 3, n: 4 })
        ));
    }

    #[test]
    fn segment_bounds_match_the_worked_cases() {
        assert_eq!(ell_bound(1, 3, 2).unwrap(), 1);
        assert_eq!(ell_bound(3, 4, 2).unwrap(), 2);
        assert_eq!(ell_bound(0, 5, 3).unwrap(), 3);
        assert!(ell_bound(1, 0, 2).is_err());
        assert!(ell_bound(-1, 3, 2).is_err());
    }

    #[test]
    fn the_degree_bound_dominates_the_segment_bound() {
        assert!(check_bound_consistency(4, 3).unwrap());
        assert!(check_bound_consistency(6, 3).unwrap());
        for d in 3..=50 {
            for n in 3..=d {
                assert!(check_bound_consistency(d, n).unwrap(), "d={d} N={n}");
            }
        }
        assert!(check_bound_consistency(4, 2).is_err());
        assert!(check_bound_consistency(3, 4).is_err());
    }

    #[test]
    fn the_planar_bound_dominates_at_the_plane_curve_genus() {
        for d in 3..=50 {
            let g = (d - 1) * (d - 2) / 2;
            let lower = ell_bound(g, d, 2).unwrap();
            assert!(d_bound(d, 2, true).unwrap() >= lower, "d={d}");
        }
    }

    #[test]
    fn reports_collect_every_bound() {
        let r = BoundReport::for_curve(6, 3, false).unwrap();
        assert_eq!((r.m0, r.eps0, r.pi), (2, 1, 4));
        assert_eq!(r.t_g, 11);
        assert_eq!(r.d_bound, 4);
        assert_eq!(r.ell_bound, 4);

        let plane = BoundReport::for_curve(4, 2, true).unwrap();
        assert_eq!(plane.pi, 3);
        assert_eq!(plane.t_g, 8);
        assert_eq!(plane.d_bound, 2);
        assert_eq!(plane.ell_bound, 2);

        assert!(BoundReport::for_curve(4, 1, false).is_err());
        let text = BoundReport::for_curve(5, 3, false).unwrap().to_string();
        assert!(text.contains("degree bound D:     3"));
    }
}
