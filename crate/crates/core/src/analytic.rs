//! Closed-form quantities: the limit distribution F on its branches, moments of
//! the primitive count in Δ_r, the Kleinbock–Yu integral, Siegel means and the
//! cusp/tail bounds.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::lattice::UnimodularBasis;
use crate::quadrature::{self, Quadrature};
use crate::regions::{self, Region};

pub const ZETA_2: f64 = PI * PI / 6.0;
/// 3/π², i.e. 1/(2ζ(2)).
pub const THREE_OVER_PI_SQ: f64 = 3.0 / (PI * PI);
/// Lower tail constant 3/(4π).
pub const C0: f64 = 3.0 / (4.0 * PI);
pub const DEFAULT_C1: f64 = 50.0;
pub const KY_ABS_TOL: f64 = 1e-8;

/// Slack admitted below −½log 2 by the middle-branch moment formulas, so that
/// the edge value can be evaluated from a rounded decimal.
pub const EDGE_SLACK: f64 = 1e-7;

/// −½ log 2, the lower end of the middle branch.
pub fn middle_branch_floor() -> f64 {
    -0.5 * LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    PositiveR,
    MiddleR,
    TailR,
}

impl Branch {
    pub fn of(r: f64) -> Branch {
        if r > 0.0 {
            Branch::PositiveR
        } else if r > middle_branch_floor() {
            Branch::MiddleR
        } else {
            Branch::TailR
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::PositiveR => "positive-r",
            Branch::MiddleR => "middle-r",
            Branch::TailR => "tail-r",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Exact(f64),
    Bounds { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticValue {
    pub value: Value,
    pub branch: Branch,
    pub r: f64,
}

impl AnalyticValue {
    pub fn exact(&self) -> Option<f64> {
        match self.value {
            Value::Exact(v) => Some(v),
            Value::Bounds { .. } => None,
        }
    }
}

pub fn f_positive_branch(r: f64) -> f64 {
    1.0 - THREE_OVER_PI_SQ * (-2.0 * r).exp()
}

pub fn f_middle_branch(r: f64) -> f64 {
    1.0 - THREE_OVER_PI_SQ * (2.0 * r * r - 2.0 * r + 1.0)
}

/// F(r) with the default tail constant.
pub fn limit_cdf(r: f64) -> AnalyticValue {
    limit_cdf_with_c1(r, DEFAULT_C1)
}

pub fn limit_cdf_with_c1(r: f64, c1: f64) -> AnalyticValue {
    let branch = Branch::of(r);
    let value = match branch {
        Branch::PositiveR => Value::Exact(f_positive_branch(r)),
        Branch::MiddleR => Value::Exact(f_middle_branch(r)),
        Branch::TailR => {
            let b = tail_bounds(r, c1);
            Value::Bounds { lower: b.lower, upper: b.upper }
        }
    };
    AnalyticValue { value, branch, r }
}

/// 1 − F(r) where F is known in closed form.
pub fn hit_probability(r: f64) -> Option<f64> {
    limit_cdf(r).exact().map(|f| 1.0 - f)
}

/// Mean primitive count in Δ_r: (6/π²)·area(Δ_r).
pub fn first_moment(r: f64) -> f64 {
    THREE_OVER_PI_SQ * (-2.0 * r).exp()
}

fn check_middle(r: f64, what: &str) -> Result<()> {
    if r.is_finite() && r <= 0.0 && r >= middle_branch_floor() - EDGE_SLACK {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} requires -log(2)/2 <= r <= 0, got r = {r}")))
    }
}

/// s² − 1 − 2 log s − 2 (log s)², the integral of |I¹| over C_s.
pub fn ky_inner_integral_closed(s: f64) -> f64 {
    let l = s.ln();
    s * s - 1.0 - 2.0 * l - 2.0 * l * l
}

/// Second moment of the primitive count in Δ_r, counting only the n = 1 term.
pub fn second_moment_closed(r: f64) -> Result<f64> {
    check_middle(r, "second_moment_closed")?;
    Ok(6.0 / (PI * PI) * (1.5 * (-2.0 * r).exp() - 1.0 + 2.0 * r - 2.0 * r * r))
}

/// Second moment including the n = −1 term, which equals the n = 1 term.
pub fn second_moment_two_orientations(r: f64) -> Result<f64> {
    check_middle(r, "second_moment_two_orientations")?;
    let s = (-r).exp();
    Ok(6.0 / (PI * PI) * (0.5 * s * s + 2.0 * ky_inner_integral_closed(s)))
}

/// Probability that Δ_r holds a primitive point, from the moment system built
/// on [`second_moment_two_orientations`].
pub fn hit_probability_two_orientations(r: f64) -> Result<f64> {
    check_middle(r, "hit_probability_two_orientations")?;
    Ok(THREE_OVER_PI_SQ * (2.0 - (-2.0 * r).exp() - 4.0 * r + 4.0 * r * r))
}

fn check_s(s: f64) -> Result<()> {
    if s.is_finite() && (1.0..std::f64::consts::SQRT_2).contains(&s) {
        Ok(())
    } else {
        Err(Error::Domain(format!("s must lie in [1, sqrt 2), got {s}")))
    }
}

/// |I^n_{(x,y)}| from the second-moment computation: the length of the set of
/// second basis vectors, paired with the primitive vector (x, y) ∈ Δ_{−log s},
/// whose n-th translate also lies in the triangle. Zero unless n = 1.
pub fn ky_interval_length(x: f64, y: f64, n: i64, s: f64) -> Result<f64> {
    check_s(s)?;
    if n == 0 {
        return Err(Error::Domain("n must be nonzero".into()));
    }
    let inside = x.is_finite() && y.is_finite() && y >= 0.0 && y <= x && x <= s && x > 0.0;
    if !inside {
        return Err(Error::Domain(format!("({x}, {y}) is not a nonzero point of the triangle with s = {s}")));
    }
    if n != 1 {
        return Ok(0.0);
    }
    Ok(interval_length_n1(x, y, s))
}

fn interval_length_n1(x: f64, y: f64, s: f64) -> f64 {
    let num = s * (x - y) - 1.0;
    if num <= 0.0 {
        0.0
    } else {
        num / (x * (x - y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KyEvaluation {
    pub s: f64,
    pub inner_integral: Quadrature,
    pub second_moment: f64,
}

/// (6/π²)(s²/2 + ∫_{C_s} |I¹|) with the inner integral done by adaptive quadrature.
pub fn ky_second_moment_numeric(s: f64) -> Result<KyEvaluation> {
    check_s(s)?;
    let inner_integral = if s == 1.0 {
        Quadrature { value: 0.0, error_estimate: 0.0, evaluations: 0 }
    } else {
        let vertices = [Vec2::new(1.0 / s, 0.0), Vec2::new(s, 0.0), Vec2::new(s, s - 1.0 / s)];
        quadrature::integrate_triangle(|v| interval_length_n1(v.x, v.y, s), vertices, KY_ABS_TOL)
            .map_err(|e| Error::Numerical(format!("Kleinbock-Yu integral at s = {s}: {e}")))?
    };
    let second_moment = 6.0 / (PI * PI) * (0.5 * s * s + inner_integral.value);
    Ok(KyEvaluation { s, inner_integral, second_moment })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair {
    pub first: f64,
    pub second: f64,
    pub mu_a1: f64,
    pub mu_a2: f64,
}

impl MomentPair {
    fn from_moments(first: f64, second: f64) -> Self {
        MomentPair { first, second, mu_a1: 2.0 * first - second, mu_a2: 0.5 * (second - first) }
    }
}

/// Probabilities of exactly one / exactly two primitive points in Δ_r, from
/// [`first_moment`] and [`second_moment_closed`].
pub fn counts_decomposition(r: f64) -> Result<MomentPair> {
    Ok(MomentPair::from_moments(first_moment(r), second_moment_closed(r)?))
}

/// As [`counts_decomposition`] but from [`second_moment_two_orientations`].
pub fn counts_decomposition_two_orientations(r: f64) -> Result<MomentPair> {
    Ok(MomentPair::from_moments(first_moment(r), second_moment_two_orientations(r)?))
}

/// Number of nonzero lattice points in the region.
pub fn siegel_transform(basis: &UnimodularBasis, region: &Region) -> Result<u64> {
    Ok(regions::count_points(basis, region)?.all)
}

/// Number of primitive lattice points in the region.
pub fn primitive_siegel_transform(basis: &UnimodularBasis, region: &Region) -> Result<u64> {
    Ok(regions::count_points(basis, region)?.primitive)
}

/// Haar mean of the Siegel transform of the indicator: the region's area.
pub fn siegel_mean(region: &Region) -> Result<f64> {
    region.measure()
}

pub fn primitive_siegel_mean(region: &Region) -> Result<f64> {
    Ok(region.measure()? / ZETA_2)
}

/// Measure of the lattices meeting the punctured disk of radius R < 1.
pub fn cusp_estimate(radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::Domain(format!("cusp estimate needs 0 < R < 1, got {radius}")));
    }
    Ok(3.0 * radius * radius / PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn tail_bounds(r: f64, c1: f64) -> TailBounds {
    let e = (2.0 * r).exp();
    TailBounds { lower: C0 * e, upper: c1 * e }
}

/// δe^{−r} + δ², the area bound for Δ_{r} ∖ Δ_{r+δ}.
pub fn continuity_modulus(r: f64, delta: f64) -> f64 {
    delta * (-r).exp() + delta * delta
}

pub fn totient(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain("totient(0) is undefined".into()));
    }
    let mut m = n;
    let mut phi = n;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if m > 1 {
        phi -= phi / m;
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn limit_cdf_values() {
        assert!(close(limit_cdf(0.0).exact().unwrap(), 1.0 - 3.0 / (PI * PI), 1e-15));
        assert!(close(limit_cdf(0.0).exact().unwrap(), 0.696_036_45, 1e-8));
        assert!(close(limit_cdf(1.0).exact().unwrap(), 0.958_863_006_7, 1e-9));
        assert!(close(limit_cdf(-0.25).exact().unwrap(), 0.506_059_23, 1e-8));
        assert_eq!(limit_cdf(0.0).branch, Branch::MiddleR);
        assert_eq!(limit_cdf(1e-300).branch, Branch::PositiveR);
        assert_eq!(limit_cdf(middle_branch_floor()).branch, Branch::TailR);
        match limit_cdf(-1.0).value {
            Value::Bounds { lower, upper } => {
                assert!(close(lower, 0.032_308_9, 1e-7));
                assert!(close(upper, 50.0 * (-2f64).exp(), 1e-12));
            }
            Value::Exact(_) => panic!("tail branch must be an interval"),
        }
    }

    #[test]
    fn continuity_at_zero() {
        let h = 1e-7;
        assert!((f_positive_branch(0.0) - f_middle_branch(0.0)).abs() < 1e-15);
        let slope_pos = (f_positive_branch(h) - f_positive_branch(0.0)) / h;
        let slope_mid = (f_middle_branch(0.0) - f_middle_branch(-h)) / h;
        assert!(close(slope_pos, 2.0 * THREE_OVER_PI_SQ, 1e-6));
        assert!(close(slope_mid, 2.0 * THREE_OVER_PI_SQ, 1e-6));
    }

    #[test]
    fn moments() {
        assert!(close(first_moment(0.0), 0.303_963_55, 1e-8));
        assert!(close(first_moment(0.5), 0.111_821_94, 1e-8));
        assert!(close(first_moment(-0.25), 0.501_151_17, 1e-8));
        assert!(close(second_moment_closed(0.0).unwrap(), first_moment(0.0), 1e-15));
        assert!(close(second_moment_closed(-0.25).unwrap(), 0.515_571_98, 1e-8));
        assert!(close(second_moment_closed(-0.346_573_6).unwrap(), 0.648_431_0, 1e-6));
        assert!(second_moment_closed(0.1).is_err());
        assert!(second_moment_closed(-0.35).is_err());
    }

    #[test]
    fn decomposition() {
        let m = counts_decomposition(0.0).unwrap();
        assert!(close(m.mu_a1, THREE_OVER_PI_SQ, 1e-15) && m.mu_a2.abs() < 1e-15);
        let m = counts_decomposition(-0.25).unwrap();
        assert!(close(m.mu_a1, 0.486_730_37, 1e-8));
        assert!(close(m.mu_a2, 0.007_210_40, 1e-8));
        assert!(close(m.mu_a1 + m.mu_a2, 1.0 - limit_cdf(-0.25).exact().unwrap(), 3e-6));
        for i in 0..100 {
            let r = middle_branch_floor() * (i as f64 + 0.5) / 100.0;
            let m = counts_decomposition(r).unwrap();
            assert!(m.mu_a2 >= 0.0 && m.mu_a1 >= 0.0, "r = {r}");
            assert!(close(m.mu_a1 + 2.0 * m.mu_a2, m.first, 1e-12));
            assert!(close(m.mu_a1 + 4.0 * m.mu_a2, m.second, 1e-12));
        }
    }

    #[test]
    fn two_orientation_system_is_consistent() {
        for r in [-0.01, -0.1, -0.25, -0.34] {
            let m = counts_decomposition_two_orientations(r).unwrap();
            assert!(m.mu_a1 >= 0.0 && m.mu_a2 >= 0.0);
            assert!(close(m.mu_a1 + m.mu_a2, hit_probability_two_orientations(r).unwrap(), 1e-12));
        }
        assert!(close(hit_probability_two_orientations(0.0).unwrap(), hit_probability(0.0).unwrap(), 1e-15));
    }

    #[test]
    fn interval_length_examples() {
        let s = 1.2;
        assert_eq!(ky_interval_length(1.0, 0.5, 1, s).unwrap(), 0.0);
        assert_eq!(ky_interval_length(1.1, 0.0, 2, s).unwrap(), 0.0);
        assert_eq!(ky_interval_length(1.1, 0.0, -1, s).unwrap(), 0.0);
        assert!(close(ky_interval_length(s, 0.0, 1, s).unwrap(), (s * s - 1.0) / (s * s), 1e-15));
        assert!(ky_interval_length(1.0, 0.0, 0, s).is_err());
        assert!(ky_interval_length(1.3, 0.0, 1, s).is_err());
        assert!(ky_interval_length(0.5, 0.6, 1, s).is_err());
        assert!(ky_interval_length(1.0, 0.0, 1, 1.5).is_err());
    }

    #[test]
    fn ky_numeric_matches_closed_form() {
        assert_eq!(ky_second_moment_numeric(1.0).unwrap().inner_integral.value, 0.0);
        let near = std::f64::consts::SQRT_2 - 1e-12;
        assert!(close(ky_inner_integral_closed(near), 0.066_626_3, 1e-7));
        let s = 0.25f64.exp();
        let k = ky_second_moment_numeric(s).unwrap();
        assert!(close(k.second_moment, second_moment_closed(-0.25).unwrap(), 1e-6));
        assert!(ky_second_moment_numeric(1.5).is_err());
    }

    #[test]
    fn siegel_examples() {
        let z2 = UnimodularBasis::identity();
        let ann = Region::annulus(0.2, 0.8).unwrap();
        assert_eq!(siegel_transform(&z2, &ann).unwrap(), 0);
        let t = Region::triangle(0.0).unwrap();
        assert_eq!(siegel_transform(&z2, &t).unwrap(), 2);
        assert_eq!(primitive_siegel_transform(&z2, &t).unwrap(), 2);
        assert!(close(siegel_mean(&ann).unwrap(), 0.6 * PI, 1e-12));
        assert!(close(primitive_siegel_mean(&ann).unwrap(), 3.6 / PI, 1e-12));
    }

    #[test]
    fn cusp_and_tail() {
        assert!(close(cusp_estimate(0.5).unwrap(), 0.238_732_41, 1e-8));
        assert!(cusp_estimate(1e-9).unwrap() < 1e-17);
        assert!(cusp_estimate(1.0).is_err());
        assert!(cusp_estimate(0.0).is_err());
        assert!(close(tail_bounds(-1.0, 50.0).lower, 0.032_308_9, 1e-7));
        assert!(close(tail_bounds(middle_branch_floor(), 50.0).lower, 0.119_366_21, 1e-8));
    }

    #[test]
    fn totients() {
        assert_eq!(totient(1).unwrap(), 1);
        assert_eq!(totient(12).unwrap(), 4);
        assert_eq!(totient(97).unwrap(), 96);
        assert_eq!(totient(1_000_000).unwrap(), 400_000);
        assert!(totient(0).is_err());
    }
}
