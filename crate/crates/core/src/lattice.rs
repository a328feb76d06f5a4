//! Exact planar lattice arithmetic.
//!
//! A unimodular lattice Λ ⊂ ℝ² is carried by a basis `(b1, b2)` with
//! `det[b1 b2] = 1`. Everything else here (reduction, successive minima,
//! α₁, point enumeration) works in double precision on top of that basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Mat2, Vec2};
use crate::regions::Region;

/// Absolute tolerance on `det[b1 b2] - 1`.
pub const DET_TOLERANCE: f64 = 1e-9;

/// Default bound on the number of integer coefficient pairs an enumeration may visit.
pub const DEFAULT_CANDIDATE_CAP: u64 = 100_000_000;

const MAX_REDUCTION_STEPS: usize = 10_000;

/// Minkowski's bound `2²/V₂` on `λ₁λ₂` for planar unimodular lattices.
pub const MINKOWSKI_PRODUCT_BOUND: f64 = 4.0 / std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnimodularBasis {
    b1: Vec2,
    b2: Vec2,
}

impl UnimodularBasis {
    pub fn new(b1: Vec2, b2: Vec2) -> Result<Self> {
        if !b1.is_finite() || !b2.is_finite() {
            return Err(Error::Input(format!("basis has non-finite entries: {b1:?}, {b2:?}")));
        }
        if b1.is_zero() || b2.is_zero() {
            return Err(Error::Input("basis vectors must be nonzero".into()));
        }
        let det = b1.cross(b2);
        if (det - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::Input(format!("basis determinant is {det}, expected 1")));
        }
        Ok(Self { b1, b2 })
    }

    pub fn from_matrix(m: &Mat2) -> Result<Self> {
        Self::new(m.col1(), m.col2())
    }

    /// The standard lattice ℤ².
    pub fn identity() -> Self {
        Self { b1: Vec2::new(1.0, 0.0), b2: Vec2::new(0.0, 1.0) }
    }

    pub fn b1(&self) -> Vec2 {
        self.b1
    }

    pub fn b2(&self) -> Vec2 {
        self.b2
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::from_columns(self.b1, self.b2)
    }

    pub fn det(&self) -> f64 {
        self.b1.cross(self.b2)
    }

    /// The lattice point `p·b1 + q·b2`.
    pub fn point(&self, p: i64, q: i64) -> Vec2 {
        let (p, q) = (p as f64, q as f64);
        Vec2::new(p * self.b1.x + q * self.b2.x, p * self.b1.y + q * self.b2.y)
    }

    /// Basis of `g·Λ`.
    pub fn transformed(&self, g: &Mat2) -> Result<Self> {
        Self::new(g.apply(self.b1), g.apply(self.b2))
    }
}

/// Gauss–Lagrange reduced basis together with the integer change of basis
/// that produced it: `b1 = p1·src.b1 + q1·src.b2`, `b2 = p2·src.b1 + q2·src.b2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedBasis {
    pub basis: UnimodularBasis,
    pub coeffs1: (i64, i64),
    pub coeffs2: (i64, i64),
}

impl ReducedBasis {
    pub fn b1(&self) -> Vec2 {
        self.basis.b1
    }

    pub fn b2(&self) -> Vec2 {
        self.basis.b2
    }

    /// Coefficients with respect to the source basis of `a·b1 + b·b2`.
    pub fn source_coeffs(&self, a: i64, b: i64) -> (i64, i64) {
        (a * self.coeffs1.0 + b * self.coeffs2.0, a * self.coeffs1.1 + b * self.coeffs2.1)
    }
}

/// Lagrange reduction. The result satisfies `‖b1‖ ≤ ‖b2‖`,
/// `|⟨b1,b2⟩| ≤ ‖b1‖²/2`, has the first nonzero coordinate of `b1`
/// positive and keeps `det = +1`.
pub fn gauss_reduce(basis: &UnimodularBasis) -> Result<ReducedBasis> {
    let (mut u, mut v) = (basis.b1, basis.b2);
    let (mut cu, mut cv) = ((1i64, 0i64), (0i64, 1i64));
    if v.norm_sq() < u.norm_sq() {
        std::mem::swap(&mut u, &mut v);
        std::mem::swap(&mut cu, &mut cv);
    }

    let mut converged = false;
    for _ in 0..MAX_REDUCTION_STEPS {
        let mu = (u.dot(v) / u.norm_sq()).round_ties_even();
        if mu != 0.0 {
            if !(mu.abs() < 9.0e15) {
                return Err(Error::Numerical(format!("reduction multiplier {mu} out of range")));
            }
            let m = mu as i64;
            v = v - mu * u;
            cv = (cv.0 - m * cu.0, cv.1 - m * cu.1);
        }
        if v.norm_sq() < u.norm_sq() {
            std::mem::swap(&mut u, &mut v);
            std::mem::swap(&mut cu, &mut cv);
        } else {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("Gauss reduction did not terminate".into()));
    }

    if u.x < 0.0 || (u.x == 0.0 && u.y < 0.0) {
        u = -u;
        cu = (-cu.0, -cu.1);
    }
    if u.cross(v) < 0.0 {
        v = -v;
        cv = (-cv.0, -cv.1);
    }
    Ok(ReducedBasis { basis: UnimodularBasis::new(u, v)?, coeffs1: cu, coeffs2: cv })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessiveMinima {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SuccessiveMinima {
    pub fn product(&self) -> f64 {
        self.lambda1 * self.lambda2
    }
}

pub fn successive_minima(basis: &UnimodularBasis) -> Result<SuccessiveMinima> {
    let reduced = gauss_reduce(basis)?;
    Ok(SuccessiveMinima { lambda1: reduced.b1().norm(), lambda2: reduced.b2().norm() })
}

/// `α₁(Λ) = sup_{v ≠ 0} 1/‖v‖ = 1/λ₁(Λ)`.
pub fn alpha1(basis: &UnimodularBasis) -> Result<f64> {
    Ok(1.0 / successive_minima(basis)?.lambda1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub coeffs: (i64, i64),
    pub coords: Vec2,
    pub primitive: bool,
}

impl LatticePoint {
    pub fn new(basis: &UnimodularBasis, p: i64, q: i64) -> Self {
        Self { coeffs: (p, q), coords: basis.point(p, q), primitive: is_primitive(p, q) }
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn is_primitive(p: i64, q: i64) -> bool {
    gcd(p.unsigned_abs(), q.unsigned_abs()) == 1
}

/// Visits every nonzero coefficient pair `(p, q)` whose point `view·(p·b1 + q·b2)`
/// could lie in `window`. The visited set is a superset of the true one:
/// the coefficient ranges are solved from the reduced basis of `view·Λ`
/// applied to the window corners, then padded by a relative epsilon.
pub(crate) fn for_each_candidate(
    basis: &UnimodularBasis,
    view: &Mat2,
    window: &BoundingBox,
    cap: u64,
    mut visit: impl FnMut(i64, i64),
) -> Result<()> {
    let viewed = if *view == Mat2::IDENTITY { *basis } else { basis.transformed(view)? };
    let reduced = gauss_reduce(&viewed)?;
    let inv = reduced
        .basis
        .matrix()
        .inverse()
        .ok_or_else(|| Error::Numerical("reduced basis is singular".into()))?;

    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for corner in window.corners() {
        let c = inv.apply(corner);
        lo[0] = lo[0].min(c.x);
        lo[1] = lo[1].min(c.y);
        hi[0] = hi[0].max(c.x);
        hi[1] = hi[1].max(c.y);
    }
    let mut range = [(0.0, 0.0); 2];
    for k in 0..2 {
        let eps = 1e-9 * (1.0 + lo[k].abs().max(hi[k].abs()));
        range[k] = ((lo[k] - eps).ceil(), (hi[k] + eps).floor());
    }
    let span = |(a, b): (f64, f64)| if b >= a { b - a + 1.0 } else { 0.0 };
    let requested = span(range[0]) * span(range[1]);
    if !(requested <= cap as f64) {
        return Err(Error::Resource { what: "lattice enumeration", requested, cap: cap as f64 });
    }
    if requested == 0.0 {
        return Ok(());
    }

    let (a_lo, a_hi) = (range[0].0 as i64, range[0].1 as i64);
    let (b_lo, b_hi) = (range[1].0 as i64, range[1].1 as i64);
    for a in a_lo..=a_hi {
        for b in b_lo..=b_hi {
            if a == 0 && b == 0 {
                continue;
            }
            let (p, q) = reduced.source_coeffs(a, b);
            visit(p, q);
        }
    }
    Ok(())
}

/// All nonzero lattice points whose coordinates lie in `window`.
pub fn enumerate_points(basis: &UnimodularBasis, window: &BoundingBox) -> Result<Vec<LatticePoint>> {
    enumerate_points_with_cap(basis, window, DEFAULT_CANDIDATE_CAP)
}

pub fn enumerate_points_with_cap(
    basis: &UnimodularBasis,
    window: &BoundingBox,
    cap: u64,
) -> Result<Vec<LatticePoint>> {
    let mut out = Vec::new();
    for_each_candidate(basis, &Mat2::IDENTITY, window, cap, |p, q| {
        let point = LatticePoint::new(basis, p, q);
        if window.contains(point.coords) {
            out.push(point);
        }
    })?;
    Ok(out)
}

/// Outcome of comparing a lattice point count with the area of a convex body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    /// `|Λ ∩ S|`, the origin included when it lies in `S`.
    pub count: u64,
    pub area: f64,
    pub discrepancy: f64,
    /// `C₂·λ₂(Λ)·R`; informational only since `C₂` has no known numeric value.
    pub bound: f64,
}

/// `| |Λ ∩ S| − area(S) |` for the compact convex body `S` (the closure of
/// `region`) lying in the ball of radius `radius`.
pub fn schmidt_discrepancy(
    basis: &UnimodularBasis,
    region: &Region,
    radius: f64,
    c2: f64,
) -> Result<Discrepancy> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("radius must be positive and finite, got {radius}")));
    }
    if !region.is_convex() {
        return Err(Error::Domain(format!("{region:?} is not convex")));
    }
    let extent = region.max_norm();
    if extent > radius * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "region reaches norm {extent}, outside the ball of radius {radius}"
        )));
    }
    let minima = successive_minima(basis)?;
    if minima.lambda1 > radius {
        return Err(Error::Domain(format!(
            "λ₁ = {} exceeds the radius {radius}",
            minima.lambda1
        )));
    }
    let counts = crate::regions::count_points(basis, region)?;
    let count = counts.all + u64::from(region.closure_contains_origin());
    let area = region.measure()?;
    Ok(Discrepancy {
        count,
        area,
        discrepancy: (count as f64 - area).abs(),
        bound: c2 * minima.lambda2 * radius,
    })
}
