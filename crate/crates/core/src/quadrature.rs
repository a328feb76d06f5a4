//! Adaptive quadrature on intervals (Gauss–Kronrod 7/15) and on triangles
//! (7-point degree-5 Radon rule with uniform 4-way subdivision).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::Vec2;

const MAX_EVALUATIONS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// A piece of the domain with its estimate and error, ordered by error.
struct Piece<T> {
    item: T,
    value: f64,
    error: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}

impl<T> Eq for Piece<T> {}

impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive loop: split the piece with the largest error until the
/// summed error is within `abs_tol`.
fn refine<T>(
    first: Piece<T>,
    abs_tol: f64,
    evals_per_split: usize,
    mut split: impl FnMut(&T) -> Vec<Piece<T>>,
    describe: impl Fn(&T) -> String,
) -> Result<Quadrature> {
    let mut evaluations = evals_per_split;
    let mut total_error = first.error;
    let mut heap = BinaryHeap::from([first]);
    while total_error > abs_tol {
        let worst = heap.pop().expect("heap holds at least one piece");
        if evaluations > MAX_EVALUATIONS {
            return Err(Error::Numerical(format!(
                "quadrature exceeded {MAX_EVALUATIONS} evaluations with error {total_error:e} > {abs_tol:e}; worst piece {} error {:e}",
                describe(&worst.item),
                worst.error
            )));
        }
        let children = split(&worst.item);
        evaluations += evals_per_split;
        total_error -= worst.error;
        for child in children {
            if !child.value.is_finite() {
                return Err(Error::Numerical(format!("integrand not finite on {}", describe(&child.item))));
            }
            total_error += child.error;
            heap.push(child);
        }
        // Re-sum occasionally so the running total does not drift.
        if heap.len() % 1024 == 0 {
            total_error = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().map(|p| p.value).sum();
    let error_estimate = heap.iter().map(|p| p.error).sum();
    Ok(Quadrature { value, error_estimate, evaluations })
}

/// `∫_a^b f` to absolute tolerance `abs_tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) || !(abs_tol > 0.0) {
        return Err(Error::Input(format!("bad quadrature request on [{a}, {b}] with tolerance {abs_tol}")));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, evaluations: 0 });
    }
    let piece = |lo: f64, hi: f64| {
        let (value, error) = gauss_kronrod(&f, lo, hi);
        Piece { item: (lo, hi), value, error }
    };
    let first = piece(a, b);
    if !first.value.is_finite() {
        return Err(Error::Numerical(format!("integrand not finite on [{a}, {b}]")));
    }
    refine(
        first,
        abs_tol,
        15,
        |&(lo, hi)| {
            let mid = 0.5 * (lo + hi);
            vec![piece(lo, mid), piece(mid, hi)]
        },
        |(lo, hi)| format!("[{lo}, {hi}]"),
    )
}

// Radon's 7-point rule, exact for polynomials of degree ≤ 5.
const RADON_CENTROID_WEIGHT: f64 = 0.225;
const RADON_A1: f64 = 0.059_715_871_789_769_82;
const RADON_B1: f64 = 0.470_142_064_105_115_1;
const RADON_W1: f64 = 0.132_394_152_788_506_2;
const RADON_A2: f64 = 0.797_426_985_353_087_3;
const RADON_B2: f64 = 0.101_286_507_323_456_3;
const RADON_W2: f64 = 0.125_939_180_544_827_2;

fn triangle_area(t: &[Vec2; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(t[2] - t[0]).abs()
}

fn radon(f: &impl Fn(Vec2) -> f64, t: &[Vec2; 3]) -> f64 {
    let at = |l0: f64, l1: f64, l2: f64| f(l0 * t[0] + l1 * t[1] + l2 * t[2]);
    let third = 1.0 / 3.0;
    let s = RADON_CENTROID_WEIGHT * at(third, third, third)
        + RADON_W1 * (at(RADON_A1, RADON_B1, RADON_B1) + at(RADON_B1, RADON_A1, RADON_B1) + at(RADON_B1, RADON_B1, RADON_A1))
        + RADON_W2 * (at(RADON_A2, RADON_B2, RADON_B2) + at(RADON_B2, RADON_A2, RADON_B2) + at(RADON_B2, RADON_B2, RADON_A2));
    s * triangle_area(t)
}

fn split(t: &[Vec2; 3]) -> [[Vec2; 3]; 4] {
    let mid = |p: Vec2, q: Vec2| 0.5 * (p + q);
    let (m01, m12, m20) = (mid(t[0], t[1]), mid(t[1], t[2]), mid(t[2], t[0]));
    [[t[0], m01, m20], [m01, t[1], m12], [m20, m12, t[2]], [m01, m12, m20]]
}

/// `∫_T f dA` over the triangle with the given vertices, to absolute tolerance `abs_tol`.
///
/// Each piece is estimated by the rule on its four children and the error is
/// the difference from the rule on the piece itself.
pub fn integrate_triangle(f: impl Fn(Vec2) -> f64, vertices: [Vec2; 3], abs_tol: f64) -> Result<Quadrature> {
    if vertices.iter().any(|v| !v.is_finite()) || !(abs_tol > 0.0) {
        return Err(Error::Input("bad triangle quadrature request".into()));
    }
    if triangle_area(&vertices) == 0.0 {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, evaluations: 0 });
    }
    let piece = |tri: [Vec2; 3]| {
        let coarse = radon(&f, &tri);
        let value: f64 = split(&tri).iter().map(|c| radon(&f, c)).sum();
        Piece { item: tri, value, error: (value - coarse).abs() }
    };
    let first = piece(vertices);
    if !first.value.is_finite() {
        return Err(Error::Numerical(format!("integrand not finite on triangle {vertices:?}")));
    }
    refine(first, abs_tol, 35, |tri| split(tri).into_iter().map(piece).collect(), |tri| format!("{tri:?}"))
}
