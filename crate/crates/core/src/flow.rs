//! Orbit extremes of α₁ under the horocycle flow `u_t` on a finite window.
//!
//! For a nonzero `v = (x, y)` the orbit `u_t v = (x + t y, y)` moves
//! horizontally, so `min_{0≤t≤T} ‖u_t v‖` has a closed form. The deepest
//! excursion `max_{0≤t≤T} log α₁(u_t Λ)` is `-log` of the smallest such
//! window minimum over all nonzero lattice vectors. Candidates are found by
//! enumerating `a_T Λ` in a box of side `≈ e^{-r}`, doubling the box until it
//! provably contains the minimiser.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Mat2, Vec2};
use crate::lattice::{for_each_candidate, gauss_reduce, LatticePoint, UnimodularBasis, DEFAULT_CANDIDATE_CAP};
use crate::regions::sweep_radius_sq;
use crate::sampler::{sample_at, with_workers};

/// First box side tried, in `a_T` coordinates. Covers every lattice whose
/// normalised excursion exceeds `-log 2`.
const INITIAL_BOX_SIDE: f64 = 2.0;

/// Squared window minimum and a minimising time for `v`, with `v` and `-v`
/// treated alike (they have the same orbit norms).
pub fn window_min_sq(v: Vec2, horizon: f64) -> (f64, f64) {
    let Vec2 { x, y } = if v.y < 0.0 { -v } else { v };
    if y == 0.0 || x >= 0.0 {
        (x * x + y * y, 0.0)
    } else if x >= -horizon * y {
        (y * y, -x / y)
    } else {
        let end = x + horizon * y;
        (end * end + y * y, horizon)
    }
}

fn check_horizon(horizon: f64) -> Result<f64> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(horizon)
    } else {
        Err(Error::Domain(format!("time window T must be positive and finite, got {horizon}")))
    }
}

/// `(min_{t∈[0,T]} ‖u_t v‖, t*)` with `t* = clamp(-x/y, 0, T)`, or `t* = 0` when `y = 0`.
pub fn min_norm_over_window(v: Vec2, horizon: f64) -> Result<(f64, f64)> {
    if v.is_zero() || !v.is_finite() {
        return Err(Error::Domain(format!("vector must be nonzero and finite, got {v:?}")));
    }
    let (sq, t) = window_min_sq(v, check_horizon(horizon)?);
    Ok((sq.sqrt(), t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcursionResult {
    /// `max_{0≤t≤T} log α₁(u_t Λ)`.
    pub max_log_alpha1: f64,
    /// A lattice vector realising the minimum, taken with `y > 0`, or `x > 0` when `y = 0`.
    pub argmin_vector: LatticePoint,
    pub argmin_time: f64,
    pub horizon: f64,
    /// `exp(-2·max_log_alpha1)`, kept exactly as computed.
    pub min_norm_sq: f64,
}

impl ExcursionResult {
    /// Whether Λ lies in the excursion event 𝓔_T(r), i.e. misses D_{r,T}.
    /// Decided on the squared norm with the same radius as the region test, so
    /// that this is exactly the complement of `hit(Λ, D_{r,T})`.
    pub fn in_event(&self, r: f64) -> bool {
        self.min_norm_sq > sweep_radius_sq(r, self.horizon)
    }
}

/// Deepest cusp excursion of `u_t Λ` for `t ∈ [0, T]`.
pub fn max_log_alpha1(basis: &UnimodularBasis, horizon: f64) -> Result<ExcursionResult> {
    let horizon = check_horizon(horizon)?;
    let reduced = gauss_reduce(basis)?;
    let root = horizon.sqrt();
    let view = Mat2::diagonal_flow(horizon);

    // The shortest vector gives an upper bound on the answer, so the box never
    // needs to grow past the side it implies.
    let side_max = window_min_sq(reduced.b1(), horizon).0.sqrt() * root;
    let mut side = INITIAL_BOX_SIDE.min(side_max);

    loop {
        let bound = side / root;
        let fringe = side / horizon;
        let window = BoundingBox { x_min: -side - fringe, x_max: fringe, y_min: 0.0, y_max: side };

        let mut best: Option<(f64, (i64, i64), f64)> = None;
        for_each_candidate(basis, &view, &window, DEFAULT_CANDIDATE_CAP, |p, q| {
            let (sq, t) = window_min_sq(basis.point(p, q), horizon);
            let better = match best {
                None => true,
                Some((b_sq, b_coeffs, _)) => sq < b_sq || (sq == b_sq && (p, q) < b_coeffs),
            };
            if better {
                best = Some((sq, (p, q), t));
            }
        })?;

        let exhausted = side >= side_max;
        match best {
            Some((sq, (p, q), t)) if sq <= bound * bound || exhausted => {
                let mut point = LatticePoint::new(basis, p, q);
                if point.coords.y < 0.0 || (point.coords.y == 0.0 && point.coords.x < 0.0) {
                    point = LatticePoint::new(basis, -p, -q);
                }
                return Ok(ExcursionResult {
                    max_log_alpha1: -0.5 * sq.ln(),
                    argmin_vector: point,
                    argmin_time: t,
                    horizon,
                    min_norm_sq: sq,
                });
            }
            None if exhausted => {
                return Err(Error::Numerical(
                    "no candidate found in the box implied by the shortest vector".into(),
                ));
            }
            _ => side = (2.0 * side).min(side_max),
        }
    }
}

/// `Λ ∈ 𝓔_T(r)`, i.e. `max_{0≤t≤T} log α₁(u_t Λ) ≤ r + ½ log T` with the
/// boundary case assigned to the complement (a lattice point on ∂D_{r,T} hits it).
pub fn excursion_event(basis: &UnimodularBasis, r: f64, horizon: f64) -> Result<bool> {
    if !r.is_finite() {
        return Err(Error::Domain(format!("r must be finite, got {r}")));
    }
    Ok(max_log_alpha1(basis, horizon)?.in_event(r))
}

/// Per-`r` counts of Haar samples in 𝓔_T(r).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvlEstimate {
    pub r_grid: Vec<f64>,
    pub horizon: f64,
    pub samples: u64,
    pub in_event: Vec<u64>,
}

impl EvlEstimate {
    pub fn fractions(&self) -> Vec<f64> {
        self.in_event.iter().map(|&k| k as f64 / self.samples as f64).collect()
    }
}

/// Empirical `μ(𝓔_T(r))` over the first `samples` Haar lattices of `seed`.
/// The same lattices are used for every `r`, so the fractions are nondecreasing in `r`.
pub fn empirical_evl(
    seed: u64,
    samples: u64,
    r_grid: &[f64],
    horizon: f64,
    workers: usize,
) -> Result<EvlEstimate> {
    if samples == 0 {
        return Err(Error::Input("need at least one sample".into()));
    }
    if let Some(r) = r_grid.iter().find(|r| !r.is_finite()) {
        return Err(Error::Input(format!("r must be finite, got {r}")));
    }
    let horizon = check_horizon(horizon)?;
    let in_event = with_workers(workers, || {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let excursion = max_log_alpha1(&sample_at(seed, i).basis, horizon)?;
                Ok(r_grid.iter().map(|&r| u64::from(excursion.in_event(r))).collect::<Vec<_>>())
            })
            .try_reduce(
                || vec![0; r_grid.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )
    })??;
    Ok(EvlEstimate { r_grid: r_grid.to_vec(), horizon, samples, in_event })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::{hit, Region, SweepProfile};

    #[test]
    fn window_minimum_examples() {
        assert_eq!(min_norm_over_window(Vec2::new(0.0, 1.0), 3.0).unwrap(), (1.0, 0.0));
        assert_eq!(min_norm_over_window(Vec2::new(-5.0, 1.0), 10.0).unwrap(), (1.0, 5.0));
        let (n, t) = min_norm_over_window(Vec2::new(-5.0, 1.0), 3.0).unwrap();
        assert!((n - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(t, 3.0);
        // v and -v share their orbit norms
        assert_eq!(
            min_norm_over_window(Vec2::new(5.0, -1.0), 10.0).unwrap(),
            min_norm_over_window(Vec2::new(-5.0, 1.0), 10.0).unwrap()
        );
        assert_eq!(min_norm_over_window(Vec2::new(-2.0, 0.0), 10.0).unwrap(), (2.0, 0.0));
    }

    #[test]
    fn window_minimum_rejects_bad_input() {
        assert!(matches!(min_norm_over_window(Vec2::ZERO, 1.0), Err(Error::Domain(_))));
        assert!(matches!(min_norm_over_window(Vec2::new(1.0, 1.0), 0.0), Err(Error::Domain(_))));
        assert!(matches!(min_norm_over_window(Vec2::new(1.0, 1.0), f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn standard_lattice_never_enters_the_cusp() {
        let z2 = UnimodularBasis::identity();
        for t in [1e-6, 0.5, 1.0, 3.0, 100.0, 1e6] {
            let e = max_log_alpha1(&z2, t).unwrap();
            assert!(e.max_log_alpha1.abs() < 1e-15, "T={t}: {e:?}");
        }
    }

    #[test]
    fn short_window_recovers_alpha1() {
        let y: f64 = 4.0;
        let b = UnimodularBasis::new(Vec2::new(1.0 / y.sqrt(), 0.0), Vec2::new(0.0, y.sqrt())).unwrap();
        let e = max_log_alpha1(&b, 1e-9).unwrap();
        assert!((e.max_log_alpha1 - 2f64.ln()).abs() < 1e-12);
        assert_eq!(e.argmin_vector.coeffs, (1, 0));
    }

    #[test]
    fn argmin_is_consistent() {
        let b = UnimodularBasis::from_matrix(&(Mat2::rotation(0.7) * Mat2::new(0.8, 0.3, 0.0, 1.25))).unwrap();
        for t in [0.1, 2.0, 50.0, 1e4] {
            let e = max_log_alpha1(&b, t).unwrap();
            let moved = Mat2::unipotent(e.argmin_time).apply(e.argmin_vector.coords);
            let expected = (-e.max_log_alpha1).exp();
            assert!((moved.norm() - expected).abs() <= 1e-9 * expected);
            assert!((0.0..=t).contains(&e.argmin_time));
            assert!(e.argmin_vector.coords.y >= 0.0);
            assert!(e.argmin_vector.primitive);
        }
    }

    #[test]
    fn standard_lattice_events() {
        let z2 = UnimodularBasis::identity();
        assert!(!excursion_event(&z2, 0.0, 1.0).unwrap());
        assert!(excursion_event(&z2, 0.1, 1.0).unwrap());
        assert!(excursion_event(&z2, 1.0, 1.0).unwrap());
        for r in [0.0, 0.1, 1.0] {
            let d = Region::swept(r, 1.0, SweepProfile::Disk).unwrap();
            assert_eq!(excursion_event(&z2, r, 1.0).unwrap(), !hit(&z2, &d).unwrap());
        }
    }

    #[test]
    fn empirical_evl_is_monotone_and_reaches_one() {
        let grid = [-1.0, -0.3, 0.0, 0.4, 1.0, 50.0];
        let est = empirical_evl(11, 500, &grid, 100.0, 1).unwrap();
        let f = est.fractions();
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(f[5], 1.0);
        assert!(empirical_evl(11, 0, &grid, 100.0, 1).is_err());
    }
}
