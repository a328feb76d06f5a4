use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::config::{Experiment, ExperimentConfig};
use super::report::{Metadata, Row, TrialReport};
use super::stats::{IntegerMoments, Proportion};
use crate::analytic::{self, Branch};
use crate::error::Result;
use crate::flow;
use crate::geometry::BoundingBox;
use crate::lattice::{self, UnimodularBasis, MINKOWSKI_PRODUCT_BOUND};
use crate::regions::{self, Region, SweepProfile};
use crate::sampler;

pub const ANNULUS_INNER: f64 = 0.2;
pub const ANNULUS_OUTER: f64 = 0.8;
pub const CUSP_RADIUS: f64 = 0.5;
pub const HITTING_RECTANGLES: usize = 20;
pub const KY_GRID_POINTS: usize = 50;
pub const KY_GRID_GAP: f64 = 1e-3;
pub const MINKOWSKI_SLACK: f64 = 1e-9;

/// Integer counters and moment sums filled in per sample.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub counts: Vec<u64>,
    pub moments: Vec<IntegerMoments>,
}

impl Tally {
    fn sized(counts: usize, moments: usize) -> Self {
        Tally { counts: vec![0; counts], moments: vec![IntegerMoments::default(); moments] }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        for (a, b) in self.moments.iter_mut().zip(other.moments) {
            *a = a.merge(b);
        }
        self
    }

    fn proportion(&self, i: usize, n: u64) -> Proportion {
        Proportion { successes: self.counts[i], n }
    }
}

/// Runs `step` on samples `0..n` of the stream `seed`, accumulating into a
/// [`Tally`] with `counts` counters and `moments` moment slots.
pub fn tally(
    seed: u64,
    n: u64,
    workers: usize,
    counts: usize,
    moments: usize,
    step: impl Fn(&mut Tally, &UnimodularBasis) -> Result<()> + Sync,
) -> Result<Tally> {
    sampler::with_workers(workers, || {
        (0..n)
            .into_par_iter()
            .try_fold(
                || Tally::sized(counts, moments),
                |mut acc, i| {
                    step(&mut acc, &sampler::sample_at(seed, i).basis)?;
                    Ok(acc)
                },
            )
            .try_reduce(|| Tally::sized(counts, moments), |a, b| Ok(a.merge(b)))
    })?
}

/// Wraps a cell so that an error becomes a single failure row.
fn cell(label: &str, r: Option<f64>, horizon: Option<f64>, n: u64, body: impl FnOnce() -> Result<Vec<Row>>) -> Vec<Row> {
    body().unwrap_or_else(|e| vec![Row::failure(label, n, &e.to_string()).at(r, horizon)])
}

fn exact_f(r: f64) -> Option<f64> {
    analytic::limit_cdf(r).exact()
}

pub fn run(config: &ExperimentConfig) -> Result<TrialReport> {
    config.validate()?;
    let start = Instant::now();
    let rows = match config.experiment {
        Experiment::HitProb => hit_prob(config),
        Experiment::Evl => evl(config),
        Experiment::Moments => moments(config),
        Experiment::Tail => tail(config),
        Experiment::SiegelCheck => siegel_check(config),
        Experiment::LemmaChecks => lemma_checks(config),
        Experiment::KyIntegral => ky_integral(),
    };
    Ok(TrialReport {
        experiment: config.experiment,
        rows,
        metadata: Metadata {
            seed: config.seed,
            workers: config.workers,
            samples: config.samples,
            c1: config.c1_parameter,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

fn hit_prob(c: &ExperimentConfig) -> Vec<Row> {
    let n = c.samples;
    let mut rows = Vec::new();
    for &r in &c.r_values {
        rows.extend(cell("hit-prob:hit", Some(r), None, n, || {
            let triangle = Region::triangle(r)?;
            let t = tally(c.seed, n, c.workers, 1, 0, |acc, b| {
                acc.counts[0] += u64::from(regions::hit_primitive(b, &triangle)?);
                Ok(())
            })?;
            let p = t.proportion(0, n);
            let base = Row::proportion("hit-prob:hit", p).at(Some(r), None);
            Ok(match Branch::of(r) {
                Branch::PositiveR => vec![base.target(Some(analytic::first_moment(r)), "first-moment")],
                Branch::MiddleR => vec![
                    base.target(analytic::hit_probability(r), "one-minus-F"),
                    Row::proportion("hit-prob:hit-two-orientations", p)
                        .at(Some(r), None)
                        .target(analytic::hit_probability_two_orientations(r).ok(), "two-orientation-moments"),
                ],
                Branch::TailR => vec![base],
            })
        }));
    }
    rows
}

fn evl(c: &ExperimentConfig) -> Vec<Row> {
    let n = c.samples;
    let mut rows = Vec::new();
    for &horizon in &c.t_values {
        for &r in &c.r_values {
            rows.extend(cell("evl:event", Some(r), Some(horizon), n, || {
                let disk = Region::swept(r, horizon, SweepProfile::Disk)?;
                let inner = Region::swept(r, horizon, SweepProfile::Segment)?;
                let outer = Region::swept(r, horizon, SweepProfile::Rect)?;
                let t = tally(c.seed, n, c.workers, 5, 0, |acc, b| {
                    let event = flow::excursion_event(b, r, horizon)?;
                    let miss_disk = !regions::hit(b, &disk)?;
                    let miss_inner = !regions::hit(b, &inner)?;
                    let miss_outer = !regions::hit(b, &outer)?;
                    acc.counts[0] += u64::from(event);
                    acc.counts[1] += u64::from(event != miss_disk);
                    acc.counts[2] += u64::from(miss_inner);
                    acc.counts[3] += u64::from(miss_outer);
                    acc.counts[4] += u64::from((miss_outer && !event) || (event && !miss_inner));
                    Ok(())
                })?;
                let f = exact_f(r);
                let gap = 2.0 * (-2.0 * r).exp() / horizon;
                let at = |row: Row| row.at(Some(r), Some(horizon));
                Ok(vec![
                    at(Row::proportion("evl:event", t.proportion(0, n))).target(f, "F"),
                    at(Row::proportion("evl:event-disk-mismatch", t.proportion(1, n))).target(Some(0.0), "exact-identity"),
                    at(Row::proportion("evl:miss-inner", t.proportion(2, n))).target(f, "F"),
                    at(Row::proportion("evl:miss-outer", t.proportion(3, n))).target(f.map(|f| f - gap), "F-minus-gap"),
                    at(Row::proportion("evl:sandwich-violation", t.proportion(4, n))).target(Some(0.0), "sandwich"),
                ])
            }));
        }
    }
    rows
}

fn moments(c: &ExperimentConfig) -> Vec<Row> {
    let n = c.samples;
    let mut rows = Vec::new();
    for &r in &c.r_values {
        rows.extend(cell("moments:first", Some(r), None, n, || {
            let triangle = Region::triangle(r)?;
            let t = tally(c.seed, n, c.workers, 3, 2, |acc, b| {
                let k = regions::count_primitive(b, &triangle)?;
                acc.moments[0].push(k);
                acc.moments[1].push(k * k);
                match k {
                    0 => {}
                    1 => acc.counts[0] += 1,
                    2 => acc.counts[1] += 1,
                    _ => acc.counts[2] += 1,
                }
                Ok(())
            })?;
            let at = |row: Row| row.at(Some(r), None);
            let single = analytic::counts_decomposition(r).ok();
            let two = analytic::counts_decomposition_two_orientations(r).ok();
            let middle = Branch::of(r) == Branch::MiddleR || r == analytic::middle_branch_floor();
            let (a1, a2) = (t.proportion(0, n), t.proportion(1, n));
            let mut out = vec![
                at(Row::mean("moments:first", t.moments[0])).target(Some(analytic::first_moment(r)), "first-moment"),
                at(Row::mean("moments:second", t.moments[1])).target(single.map(|m| m.second), "second-moment-closed"),
                at(Row::mean("moments:second-two-orientations", t.moments[1]))
                    .target(two.map(|m| m.second), "two-orientation-moments"),
                at(Row::proportion("moments:mu-a1", a1)).target(single.map(|m| m.mu_a1), "counts-decomposition"),
                at(Row::proportion("moments:mu-a2", a2)).target(single.map(|m| m.mu_a2), "counts-decomposition"),
                at(Row::proportion("moments:mu-a1-two-orientations", a1))
                    .target(two.map(|m| m.mu_a1), "two-orientation-moments"),
                at(Row::proportion("moments:mu-a2-two-orientations", a2))
                    .target(two.map(|m| m.mu_a2), "two-orientation-moments"),
            ];
            let above = at(Row::proportion("moments:count-above-two", t.proportion(2, n)));
            out.push(if middle { above.target(Some(0.0), "count-bound") } else { above });
            Ok(out)
        }));
    }
    rows
}

fn tail(c: &ExperimentConfig) -> Vec<Row> {
    let n = c.samples;
    let mut rows = Vec::new();
    for &r in &c.r_values {
        rows.extend(cell("tail:F", Some(r), None, n, || {
            let triangle = Region::triangle(r)?;
            let t = tally(c.seed, n, c.workers, 1, 0, |acc, b| {
                acc.counts[0] += u64::from(!regions::hit_primitive(b, &triangle)?);
                Ok(())
            })?;
            let p = t.proportion(0, n);
            let at = |row: Row| row.at(Some(r), None);
            let f_row = at(Row::proportion("tail:F", p));
            let f_row = match exact_f(r) {
                Some(f) => f_row.target(Some(f), "F"),
                None => f_row,
            };
            let scale = (-2.0 * r).exp();
            let (lo, hi) = p.interval();
            let scaled = Row::computed("tail:F-scaled", p.estimate() * scale, p.stderr() * scale, n);
            let scaled = Row { ci_low: lo * scale, ci_high: hi * scale, ..scaled };
            let bounds = analytic::tail_bounds(r, c.c1_parameter);
            Ok(vec![
                f_row,
                at(scaled).target(Some(analytic::C0), "C0-lower-bound"),
                at(Row::proportion("tail:F-vs-c1", p)).target(Some(bounds.upper), "C1-parameter-upper-bound"),
            ])
        }));
    }
    rows
}

fn siegel_check(c: &ExperimentConfig) -> Vec<Row> {
    let n = c.samples;
    let mut rows = cell("siegel-check:annulus-full", None, None, n, || {
        let annulus = Region::annulus(ANNULUS_INNER, ANNULUS_OUTER)?;
        let t = tally(c.seed, n, c.workers, 0, 2, |acc, b| {
            let counts = regions::count_points(b, &annulus)?;
            acc.moments[0].push(counts.all);
            acc.moments[1].push(counts.primitive);
            Ok(())
        })?;
        Ok(vec![
            Row::mean("siegel-check:annulus-full", t.moments[0]).target(Some(analytic::siegel_mean(&annulus)?), "siegel-mean"),
            Row::mean("siegel-check:annulus-primitive", t.moments[1])
                .target(Some(analytic::primitive_siegel_mean(&annulus)?), "primitive-siegel-mean"),
        ])
    });
    rows.extend(cell("siegel-check:cusp-hit", None, None, n, || {
        let disk = Region::punctured_disk(CUSP_RADIUS)?;
        let t = tally(c.seed, n, c.workers, 1, 0, |acc, b| {
            acc.counts[0] += u64::from(regions::hit(b, &disk)?);
            Ok(())
        })?;
        Ok(vec![Row::proportion("siegel-check:cusp-hit", t.proportion(0, n))
            .target(Some(analytic::cusp_estimate(CUSP_RADIUS)?), "cusp-estimate")])
    }));
    for &r in &c.r_values {
        rows.extend(cell("siegel-check:triangle-full", Some(r), None, n, || {
            let triangle = Region::triangle(r)?;
            let t = tally(c.seed, n, c.workers, 0, 2, |acc, b| {
                let counts = regions::count_points(b, &triangle)?;
                acc.moments[0].push(counts.all);
                acc.moments[1].push(counts.primitive);
                Ok(())
            })?;
            Ok(vec![
                Row::mean("siegel-check:triangle-full", t.moments[0])
                    .at(Some(r), None)
                    .target(Some(analytic::siegel_mean(&triangle)?), "siegel-mean"),
                Row::mean("siegel-check:triangle-primitive", t.moments[1])
                    .at(Some(r), None)
                    .target(Some(analytic::first_moment(r)), "first-moment"),
            ])
        }));
    }
    rows
}

/// Axis-parallel rectangles of area at most 0.05 lying at distance at least
/// 0.1 from the origin, drawn from a stream reserved for this purpose.
pub fn hitting_rectangles(seed: u64) -> Vec<BoundingBox> {
    let mut rng = sampler::substream(seed, u64::MAX);
    let mut out = Vec::with_capacity(HITTING_RECTANGLES);
    while out.len() < HITTING_RECTANGLES {
        let angle = rng.gen_range(0.0..2.0 * PI);
        let rho = rng.gen_range(0.3..1.5);
        let (w, h) = (rng.gen_range(0.05..0.22), rng.gen_range(0.05..0.22));
        let (cx, cy) = (rho * angle.cos(), rho * angle.sin());
        let window = BoundingBox { x_min: cx - w / 2.0, x_max: cx + w / 2.0, y_min: cy - h / 2.0, y_max: cy + h / 2.0 };
        let dx = window.x_min.max(-window.x_max).max(0.0);
        let dy = window.y_min.max(-window.y_max).max(0.0);
        if dx.hypot(dy) >= 0.1 {
            out.push(window);
        }
    }
    out
}

fn lemma_checks(c: &ExperimentConfig) -> Vec<Row> {
    let n = c.samples;
    let mut rows = cell("lemma-checks:minkowski-violation", None, None, n, || {
        let t = tally(c.seed, n, c.workers, 1, 0, |acc, b| {
            let m = lattice::successive_minima(b)?;
            acc.counts[0] += u64::from(m.product() > MINKOWSKI_PRODUCT_BOUND + MINKOWSKI_SLACK);
            Ok(())
        })?;
        Ok(vec![Row::proportion("lemma-checks:minkowski-violation", t.proportion(0, n)).target(Some(0.0), "minkowski")])
    });
    rows.extend(cell("lemma-checks:hit-mismatch-cusp", None, None, n, || {
        let disk = Region::punctured_disk(CUSP_RADIUS)?;
        let t = tally(c.seed, n, c.workers, 1, 0, |acc, b| {
            acc.counts[0] += u64::from(!regions::hit_equals_hit_primitive_check(b, &disk)?);
            Ok(())
        })?;
        Ok(vec![Row::proportion("lemma-checks:hit-mismatch-cusp", t.proportion(0, n))
            .target(Some(0.0), "hit-equals-hit-primitive")])
    }));
    for &r in &c.r_values {
        rows.extend(cell("lemma-checks:hit-mismatch-triangle", Some(r), None, n, || {
            let triangle = Region::triangle(r)?;
            let t = tally(c.seed, n, c.workers, 2, 0, |acc, b| {
                acc.counts[0] += u64::from(!regions::hit_equals_hit_primitive_check(b, &triangle)?);
                acc.counts[1] += u64::from(regions::count_primitive(b, &triangle)? > 2);
                Ok(())
            })?;
            let mut out = vec![Row::proportion("lemma-checks:hit-mismatch-triangle", t.proportion(0, n))
                .at(Some(r), None)
                .target(Some(0.0), "hit-equals-hit-primitive")];
            let above = Row::proportion("lemma-checks:count-above-two", t.proportion(1, n)).at(Some(r), None);
            out.push(if r > analytic::middle_branch_floor() { above.target(Some(0.0), "count-bound") } else { above });
            Ok(out)
        }));
        for &horizon in &c.t_values {
            rows.extend(cell("lemma-checks:transform-mismatch", Some(r), Some(horizon), n, || {
                let inner = Region::swept(r, horizon, SweepProfile::Segment)?;
                let triangle = Region::triangle(r)?;
                let m = regions::transform_sweep_to_triangle(horizon)?;
                let t = tally(c.seed, n, c.workers, 1, 0, |acc, b| {
                    let moved = b.transformed(&m)?;
                    acc.counts[0] += u64::from(regions::hit(b, &inner)? != regions::hit(&moved, &triangle)?);
                    Ok(())
                })?;
                Ok(vec![Row::proportion("lemma-checks:transform-mismatch", t.proportion(0, n))
                    .at(Some(r), Some(horizon))
                    .target(Some(0.0), "transform-equivalence")])
            }));
        }
    }
    for (k, window) in hitting_rectangles(c.seed).into_iter().enumerate() {
        let label = format!("lemma-checks:hitting-rect-{k:02}");
        rows.extend(cell(&label, None, None, n, || {
            let region = Region::axis_rect(window);
            let t = tally(c.seed, n, c.workers, 1, 0, |acc, b| {
                acc.counts[0] += u64::from(regions::hit(b, &region)?);
                Ok(())
            })?;
            Ok(vec![Row::proportion(label.clone(), t.proportion(0, n)).target(Some(window.area()), "hitting-upper-bound")])
        }));
    }
    rows
}

/// Evenly spaced grid on `[1, √2 − gap]`.
pub fn ky_grid() -> Vec<f64> {
    let top = std::f64::consts::SQRT_2 - KY_GRID_GAP;
    (0..KY_GRID_POINTS).map(|i| 1.0 + (top - 1.0) * i as f64 / (KY_GRID_POINTS - 1) as f64).collect()
}

fn ky_integral() -> Vec<Row> {
    let scale = 6.0 / (PI * PI);
    ky_grid()
        .into_iter()
        .flat_map(|s| {
            let r = -s.ln();
            cell("ky-integral:second-moment", Some(r), None, 0, || {
                let k = analytic::ky_second_moment_numeric(s)?;
                let row = Row::computed(
                    "ky-integral:second-moment",
                    k.second_moment,
                    k.inner_integral.error_estimate * scale,
                    k.inner_integral.evaluations as u64,
                );
                Ok(vec![row.at(Some(r), None).target(analytic::second_moment_closed(r).ok(), "second-moment-closed")])
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(experiment: Experiment) -> ExperimentConfig {
        ExperimentConfig { samples: 400, ..ExperimentConfig::new(experiment) }
    }

    #[test]
    fn every_experiment_runs_without_failures() {
        for e in Experiment::ALL {
            let report = run(&small(e)).unwrap();
            assert!(!report.rows.is_empty(), "{e}");
            assert!(!report.has_failures(), "{e}: {:?}", report.rows);
            for row in &report.rows {
                if row.estimate.is_finite() {
                    assert!(row.ci_low <= row.estimate && row.estimate <= row.ci_high, "{row:?}");
                }
            }
        }
    }

    #[test]
    fn reports_do_not_depend_on_worker_count() {
        let one = run(&small(Experiment::Moments)).unwrap();
        let three = run(&ExperimentConfig { workers: 3, ..small(Experiment::Moments) }).unwrap();
        assert_eq!(one.to_csv(), three.to_csv());
    }

    #[test]
    fn invalid_cells_become_failure_rows() {
        let config = ExperimentConfig { t_values: vec![1e300], r_values: vec![-700.0], ..small(Experiment::Evl) };
        let report = run(&config).unwrap();
        assert!(report.has_failures());
    }

    #[test]
    fn hitting_rectangles_are_small_and_away_from_origin() {
        let rects = hitting_rectangles(5);
        assert_eq!(rects.len(), HITTING_RECTANGLES);
        for w in rects {
            assert!(w.area() <= 0.05 && !w.contains(crate::geometry::Vec2::ZERO));
        }
        assert_eq!(hitting_rectangles(5), hitting_rectangles(5));
    }

    #[test]
    fn ky_grid_shape() {
        let g = ky_grid();
        assert_eq!(g.len(), KY_GRID_POINTS);
        assert_eq!(g[0], 1.0);
        assert!((g[KY_GRID_POINTS - 1] - (std::f64::consts::SQRT_2 - KY_GRID_GAP)).abs() < 1e-15);
    }
}
