use std::f64::consts::PI;

use horoextreme::analytic;
use horoextreme::geometry::Vec2;
use horoextreme::quadrature;

/// Parameter length of { t : w0 + t·v ∈ Δ } for the line det(v, w) = n, with
/// Δ = { 0 ≤ y ≤ x ≤ s } clipped half-plane by half-plane.
fn clipped_length(v: Vec2, n: i64, s: f64) -> f64 {
    let w0 = (n as f64 / v.norm_sq()) * Vec2::new(-v.y, v.x);
    // Half-planes a·w ≤ c.
    let planes = [(Vec2::new(0.0, -1.0), 0.0), (Vec2::new(1.0, 0.0), s), (Vec2::new(-1.0, 1.0), 0.0)];
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (a, c) in planes {
        let slope = a.dot(v);
        let room = c - a.dot(w0);
        if slope.abs() < 1e-300 {
            if room < 0.0 {
                return 0.0;
            }
        } else if slope > 0.0 {
            hi = hi.min(room / slope);
        } else {
            lo = lo.max(room / slope);
        }
    }
    (hi - lo).max(0.0)
}

fn grid_points(s: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..=40 {
        for j in 0..=i {
            let x = s * i as f64 / 40.0;
            out.push((x, (x * j as f64 / i as f64).min(x)));
        }
    }
    out
}

#[test]
fn first_line_length_matches_formula() {
    for s in [1.0, 1.05, 1.2, 1.35, 1.41] {
        for (x, y) in grid_points(s) {
            let oracle = clipped_length(Vec2::new(x, y), 1, s);
            let got = analytic::ky_interval_length(x, y, 1, s).unwrap();
            assert!((oracle - got).abs() < 1e-12, "s={s} ({x},{y}): {oracle} vs {got}");
        }
    }
}

#[test]
fn far_lines_miss_the_triangle() {
    for s in [1.1, 1.3, 1.414] {
        for (x, y) in grid_points(s) {
            for n in [2, 3, 5, -2, -3] {
                assert_eq!(clipped_length(Vec2::new(x, y), n, s), 0.0, "s={s} ({x},{y}) n={n}");
                assert_eq!(analytic::ky_interval_length(x, y, n, s).unwrap(), 0.0);
            }
        }
    }
}

#[test]
fn negative_first_line_meets_the_triangle() {
    // The line det(v, w) = -1 crosses Δ whenever y > 1/s; the library keeps
    // the value 0 for n = -1, so the two differ there.
    let s = 1.2;
    let (x, y) = (1.15, 1.0);
    let oracle = clipped_length(Vec2::new(x, y), -1, s);
    assert!((oracle - (s - 1.0 / y) / x).abs() < 1e-12);
    assert!(oracle > 0.1);
    assert_eq!(analytic::ky_interval_length(x, y, -1, s).unwrap(), 0.0);
}

#[test]
fn both_first_lines_contribute_equally() {
    for s in [1.1f64, 1.25, 1.4] {
        let tri = [Vec2::new(0.0, 0.0), Vec2::new(s, 0.0), Vec2::new(s, s)];
        let guard = |v: Vec2| v.x > 0.0;
        let plus = quadrature::integrate_triangle(|v| if guard(v) { clipped_length(v, 1, s) } else { 0.0 }, tri, 1e-9)
            .unwrap()
            .value;
        let minus = quadrature::integrate_triangle(|v| if guard(v) { clipped_length(v, -1, s) } else { 0.0 }, tri, 1e-9)
            .unwrap()
            .value;
        assert!((plus - analytic::ky_inner_integral_closed(s)).abs() < 1e-7, "s={s}: {plus}");
        assert!((plus - minus).abs() < 1e-7, "s={s}: {plus} vs {minus}");
        let with_both = 6.0 / (PI * PI) * (s * s / 2.0 + plus + minus);
        let r = -s.ln();
        assert!((with_both - analytic::second_moment_two_orientations(r).unwrap()).abs() < 1e-6);
        assert!((6.0 / (PI * PI) * (s * s / 2.0 + plus) - analytic::second_moment_closed(r).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn numeric_second_moment_on_grid() {
    for i in 0..10 {
        let s = 1.0 + (2f64.sqrt() - 1e-3 - 1.0) * i as f64 / 9.0;
        let k = analytic::ky_second_moment_numeric(s).unwrap();
        let closed = analytic::second_moment_closed(-s.ln()).unwrap();
        assert!((k.second_moment - closed).abs() < 1e-6, "s={s}");
    }
}

#[test]
fn branch_edges_agree() {
    let edge = analytic::middle_branch_floor();
    let tail = analytic::tail_bounds(edge, analytic::DEFAULT_C1);
    let middle = analytic::f_middle_branch(edge);
    assert!(tail.lower <= middle && middle <= tail.upper);
    assert!((tail.lower - 3.0 / (8.0 * PI)).abs() < 1e-15);
    let two = analytic::hit_probability_two_orientations(edge).unwrap();
    let m = analytic::counts_decomposition_two_orientations(edge).unwrap();
    assert!((m.mu_a1 + m.mu_a2 - two).abs() < 1e-12);
}
