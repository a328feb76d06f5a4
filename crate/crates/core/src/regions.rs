//! The planar sets used to rewrite excursion events as lattice hitting events.
//!
//! Every region excludes the origin. Boundaries are closed. With
//! `R = e^{-r} T^{-1/2}` and `s = e^{-r}`:
//!
//! | region                    | set                                                     | area                  |
//! |---------------------------|---------------------------------------------------------|-----------------------|
//! | `HalfDisk(R)`  (H_R)      | `x² + y² ≤ R², y ≥ 0`                                   | `πR²/2`               |
//! | `Segment(R)`   (I_R)      | `{0} × [0, R]`                                          | `0`                   |
//! | `Rect(R)`      (O_R)      | `[-R, R] × [0, R]`                                      | `2R²`                 |
//! | `Swept(r,T,·)`            | `⋃_{0≤t≤T} u_{-t} P_R` for the profile `P`              | see [`Region::measure`] |
//! | `Triangle(r)`  (Δ_r)      | `0 ≤ y ≤ x ≤ s`                                         | `s²/2`                |
//! | `RotatedTriangle(r)` (Δ′) | quarter turn counterclockwise of Δ_r                    | `s²/2`                |
//! | `PuncturedDisk(R)`        | `0 < ‖v‖ ≤ R`                                           | `πR²`                 |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::window_min_sq;
use crate::geometry::{BoundingBox, Mat2, Vec2};
use crate::lattice::{for_each_candidate, is_primitive, LatticePoint, UnimodularBasis, DEFAULT_CANDIDATE_CAP};

/// Shape that is swept by `u_{-t}`, `0 ≤ t ≤ T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepProfile {
    /// Half disk H_R, giving D_{r,T}.
    Disk,
    /// Vertical segment I_R, giving the inner approximation D⁻_{r,T}.
    Segment,
    /// Rectangle O_R, giving the outer approximation D⁺_{r,T}.
    Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    HalfDisk { radius: f64 },
    Segment { radius: f64 },
    Rect { radius: f64 },
    Swept { r: f64, horizon: f64, profile: SweepProfile },
    Triangle { r: f64 },
    RotatedTriangle { r: f64 },
    PuncturedDisk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    AxisRect(BoundingBox),
    Difference(Box<Region>, Box<Region>),
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Input(format!("{name} must be positive and finite, got {value}")))
    }
}

fn finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Input(format!("{name} must be finite, got {value}")))
    }
}

/// `R² = e^{-2r}/T`, the squared radius of the half disk swept in D_{r,T}.
pub fn sweep_radius_sq(r: f64, horizon: f64) -> f64 {
    (-2.0 * r).exp() / horizon
}

/// `R = e^{-r} T^{-1/2}`.
pub fn sweep_radius(r: f64, horizon: f64) -> f64 {
    (-r).exp() / horizon.sqrt()
}

impl Region {
    pub fn half_disk(radius: f64) -> Result<Self> {
        Ok(Region::HalfDisk { radius: positive("radius", radius)? })
    }

    pub fn segment(radius: f64) -> Result<Self> {
        Ok(Region::Segment { radius: positive("radius", radius)? })
    }

    pub fn rect(radius: f64) -> Result<Self> {
        Ok(Region::Rect { radius: positive("radius", radius)? })
    }

    pub fn swept(r: f64, horizon: f64, profile: SweepProfile) -> Result<Self> {
        Ok(Region::Swept { r: finite("r", r)?, horizon: positive("T", horizon)?, profile })
    }

    pub fn triangle(r: f64) -> Result<Self> {
        Ok(Region::Triangle { r: finite("r", r)? })
    }

    pub fn rotated_triangle(r: f64) -> Result<Self> {
        Ok(Region::RotatedTriangle { r: finite("r", r)? })
    }

    pub fn punctured_disk(radius: f64) -> Result<Self> {
        Ok(Region::PuncturedDisk { radius: positive("radius", radius)? })
    }

    pub fn annulus(inner: f64, outer: f64) -> Result<Self> {
        let outer = positive("outer radius", outer)?;
        if !(0.0..=outer).contains(&inner) {
            return Err(Error::Input(format!("annulus radii out of order: {inner}, {outer}")));
        }
        Ok(Region::Annulus { inner, outer })
    }

    pub fn axis_rect(window: BoundingBox) -> Self {
        Region::AxisRect(window)
    }

    pub fn difference(outer: Region, inner: Region) -> Self {
        Region::Difference(Box::new(outer), Box::new(inner))
    }

    /// Closed-form membership; the origin is never a member.
    pub fn contains(&self, v: Vec2) -> bool {
        if v.is_zero() {
            return false;
        }
        let Vec2 { x, y } = v;
        match self {
            Region::HalfDisk { radius } => y >= 0.0 && v.norm_sq() <= radius * radius,
            Region::Segment { radius } => x == 0.0 && 0.0 <= y && y <= *radius,
            Region::Rect { radius } => x.abs() <= *radius && 0.0 <= y && y <= *radius,
            Region::Swept { r, horizon, profile } => {
                if y < 0.0 {
                    return false;
                }
                match profile {
                    SweepProfile::Disk => window_min_sq(v, *horizon).0 <= sweep_radius_sq(*r, *horizon),
                    SweepProfile::Segment => {
                        y <= sweep_radius(*r, *horizon) && -horizon * y <= x && x <= 0.0
                    }
                    SweepProfile::Rect => {
                        let big_r = sweep_radius(*r, *horizon);
                        y <= big_r && -big_r - horizon * y <= x && x <= big_r
                    }
                }
            }
            Region::Triangle { r } => 0.0 <= y && y <= x && x <= (-r).exp(),
            Region::RotatedTriangle { r } => 0.0 <= y && y <= (-r).exp() && -y <= x && x <= 0.0,
            Region::PuncturedDisk { radius } => v.norm_sq() <= radius * radius,
            Region::Annulus { inner, outer } => {
                let n = v.norm_sq();
                inner * inner <= n && n <= outer * outer
            }
            Region::AxisRect(window) => window.contains(v),
            Region::Difference(a, b) => a.contains(v) && !b.contains(v),
        }
    }

    /// Lebesgue measure.
    ///
    /// For the swept sets, with `R² = e^{-2r}/T`:
    /// `m(D⁻) = e^{-2r}/2`, `m(D) = e^{-2r}/2 + πR²/2`, `m(D⁺) = e^{-2r}/2 + 2R²`,
    /// hence `m(D⁺ ∖ D⁻) = 2e^{-2r}/T`.
    pub fn measure(&self) -> Result<f64> {
        use std::f64::consts::PI;
        Ok(match self {
            Region::HalfDisk { radius } => PI * radius * radius / 2.0,
            Region::Segment { .. } => 0.0,
            Region::Rect { radius } => 2.0 * radius * radius,
            Region::Swept { r, horizon, profile } => {
                let triangle = (-2.0 * r).exp() / 2.0;
                let r_sq = sweep_radius_sq(*r, *horizon);
                match profile {
                    SweepProfile::Segment => triangle,
                    SweepProfile::Disk => triangle + PI * r_sq / 2.0,
                    SweepProfile::Rect => triangle + 2.0 * r_sq,
                }
            }
            Region::Triangle { r } | Region::RotatedTriangle { r } => (-2.0 * r).exp() / 2.0,
            Region::PuncturedDisk { radius } => PI * radius * radius,
            Region::Annulus { inner, outer } => PI * (outer * outer - inner * inner),
            Region::AxisRect(window) => window.area(),
            Region::Difference(a, b) => match (a.as_ref(), b.as_ref()) {
                (
                    Region::Swept { r: r1, horizon: t1, profile: SweepProfile::Rect },
                    Region::Swept { r: r2, horizon: t2, profile: SweepProfile::Segment },
                ) if r1 == r2 && t1 == t2 => 2.0 * sweep_radius_sq(*r1, *t1),
                _ => {
                    return Err(Error::NotImplemented(format!(
                        "measure of difference {a:?} minus {b:?}"
                    )))
                }
            },
        })
    }

    /// Axis-aligned box containing the closure of the region.
    pub fn bounding_box(&self) -> BoundingBox {
        let bx = |x_min, x_max, y_min, y_max| BoundingBox { x_min, x_max, y_min, y_max };
        match self {
            Region::HalfDisk { radius } | Region::Rect { radius } => bx(-radius, *radius, 0.0, *radius),
            Region::Segment { radius } => bx(0.0, 0.0, 0.0, *radius),
            Region::Swept { r, horizon, .. } => {
                let big_r = sweep_radius(*r, *horizon);
                bx(-big_r - horizon * big_r, big_r, 0.0, big_r)
            }
            Region::Triangle { r } => {
                let s = (-r).exp();
                bx(0.0, s, 0.0, s)
            }
            Region::RotatedTriangle { r } => {
                let s = (-r).exp();
                bx(-s, 0.0, 0.0, s)
            }
            Region::PuncturedDisk { radius } => bx(-radius, *radius, -radius, *radius),
            Region::Annulus { outer, .. } => bx(-outer, *outer, -outer, *outer),
            Region::AxisRect(window) => *window,
            Region::Difference(a, _) => a.bounding_box(),
        }
    }

    /// Linear view and window in which candidate lattice points are enumerated.
    /// Swept regions are long thin slabs; under `a_T` they become a box of side `≈ e^{-r}`.
    pub fn enumeration_frame(&self) -> (Mat2, BoundingBox) {
        match self {
            Region::Swept { r, horizon, .. } => {
                let s = (-r).exp();
                let fringe = s / horizon;
                let window = BoundingBox { x_min: -s - fringe, x_max: fringe, y_min: 0.0, y_max: s };
                (Mat2::diagonal_flow(*horizon), window)
            }
            Region::Difference(a, _) => a.enumeration_frame(),
            _ => (Mat2::IDENTITY, self.bounding_box()),
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            Region::Annulus { inner, .. } => *inner == 0.0,
            Region::Difference(..) => false,
            _ => true,
        }
    }

    /// Whether the origin lies in the closure of the region.
    pub fn closure_contains_origin(&self) -> bool {
        match self {
            Region::Annulus { inner, .. } => *inner == 0.0,
            Region::AxisRect(window) => window.contains(Vec2::ZERO),
            Region::Difference(a, _) => a.closure_contains_origin(),
            _ => true,
        }
    }

    /// Convex with the origin as an accumulation point; for such sets a
    /// lattice hits the region iff a primitive vector does.
    pub fn is_convex_accumulating(&self) -> bool {
        match self {
            Region::AxisRect(window) => {
                window.contains(Vec2::ZERO) && (window.width() > 0.0 || window.height() > 0.0)
            }
            Region::Annulus { inner, .. } => *inner == 0.0,
            Region::Difference(..) => false,
            _ => true,
        }
    }

    /// Largest norm attained on the closure of the region.
    pub fn max_norm(&self) -> f64 {
        match self {
            Region::HalfDisk { radius } | Region::Segment { radius } | Region::PuncturedDisk { radius } => {
                *radius
            }
            Region::Rect { radius } => radius * std::f64::consts::SQRT_2,
            Region::Swept { r, horizon: t, profile } => {
                let big_r = sweep_radius(*r, *t);
                match profile {
                    SweepProfile::Segment => big_r * (1.0 + t * t).sqrt(),
                    SweepProfile::Rect => big_r * ((1.0 + t) * (1.0 + t) + 1.0).sqrt().max(std::f64::consts::SQRT_2),
                    // farthest point of u_{-T} H_R
                    SweepProfile::Disk => big_r * (1.0 + t * t / 2.0 + t * (t * t / 4.0 + 1.0).sqrt()).sqrt(),
                }
            }
            Region::Triangle { r } | Region::RotatedTriangle { r } => (-r).exp() * std::f64::consts::SQRT_2,
            Region::Annulus { outer, .. } => *outer,
            Region::AxisRect(window) => window.max_norm(),
            Region::Difference(a, _) => a.max_norm(),
        }
    }
}

/// Numbers of nonzero, resp. primitive, lattice points in a region.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCounts {
    pub all: u64,
    pub primitive: u64,
}

pub fn count_points(basis: &UnimodularBasis, region: &Region) -> Result<PointCounts> {
    count_points_with_cap(basis, region, DEFAULT_CANDIDATE_CAP)
}

pub fn count_points_with_cap(basis: &UnimodularBasis, region: &Region, cap: u64) -> Result<PointCounts> {
    let (view, window) = region.enumeration_frame();
    let mut counts = PointCounts::default();
    for_each_candidate(basis, &view, &window, cap, |p, q| {
        if region.contains(basis.point(p, q)) {
            counts.all += 1;
            if is_primitive(p, q) {
                counts.primitive += 1;
            }
        }
    })?;
    Ok(counts)
}

/// The lattice points in `region`, ordered by coefficients.
pub fn points_in(basis: &UnimodularBasis, region: &Region) -> Result<Vec<LatticePoint>> {
    let (view, window) = region.enumeration_frame();
    let mut out = Vec::new();
    for_each_candidate(basis, &view, &window, DEFAULT_CANDIDATE_CAP, |p, q| {
        let point = LatticePoint::new(basis, p, q);
        if region.contains(point.coords) {
            out.push(point);
        }
    })?;
    out.sort_by_key(|p| p.coeffs);
    Ok(out)
}

/// `Λ ∈ Hit(A)`.
pub fn hit(basis: &UnimodularBasis, region: &Region) -> Result<bool> {
    Ok(count_points(basis, region)?.all > 0)
}

/// `Λ ∈ Hit*(A)`.
pub fn hit_primitive(basis: &UnimodularBasis, region: &Region) -> Result<bool> {
    Ok(count_points(basis, region)?.primitive > 0)
}

/// `|Λ* ∩ A|`.
pub fn count_primitive(basis: &UnimodularBasis, region: &Region) -> Result<u64> {
    Ok(count_points(basis, region)?.primitive)
}

/// `Hit(A) == Hit*(A)` evaluated at one lattice, for convex `A` accumulating at 0.
pub fn hit_equals_hit_primitive_check(basis: &UnimodularBasis, region: &Region) -> Result<bool> {
    if !region.is_convex_accumulating() {
        return Err(Error::Domain(format!("{region:?} is not convex with 0 as an accumulation point")));
    }
    let counts = count_points(basis, region)?;
    Ok((counts.all > 0) == (counts.primitive > 0))
}

/// `M = k_{3π/2} a_T`, which carries D⁻_{r,T} onto Δ_r.
pub fn transform_sweep_to_triangle(horizon: f64) -> Result<Mat2> {
    let horizon = positive("T", horizon)?;
    Ok(Mat2::quarter_turn_clockwise() * Mat2::diagonal_flow(horizon))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn origin_is_never_a_member() {
        let regions = [
            Region::half_disk(1.0).unwrap(),
            Region::segment(1.0).unwrap(),
            Region::rect(1.0).unwrap(),
            Region::swept(0.0, 10.0, SweepProfile::Disk).unwrap(),
            Region::swept(0.0, 10.0, SweepProfile::Segment).unwrap(),
            Region::swept(0.0, 10.0, SweepProfile::Rect).unwrap(),
            Region::triangle(0.0).unwrap(),
            Region::rotated_triangle(0.0).unwrap(),
            Region::punctured_disk(1.0).unwrap(),
            Region::annulus(0.0, 1.0).unwrap(),
            Region::axis_rect(BoundingBox::new(-1.0, 1.0, -1.0, 1.0).unwrap()),
        ];
        for region in &regions {
            assert!(!region.contains(Vec2::ZERO), "{region:?}");
            assert!(region.measure().unwrap() >= 0.0);
        }
    }

    #[test]
    fn swept_disk_membership_examples() {
        for (r, t) in [(0.0, 1.0), (0.3, 100.0), (-0.2, 7.5)] {
            let d = Region::swept(r, t, SweepProfile::Disk).unwrap();
            let big_r = sweep_radius(r, t);
            assert!(d.contains(pt(0.0, big_r * (1.0 - 1e-12))));
            assert!(d.contains(pt(-big_r * t, big_r * (1.0 - 1e-12))));
            assert!(!d.contains(pt(big_r + 0.1, big_r / 2.0)));
        }
    }

    #[test]
    fn triangle_measures() {
        assert_eq!(Region::triangle(0.0).unwrap().measure().unwrap(), 0.5);
        for t in [1.0, 10.0, 1e4] {
            let inner = Region::swept(0.7, t, SweepProfile::Segment).unwrap();
            assert!((inner.measure().unwrap() - (-1.4f64).exp() / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn outer_minus_inner_area_matches_polygon_oracle() {
        let (r, t) = (0.0, 10.0);
        let big_r = sweep_radius(r, t);
        let shoelace = |poly: &[(f64, f64)]| {
            let n = poly.len();
            (0..n)
                .map(|i| {
                    let (a, b) = (poly[i], poly[(i + 1) % n]);
                    a.0 * b.1 - b.0 * a.1
                })
                .sum::<f64>()
                .abs()
                / 2.0
        };
        let left = [(-big_r, 0.0), (0.0, 0.0), (-t * big_r, big_r), (-big_r - t * big_r, big_r)];
        let right = [(0.0, 0.0), (big_r, 0.0), (big_r, big_r), (0.0, big_r)];
        let oracle = shoelace(&left) + shoelace(&right);

        let diff = Region::difference(
            Region::swept(r, t, SweepProfile::Rect).unwrap(),
            Region::swept(r, t, SweepProfile::Segment).unwrap(),
        );
        let m = diff.measure().unwrap();
        assert!((m - oracle).abs() < 1e-12);
        assert!(m <= 2.0 * (-2.0 * r).exp() / t + 1e-12);
        assert!(m <= 0.21);
    }

    #[test]
    fn unsupported_difference_measure() {
        let diff = Region::difference(Region::half_disk(1.0).unwrap(), Region::segment(1.0).unwrap());
        assert!(matches!(diff.measure(), Err(Error::NotImplemented(_))));
    }

    #[test]
    fn standard_lattice_against_triangles() {
        let z2 = UnimodularBasis::identity();
        let delta0 = Region::triangle(0.0).unwrap();
        assert!(hit(&z2, &delta0).unwrap());
        assert_eq!(count_primitive(&z2, &delta0).unwrap(), 2);
        let pts: Vec<_> = points_in(&z2, &delta0).unwrap().iter().map(|p| p.coeffs).collect();
        assert_eq!(pts, vec![(1, 0), (1, 1)]);

        let small = Region::triangle(0.1).unwrap();
        assert!(!hit(&z2, &small).unwrap());
        assert!(!hit_primitive(&z2, &small).unwrap());
        assert!(hit_equals_hit_primitive_check(&z2, &small).unwrap());
    }

    #[test]
    fn standard_lattice_against_punctured_disks() {
        let z2 = UnimodularBasis::identity();
        assert!(!hit(&z2, &Region::punctured_disk(0.5).unwrap()).unwrap());
        let unit = Region::punctured_disk(1.0).unwrap();
        assert!(hit(&z2, &unit).unwrap());
        assert!(hit_primitive(&z2, &unit).unwrap());
        assert!(hit_equals_hit_primitive_check(&z2, &unit).unwrap());
        assert_eq!(count_points(&z2, &unit).unwrap(), PointCounts { all: 4, primitive: 4 });
    }

    #[test]
    fn hit_check_requires_qualifying_region() {
        let z2 = UnimodularBasis::identity();
        let annulus = Region::annulus(0.2, 0.8).unwrap();
        assert!(matches!(hit_equals_hit_primitive_check(&z2, &annulus), Err(Error::Domain(_))));
    }

    #[test]
    fn annulus_counts_on_standard_lattice() {
        let z2 = UnimodularBasis::identity();
        let annulus = Region::annulus(0.2, 0.8).unwrap();
        assert_eq!(count_points(&z2, &annulus).unwrap(), PointCounts::default());
        let wide = Region::annulus(1.5, 2.0).unwrap();
        // (±2,0),(0,±2) non-primitive; no primitive points with 2.25 ≤ p²+q² ≤ 4
        assert_eq!(count_points(&z2, &wide).unwrap(), PointCounts { all: 4, primitive: 0 });
    }

    #[test]
    fn sweep_transform_maps_vertices() {
        for (r, t) in [(0.0f64, 1.0), (0.3, 100.0), (-0.4, 1e4)] {
            let m = transform_sweep_to_triangle(t).unwrap();
            assert!((m.det() - 1.0).abs() < 1e-12);
            let s = (-r).exp();
            let big_r = sweep_radius(r, t);
            let v1 = m.apply(pt(0.0, big_r));
            assert!((v1.x - s).abs() < 1e-12 * s && v1.y.abs() < 1e-15);
            let v2 = m.apply(pt(-s * t.sqrt(), big_r));
            assert!((v2.x - s).abs() < 1e-12 * s && (v2.y - s).abs() < 1e-12 * s);
            assert_eq!(m.apply(Vec2::ZERO), Vec2::ZERO);
        }
        assert!(transform_sweep_to_triangle(0.0).is_err());
    }

    #[test]
    fn rotated_triangle_is_quarter_turn_of_triangle() {
        let r: f64 = -0.2;
        let delta = Region::triangle(r).unwrap();
        let rotated = Region::rotated_triangle(r).unwrap();
        let ccw = Mat2::quarter_turn_counterclockwise();
        let s = (-r).exp();
        for i in 0..=20 {
            for j in 0..=20 {
                let v = pt(-1.5 * s + 3.0 * s * i as f64 / 20.0, -1.5 * s + 3.0 * s * j as f64 / 20.0);
                assert_eq!(delta.contains(v), rotated.contains(ccw.apply(v)), "{v:?}");
            }
        }
    }

    #[test]
    fn swept_max_norm_bounds_bounding_box_corner() {
        let d = Region::swept(0.1, 50.0, SweepProfile::Disk).unwrap();
        let big_r = sweep_radius(0.1, 50.0);
        // the far corner of u_{-T} applied to (−R, 0)…(R cos φ, R sin φ)
        let mut best: f64 = 0.0;
        for k in 0..=100_000 {
            let phi = std::f64::consts::PI * k as f64 / 100_000.0;
            let p = pt(big_r * phi.cos() - 50.0 * big_r * phi.sin(), big_r * phi.sin());
            best = best.max(p.norm());
        }
        assert!((d.max_norm() - best).abs() < 1e-9 * best);
    }
}
