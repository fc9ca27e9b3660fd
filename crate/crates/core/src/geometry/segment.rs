use core::f64::consts::PI;

use super::{tangent_frame, Cap, Region, SphereContext, SpherePoint, ORTHOGONALITY_TOL};
use crate::error::{Error, Result};

/// Spherical line segment `t ↦ cos(t)p + sin(t)v`, `t ∈ [0, l]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSegment {
    p: SpherePoint,
    v: SpherePoint,
    length_param: f64,
    radius: f64,
}

impl LineSegment {
    pub fn start(&self) -> &SpherePoint {
        &self.p
    }

    pub fn direction(&self) -> &SpherePoint {
        &self.v
    }

    /// Parameter length `l`.
    pub fn length_param(&self) -> f64 {
        self.length_param
    }

    /// Arc length `R·l`.
    pub fn arc_length(&self) -> f64 {
        self.radius * self.length_param
    }

    /// Curve point at parameter `t` (not restricted to `[0, l]`).
    pub fn point_at(&self, t: f64) -> SpherePoint {
        let (s, c) = (libm::sin(t), libm::cos(t));
        let p = self.p.coords();
        let v = self.v.coords();
        SpherePoint::from_raw([c * p[0] + s * v[0], c * p[1] + s * v[1], c * p[2] + s * v[2]])
    }
}

/// Segment starting at `p` in direction `v` (`p·v = 0`, `|v| = R`) with
/// parameter length `l ∈ (0, 2π]`.
pub fn geodesic_segment(ctx: &SphereContext, p: SpherePoint, v: SpherePoint, l: f64) -> Result<LineSegment> {
    let r = ctx.radius();
    let inner = p.dot(&v);
    if inner.abs() > ORTHOGONALITY_TOL * r * r {
        return Err(Error::NotOrthogonal { inner });
    }
    if !(l > 0.0) || l > 2.0 * PI * (1.0 + 1e-15) {
        return Err(Error::InvalidSegmentLength(l));
    }
    Ok(LineSegment { p, v, length_param: l, radius: r })
}

/// Composite-midpoint approximation of `R ∫₀^l 1_M(γ(t)) dt`.
///
/// Fewer than 64 samples are raised to 64.
pub fn arc_measure(seg: &LineSegment, region: &Region, n_samples: usize) -> f64 {
    let n = n_samples.max(64);
    let h = seg.length_param / n as f64;
    let hits = (0..n).filter(|&k| region.contains(&seg.point_at((k as f64 + 0.5) * h))).count();
    seg.radius * h * hits as f64
}

/// Result of the direction search from a point inside a cap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionChoice {
    pub segment: LineSegment,
    /// `arc(I∩M)/arc(I)` for the chosen segment.
    pub ratio: f64,
    pub direction_index: usize,
    /// Smallest ratio over the fan, for comparison.
    pub worst_ratio: f64,
    pub n_dirs: usize,
}

impl DirectionChoice {
    /// `c₄` implied by `arc(I)/arc(I∩M) = c₄·|K|/|K∩M|`, given the
    /// measure fraction `|K∩M|/|K|`.
    pub fn implied_c4(&self, measure_fraction: f64) -> f64 {
        measure_fraction / self.ratio
    }
}

/// Tries a fan of directions from `p` and keeps the segment inside `cap`
/// that sees the largest fraction of `region`. On the circle the fan is
/// the two tangent directions. Ties go to the lowest index.
pub fn select_direction(
    ctx: &SphereContext,
    p: &SpherePoint,
    region: &Region,
    cap: &Cap,
    n_dirs: usize,
    n_samples: usize,
) -> Result<DirectionChoice> {
    if !cap.contains(p) {
        return Err(Error::InvalidArgument("start point lies outside the cap".into()));
    }
    let r = ctx.radius();
    let pc = p.coords();
    let unit = [pc[0] / r, pc[1] / r, pc[2] / r];
    let n = if ctx.dim() == 2 { 2 } else { n_dirs.max(8) };
    let (e1, e2) = if ctx.dim() == 2 { ([-unit[1], unit[0], 0.0], [0.0; 3]) } else { tangent_frame(&unit) };

    let mut best: Option<(usize, LineSegment, f64)> = None;
    let mut worst = f64::INFINITY;
    for k in 0..n {
        let dir = if ctx.dim() == 2 {
            let s = if k == 0 { r } else { -r };
            [s * e1[0], s * e1[1], 0.0]
        } else {
            let psi = 2.0 * PI * k as f64 / n as f64;
            let (c, s) = (libm::cos(psi), libm::sin(psi));
            [r * (c * e1[0] + s * e2[0]), r * (c * e1[1] + s * e2[1]), r * (c * e1[2] + s * e2[2])]
        };
        let v = SpherePoint::from_raw(dir);
        let l = exit_parameter(p, &v, cap, r);
        if l <= 1e-12 {
            worst = 0.0;
            continue;
        }
        let seg = geodesic_segment(ctx, *p, v, l)?;
        let ratio = arc_measure(&seg, region, n_samples) / seg.arc_length();
        worst = worst.min(ratio);
        if best.is_none_or(|(_, _, b)| ratio > b) {
            best = Some((k, seg, ratio));
        }
    }
    match best {
        Some((direction_index, segment, ratio)) if ratio > 0.0 => {
            Ok(DirectionChoice { segment, ratio, direction_index, worst_ratio: worst, n_dirs: n })
        }
        _ => Err(Error::NoDirectionFound { n_dirs: n }),
    }
}

/// First parameter in `(0, π]` at which `γ_v` leaves the cap, located by a
/// coarse scan followed by bisection. Returns `π` if it never leaves.
fn exit_parameter(p: &SpherePoint, v: &SpherePoint, cap: &Cap, r: f64) -> f64 {
    if cap.is_whole_sphere() {
        return PI;
    }
    let c = cap.center();
    let (a, b) = (c.dot(p) / (r * r), c.dot(v) / (r * r));
    let h = cap.cos_angle();
    let inside = |t: f64| a * libm::cos(t) + b * libm::sin(t) >= h;
    const SCAN: usize = 1024;
    let step = PI / SCAN as f64;
    let mut lo = 0.0;
    for k in 1..=SCAN {
        let t = k as f64 * step;
        if !inside(t) {
            let mut hi = t;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if inside(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return lo;
        }
        lo = t;
    }
    PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_points() {
        let ctx = SphereContext::new(3, 2.0).unwrap();
        let p = ctx.point(&[2.0, 0.0, 0.0]).unwrap();
        let v = ctx.point(&[0.0, 2.0, 0.0]).unwrap();
        let seg = geodesic_segment(&ctx, p, v, PI).unwrap();
        let q = seg.point_at(PI / 2.0);
        assert!((q.coords()[0]).abs() < 1e-15 && (q.coords()[1] - 2.0).abs() < 1e-15);
        assert!((seg.arc_length() - 2.0 * PI).abs() < 1e-15);
        for k in 0..100 {
            let x = seg.point_at(k as f64 * 0.0731);
            assert!((x.norm() - 2.0).abs() < 1e-10 * 2.0);
        }
    }

    #[test]
    fn rejects_non_orthogonal() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let p = ctx.point(&[1.0, 0.0, 0.0]).unwrap();
        let v = ctx.project([0.1, 1.0, 0.0]);
        match geodesic_segment(&ctx, p, v, 1.0) {
            Err(Error::NotOrthogonal { inner }) => assert!(inner > 0.09),
            other => panic!("{other:?}"),
        }
        let v = ctx.point(&[0.0, 1.0, 0.0]).unwrap();
        assert!(geodesic_segment(&ctx, p, v, 0.0).is_err());
        assert!(geodesic_segment(&ctx, p, v, 7.0).is_err());
    }

    #[test]
    fn arc_measure_trivial_regions() {
        let ctx = SphereContext::new(3, 1.5).unwrap();
        let p = ctx.point(&[1.5, 0.0, 0.0]).unwrap();
        let v = ctx.point(&[0.0, 0.0, 1.5]).unwrap();
        let seg = geodesic_segment(&ctx, p, v, 2.0).unwrap();
        assert!((arc_measure(&seg, &Region::Full, 64) - 3.0).abs() < 1e-14);
        assert_eq!(arc_measure(&seg, &Region::Empty, 64), 0.0);
    }

    #[test]
    fn arc_measure_single_crossing_converges() {
        // Segment from the equator towards the north pole, cap of angular
        // radius 0.6 around the pole: the crossing is at t* = π/2 − 0.6.
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let p = ctx.point(&[1.0, 0.0, 0.0]).unwrap();
        let v = ctx.point(&[0.0, 0.0, 1.0]).unwrap();
        let seg = geodesic_segment(&ctx, p, v, PI / 2.0).unwrap();
        let region = Region::cap(Cap::with_angle(&ctx, ctx.pole(), 0.6).unwrap());
        let exact = 0.6;
        for n in [64, 256, 1024, 4096] {
            let err = (arc_measure(&seg, &region, n) - exact).abs();
            assert!(err <= seg.arc_length() / n as f64, "n = {n}, err = {err}");
        }
    }

    #[test]
    fn whole_cap_region_gives_unit_ratio() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let cap = Cap::new(&ctx, ctx.pole(), 0.2).unwrap();
        let p = ctx.project([0.1, 0.05, 1.0]);
        let ch = select_direction(&ctx, &p, &Region::Full, &cap, 64, 512).unwrap();
        assert_eq!(ch.ratio, 1.0);
        assert_eq!(ch.direction_index, 0);
        // the chosen segment stays in the cap
        for k in 0..=50 {
            let t = ch.segment.length_param() * k as f64 / 50.0;
            assert!(cap.contains(&ch.segment.point_at(t * (1.0 - 1e-12))));
        }
    }

    #[test]
    fn circle_half_arc_closed_form() {
        // Cap of half-angle α centred at angle 0, p at −α/2, region = [0, α].
        // Counter-clockwise: l = 3α/2 with overlap α → ratio 2/3.
        let ctx = SphereContext::new(2, 1.0).unwrap();
        let alpha = 0.8;
        let cap = Cap::with_angle(&ctx, ctx.angle_point(0.0), alpha).unwrap();
        let region = Region::arc(&ctx, 0.0, alpha).unwrap();
        let p = ctx.angle_point(-alpha / 2.0);
        let ch = select_direction(&ctx, &p, &region, &cap, 8, 30_000).unwrap();
        assert!((ch.ratio - 2.0 / 3.0).abs() < 1e-4, "{}", ch.ratio);
        assert!((ch.segment.length_param() - 1.5 * alpha).abs() < 1e-12);
        assert_eq!(ch.worst_ratio, 0.0);
    }

    #[test]
    fn thin_band_prefers_aligned_direction() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let p = ctx.point(&[1.0, 0.0, 0.0]).unwrap();
        let cap = Cap::new(&ctx, p, 0.15).unwrap();
        let band = Region::band(&ctx, -0.03, 0.03).unwrap();
        let ch = select_direction(&ctx, &p, &band, &cap, 64, 2048).unwrap();
        assert!(ch.ratio > ch.worst_ratio);
        // dense fan as oracle: the best over 720 directions is no better
        let dense = select_direction(&ctx, &p, &band, &cap, 720, 2048).unwrap();
        assert!(dense.ratio >= ch.ratio - 1e-12);
        assert!(ch.ratio > 0.99);
        let v = ch.segment.direction().coords();
        assert!(v[2].abs() < 0.05, "direction should follow the equator: {v:?}");
    }

    #[test]
    fn no_direction_found() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let p = ctx.pole();
        let cap = Cap::new(&ctx, p, 0.1).unwrap();
        let far = Region::cap(Cap::new(&ctx, p.neg(), 0.1).unwrap());
        assert!(matches!(select_direction(&ctx, &p, &far, &cap, 16, 128), Err(Error::NoDirectionFound { .. })));
    }
}
