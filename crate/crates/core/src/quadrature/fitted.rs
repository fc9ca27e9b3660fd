//! Boundary-fitted rules.
//!
//! On the circle the angle range is cut at every boundary angle and each
//! piece gets its own Gauss–Legendre rule. On the sphere each meridian
//! (fixed azimuth `φ`) is cut at its crossings with the boundary circles and
//! integrated by Gauss–Legendre in `θ`; the `φ` range is cut where the
//! crossing pattern changes (tangencies and circle–circle intersections) and
//! each `φ` piece uses Gauss–Legendre after the substitution
//! `φ = a + (b − a)(1 − cos πs)/2`, which absorbs the square-root behaviour
//! of the crossings at tangencies.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{gauss_legendre, sphere_rule, QuadratureRule};
use crate::geometry::{cross3, dot3, Boundary, Region, SphereContext, SpherePoint};

const TWO_PI: f64 = 2.0 * PI;

pub(super) fn fitted_rule(ctx: &SphereContext, degree: usize, region: &Region) -> QuadratureRule {
    let boundaries = region.boundaries(ctx);
    if boundaries.is_empty() {
        return sphere_rule(ctx, degree);
    }
    let (nodes, weights) = match ctx.dim() {
        2 => circle_fitted(ctx, degree, &boundaries),
        _ => sphere_fitted(ctx, degree, &boundaries),
    };
    QuadratureRule { ctx: *ctx, nodes, weights, exact_degree: degree }
}

fn panel_nodes(degree: usize, len: f64, extra: usize) -> usize {
    libm::ceil(degree as f64 * len / 2.0) as usize + extra
}

/// Sorted, deduplicated breakpoints in `[0, 2π)`.
fn normalize_angles(mut angles: Vec<f64>) -> Vec<f64> {
    for a in angles.iter_mut() {
        *a = crate::geometry::rem_euclid(*a, TWO_PI);
        if *a >= TWO_PI {
            *a = 0.0;
        }
    }
    angles.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(angles.len());
    for a in angles {
        if out.last().is_none_or(|&l| a - l > 1e-13) {
            out.push(a);
        }
    }
    if out.len() > 1 && out[0] + TWO_PI - out[out.len() - 1] <= 1e-13 {
        out.pop();
    }
    out
}

fn circle_fitted(ctx: &SphereContext, degree: usize, boundaries: &[Boundary]) -> (Vec<SpherePoint>, Vec<f64>) {
    let cuts = normalize_angles(
        boundaries
            .iter()
            .filter_map(|b| match b {
                Boundary::Angle(t) => Some(*t),
                Boundary::Circle { .. } => None,
            })
            .collect(),
    );
    let r = ctx.radius();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for k in 0..cuts.len() {
        let a = cuts[k];
        let b = if k + 1 < cuts.len() { cuts[k + 1] } else { cuts[0] + TWO_PI };
        let len = b - a;
        let (gx, gw) = gauss_legendre(panel_nodes(degree, len, 12));
        for (x, w) in gx.iter().zip(&gw) {
            nodes.push(ctx.angle_point(a + 0.5 * len * (x + 1.0)));
            weights.push(r * 0.5 * len * w);
        }
    }
    (nodes, weights)
}

struct Circle {
    n: [f64; 3],
    h: f64,
}

fn sphere_fitted(ctx: &SphereContext, degree: usize, boundaries: &[Boundary]) -> (Vec<SpherePoint>, Vec<f64>) {
    let circles: Vec<Circle> = boundaries
        .iter()
        .filter_map(|b| match b {
            Boundary::Circle { normal, height } if height.abs() < 1.0 => Some(Circle { n: *normal, h: *height }),
            _ => None,
        })
        .collect();
    if circles.is_empty() {
        let rule = sphere_rule(ctx, degree);
        return (rule.nodes, rule.weights);
    }

    let mut cuts = Vec::new();
    for c in &circles {
        tangency_azimuths(c, &mut cuts);
    }
    for i in 0..circles.len() {
        for j in i + 1..circles.len() {
            intersection_azimuths(&circles[i], &circles[j], &mut cuts);
        }
    }
    let cuts = normalize_angles(cuts);

    // (azimuth, weight) pairs
    let mut phis: Vec<(f64, f64)> = Vec::new();
    if cuts.is_empty() {
        let n = 2 * degree + 40;
        let w = TWO_PI / n as f64;
        phis.extend((0..n).map(|j| (j as f64 * w, w)));
    } else {
        for k in 0..cuts.len() {
            let a = cuts[k];
            let b = if k + 1 < cuts.len() { cuts[k + 1] } else { cuts[0] + TWO_PI };
            let len = b - a;
            let (gx, gw) = gauss_legendre(panel_nodes(degree, len, 28));
            for (x, w) in gx.iter().zip(&gw) {
                let s = 0.5 * (x + 1.0);
                let phi = a + 0.5 * len * (1.0 - libm::cos(PI * s));
                let jac = 0.5 * len * PI * libm::sin(PI * s);
                phis.push((phi, 0.5 * w * jac));
            }
        }
    }

    let r = ctx.radius();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut thetas = Vec::new();
    for &(phi, wphi) in &phis {
        let (cphi, sphi) = (libm::cos(phi), libm::sin(phi));
        thetas.clear();
        thetas.push(0.0);
        for c in &circles {
            meridian_crossings(c, cphi, sphi, &mut thetas);
        }
        thetas.push(PI);
        thetas.sort_by(|a, b| a.total_cmp(b));
        thetas.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        for pair in thetas.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let len = b - a;
            if len <= 0.0 {
                continue;
            }
            let (gx, gw) = gauss_legendre(panel_nodes(degree, len, 14));
            for (x, w) in gx.iter().zip(&gw) {
                let theta = a + 0.5 * len * (x + 1.0);
                let st = libm::sin(theta);
                nodes.push(SpherePoint::from_raw([r * st * cphi, r * st * sphi, r * libm::cos(theta)]));
                weights.push(r * r * st * 0.5 * len * w * wphi);
            }
        }
    }
    (nodes, weights)
}

/// Azimuths at which a meridian great circle is tangent to the circle.
fn tangency_azimuths(c: &Circle, out: &mut Vec<f64>) {
    let rxy = libm::sqrt(c.n[0] * c.n[0] + c.n[1] * c.n[1]);
    if rxy < 1e-14 {
        return;
    }
    let q = (c.h * c.h - c.n[2] * c.n[2]) / (rxy * rxy);
    if !(0.0..=1.0).contains(&q) {
        return;
    }
    let phi_n = libm::atan2(c.n[1], c.n[0]);
    let root = libm::sqrt(q);
    for s in [root, -root] {
        let delta = libm::acos(s);
        for phi in [phi_n + delta, phi_n - delta] {
            out.push(phi);
            out.push(phi + PI);
        }
    }
}

/// Azimuths of the intersection points of two circles.
fn intersection_azimuths(c1: &Circle, c2: &Circle, out: &mut Vec<f64>) {
    let c = dot3(&c1.n, &c2.n);
    if (1.0 - c.abs()) < 1e-14 {
        return;
    }
    let det = 1.0 - c * c;
    let alpha = (c1.h - c2.h * c) / det;
    let beta = (c2.h - c1.h * c) / det;
    let axis = cross3(&c1.n, &c2.n);
    let t2 = (1.0 - (alpha * c1.h + beta * c2.h)) / dot3(&axis, &axis);
    if t2 < 0.0 {
        return;
    }
    let t = libm::sqrt(t2);
    for sign in [1.0, -1.0] {
        let x = [
            alpha * c1.n[0] + beta * c2.n[0] + sign * t * axis[0],
            alpha * c1.n[1] + beta * c2.n[1] + sign * t * axis[1],
        ];
        if x[0] * x[0] + x[1] * x[1] > 1e-24 {
            out.push(libm::atan2(x[1], x[0]));
        }
    }
}

/// Polar angles in `(0, π)` where the half meridian at the given azimuth
/// crosses the circle.
fn meridian_crossings(c: &Circle, cphi: f64, sphi: f64, out: &mut Vec<f64>) {
    let a = c.n[0] * cphi + c.n[1] * sphi;
    let b = c.n[2];
    let rho = libm::sqrt(a * a + b * b);
    if rho < 1e-15 || c.h.abs() > rho {
        return;
    }
    let theta0 = libm::atan2(a, b);
    let delta = libm::acos((c.h / rho).clamp(-1.0, 1.0));
    for t in [theta0 + delta, theta0 - delta] {
        let t = crate::geometry::rem_euclid(t, TWO_PI);
        if t > 1e-14 && t < PI - 1e-14 {
            out.push(t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{region_measure, Cap};
    use crate::harmonics::{basis_dim, eval_basis_all};
    use alloc::vec;

    fn gram_full(rule: &QuadratureRule, n: usize) -> Vec<f64> {
        let ctx = *rule.ctx();
        let dim = basis_dim(&ctx, n);
        let mut g = vec![0.0; dim * dim];
        let mut y = vec![0.0; dim];
        for (x, w) in rule.nodes().iter().zip(rule.weights()) {
            eval_basis_all(&ctx, n, x, &mut y);
            for i in 0..dim {
                for j in 0..dim {
                    g[i * dim + j] += w * y[i] * y[j];
                }
            }
        }
        g
    }

    #[test]
    fn fitted_sphere_rule_is_orthonormal() {
        let ctx = SphereContext::new(3, 1.3).unwrap();
        let c1 = Cap::new(&ctx, ctx.project([0.4, -0.2, 0.7]), 0.3).unwrap();
        let c2 = Cap::new(&ctx, ctx.project([-0.5, 0.1, 0.2]), 0.45).unwrap();
        let region = Region::union(vec![Region::cap(c1), Region::complement(Region::cap(c2))]);
        let rule = QuadratureRule::fitted(&ctx, 12, &region);
        let g = gram_full(&rule, 6);
        let dim = basis_dim(&ctx, 6);
        for i in 0..dim {
            for j in 0..dim {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[i * dim + j] - e).abs() < 1e-11, "{i},{j}: {}", g[i * dim + j]);
            }
        }
    }

    #[test]
    fn fitted_rule_measures_caps_and_intersections() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let c1 = Cap::new(&ctx, ctx.project([0.3, -0.4, 0.8]), 0.1).unwrap();
        let rule = QuadratureRule::fitted(&ctx, 8, &Region::cap(c1));
        assert!((region_measure(&Region::cap(c1), &rule) - c1.measure()).abs() < 1e-12);

        // two caps of angular radius π/2 with orthogonal centres meet in a
        // lune of angle π/2: area 2·(π/2)·R² = π
        let a = Cap::with_angle(&ctx, ctx.project([1.0, 0.0, 0.3]), PI / 2.0).unwrap();
        let b = Cap::with_angle(&ctx, ctx.project([-0.3, 0.0, 1.0]), PI / 2.0).unwrap();
        let lune = Region::intersection(vec![Region::cap(a), Region::cap(b)]);
        let rule = QuadratureRule::fitted(&ctx, 8, &lune);
        assert!((region_measure(&lune, &rule) - PI).abs() < 1e-11);
    }

    #[test]
    fn fitted_circle_rule() {
        let ctx = SphereContext::new(2, 2.0).unwrap();
        let region = Region::arc(&ctx, 0.3, 2.0).unwrap();
        let rule = QuadratureRule::fitted(&ctx, 10, &region);
        assert!((region_measure(&region, &rule) - 2.0 * 1.7).abs() < 1e-12);
        let g = gram_full(&rule, 5);
        let dim = basis_dim(&ctx, 5);
        for i in 0..dim {
            for j in 0..dim {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[i * dim + j] - e).abs() < 1e-12);
            }
        }
    }
}
