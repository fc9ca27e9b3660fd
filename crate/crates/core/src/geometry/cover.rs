use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Cap, Region, SphereContext, SpherePoint};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// `n` Fibonacci-spiral points on `S²_R`, ordered by decreasing `z`.
pub fn fibonacci_points(ctx: &SphereContext, n: usize) -> Vec<SpherePoint> {
    let golden = PI * (3.0 - libm::sqrt(5.0));
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let theta = libm::acos(z);
            ctx.polar_point(theta, golden * i as f64)
        })
        .collect()
}

/// `n` equally spaced points on `S¹_R`, the first at angle `offset`.
pub fn circle_points(ctx: &SphereContext, n: usize, offset: f64) -> Vec<SpherePoint> {
    (0..n).map(|j| ctx.angle_point(offset + 2.0 * PI * j as f64 / n as f64)).collect()
}

/// Test-cap centres: uniform angles on the circle, Fibonacci points on the
/// sphere.
pub fn test_centers(ctx: &SphereContext, n: usize) -> Vec<SpherePoint> {
    match ctx.dim() {
        2 => circle_points(ctx, n, 0.0),
        _ => fibonacci_points(ctx, n),
    }
}

/// Multiplicity bound `400·d·log d` of the covering lemma.
pub fn multiplicity_bound(d: usize) -> f64 {
    400.0 * d as f64 * libm::log(d as f64)
}

/// Cover of the sphere by caps of one radius.
#[derive(Clone, Debug, PartialEq)]
pub struct CapCover {
    pub caps: Vec<Cap>,
    /// Maximal number of caps containing a verification point.
    pub multiplicity_kappa: usize,
    pub coverage_verified: bool,
    /// Number of verification points used for coverage and `κ`.
    pub verification_samples: usize,
}

/// Covers `S^{d-1}_R` by caps of radius `a`.
///
/// Centres: `2⌈2R/a⌉` equally spaced angles on the circle, `⌈16R²/a²⌉`
/// Fibonacci points on the sphere. Coverage and `κ` are checked on a grid
/// four times as dense; an uncovered point or `κ > 400·d·log d` is an error.
pub fn build_cap_cover(ctx: &SphereContext, a: f64) -> Result<CapCover> {
    let r = ctx.radius();
    if !(a > 0.0) || a > r * (1.0 + 1e-15) {
        return Err(Error::InvalidCapRadius { a, radius: r });
    }
    if a >= r {
        let cap = Cap::new(ctx, ctx.pole(), r)?;
        return Ok(CapCover {
            caps: alloc::vec![cap],
            multiplicity_kappa: 1,
            coverage_verified: true,
            verification_samples: 0,
        });
    }

    let (centers, samples) = match ctx.dim() {
        2 => {
            let n = 2 * libm::ceil(2.0 * r / a) as usize;
            (circle_points(ctx, n, 0.0), circle_points(ctx, 4 * n, PI / (4 * n) as f64))
        }
        _ => {
            let n = libm::ceil(16.0 * r * r / (a * a)) as usize;
            (fibonacci_points(ctx, n), fibonacci_points(ctx, 4 * n))
        }
    };
    let caps: Vec<Cap> = centers.into_iter().map(|c| Cap::new(ctx, c, a)).collect::<Result<_>>()?;

    let counts = if ctx.dim() == 2 {
        samples.iter().map(|x| caps.iter().filter(|c| c.contains(x)).count()).collect::<Vec<_>>()
    } else {
        fibonacci_counts(&caps, &samples, r)
    };
    let uncovered = counts.iter().filter(|&&k| k == 0).count();
    if uncovered > 0 {
        return Err(Error::CoverageFailure { uncovered, samples: samples.len() });
    }
    let kappa = counts.iter().copied().max().unwrap_or(0);
    let bound = multiplicity_bound(ctx.dim());
    if kappa as f64 > bound {
        return Err(Error::MultiplicityBound { kappa, bound });
    }
    Ok(CapCover { caps, multiplicity_kappa: kappa, coverage_verified: true, verification_samples: samples.len() })
}

/// Containment counts for caps centred on a Fibonacci spiral. Centres are
/// sorted by `z`, so only the index window whose polar angle is within the
/// cap radius of the sample can contain it.
fn fibonacci_counts(caps: &[Cap], samples: &[SpherePoint], r: f64) -> Vec<usize> {
    let n = caps.len() as f64;
    let alpha = caps[0].angle();
    let index_of = |z: f64| (n * (1.0 - z) - 1.0) / 2.0;
    samples
        .iter()
        .map(|x| {
            let theta = libm::acos((x.coords()[2] / r).clamp(-1.0, 1.0));
            let z_hi = libm::cos((theta - alpha).max(0.0));
            let z_lo = libm::cos((theta + alpha).min(PI));
            let lo = (libm::floor(index_of(z_hi)) as isize - 1).max(0) as usize;
            let hi = ((libm::ceil(index_of(z_lo)) as isize + 1).max(0) as usize).min(caps.len() - 1);
            caps[lo..=hi].iter().filter(|c| c.contains(x)).count()
        })
        .collect()
}

/// Grid estimate of the thickness of a region at scale `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThicknessReport {
    pub scale_a: f64,
    /// `min |S∩K|/|K|` over the tested caps; an upper estimate of the
    /// infimum over all caps.
    pub gamma_estimate: f64,
    pub worst_cap: Cap,
    pub grid_resolution: usize,
    /// Test caps containing no quadrature node (left out of the minimum).
    pub caps_skipped: usize,
}

/// Evaluates `|S∩K|/|K|` for caps of radius `a` centred on `grid_n` test
/// centres and returns the minimum. Both measures use the nodes of `rule`.
pub fn thickness(
    ctx: &SphereContext,
    region: &Region,
    a: f64,
    grid_n: usize,
    rule: &QuadratureRule,
) -> Result<ThicknessReport> {
    let grid_n = grid_n.max(16);
    let inside: Vec<bool> = rule.nodes().iter().map(|x| region.contains(x)).collect();
    let mut gamma = f64::INFINITY;
    let mut worst = None;
    let mut skipped = 0;
    for center in test_centers(ctx, grid_n) {
        let cap = Cap::new(ctx, center, a)?;
        let (mut k, mut sk) = (0.0, 0.0);
        for ((x, w), &s) in rule.nodes().iter().zip(rule.weights()).zip(&inside) {
            if cap.contains(x) {
                k += w;
                if s {
                    sk += w;
                }
            }
        }
        if k == 0.0 {
            skipped += 1;
            continue;
        }
        let ratio = sk / k;
        if ratio < gamma {
            gamma = ratio;
            worst = Some(cap);
        }
    }
    let worst_cap = worst
        .ok_or_else(|| Error::InvalidArgument("quadrature rule too coarse: no test cap contains a node".into()))?;
    Ok(ThicknessReport {
        scale_a: a,
        gamma_estimate: gamma.clamp(0.0, 1.0),
        worst_cap,
        grid_resolution: grid_n,
        caps_skipped: skipped,
    })
}
