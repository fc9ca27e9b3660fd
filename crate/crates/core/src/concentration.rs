//! Restricted Gram matrices and sharp `L²` constants for spherical
//! polynomials concentrated on a region.
//!
//! For `f = Σ cᵢ Yᵢ` of degree `≤ N`, `‖f‖²_{L²(S)} = cᵀ G_S c` and
//! `‖f‖²_{L²} = cᵀc`, so the best constant in `‖f‖ ≤ C ‖f‖_{L²(S)}` is
//! `λ_min(G_S)^{-1/2}`.

use alloc::vec;

use crate::error::{Error, Result};
use crate::geometry::{region_measure, Region, SphereContext};
use crate::harmonics::{basis_dim, degree_from_energy, eval_basis_all, lq_norm, random_poly, SphericalPolynomial};
use crate::linalg::Matrix;
use crate::quadrature::QuadratureRule;

pub use crate::linalg::{eig_sym, SymmetricEigen};

/// Eigenvalues below this make the region numerically null at the degree.
pub const LAMBDA_MIN_FLOOR: f64 = 1e-14;

/// `G_ij = ∫_S Y_i Y_j dσ` over the basis of degree `≤ N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub ctx: SphereContext,
    pub degree: usize,
    pub matrix: Matrix,
}

/// Assembles `G_S` by quadrature of `1_S Y_i Y_j`. The rule must integrate
/// degree `2N` (for a fitted rule: built for `S` at degree `≥ 2N`).
pub fn gram(region: &Region, n: usize, rule: &QuadratureRule) -> Result<GramMatrix> {
    let ctx = *rule.ctx();
    if rule.exact_degree() < 2 * n {
        return Err(Error::InvalidArgument(alloc::format!(
            "rule integrates degree {} but the Gram matrix at N = {n} needs {}",
            rule.exact_degree(),
            2 * n
        )));
    }
    let dim = basis_dim(&ctx, n);
    let mut acc = vec![0.0; dim * (dim + 1) / 2];
    let mut y = vec![0.0; dim];
    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
        if !region.contains(x) {
            continue;
        }
        eval_basis_all(&ctx, n, x, &mut y);
        let mut pos = 0;
        for i in 0..dim {
            let wy = w * y[i];
            for (a, yj) in acc[pos..pos + i + 1].iter_mut().zip(&y[..=i]) {
                *a += wy * yj;
            }
            pos += i + 1;
        }
    }
    let mut matrix = Matrix::zeros(dim, dim);
    let mut pos = 0;
    for i in 0..dim {
        for j in 0..=i {
            matrix[(i, j)] = acc[pos];
            matrix[(j, i)] = acc[pos];
            pos += 1;
        }
    }
    Ok(GramMatrix { ctx, degree: n, matrix })
}

/// Thickness value and the scale it was measured at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thickness {
    pub gamma: f64,
    pub scale_a: f64,
}

/// Sharp `L²` constant of a region at one degree.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub degree: usize,
    pub q: f64,
    pub gamma_used: f64,
    pub scale_a: f64,
    pub c_star: f64,
    /// `γ·C*^{1/e}` with `e` the exponent of the inequality being tested.
    pub implied_c1: f64,
    pub exponent: f64,
    pub lambda_min: f64,
    /// Unit-norm eigenvector of `λ_min`.
    pub extremizer: SphericalPolynomial,
}

/// `C* = λ_min(G_S)^{-1/2}` at degree `N`, with `c₁` implied by
/// `C* = (c₁/γ)^{2N+1/2}`.
///
/// Without `thickness`, `γ = |S|/|S^{d-1}_R|`, the thickness at `a = R`.
pub fn sharp_constant(
    region: &Region,
    n: usize,
    rule: &QuadratureRule,
    thickness: Option<Thickness>,
) -> Result<SpectralReport> {
    sharp_constant_with_exponent(region, n, rule, thickness, 2.0 * n as f64 + 0.5)
}

fn sharp_constant_with_exponent(
    region: &Region,
    n: usize,
    rule: &QuadratureRule,
    thickness: Option<Thickness>,
    exponent: f64,
) -> Result<SpectralReport> {
    let g = gram(region, n, rule)?;
    let eig = eig_sym(&g.matrix)?;
    let lambda_min = eig.values[0];
    if !(lambda_min > LAMBDA_MIN_FLOOR) {
        return Err(Error::NearSingularGram { degree: n, lambda_min });
    }
    let ctx = g.ctx;
    let th = match thickness {
        Some(t) => t,
        None => Thickness {
            gamma: region_measure(region, rule) / rule.weights().iter().sum::<f64>(),
            scale_a: ctx.radius(),
        },
    };
    let c_star = 1.0 / libm::sqrt(lambda_min);
    let extremizer = SphericalPolynomial::new(ctx, n, eig.vector(0))?;
    Ok(SpectralReport {
        degree: n,
        q: 2.0,
        gamma_used: th.gamma,
        scale_a: th.scale_a,
        c_star,
        implied_c1: th.gamma * libm::pow(c_star, 1.0 / exponent),
        exponent,
        lambda_min,
        extremizer,
    })
}

/// Sharp constant on the spectral subspace up to energy `E`, i.e. at degree
/// `⌊R√E⌋`, with `c₁` implied through the exponent `R√E + 1/2`.
pub fn spectral_inequality_check(
    region: &Region,
    energy: f64,
    ctx: &SphereContext,
    rule: &QuadratureRule,
    thickness: Option<Thickness>,
) -> Result<SpectralReport> {
    if !(energy >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("energy {energy} must be ≥ 0")));
    }
    let n = degree_from_energy(energy, ctx);
    let exponent = ctx.radius() * libm::sqrt(energy) + 0.5;
    sharp_constant_with_exponent(region, n, rule, thickness, exponent)
}

/// Lower bound on the best `L^q` constant: the largest
/// `‖f‖_{L^q}/‖f‖_{L^q(S)}` over `trials` seeded random polynomials and the
/// `L²` extremizer.
pub fn lq_constant_lower_bound(
    region: &Region,
    n: usize,
    q: f64,
    trials: usize,
    seed: u64,
    rule: &QuadratureRule,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be ≥ 1".into()));
    }
    let ctx = *rule.ctx();
    let ratio = |f: &SphericalPolynomial| -> Result<f64> {
        let on_s = lq_norm(f, region, rule, q)?;
        let full = lq_norm(f, &Region::Full, rule, q)?;
        Ok(if on_s > 0.0 { full / on_s } else { f64::INFINITY })
    };
    let mut best = match sharp_constant(region, n, rule, None) {
        Ok(rep) => ratio(&rep.extremizer)?,
        Err(Error::NearSingularGram { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    for t in 0..trials {
        let f = random_poly(n, seed.wrapping_add(t as u64), &ctx);
        best = best.max(ratio(&f)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Cap;
    use core::f64::consts::PI;

    #[test]
    fn full_sphere_gram_is_identity() {
        for d in [2, 3] {
            let ctx = SphereContext::new(d, 1.3).unwrap();
            let rule = crate::quadrature::sphere_rule(&ctx, 12);
            let g = gram(&Region::Full, 6, &rule).unwrap();
            let id = Matrix::identity(g.matrix.rows());
            assert!(g.matrix.sub(&id).max_abs() < 1e-12);
        }
    }

    #[test]
    fn half_circle_gram_closed_form() {
        // S = [0, π] on the unit circle; basis 1/√(2π), cos/√π, sin/√π.
        let ctx = SphereContext::new(2, 1.0).unwrap();
        let s = Region::arc(&ctx, 0.0, PI).unwrap();
        let rule = QuadratureRule::fitted(&ctx, 2, &s);
        let g = gram(&s, 1, &rule).unwrap().matrix;
        let c = 2.0 / (PI * libm::sqrt(2.0));
        let expected = [[0.5, 0.0, c], [0.0, 0.5, 0.0], [c, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[(i, j)] - expected[i][j]).abs() < 1e-12, "({i},{j})");
            }
        }
        let rep = sharp_constant(&s, 1, &rule, None).unwrap();
        assert!((rep.lambda_min - (0.5 - c)).abs() < 1e-12);
    }

    #[test]
    fn degree_zero_constant() {
        let ctx = SphereContext::new(3, 2.0).unwrap();
        let s = Region::cap(Cap::new(&ctx, ctx.pole(), 0.7).unwrap());
        let rule = QuadratureRule::fitted(&ctx, 0, &s);
        let rep = sharp_constant(&s, 0, &rule, None).unwrap();
        let frac = s_fraction(&s, &rule);
        assert!((rep.c_star - 1.0 / libm::sqrt(frac)).abs() < 1e-10);
        let e0 = spectral_inequality_check(&s, 0.0, &ctx, &rule, None).unwrap();
        assert_eq!(e0.c_star, rep.c_star);
    }

    fn s_fraction(s: &Region, rule: &QuadratureRule) -> f64 {
        region_measure(s, rule) / rule.ctx().surface_measure()
    }

    #[test]
    fn extremizer_reproduces_constant() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let s = Region::complement(Region::cap(Cap::new(&ctx, ctx.pole(), 0.3).unwrap()));
        let rule = QuadratureRule::fitted(&ctx, 8, &s);
        let rep = sharp_constant(&s, 4, &rule, None).unwrap();
        let on_s = lq_norm(&rep.extremizer, &s, &rule, 2.0).unwrap();
        assert!((rep.extremizer.l2_norm() / on_s - rep.c_star).abs() < 1e-8 * rep.c_star);
    }

    #[test]
    fn empty_region_is_near_singular() {
        let ctx = SphereContext::new(2, 1.0).unwrap();
        let rule = crate::quadrature::sphere_rule(&ctx, 4);
        assert!(matches!(
            sharp_constant(&Region::Empty, 1, &rule, None),
            Err(Error::NearSingularGram { degree: 1, .. })
        ));
    }

    #[test]
    fn lq_bound_degree_zero() {
        let ctx = SphereContext::new(2, 1.0).unwrap();
        let s = Region::arc(&ctx, 0.0, 1.0).unwrap();
        let rule = QuadratureRule::fitted(&ctx, 0, &s);
        let frac = 1.0 / (2.0 * PI);
        for q in [1.0, 2.0, 3.5] {
            let b = lq_constant_lower_bound(&s, 0, q, 3, 1, &rule).unwrap();
            assert!((b - libm::pow(1.0 / frac, 1.0 / q)).abs() < 1e-10, "q={q}");
        }
    }
}
