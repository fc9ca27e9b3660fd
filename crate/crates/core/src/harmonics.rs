//! Orthonormal Laplace–Beltrami eigenbasis on `S^{d-1}_R` and spherical
//! polynomials.
//!
//! The basis is real and orthonormal in `L²(S^{d-1}_R)` itself, so each
//! function carries a factor `R^{-(d-1)/2}` relative to the unit-sphere
//! harmonic evaluated at `x/R`.
//!
//! Ordering: degree `ℓ` ascending, then `k = 1..n_ℓ`.
//!
//! - `d = 2`: `k = 1` is `cos(ℓθ)`, `k = 2` is `sin(ℓθ)` (`ℓ ≥ 1`).
//! - `d = 3`: `k` maps to the order `m = k − ℓ − 1 ∈ [−ℓ, ℓ]`; negative
//!   orders use `sin(|m|φ)`, positive orders `cos(mφ)`. No Condon–Shortley
//!   phase, so `ℓ = 1` gives `y, z, x` (times `√(3/4π)/R`).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{LineSegment, Region, SphereContext, SpherePoint};
use crate::quadrature::{pairwise_sum, QuadratureRule};
use crate::turan::ExponentialSum;

/// Degree and position within the degree-`ℓ` eigenspace (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex {
    pub ell: usize,
    pub k: usize,
}

impl BasisIndex {
    pub fn new(ctx: &SphereContext, ell: usize, k: usize) -> Result<Self> {
        if k == 0 || k > multiplicity(ctx, ell) {
            return Err(Error::InvalidArgument(alloc::format!(
                "k = {k} outside 1..={} for degree {ell}",
                multiplicity(ctx, ell)
            )));
        }
        Ok(Self { ell, k })
    }

    /// Position in the flat coefficient vector.
    pub fn flat(&self, ctx: &SphereContext) -> usize {
        match ctx.dim() {
            2 if self.ell == 0 => 0,
            2 => 2 * self.ell - 2 + self.k,
            _ => self.ell * self.ell + self.k - 1,
        }
    }

    /// All indices with `ℓ ≤ n`, in coefficient order.
    pub fn all(ctx: &SphereContext, n: usize) -> Vec<BasisIndex> {
        (0..=n).flat_map(|ell| (1..=multiplicity(ctx, ell)).map(move |k| BasisIndex { ell, k })).collect()
    }
}

/// `n_ℓ`: 1 then 2 on the circle, `2ℓ + 1` on the sphere.
pub fn multiplicity(ctx: &SphereContext, ell: usize) -> usize {
    match (ctx.dim(), ell) {
        (2, 0) => 1,
        (2, _) => 2,
        _ => 2 * ell + 1,
    }
}

/// `Σ_{ℓ ≤ n} n_ℓ`.
pub fn basis_dim(ctx: &SphereContext, n: usize) -> usize {
    match ctx.dim() {
        2 => 2 * n + 1,
        _ => (n + 1) * (n + 1),
    }
}

/// Degree of each basis function in coefficient order.
pub fn degrees(ctx: &SphereContext, n: usize) -> Vec<usize> {
    BasisIndex::all(ctx, n).iter().map(|b| b.ell).collect()
}

/// Eigenvalue of `−Δ` on degree `ℓ`: `ℓ(ℓ + d − 2)/R²`.
pub fn laplace_eigenvalue(ell: usize, ctx: &SphereContext) -> f64 {
    let l = ell as f64;
    let r = ctx.radius();
    l * (l + ctx.dim() as f64 - 2.0) / (r * r)
}

/// Largest degree whose eigenvalue does not exceed `energy`: `⌊R√E⌋`.
///
/// A relative slack of `1e-12` keeps `E = N²/R²` at degree `N` despite
/// rounding in `√E`.
pub fn degree_from_energy(energy: f64, ctx: &SphereContext) -> usize {
    if !(energy > 0.0) {
        return 0;
    }
    let x = ctx.radius() * libm::sqrt(energy);
    libm::floor(x * (1.0 + 1e-12)) as usize
}

/// Evaluates every basis function of degree `≤ n` at `x` into `out`.
pub fn eval_basis_all(ctx: &SphereContext, n: usize, x: &SpherePoint, out: &mut [f64]) {
    let r = ctx.radius();
    let c = x.coords();
    let (ux, uy) = (c[0] / r, c[1] / r);
    match ctx.dim() {
        2 => {
            let scale = 1.0 / libm::sqrt(PI * r);
            out[0] = 1.0 / libm::sqrt(2.0 * PI * r);
            let base = Complex64::new(ux, uy);
            let mut z = Complex64::new(1.0, 0.0);
            for ell in 1..=n {
                z *= base;
                out[2 * ell - 1] = scale * z.re;
                out[2 * ell] = scale * z.im;
            }
        }
        _ => {
            let uz = c[2] / r;
            let scale = 1.0 / r;
            let sqrt2 = core::f64::consts::SQRT_2;
            let base = Complex64::new(ux, uy);
            // q_mm (diagonal seed) and the power (ux + i uy)^m
            let mut q_mm = 1.0 / libm::sqrt(4.0 * PI);
            let mut pow = Complex64::new(1.0, 0.0);
            for m in 0..=n {
                if m > 0 {
                    q_mm *= libm::sqrt((2 * m + 1) as f64 / (2 * m) as f64);
                    pow *= base;
                }
                let mut q_prev2 = 0.0;
                let mut q_prev = q_mm;
                for ell in m..=n {
                    let q = if ell == m {
                        q_mm
                    } else if ell == m + 1 {
                        libm::sqrt((2 * m + 3) as f64) * uz * q_mm
                    } else {
                        let (l, mm) = (ell as f64, m as f64);
                        let a = libm::sqrt((4.0 * l * l - 1.0) / (l * l - mm * mm));
                        let b = libm::sqrt(((l - 1.0) * (l - 1.0) - mm * mm) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
                        a * (uz * q_prev - b * q_prev2)
                    };
                    if ell > m {
                        q_prev2 = q_prev;
                        q_prev = q;
                    }
                    let center = ell * ell + ell;
                    if m == 0 {
                        out[center] = scale * q;
                    } else {
                        out[center + m] = scale * sqrt2 * q * pow.re;
                        out[center - m] = scale * sqrt2 * q * pow.im;
                    }
                }
            }
        }
    }
}

/// Value of a single basis function.
pub fn eval_basis(idx: BasisIndex, x: &SpherePoint, ctx: &SphereContext) -> f64 {
    let mut out = vec![0.0; basis_dim(ctx, idx.ell)];
    eval_basis_all(ctx, idx.ell, x, &mut out);
    out[idx.flat(ctx)]
}

/// Finite combination of basis functions up to degree `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalPolynomial {
    ctx: SphereContext,
    degree: usize,
    coeffs: Vec<f64>,
}

impl SphericalPolynomial {
    pub fn new(ctx: SphereContext, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis_dim(&ctx, degree) {
            return Err(Error::InvalidArgument(alloc::format!(
                "degree {degree} needs {} coefficients, got {}",
                basis_dim(&ctx, degree),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Self { ctx, degree, coeffs })
    }

    pub fn zero(ctx: SphereContext, degree: usize) -> Self {
        Self { ctx, degree, coeffs: vec![0.0; basis_dim(&ctx, degree)] }
    }

    /// The single basis function `idx` as a polynomial of degree `idx.ell`.
    pub fn basis(ctx: SphereContext, idx: BasisIndex) -> Self {
        let mut p = Self::zero(ctx, idx.ell);
        p.coeffs[idx.flat(&ctx)] = 1.0;
        p
    }

    pub fn ctx(&self) -> &SphereContext {
        &self.ctx
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `L²(S^{d-1}_R)` norm, i.e. the Euclidean norm of the coefficients.
    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.coeffs.iter().map(|c| c * c).sum())
    }

    pub fn eval(&self, x: &SpherePoint) -> f64 {
        let mut y = vec![0.0; self.coeffs.len()];
        self.eval_with(x, &mut y)
    }

    /// Evaluation reusing a scratch buffer of length `basis_dim`.
    pub fn eval_with(&self, x: &SpherePoint, scratch: &mut [f64]) -> f64 {
        eval_basis_all(&self.ctx, self.degree, x, scratch);
        self.coeffs.iter().zip(scratch.iter()).map(|(c, y)| c * y).sum()
    }

    /// Values at every node of a rule.
    pub fn eval_nodes(&self, nodes: &[SpherePoint]) -> Vec<f64> {
        let mut y = vec![0.0; self.coeffs.len()];
        nodes.iter().map(|x| self.eval_with(x, &mut y)).collect()
    }
}

/// `L^q(S)` norm via the nodes of `rule`; `q = ∞` takes the maximum of `|f|`
/// over nodes in the region (a lower estimate of the essential supremum).
pub fn lq_norm(f: &SphericalPolynomial, region: &Region, rule: &QuadratureRule, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("q = {q} must be ≥ 1")));
    }
    let mut y = vec![0.0; f.coeffs.len()];
    if q.is_infinite() {
        let mut best: Option<f64> = None;
        for x in rule.nodes() {
            if region.contains(x) {
                let v = f.eval_with(x, &mut y).abs();
                best = Some(best.map_or(v, |b| b.max(v)));
            }
        }
        return best.ok_or(Error::EmptyRegion);
    }
    let mut terms = Vec::with_capacity(rule.len());
    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
        if region.contains(x) {
            let v = f.eval_with(x, &mut y).abs();
            terms.push(w * if q == 2.0 { v * v } else { libm::pow(v, q) });
        }
    }
    let s = pairwise_sum(&terms);
    Ok(if q == 2.0 { libm::sqrt(s) } else { libm::pow(s, 1.0 / q) })
}

/// Seeded standard-normal coefficients, normalized to unit `L²` norm.
pub fn random_poly(n: usize, seed: u64, ctx: &SphereContext) -> SphericalPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = basis_dim(ctx, n);
    let mut coeffs: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = libm::sqrt(coeffs.iter().map(|c| c * c).sum());
    for c in coeffs.iter_mut() {
        *c /= norm;
    }
    SphericalPolynomial { ctx: *ctx, degree: n, coeffs }
}

/// Writes `f ∘ κ`, `κ(t) = γ(l·t)` for `t ∈ [0, 1]`, as an exponential sum
/// with frequencies `m·l = m·arc(I)/R`, `m = −N..N`.
///
/// On the full great circle through the segment, `f` is a trigonometric
/// polynomial of degree `N` in the angle, so its `2N + 1` coefficients come
/// from an equispaced discrete Fourier transform over one period. The sum
/// is then checked against `f ∘ κ` on a dense grid of `[0, 1]`.
pub fn to_exponential_sum(f: &SphericalPolynomial, seg: &LineSegment) -> Result<ExponentialSum> {
    let n = f.degree;
    let m_count = 2 * n + 1;
    let mut y = vec![0.0; f.coeffs.len()];
    let samples: Vec<f64> =
        (0..m_count).map(|j| f.eval_with(&seg.point_at(2.0 * PI * j as f64 / m_count as f64), &mut y)).collect();
    let l = seg.length_param();
    let mut betas = Vec::with_capacity(m_count);
    let mut lambdas = Vec::with_capacity(m_count);
    for m in -(n as i64)..=(n as i64) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, g) in samples.iter().enumerate() {
            let s = 2.0 * PI * j as f64 / m_count as f64;
            acc += Complex64::from_polar(*g, -(m as f64) * s);
        }
        betas.push(acc / m_count as f64);
        lambdas.push(m as f64 * l);
    }
    let sum = ExponentialSum::new(betas, lambdas)?;

    let checks = 8 * m_count + 64;
    let mut residual: f64 = 0.0;
    let mut sup: f64 = samples.iter().fold(0.0, |a, g| a.max(g.abs()));
    for k in 0..=checks {
        let t = k as f64 / checks as f64;
        let exact = f.eval_with(&seg.point_at(l * t), &mut y);
        sup = sup.max(exact.abs());
        residual = residual.max((sum.eval(t) - exact).norm());
    }
    let tolerance = 1e-9 * sup.max(f64::MIN_POSITIVE);
    if residual > tolerance {
        return Err(Error::Interpolation { residual, tolerance });
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::geodesic_segment;
    use crate::quadrature::{integrate, sphere_rule};

    #[test]
    fn constant_mode() {
        for (d, r) in [(2, 1.0), (3, 1.0), (3, 2.0), (2, 3.0)] {
            let ctx = SphereContext::new(d, r).unwrap();
            let x = ctx.project([0.3, 0.1, -0.5]);
            let y = eval_basis(BasisIndex { ell: 0, k: 1 }, &x, &ctx);
            assert!((y - 1.0 / libm::sqrt(ctx.surface_measure())).abs() < 1e-15);
        }
    }

    #[test]
    fn degree_one_coordinates() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let x = ctx.project([0.3, -0.7, 0.2]);
        let c = x.coords();
        let s = libm::sqrt(3.0 / (4.0 * PI));
        let mut out = [0.0; 4];
        eval_basis_all(&ctx, 1, &x, &mut out);
        assert!((out[1] - s * c[1]).abs() < 1e-15);
        assert!((out[2] - s * c[2]).abs() < 1e-15);
        assert!((out[3] - s * c[0]).abs() < 1e-15);
    }

    #[test]
    fn radius_scaling() {
        let unit = SphereContext::new(3, 1.0).unwrap();
        let big = SphereContext::new(3, 2.0).unwrap();
        let u = unit.project([0.2, 0.5, -0.4]);
        let c = u.coords();
        let x = big.project(*c);
        for idx in BasisIndex::all(&unit, 6) {
            let a = eval_basis(idx, &u, &unit);
            let b = eval_basis(idx, &x, &big);
            assert!((b - a / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eigenvalues() {
        let s2 = SphereContext::new(3, 1.0).unwrap();
        assert_eq!(laplace_eigenvalue(0, &s2), 0.0);
        assert_eq!(laplace_eigenvalue(1, &s2), 2.0);
        let c = SphereContext::new(2, 2.0).unwrap();
        assert_eq!(laplace_eigenvalue(3, &c), 9.0 / 4.0);
    }

    #[test]
    fn energy_to_degree() {
        let s1 = SphereContext::new(3, 1.0).unwrap();
        let s2 = SphereContext::new(3, 2.0).unwrap();
        assert_eq!(degree_from_energy(0.0, &s1), 0);
        assert_eq!(degree_from_energy(4.0, &s1), 2);
        assert_eq!(degree_from_energy(2.25, &s2), 3);
        assert_eq!(degree_from_energy(3.99, &s1), 1);
        for n in 0..30 {
            let e = (n * n) as f64 / (2.5 * 2.5);
            let ctx = SphereContext::new(3, 2.5).unwrap();
            assert_eq!(degree_from_energy(e, &ctx), n);
        }
    }

    #[test]
    fn eval_poly_linear_and_basis() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let x = ctx.project([0.1, 0.9, 0.3]);
        let e1 = SphericalPolynomial::basis(ctx, BasisIndex { ell: 0, k: 1 });
        assert!((e1.eval(&x) - 1.0 / libm::sqrt(4.0 * PI)).abs() < 1e-15);
        assert_eq!(SphericalPolynomial::zero(ctx, 4).eval(&x), 0.0);
        // term-by-term oracle summed in reverse order
        let f = random_poly(7, 3, &ctx);
        let oracle: f64 =
            BasisIndex::all(&ctx, 7).iter().rev().map(|b| f.coeffs()[b.flat(&ctx)] * eval_basis(*b, &x, &ctx)).sum();
        assert!((f.eval(&x) - oracle).abs() < 1e-13);
    }

    #[test]
    fn random_poly_properties() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let a = random_poly(5, 42, &ctx);
        assert_eq!(a, random_poly(5, 42, &ctx));
        assert!((a.l2_norm() - 1.0).abs() < 1e-12);
        let b = random_poly(5, 43, &ctx);
        let inner: f64 = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x * y).sum();
        assert!(inner.abs() < 0.5);
    }

    #[test]
    fn lq_norm_examples() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let rule = sphere_rule(&ctx, 16);
        let f = random_poly(8, 1, &ctx);
        assert!((lq_norm(&f, &Region::Full, &rule, 2.0).unwrap() - 1.0).abs() < 1e-10);

        let c = SphericalPolynomial::basis(ctx, BasisIndex { ell: 0, k: 1 });
        let region = Region::band(&ctx, 0.0, PI / 2.0).unwrap();
        let rule = QuadratureRule::fitted(&ctx, 4, &region);
        let m = crate::geometry::region_measure(&region, &rule);
        let norm = lq_norm(&c, &region, &rule, 2.0).unwrap();
        assert!((norm - libm::sqrt(m / (4.0 * PI))).abs() < 1e-14);

        let y = SphericalPolynomial::basis(ctx, BasisIndex { ell: 1, k: 2 });
        let fine = sphere_rule(&ctx, 200);
        let sup = lq_norm(&y, &Region::Full, &fine, f64::INFINITY).unwrap();
        assert!(sup <= libm::sqrt(3.0 / (4.0 * PI)) && sup > libm::sqrt(3.0 / (4.0 * PI)) * (1.0 - 1e-3));
        assert!(lq_norm(&y, &Region::Empty, &fine, f64::INFINITY).is_err());
        assert!(lq_norm(&y, &Region::Full, &fine, 0.5).is_err());
    }

    #[test]
    fn lq_norm_matches_direct_integration() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let rule = sphere_rule(&ctx, 30);
        let f = random_poly(5, 9, &ctx);
        let direct = integrate(&rule, |x| libm::pow(f.eval(x).abs(), 3.0)).unwrap();
        let n3 = lq_norm(&f, &Region::Full, &rule, 3.0).unwrap();
        assert!((n3 - libm::cbrt(direct)).abs() < 1e-12);
    }

    #[test]
    fn exponential_sum_examples() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let p = ctx.point(&[1.0, 0.0, 0.0]).unwrap();
        let v = ctx.point(&[0.0, 1.0, 0.0]).unwrap();
        let seg = geodesic_segment(&ctx, p, v, 0.9).unwrap();

        let c = random_poly(0, 5, &ctx);
        let r = to_exponential_sum(&c, &seg).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.lambdas()[0], 0.0);
        assert!((r.betas()[0].re - c.eval(&p)).abs() < 1e-15);

        // first coordinate: f∘κ(t) = √(3/4π)·cos(0.9 t)
        let x = SphericalPolynomial::basis(ctx, BasisIndex { ell: 1, k: 3 });
        let r = to_exponential_sum(&x, &seg).unwrap();
        let half = libm::sqrt(3.0 / (4.0 * PI)) / 2.0;
        let nonzero: Vec<_> = r.betas().iter().zip(r.lambdas()).filter(|(b, _)| b.norm() > 1e-14).collect();
        assert_eq!(nonzero.len(), 2);
        for (b, l) in nonzero {
            assert!((l.abs() - 0.9).abs() < 1e-15);
            assert!((b.re - half).abs() < 1e-15 && b.im.abs() < 1e-15);
        }
    }

    #[test]
    fn exponential_sum_round_trip() {
        let ctx = SphereContext::new(3, 1.7).unwrap();
        let f = random_poly(5, 77, &ctx);
        let p = ctx.project([0.2, 0.4, 0.9]);
        let (e1, _) = crate::geometry::tangent_frame(&[p.coords()[0] / 1.7, p.coords()[1] / 1.7, p.coords()[2] / 1.7]);
        let v = ctx.project(e1);
        let seg = geodesic_segment(&ctx, p, v, 0.35).unwrap();
        let r = to_exponential_sum(&f, &seg).unwrap();
        assert_eq!(r.len(), 11);
        for k in 0..1000 {
            let t = (k as f64 + 0.37) / 1000.0;
            let exact = f.eval(&seg.point_at(0.35 * t));
            assert!((r.eval(t).re - exact).abs() < 1e-8);
            assert!(r.eval(t).im.abs() < 1e-8);
        }
    }
}
