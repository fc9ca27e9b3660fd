//! Quadrature on `S¹_R` and `S²_R`.
//!
//! [`sphere_rule`] is the exact-degree tensor rule (uniform in azimuth,
//! Gauss–Legendre in the polar cosine). [`QuadratureRule::fitted`] builds a
//! rule whose cells never straddle the boundary of a given region, so that
//! indicator-weighted sums converge spectrally instead of at first order.

mod fitted;

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{tangent_frame, SphereContext, SpherePoint};

/// Nodes and positive weights on `S^{d-1}_R`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    ctx: SphereContext,
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
    exact_degree: usize,
}

impl QuadratureRule {
    /// Reassembles a rule from stored parts, checking node positions and
    /// weight signs.
    pub fn from_parts(
        ctx: SphereContext,
        nodes: Vec<SpherePoint>,
        weights: Vec<f64>,
        exact_degree: usize,
    ) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::InvalidArgument("nodes and weights must be nonempty and of equal length".into()));
        }
        for x in &nodes {
            ctx.point(x.ambient(&ctx))?;
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("non-positive weight {w}")));
        }
        Ok(Self { ctx, nodes, weights, exact_degree })
    }

    pub fn ctx(&self) -> &SphereContext {
        &self.ctx
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Highest polynomial degree integrated exactly (for fitted rules: to
    /// rounding accuracy rather than algebraically).
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Boundary-fitted rule for integrating spherical polynomials of degree
    /// at most `degree` over `region` and its complement.
    pub fn fitted(ctx: &SphereContext, degree: usize, region: &crate::geometry::Region) -> Self {
        fitted::fitted_rule(ctx, degree, region)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Exact-degree rule.
///
/// - `d = 2`: `2·degree + 2` equally spaced nodes with equal weights.
/// - `d = 3`: `⌈(degree + 2)/2⌉` Gauss–Legendre nodes in `cos θ` times
///   `2·degree + 2` equally spaced azimuths.
pub fn sphere_rule(ctx: &SphereContext, degree: usize) -> QuadratureRule {
    let r = ctx.radius();
    let n_az = 2 * degree + 2;
    let (nodes, weights) = match ctx.dim() {
        2 => {
            let w = 2.0 * PI * r / n_az as f64;
            let nodes = (0..n_az).map(|j| ctx.angle_point(2.0 * PI * j as f64 / n_az as f64)).collect();
            (nodes, alloc::vec![w; n_az])
        }
        _ => {
            let n_pol = (degree + 3) / 2;
            let (zs, ws) = gauss_legendre(n_pol);
            let mut nodes = Vec::with_capacity(n_pol * n_az);
            let mut weights = Vec::with_capacity(n_pol * n_az);
            for (z, wz) in zs.iter().zip(&ws) {
                let theta = libm::acos(*z);
                for j in 0..n_az {
                    let phi = 2.0 * PI * j as f64 / n_az as f64;
                    nodes.push(ctx.polar_point(theta, phi));
                    weights.push(r * r * wz * 2.0 * PI / n_az as f64);
                }
            }
            (nodes, weights)
        }
    };
    QuadratureRule { ctx: *ctx, nodes, weights, exact_degree: degree }
}

/// Pairwise (cascade) summation; the result depends only on the order of
/// the input.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `Σ wᵢ f(xᵢ)`; a non-finite value of `f` is an error.
pub fn integrate<F>(rule: &QuadratureRule, mut f: F) -> Result<f64>
where
    F: FnMut(&SpherePoint) -> f64,
{
    let mut terms = Vec::with_capacity(rule.len());
    for (i, (x, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite(i));
        }
        terms.push(w * v);
    }
    Ok(pairwise_sum(&terms))
}

/// Integrates `f` over the sphere in polar coordinates centred at `p`:
///
/// `(R/2) ∫_{S^{d-2}_R} ∫₀^{2π} f(γ_v(t)) |sin t|^{d-2} dt dσ(v)`.
///
/// On the sphere the direction circle `S¹_R` is sampled at `n_dir` equally
/// spaced points and `t` by Gauss–Legendre on `[0, π]` and `[π, 2π]`
/// (`n_t/2` nodes each, so the kink of `|sin t|` sits on a panel edge). On
/// the circle the directions are `±v` with unit mass each and `t` uses
/// `n_t` equally spaced nodes.
pub fn polar_integrate<F>(p: &SpherePoint, ctx: &SphereContext, mut f: F, n_t: usize, n_dir: usize) -> f64
where
    F: FnMut(&SpherePoint) -> f64,
{
    let r = ctx.radius();
    let pc = p.coords();
    let unit = [pc[0] / r, pc[1] / r, pc[2] / r];
    let n_t = n_t.max(32);
    let curve = |v: &[f64; 3], t: f64| {
        let (s, c) = (libm::sin(t), libm::cos(t));
        SpherePoint::from_raw([c * pc[0] + s * v[0], c * pc[1] + s * v[1], c * pc[2] + s * v[2]])
    };
    if ctx.dim() == 2 {
        let v = [-unit[1] * r, unit[0] * r, 0.0];
        let h = 2.0 * PI / n_t as f64;
        let mut terms = Vec::with_capacity(2 * n_t);
        for dir in [v, [-v[0], -v[1], 0.0]] {
            for k in 0..n_t {
                terms.push(h * f(&curve(&dir, k as f64 * h)));
            }
        }
        return 0.5 * r * pairwise_sum(&terms);
    }

    let n_dir = n_dir.max(16);
    let (e1, e2) = tangent_frame(&unit);
    let half = n_t.div_ceil(2);
    let (gx, gw) = gauss_legendre(half);
    let dir_weight = 2.0 * PI * r / n_dir as f64;
    let mut terms = Vec::with_capacity(n_dir * 2 * half);
    for k in 0..n_dir {
        let psi = 2.0 * PI * k as f64 / n_dir as f64;
        let (c, s) = (libm::cos(psi), libm::sin(psi));
        let v = [r * (c * e1[0] + s * e2[0]), r * (c * e1[1] + s * e2[1]), r * (c * e1[2] + s * e2[2])];
        for panel in 0..2 {
            let a = panel as f64 * PI;
            for (x, w) in gx.iter().zip(&gw) {
                let t = a + 0.5 * PI * (x + 1.0);
                let jac = 0.5 * PI * w;
                terms.push(dir_weight * jac * libm::fabs(libm::sin(t)) * f(&curve(&v, t)));
            }
        }
    }
    0.5 * r * pairwise_sum(&terms)
}
