//! Heat equation on `S^{d-1}_R` in the eigenbasis: semigroup, weighted
//! observability Gramians, HUM null controls supported in a region and a
//! staged Lebeau–Robbiano scheme.
//!
//! Mode `j` of degree `ℓ` decays like `e^{−tμ_j}`, `μ_j = ℓ(ℓ+d−2)/R²`.
//! Everything is truncated at a spectral cutoff `L` (all degrees `ℓ ≤ L`).

mod axisym;

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::concentration::gram;
use crate::error::{Error, Result};
use crate::geometry::{Cap, Region, SphereContext};
use crate::harmonics::{basis_dim, degrees, laplace_eigenvalue};
use crate::linalg::{cholesky, cholesky_solve, dot, eig_sym, norm2, solve_lower, solve_lower_transpose, Matrix};
use crate::quadrature::QuadratureRule;

pub use axisym::{polar_cap_observability, PolarObservability};

/// Default number of integrator steps per control segment.
pub const DEFAULT_STEPS: usize = 2048;

/// Coefficients of a function truncated at cutoff `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeVector {
    ctx: SphereContext,
    cutoff: usize,
    coeffs: Vec<f64>,
}

impl ModeVector {
    pub fn new(ctx: SphereContext, cutoff: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis_dim(&ctx, cutoff) {
            return Err(Error::InvalidArgument(alloc::format!(
                "cutoff {cutoff} needs {} coefficients, got {}",
                basis_dim(&ctx, cutoff),
                coeffs.len()
            )));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { ctx, cutoff, coeffs })
    }

    pub fn zeros(ctx: SphereContext, cutoff: usize) -> Self {
        Self { ctx, cutoff, coeffs: vec![0.0; basis_dim(&ctx, cutoff)] }
    }

    /// Seeded standard-normal coefficients scaled to unit norm.
    pub fn random(ctx: SphereContext, cutoff: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs: Vec<f64> = (0..basis_dim(&ctx, cutoff)).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = norm2(&coeffs);
        coeffs.iter_mut().for_each(|c| *c /= n);
        Self { ctx, cutoff, coeffs }
    }

    pub fn ctx(&self) -> &SphereContext {
        &self.ctx
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `L²` norm (Parseval).
    pub fn norm(&self) -> f64 {
        norm2(&self.coeffs)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        mode_eigenvalues(&self.ctx, self.cutoff)
    }
}

/// `μ_j` for every basis function with `ℓ ≤ L`, in coefficient order.
pub fn mode_eigenvalues(ctx: &SphereContext, cutoff: usize) -> Vec<f64> {
    degrees(ctx, cutoff).into_iter().map(|l| laplace_eigenvalue(l, ctx)).collect()
}

/// `e^{−tA} u`.
pub fn heat_evolve(u: &ModeVector, t: f64) -> Result<ModeVector> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let coeffs = u.coeffs.iter().zip(u.eigenvalues()).map(|(c, mu)| c * libm::exp(-t * mu)).collect();
    Ok(ModeVector { ctx: u.ctx, cutoff: u.cutoff, coeffs })
}

/// `(1 − e^{−m h})/m`, with the limit `h` at `m = 0`.
pub fn phi1(m: f64, h: f64) -> f64 {
    if m == 0.0 {
        h
    } else {
        -libm::expm1(-m * h) / m
    }
}

/// `W_ij = G_ij·φ₁(μ_i + μ_j, T)` for a Gram matrix whose rows use the
/// eigenvalues `mu_rows` and columns `mu_cols`.
pub fn weight_gram(g: &Matrix, mu_rows: &[f64], mu_cols: &[f64], t: f64) -> Matrix {
    Matrix::from_fn(mu_rows.len(), mu_cols.len(), |i, j| g[(i, j)] * phi1(mu_rows[i] + mu_cols[j], t))
}

/// `W = ∫₀^T e^{−tA} G_S e^{−tA} dt` at cutoff `L`.
pub fn weighted_gramian(region: &Region, cutoff: usize, t: f64, rule: &QuadratureRule) -> Result<Matrix> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("T = {t} must be positive")));
    }
    let g = gram(region, cutoff, rule)?.matrix;
    let mu = mode_eigenvalues(rule.ctx(), cutoff);
    Ok(weight_gram(&g, &mu, &mu, t))
}

/// Cholesky factor of `W`, retrying once with the diagonal shift
/// `1e-14·trace(W)/n`. Returns the factor and the shift used.
fn factor_gramian(w: &Matrix, cutoff: usize) -> Result<(Matrix, f64)> {
    match cholesky(w) {
        Ok(l) => return Ok((l, 0.0)),
        Err(Error::SingularGramian { .. }) => {}
        Err(e) => return Err(e),
    }
    let n = w.rows();
    let shift = 1e-14 * w.trace() / n as f64;
    let shifted = Matrix::from_fn(n, n, |i, j| w[(i, j)] + if i == j { shift } else { 0.0 });
    match cholesky(&shifted) {
        Ok(l) => Ok((l, shift)),
        Err(Error::SingularGramian { .. }) => {
            let lambda_min = eig_sym(w).map(|e| e.values[0]).unwrap_or(f64::NAN);
            Err(Error::SingularGramian { cutoff, lambda_min })
        }
        Err(e) => Err(e),
    }
}

/// Constants of the analytic observability bound, chosen by the caller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub c2: f64,
    pub gamma: f64,
    pub scale_a: f64,
    /// Constant in `d₀ = (c/γ)^{1/2}`, `d₁ = R·log(c/γ)`.
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservabilityReport {
    pub cutoff: usize,
    pub time: f64,
    /// `max_g (gᵀD_T g)/(gᵀW g)`, `D_T = diag(e^{−2Tμ})`.
    pub c_obs: f64,
    /// Maximiser, normalised to `gᵀWg = 1`.
    pub extremal_g: ModeVector,
    /// Diagonal shift added to `W` before factorisation (0 if none).
    pub shift: f64,
    pub bound_inputs: BoundInputs,
    /// `(c₂/T)·exp(c₂(R²|log γ|²/T + |log γ|))`.
    pub predicted_bound: f64,
    /// `c₂` at which the bound formula equals `c_obs`.
    pub implied_c2: f64,
    pub d0: f64,
    pub d1: f64,
}

impl ObservabilityReport {
    /// Extremal initial datum `u₀* = e^{−TA} g`, which maximises the HUM
    /// cost ratio `cost²/|u₀|²`.
    pub fn extremal_datum(&self) -> ModeVector {
        let mu = self.extremal_g.eigenvalues();
        let coeffs = self.extremal_g.coeffs.iter().zip(&mu).map(|(g, m)| g * libm::exp(-self.time * m)).collect();
        ModeVector { ctx: self.extremal_g.ctx, cutoff: self.cutoff, coeffs }
    }
}

/// `(c/T)·exp(c(R²|log γ|²/T + |log γ|))`.
pub fn observability_bound(c2: f64, gamma: f64, radius: f64, t: f64) -> f64 {
    let lg = libm::log(gamma).abs();
    c2 / t * libm::exp(c2 * (radius * radius * lg * lg / t + lg))
}

/// Solves `observability_bound(c) = target` for `c > 0` by bisection in
/// `log c`.
pub fn implied_c2(target: f64, gamma: f64, radius: f64, t: f64) -> f64 {
    let lg = libm::log(gamma).abs();
    let b = radius * radius * lg * lg / t + lg;
    let log_target = libm::log(target);
    // log of the bound: log c − log T + c·b, increasing in c.
    let f = |log_c: f64| log_c - libm::log(t) + libm::exp(log_c) * b - log_target;
    let (mut lo, mut hi) = (-800.0_f64, 1.0_f64);
    while f(hi) < 0.0 && hi < 700.0 {
        hi += 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    libm::exp(0.5 * (lo + hi))
}

/// `C_obs,L`, the largest generalized eigenvalue of `(D_T, W)`, from the
/// Cholesky reduction `L⁻¹ D_T L⁻ᵀ`.
pub fn observability_constant(
    region: &Region,
    cutoff: usize,
    t: f64,
    rule: &QuadratureRule,
    bound: Option<BoundInputs>,
) -> Result<ObservabilityReport> {
    let ctx = *rule.ctx();
    let w = weighted_gramian(region, cutoff, t, rule)?;
    let mu = mode_eigenvalues(&ctx, cutoff);
    let (c_obs, g, shift) = generalized_max(&w, &mu, t, cutoff)?;
    let inputs = bound.unwrap_or_else(|| BoundInputs {
        c2: 1.0,
        gamma: crate::geometry::region_measure(region, rule) / ctx.surface_measure(),
        scale_a: ctx.radius(),
        c: 1.0,
    });
    let r = ctx.radius();
    Ok(ObservabilityReport {
        cutoff,
        time: t,
        c_obs,
        extremal_g: ModeVector { ctx, cutoff, coeffs: g },
        shift,
        bound_inputs: inputs,
        predicted_bound: observability_bound(inputs.c2, inputs.gamma, r, t),
        implied_c2: implied_c2(c_obs, inputs.gamma, r, t),
        d0: libm::sqrt(inputs.c / inputs.gamma),
        d1: r * libm::log(inputs.c / inputs.gamma),
    })
}

fn generalized_max(w: &Matrix, mu: &[f64], t: f64, cutoff: usize) -> Result<(f64, Vec<f64>, f64)> {
    let n = w.rows();
    let (l, shift) = factor_gramian(w, cutoff)?;
    let sqrt_d: Vec<f64> = mu.iter().map(|m| libm::exp(-t * m)).collect();
    // B = L⁻¹ D^{1/2}, M = B Bᵀ.
    let mut b = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = sqrt_d[j];
        let col = solve_lower(&l, &e);
        for i in 0..n {
            b[(i, j)] = col[i];
        }
    }
    let mut m = b.mul(&b.transpose());
    m.symmetrize();
    let eig = eig_sym(&m)?;
    let c_obs = eig.values[n - 1];
    let g = solve_lower_transpose(&l, &eig.vector(n - 1));
    let scale = libm::sqrt(w.quadratic_form(&g));
    Ok((c_obs, g.iter().map(|x| x / scale).collect(), shift))
}

/// One time interval on which the control is active:
/// forcing `f(s) = G[:, low]·e^{−(end−s)A_low} η` for `s ∈ [start, end]`,
/// where `low` are the modes up to `cutoff`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSegment {
    pub start: f64,
    pub end: f64,
    pub cutoff: usize,
    pub eta: Vec<f64>,
    /// `ηᵀ W η` for this segment.
    pub cost_sq: f64,
}

/// Null control in closed form together with its simulated effect.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSolution {
    /// Multiplier of the first (for HUM: the only) segment.
    pub eta: ModeVector,
    pub segments: Vec<ControlSegment>,
    /// `L²` norm of the control over `[0, T] × S`.
    pub cost: f64,
    /// `|u(T)|/|u₀|` from the stepped simulation (0 when `u₀ = 0`).
    pub terminal_residual: f64,
    /// Relative residual after each stage (one entry for HUM).
    pub stage_residuals: Vec<f64>,
    pub tolerance: f64,
    pub within_tolerance: bool,
    pub time: f64,
    gram: Matrix,
    mu: Vec<f64>,
}

impl ControlSolution {
    /// Mode-space forcing at time `s` (zero outside every segment).
    pub fn force_at(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.mu.len()];
        for seg in &self.segments {
            if s < seg.start || s > seg.end {
                continue;
            }
            let k = seg.eta.len();
            let weighted: Vec<f64> = (0..k).map(|j| seg.eta[j] * libm::exp(-(seg.end - s) * self.mu[j])).collect();
            for (i, o) in out.iter_mut().enumerate() {
                *o += dot(&self.gram.row(i)[..k], &weighted);
            }
            break;
        }
        out
    }

    /// Modal eigenvalues at the full cutoff.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.mu
    }
}

/// Exact exponential integrator for `u' = −Au + f(s)` over one segment with
/// `steps` equal steps. The forcing integral over a step is evaluated in
/// closed form, so the only error is rounding.
fn simulate_segment(u: &mut [f64], seg: &ControlSegment, g: &Matrix, mu: &[f64], steps: usize) {
    let n = u.len();
    let k = seg.eta.len();
    let h = (seg.end - seg.start) / steps as f64;
    let decay: Vec<f64> = mu.iter().map(|m| libm::exp(-h * m)).collect();
    let kernel = Matrix::from_fn(n, k, |i, j| g[(i, j)] * phi1(mu[i] + mu[j], h));
    let mut weighted = vec![0.0; k];
    for step in 0..steps {
        let s_next = if step + 1 == steps { seg.end } else { seg.start + (step + 1) as f64 * h };
        for j in 0..k {
            weighted[j] = seg.eta[j] * libm::exp(-(seg.end - s_next) * mu[j]);
        }
        for i in 0..n {
            u[i] = decay[i] * u[i] + dot(kernel.row(i), &weighted);
        }
    }
}

fn evolve_in_place(u: &mut [f64], mu: &[f64], t: f64) {
    for (c, m) in u.iter_mut().zip(mu) {
        *c *= libm::exp(-t * m);
    }
}

/// Solves `W η = b` by Cholesky with two steps of iterative refinement.
fn refined_solve(w: &Matrix, l: &Matrix, b: &[f64]) -> Vec<f64> {
    let mut x = cholesky_solve(l, b);
    for _ in 0..2 {
        let wx = w.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&wx).map(|(b, y)| b - y).collect();
        let dx = cholesky_solve(l, &r);
        x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
    }
    x
}

/// Minimal-norm control steering `u₀` to zero at time `T`:
/// `η = −W⁻¹ e^{−TA} u₀`, force `G e^{−(T−s)A} η`, cost² `= ηᵀWη`.
pub fn hum_control(
    u0: &ModeVector,
    region: &Region,
    t: f64,
    rule: &QuadratureRule,
    tol: f64,
) -> Result<ControlSolution> {
    hum_control_steps(u0, region, t, rule, tol, DEFAULT_STEPS)
}

/// [`hum_control`] with an explicit number of integrator steps.
pub fn hum_control_steps(
    u0: &ModeVector,
    region: &Region,
    t: f64,
    rule: &QuadratureRule,
    tol: f64,
    steps: usize,
) -> Result<ControlSolution> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("T = {t} must be positive")));
    }
    let ctx = *rule.ctx();
    let cutoff = u0.cutoff;
    let g = gram(region, cutoff, rule)?.matrix;
    let mu = mode_eigenvalues(&ctx, cutoff);
    let w = weight_gram(&g, &mu, &mu, t);
    let u0n = u0.norm();
    let (eta, cost_sq) = if u0n == 0.0 {
        (vec![0.0; mu.len()], 0.0)
    } else {
        let (l, _) = factor_gramian(&w, cutoff)?;
        let b: Vec<f64> = u0.coeffs.iter().zip(&mu).map(|(u, m)| -u * libm::exp(-t * m)).collect();
        let eta = refined_solve(&w, &l, &b);
        let c = w.quadratic_form(&eta);
        (eta, c)
    };
    let seg = ControlSegment { start: 0.0, end: t, cutoff, eta: eta.clone(), cost_sq };
    let mut u = u0.coeffs.clone();
    simulate_segment(&mut u, &seg, &g, &mu, steps.max(1));
    let residual = if u0n == 0.0 { norm2(&u) } else { norm2(&u) / u0n };
    Ok(ControlSolution {
        eta: ModeVector { ctx, cutoff, coeffs: eta },
        segments: vec![seg],
        cost: libm::sqrt(cost_sq.max(0.0)),
        terminal_residual: residual,
        stage_residuals: vec![residual],
        tolerance: tol,
        within_tolerance: residual <= tol,
        time: t,
        gram: g,
        mu,
    })
}

/// Parameters of the staged scheme: stage `j` lasts `T·2^{−(j+1)}` and
/// controls the modes with `ℓ ≤ min(2^j·L₀, L_max)` during its first half.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrSchedule {
    pub l0: usize,
    pub steps: usize,
}

impl Default for LrSchedule {
    fn default() -> Self {
        Self { l0: 1, steps: DEFAULT_STEPS }
    }
}

impl LrSchedule {
    /// `(start, length, cutoff)` of each stage; the stages stop at the first
    /// one whose cutoff reaches `l_max`, leaving a final free interval.
    pub fn stages(&self, l_max: usize, t: f64) -> Vec<(f64, f64, usize)> {
        let mut out = Vec::new();
        let mut start = 0.0;
        let mut j = 0u32;
        loop {
            let len = t * libm::ldexp(1.0, -(j as i32 + 1));
            let cutoff = self.l0.max(1).saturating_mul(1usize << j.min(60)).min(l_max);
            out.push((start, len, cutoff));
            start += len;
            if cutoff >= l_max {
                return out;
            }
            j += 1;
        }
    }
}

/// Staged control: on each stage, HUM nulls the low modes during the first
/// half and the state evolves freely during the second half. Ends with a
/// free interval of length `T·2^{−(J+1)}`.
pub fn lebeau_robbiano_control(
    u0: &ModeVector,
    region: &Region,
    t: f64,
    rule: &QuadratureRule,
    tol: f64,
    schedule: LrSchedule,
) -> Result<ControlSolution> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("T = {t} must be positive")));
    }
    let ctx = *rule.ctx();
    let l_max = u0.cutoff;
    let g = gram(region, l_max, rule)?.matrix;
    let mu = mode_eigenvalues(&ctx, l_max);
    let u0n = u0.norm();
    let mut u = u0.coeffs.clone();
    let mut segments = Vec::new();
    let mut stage_residuals = Vec::new();
    let mut end_time = 0.0;
    for (start, len, cutoff) in schedule.stages(l_max, t) {
        let half = 0.5 * len;
        let k = basis_dim(&ctx, cutoff);
        let g_low = Matrix::from_fn(k, k, |i, j| g[(i, j)]);
        let w = weight_gram(&g_low, &mu[..k], &mu[..k], half);
        let b: Vec<f64> = (0..k).map(|j| -u[j] * libm::exp(-half * mu[j])).collect();
        let eta = if b.iter().all(|x| *x == 0.0) {
            vec![0.0; k]
        } else {
            let (l, _) = factor_gramian(&w, cutoff)?;
            refined_solve(&w, &l, &b)
        };
        let seg = ControlSegment { start, end: start + half, cutoff, cost_sq: w.quadratic_form(&eta), eta };
        simulate_segment(&mut u, &seg, &g, &mu, schedule.steps.max(1));
        evolve_in_place(&mut u, &mu, len - half);
        stage_residuals.push(if u0n == 0.0 { norm2(&u) } else { norm2(&u) / u0n });
        segments.push(seg);
        end_time = start + len;
    }
    evolve_in_place(&mut u, &mu, (t - end_time).max(0.0));
    let residual = if u0n == 0.0 { norm2(&u) } else { norm2(&u) / u0n };
    let cost_sq: f64 = segments.iter().map(|s| s.cost_sq).sum();
    let mut first = segments[0].eta.clone();
    first.resize(mu.len(), 0.0);
    Ok(ControlSolution {
        eta: ModeVector { ctx, cutoff: l_max, coeffs: first },
        segments,
        cost: libm::sqrt(cost_sq.max(0.0)),
        terminal_residual: residual,
        stage_residuals,
        tolerance: tol,
        within_tolerance: residual <= tol,
        time: t,
        gram: g,
        mu,
    })
}

/// Cap centred at the pole whose measure is the fraction `γ` of the sphere.
pub fn cap_for_fraction(ctx: &SphereContext, gamma: f64) -> Result<Cap> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("γ = {gamma} must lie in (0, 1]")));
    }
    let r = ctx.radius();
    let a = match ctx.dim() {
        2 => gamma * r,
        _ => r * libm::acos(1.0 - 2.0 * gamma) / core::f64::consts::PI,
    };
    Cap::new(ctx, ctx.pole(), a.min(r))
}

/// One row of a cost sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub scale_a: f64,
    pub cutoff: usize,
    pub time: f64,
    pub c_obs: f64,
    pub implied_c2: f64,
    /// `cost²/|u₀|²` of the HUM control for the extremal datum.
    pub cost_sq_max: f64,
    /// Terminal residual of that control.
    pub residual: f64,
    /// Computed in double-double arithmetic by the polar-block path.
    pub extended_precision: bool,
}

/// Observability constant and worst-case HUM cost for the cap of fraction
/// `γ` at one `(L, T)`, in double precision through the full Gramian.
pub fn sweep_row(ctx: &SphereContext, gamma: f64, cutoff: usize, t: f64, rule: &QuadratureRule) -> Result<SweepRow> {
    let cap = cap_for_fraction(ctx, gamma)?;
    let region = Region::cap(cap);
    let rep = observability_constant(
        &region,
        cutoff,
        t,
        rule,
        Some(BoundInputs { c2: 1.0, gamma, scale_a: cap.radius_a(), c: 1.0 }),
    )?;
    let u0 = rep.extremal_datum();
    let sol = hum_control(&u0, &region, t, rule, f64::INFINITY)?;
    let n2 = u0.norm() * u0.norm();
    Ok(SweepRow {
        gamma,
        scale_a: cap.radius_a(),
        cutoff,
        time: t,
        c_obs: rep.c_obs,
        implied_c2: rep.implied_c2,
        cost_sq_max: sol.cost * sol.cost / n2,
        residual: sol.terminal_residual,
        extended_precision: false,
    })
}

/// Same row on S² through the per-order blocks of the polar cap in
/// double-double arithmetic. Needed once `C_obs` passes about `1e12`.
pub fn sweep_row_polar(ctx: &SphereContext, gamma: f64, cutoff: usize, t: f64) -> Result<SweepRow> {
    let cap = cap_for_fraction(ctx, gamma)?;
    let p = polar_cap_observability(ctx, &cap, cutoff, t)?;
    Ok(SweepRow {
        gamma,
        scale_a: cap.radius_a(),
        cutoff,
        time: t,
        c_obs: p.c_obs,
        implied_c2: implied_c2(p.c_obs, gamma, ctx.radius(), t),
        cost_sq_max: p.cost_sq_ratio,
        residual: p.residual,
        extended_precision: true,
    })
}

/// Fitted quadrature for the sweep cap of fraction `γ`.
pub fn sweep_rule(ctx: &SphereContext, gamma: f64, cutoff: usize) -> Result<QuadratureRule> {
    let cap = cap_for_fraction(ctx, gamma)?;
    Ok(QuadratureRule::fitted(ctx, 2 * cutoff, &Region::cap(cap)))
}

/// Rows for every `(γ, T)`, γ-major. On S² the polar-block path is used,
/// elsewhere the double-precision Gramian.
pub fn cost_sweep(ctx: &SphereContext, gammas: &[f64], cutoff: usize, times: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(gammas.len() * times.len());
    for &gamma in gammas {
        if gamma > libm::exp(-1.0) {
            return Err(Error::InvalidArgument(alloc::format!("γ = {gamma} exceeds 1/e")));
        }
        if let Some(t) = times.iter().find(|t| !(**t > 0.0)) {
            return Err(Error::InvalidArgument(alloc::format!("T = {t} must be positive")));
        }
        if ctx.dim() == 3 {
            for &t in times {
                rows.push(sweep_row_polar(ctx, gamma, cutoff, t)?);
            }
        } else {
            let rule = sweep_rule(ctx, gamma, cutoff)?;
            for &t in times {
                rows.push(sweep_row(ctx, gamma, cutoff, t, &rule)?);
            }
        }
    }
    Ok(rows)
}
