//! Exponential sums on `[0, 1]`, the Nazarov–Turán bound and the local
//! inequalities on spherical caps that are derived from it.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{region_measure, select_direction, Cap, DirectionChoice, Region, SphereContext};
use crate::harmonics::{lq_norm, to_exponential_sum, SphericalPolynomial};
use crate::quadrature::QuadratureRule;

/// Constant of the Nazarov–Turán inequality.
pub const TURAN_CONSTANT: f64 = 316.0;

/// Frequencies closer than this are merged.
const FREQ_MERGE: f64 = 1e-12;

/// `r(x) = Σ β_k e^{iλ_k x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialSum {
    betas: Vec<Complex64>,
    lambdas: Vec<f64>,
}

impl ExponentialSum {
    /// Builds the sum, merging frequencies that agree to within `1e-12`.
    pub fn new(betas: Vec<Complex64>, lambdas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() || betas.len() != lambdas.len() {
            return Err(Error::InvalidArgument("need n ≥ 1 matching coefficients and frequencies".into()));
        }
        if lambdas.iter().any(|l| !l.is_finite()) || betas.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient or frequency".into()));
        }
        let mut order: Vec<usize> = (0..lambdas.len()).collect();
        order.sort_by(|&i, &j| lambdas[i].total_cmp(&lambdas[j]));
        let mut b_out: Vec<Complex64> = Vec::with_capacity(order.len());
        let mut l_out: Vec<f64> = Vec::with_capacity(order.len());
        for i in order {
            match l_out.last() {
                Some(&l) if lambdas[i] - l < FREQ_MERGE => {
                    *b_out.last_mut().unwrap() += betas[i];
                }
                _ => {
                    l_out.push(lambdas[i]);
                    b_out.push(betas[i]);
                }
            }
        }
        Ok(Self { betas: b_out, lambdas: l_out })
    }

    /// Number of terms `n`.
    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn betas(&self) -> &[Complex64] {
        &self.betas
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn max_frequency(&self) -> f64 {
        self.lambdas.iter().fold(0.0, |a, l| a.max(l.abs()))
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.betas.iter().zip(&self.lambdas).map(|(b, l)| b * Complex64::from_polar(1.0, l * x)).sum()
    }

    pub fn abs_at(&self, x: f64) -> f64 {
        self.eval(x).norm()
    }
}

/// Finite union of disjoint closed intervals in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    /// Sorts and merges overlapping intervals.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &intervals {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
                return Err(Error::InvalidArgument(alloc::format!(
                    "interval [{a}, {b}] is not an ordered subinterval of [0, 1]"
                )));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { intervals: merged })
    }

    /// `[0, 1]`.
    pub fn unit() -> Self {
        Self { intervals: vec![(0.0, 1.0)] }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn total_measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// `{k/n ≤ t ≤ (k+1)/n : keep[k]}`, merged.
    pub fn from_cells(keep: &[bool]) -> Self {
        let n = keep.len() as f64;
        let mut intervals = Vec::new();
        let mut start = None;
        for (k, &inside) in keep.iter().chain(core::iter::once(&false)).enumerate() {
            match (inside, start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => {
                    intervals.push((s as f64 / n, (k as f64 / n).min(1.0)));
                    start = None;
                }
                _ => {}
            }
        }
        Self { intervals }
    }
}

/// Lower estimate of `sup_A |r|`: dense sampling (endpoints included) and
/// golden-section polishing around the best local maxima.
///
/// The sample spacing is at most `0.05/max|λ|`, and at least
/// `max(n_samples, 256·n)` points are spread over `A` in proportion to
/// length.
pub fn sup_norm(r: &ExponentialSum, set: &IntervalSet, n_samples: usize) -> f64 {
    let total = set.total_measure();
    let by_band = libm::ceil(20.0 * r.max_frequency() * total) as usize;
    let n_total = n_samples.max(256 * r.len()).max(by_band).max(16);
    let mut best = 0.0_f64;
    for &(a, b) in &set.intervals {
        let len = b - a;
        if len <= 0.0 {
            best = best.max(r.abs_at(a));
            continue;
        }
        let m = ((n_total as f64 * len / total.max(f64::MIN_POSITIVE)) as usize).max(2);
        let h = len / m as f64;
        let xs: Vec<f64> = (0..=m).map(|k| if k == m { b } else { a + k as f64 * h }).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| r.abs_at(x)).collect();
        let mut peaks: Vec<usize> =
            (0..=m).filter(|&k| (k == 0 || vals[k] >= vals[k - 1]) && (k == m || vals[k] >= vals[k + 1])).collect();
        peaks.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
        for &k in peaks.iter().take(4) {
            best = best.max(vals[k]);
            let lo = if k == 0 { a } else { xs[k - 1] };
            let hi = if k == m { b } else { xs[k + 1] };
            best = best.max(golden_max(|x| r.abs_at(x), lo, hi));
        }
    }
    best
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = f1.max(f2);
    for _ in 0..200 {
        if hi - lo < 1e-13 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
        let improved = f1.max(f2);
        if improved > best {
            best = improved;
        }
    }
    best
}

/// Both sides of `‖r‖_{L∞[0,1]} ≤ (316/|A|)^{n−1} ‖r‖_{L∞(A)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NazarovReport {
    pub lhs: f64,
    pub sup_on_set: f64,
    pub rhs_bound: f64,
    pub n_terms: usize,
    pub set_measure: f64,
    pub holds: bool,
    pub sampling_n: usize,
}

pub fn check_nazarov(r: &ExponentialSum, set: &IntervalSet, n_samples: usize) -> Result<NazarovReport> {
    let measure = set.total_measure();
    if !(measure > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    let lhs = sup_norm(r, &IntervalSet::unit(), n_samples);
    let sup_on_set = sup_norm(r, set, n_samples);
    let n = r.len();
    let rhs_bound = libm::pow(TURAN_CONSTANT / measure, (n - 1) as f64) * sup_on_set;
    Ok(NazarovReport {
        lhs,
        sup_on_set,
        rhs_bound,
        n_terms: n,
        set_measure: measure,
        holds: lhs <= rhs_bound * (1.0 + 1e-9),
        sampling_n: n_samples.max(256 * n),
    })
}

/// Seeded random instance: `n ∈ 1..=7` terms with complex normal
/// coefficients, distinct frequencies in `[−40, 40]`, and one to three
/// intervals of total length at least `0.05`.
pub fn random_instance(seed: u64) -> (ExponentialSum, IntervalSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=7);
    let mut lambdas: Vec<f64> = Vec::with_capacity(n);
    while lambdas.len() < n {
        let l = rng.random_range(-40.0..40.0);
        if lambdas.iter().all(|&m: &f64| (m - l).abs() > 1e-3) {
            lambdas.push(l);
        }
    }
    let betas = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let sum = ExponentialSum::new(betas, lambdas).expect("finite distinct frequencies");
    loop {
        let k = rng.random_range(1..=3);
        let mut cuts: Vec<f64> = (0..2 * k).map(|_| rng.random_range(0.0..1.0)).collect();
        cuts.sort_by(|a, b| a.total_cmp(b));
        let set = IntervalSet::new(cuts.chunks(2).map(|c| (c[0], c[1])).collect()).expect("ordered cuts");
        if set.total_measure() >= 0.05 {
            return (sum, set);
        }
    }
}

/// Resolution parameters for [`verify_local_lemma`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalOptions {
    pub n_dirs: usize,
    /// Midpoint cells along the segment.
    pub n_samples: usize,
    /// Samples for the exponential-sum sup norms.
    pub sup_samples: usize,
}

impl Default for LocalOptions {
    fn default() -> Self {
        Self { n_dirs: 64, n_samples: 2048, sup_samples: 4096 }
    }
}

/// Every quantity in the chain
/// `‖f‖_{L^q(K)} ≤ |K|^{1/q}|f(p)| ≤ |K|^{1/q} sup_{[0,1]}|f∘κ|
///  ≤ |K|^{1/q}(316·arc(I)/arc(I∩M))^{2N} sup_A |f∘κ|`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalReport {
    pub degree: usize,
    pub q: f64,
    pub cap_measure: f64,
    pub norm_on_cap: f64,
    /// `|f(p)|` at the chosen start point.
    pub value_at_p: f64,
    /// `|f(p)|^q ≥ ‖f‖^q_{L^q(K)}/|K|` (equality for `q = ∞`).
    pub point_condition: bool,
    pub direction: DirectionChoice,
    /// `|A| = arc(I∩M)/arc(I)`.
    pub set_measure: f64,
    pub sup_on_segment: f64,
    /// `sup_A |f∘κ|`, the supremum over `M∩I`.
    pub sup_on_set: f64,
    /// Largest `|f|` over quadrature nodes in `M∩K`, for comparison.
    pub sup_on_region_nodes: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs/lhs`.
    pub margin: f64,
    pub holds: bool,
    /// `c₄` implied by the chosen segment and the node measure of `K∩M`.
    pub implied_c4: f64,
}

/// Numerically checks the local inequality on a cap `K` for the set `M`.
pub fn verify_local_lemma(
    ctx: &SphereContext,
    f: &SphericalPolynomial,
    cap: &Cap,
    region: &Region,
    q: f64,
    rule: &QuadratureRule,
    opts: LocalOptions,
) -> Result<LocalReport> {
    if !(q >= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("q = {q} must be ≥ 1")));
    }
    let cap_region = Region::Cap(*cap);
    let mut scratch = vec![0.0; f.coeffs().len()];
    let mut k_measure = 0.0;
    let mut km_measure = 0.0;
    let mut p = None;
    let mut best = -1.0;
    let mut sup_nodes: f64 = 0.0;
    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
        if !cap.contains(x) {
            continue;
        }
        k_measure += w;
        let v = f.eval_with(x, &mut scratch).abs();
        if v > best {
            best = v;
            p = Some(*x);
        }
        if region.contains(x) {
            km_measure += w;
            sup_nodes = sup_nodes.max(v);
        }
    }
    let p = p.ok_or_else(|| Error::InvalidArgument("no quadrature node inside the cap".into()))?;
    if !(km_measure > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    let cap_measure = region_measure(&cap_region, rule);
    let norm_on_cap = lq_norm(f, &cap_region, rule, q)?;
    let value_at_p = best;
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let k_pow = libm::pow(cap_measure, inv_q);
    let point_condition = if q.is_infinite() {
        value_at_p >= norm_on_cap
    } else {
        libm::pow(value_at_p, q) * (1.0 + 1e-12) >= libm::pow(norm_on_cap, q) / cap_measure
    };

    let direction = select_direction(ctx, &p, region, cap, opts.n_dirs, opts.n_samples)?;
    let seg = direction.segment;
    let sum = to_exponential_sum(f, &seg)?;
    let n_cells = opts.n_samples.max(64);
    let h = seg.length_param() / n_cells as f64;
    let keep: Vec<bool> = (0..n_cells).map(|k| region.contains(&seg.point_at((k as f64 + 0.5) * h))).collect();
    let set = IntervalSet::from_cells(&keep);
    let set_measure = set.total_measure();
    let sup_on_segment = sup_norm(&sum, &IntervalSet::unit(), opts.sup_samples);
    let sup_on_set = sup_norm(&sum, &set, opts.sup_samples);

    let exponent = 2.0 * f.degree() as f64;
    let lhs = norm_on_cap;
    let rhs = k_pow * libm::pow(TURAN_CONSTANT / set_measure, exponent) * sup_on_set;
    let margin = if lhs > 0.0 { rhs / lhs } else { f64::INFINITY };
    Ok(LocalReport {
        degree: f.degree(),
        q,
        cap_measure,
        norm_on_cap,
        value_at_p,
        point_condition,
        direction,
        set_measure,
        sup_on_segment,
        sup_on_set,
        sup_on_region_nodes: sup_nodes,
        lhs,
        rhs,
        margin,
        holds: lhs <= rhs * (1.0 + 1e-9),
        implied_c4: direction.implied_c4(km_measure / k_measure),
    })
}

/// Empirical cap-wise constant and the thresholded set `M_{f,S}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapwiseReport {
    /// `ρ = ‖f‖_{L^q(K∩S)}/‖f‖_{L^q(K)}`.
    pub rho: f64,
    /// `γ_K = |K∩S|/|K|`.
    pub gamma_k: f64,
    /// `2N + 1/q`.
    pub exponent: f64,
    /// Solves `ρ = (γ_K/(2c))^{2N+1/q}`; `None` when the exponent vanishes.
    pub implied_c: Option<f64>,
    /// Constant used to build `M_{f,S}`.
    pub c_used: f64,
    pub threshold: f64,
    /// `|M_{f,S}|`.
    pub m_measure: f64,
    /// `|(K∩S) \ M_{f,S}| ≥ |K∩S|/2`.
    pub half_mass_holds: bool,
}

/// Default constant for `M_{f,S}`; the dimensional factor is unknown, so
/// this is the Turán constant alone.
pub const DEFAULT_CAPWISE_C: f64 = TURAN_CONSTANT;

pub fn capwise_constant(
    f: &SphericalPolynomial,
    cap: &Cap,
    region: &Region,
    q: f64,
    rule: &QuadratureRule,
    c: f64,
) -> Result<CapwiseReport> {
    if !(q >= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("q = {q} must be ≥ 1")));
    }
    let cap_region = Region::Cap(*cap);
    let both = Region::intersection(vec![cap_region.clone(), region.clone()]);
    let norm_k = lq_norm(f, &cap_region, rule, q)?;
    if !(norm_k > 0.0) {
        return Err(Error::InvalidArgument("‖f‖_{L^q(K)} = 0".into()));
    }
    let norm_ks = match lq_norm(f, &both, rule, q) {
        Ok(v) => v,
        Err(Error::EmptyRegion) => 0.0,
        Err(e) => return Err(e),
    };
    let k = region_measure(&cap_region, rule);
    let ks = region_measure(&both, rule);
    let rho = norm_ks / norm_k;
    let gamma_k = ks / k;
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let exponent = 2.0 * f.degree() as f64 + inv_q;
    let implied_c =
        (exponent > 0.0).then(
            || {
                if rho > 0.0 {
                    gamma_k / (2.0 * libm::pow(rho, 1.0 / exponent))
                } else {
                    f64::INFINITY
                }
            },
        );

    let threshold = libm::pow(k, -inv_q) * libm::pow(gamma_k / (2.0 * c), 2.0 * f.degree() as f64) * norm_k;
    let mut scratch = vec![0.0; f.coeffs().len()];
    let (mut m_measure, mut outside_m) = (0.0, 0.0);
    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
        if !cap.contains(x) {
            continue;
        }
        let small = f.eval_with(x, &mut scratch).abs() < threshold;
        if small {
            m_measure += w;
        } else if region.contains(x) {
            outside_m += w;
        }
    }
    Ok(CapwiseReport {
        rho,
        gamma_k,
        exponent,
        implied_c,
        c_used: c,
        threshold,
        m_measure,
        half_mass_holds: outside_m >= 0.5 * ks * (1.0 - 1e-12),
    })
}
