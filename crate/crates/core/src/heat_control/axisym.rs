//! Observability of caps centred at the pole of `S²_R`, in double-double
//! arithmetic.
//!
//! A polar cap is invariant under rotations about the `z` axis, so its Gram
//! matrix splits into one block per azimuthal order `m` (the `cos mφ` and
//! `sin mφ` blocks coincide) with entries `∫_{cos α}^{1} p̄_ℓ^m p̄_{ℓ'}^m dx`,
//! where `p̄_ℓ^m` is the associated Legendre function normalised on
//! `[−1, 1]`. The blocks have at most `L + 1` rows, and carrying about 32
//! significant digits keeps `C_obs` meaningful far beyond `1e16`, where the
//! double-precision path loses every digit.

use alloc::vec;
use alloc::vec::Vec;

use twofloat::TwoFloat as Dd;

use crate::error::{Error, Result};
use crate::geometry::{Cap, SphereContext};

/// Result of [`polar_cap_observability`].
#[derive(Clone, Debug, PartialEq)]
pub struct PolarObservability {
    pub cutoff: usize,
    pub time: f64,
    pub c_obs: f64,
    /// Azimuthal order of the block attaining `c_obs`.
    pub worst_order: usize,
    /// `cost²/|u₀|²` of the HUM control for the extremal datum.
    pub cost_sq_ratio: f64,
    /// `|e^{−TA}u₀ + Wη|/|u₀|` for that control.
    pub residual: f64,
}

/// `C_obs,L` for a cap centred at the pole, block by block.
pub fn polar_cap_observability(ctx: &SphereContext, cap: &Cap, cutoff: usize, t: f64) -> Result<PolarObservability> {
    if ctx.dim() != 3 {
        return Err(Error::InvalidArgument("the polar-block path needs d = 3".into()));
    }
    let c = cap.center().coords();
    let r = ctx.radius();
    if c[0].abs() > 1e-12 * r || c[1].abs() > 1e-12 * r || c[2] <= 0.0 {
        return Err(Error::InvalidArgument("cap must be centred at the north pole".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("T = {t} must be positive")));
    }
    let c0 = if cap.is_whole_sphere() { -1.0 } else { cap.cos_angle() };
    let blocks = legendre_grams(cutoff, c0);
    let td = Dd::from(t);
    let r2 = Dd::from(r) * r;

    let mut best: Option<(Dd, usize, Vec<Dd>)> = None;
    let mut grams_w = Vec::with_capacity(blocks.len());
    for (m, g) in blocks.iter().enumerate() {
        let mu: Vec<Dd> = (m..=cutoff).map(|l| div(Dd::from((l * (l + 1)) as f64), r2)).collect();
        let n = mu.len();
        let w = DdMat::from_fn(n, |i, j| g.at(i, j) * phi1(mu[i] + mu[j], td));
        let l = cholesky(&w).ok_or(Error::SingularGramian { cutoff, lambda_min: f64::NAN })?;
        let half: Vec<Dd> = mu.iter().map(|u| exp(-(*u * td))).collect();
        // B = L⁻¹ D^{1/2}, M = B Bᵀ
        let mut b = DdMat::zeros(n);
        for j in 0..n {
            let mut e = vec![Dd::from(0.0); n];
            e[j] = half[j];
            let col = solve_lower(&l, &e);
            for i in 0..n {
                b.set(i, j, col[i]);
            }
        }
        let mm = DdMat::from_fn(n, |i, j| (0..n).fold(Dd::from(0.0), |s, k| s + b.at(i, k) * b.at(j, k)));
        let (lam, y) = jacobi_max(mm);
        let g_vec = solve_lower_transpose(&l, &y);
        if best.as_ref().is_none_or(|(bl, _, _)| lam > *bl) {
            best = Some((lam, m, g_vec));
        }
        grams_w.push((w, l, half));
    }
    let (lam, m, g_vec) = best.expect("cutoff ≥ 0 gives at least one block");
    let (w, l, half) = &grams_w[m];

    // extremal datum u₀ = e^{−TA} g, HUM multiplier η = −W⁻¹ e^{−TA} u₀
    let u0: Vec<Dd> = g_vec.iter().zip(half).map(|(g, h)| *g * *h).collect();
    let rhs: Vec<Dd> = u0.iter().zip(half).map(|(u, h)| -(*u * *h)).collect();
    let eta = solve_lower_transpose(l, &solve_lower(l, &rhs));
    let w_eta = w.mul_vec(&eta);
    let cost_sq = dot(&eta, &w_eta);
    let u0_sq = dot(&u0, &u0);
    let resid: Vec<Dd> = rhs.iter().zip(&w_eta).map(|(b, we)| *we - *b).collect();
    Ok(PolarObservability {
        cutoff,
        time: t,
        c_obs: lam.hi(),
        worst_order: m,
        cost_sq_ratio: div(cost_sq, u0_sq).hi(),
        residual: libm::sqrt(div(dot(&resid, &resid), u0_sq).hi()),
    })
}

fn dot(a: &[Dd], b: &[Dd]) -> Dd {
    a.iter().zip(b).fold(Dd::from(0.0), |s, (x, y)| s + *x * *y)
}

/// `(1 − e^{−s T})/s`, `T` at `s = 0`.
fn phi1(s: Dd, t: Dd) -> Dd {
    if s == Dd::from(0.0) {
        t
    } else {
        div(-expm1(-(s * t)), s)
    }
}

/// `e^x` to double-double accuracy: `x = k·ln 2 + r`, Taylor series for
/// `e^{r/256}`, then eight squarings.
pub(crate) fn exp(x: Dd) -> Dd {
    if x.hi() < -745.0 {
        return Dd::from(0.0);
    }
    let k = libm::round(x.hi() / core::f64::consts::LN_2);
    let r = (x - twofloat::consts::LN_2 * k) / 256.0;
    let mut s = expm1_series(r) + 1.0;
    for _ in 0..8 {
        s = s * s;
    }
    scale_pow2(s, k as i32)
}

fn expm1(x: Dd) -> Dd {
    if x.hi().abs() < 0.25 {
        // (1 + e)² − 1 = e(2 + e), applied to e = expm1(x/2^j)
        let mut e = expm1_series(x / 256.0);
        for _ in 0..8 {
            e = e * (e + 2.0);
        }
        e
    } else {
        exp(x) - 1.0
    }
}

fn expm1_series(r: Dd) -> Dd {
    let mut term = r;
    let mut sum = r;
    for n in 2..40 {
        term = term * r / n as f64;
        sum += term;
        if term.hi().abs() < 1e-36 * sum.hi().abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `a / b` to full double-double accuracy (twofloat's own quotient of two
/// double-doubles keeps only about 53 bits).
fn div(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    Dd::new_add(q1, q2) + q3
}

fn scale_pow2(x: Dd, k: i32) -> Dd {
    // split so that neither factor over- or underflows on its own
    let a = k / 2;
    let b = k - a;
    x * libm::ldexp(1.0, a) * libm::ldexp(1.0, b)
}

#[derive(Clone, Debug)]
struct DdMat {
    n: usize,
    data: Vec<Dd>,
}

impl DdMat {
    fn zeros(n: usize) -> Self {
        Self { n, data: vec![Dd::from(0.0); n * n] }
    }

    fn from_fn<F: FnMut(usize, usize) -> Dd>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    fn at(&self, i: usize, j: usize) -> Dd {
        self.data[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: Dd) {
        self.data[i * self.n + j] = v;
    }

    fn mul_vec(&self, x: &[Dd]) -> Vec<Dd> {
        (0..self.n).map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], x)).collect()
    }
}

fn cholesky(m: &DdMat) -> Option<DdMat> {
    let n = m.n;
    let mut l = DdMat::zeros(n);
    for j in 0..n {
        let mut d = m.at(j, j);
        for k in 0..j {
            d -= l.at(j, k) * l.at(j, k);
        }
        if !(d.hi() > 0.0) {
            return None;
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in j + 1..n {
            let mut s = m.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            l.set(i, j, div(s, d));
        }
    }
    Some(l)
}

fn solve_lower(l: &DdMat, b: &[Dd]) -> Vec<Dd> {
    let mut x = b.to_vec();
    for i in 0..l.n {
        let mut s = x[i];
        for k in 0..i {
            s -= l.at(i, k) * x[k];
        }
        x[i] = div(s, l.at(i, i));
    }
    x
}

fn solve_lower_transpose(l: &DdMat, b: &[Dd]) -> Vec<Dd> {
    let mut x = b.to_vec();
    for i in (0..l.n).rev() {
        let mut s = x[i];
        for k in i + 1..l.n {
            s -= l.at(k, i) * x[k];
        }
        x[i] = div(s, l.at(i, i));
    }
    x
}

/// Largest eigenvalue and unit eigenvector of a symmetric matrix by cyclic
/// Jacobi.
fn jacobi_max(mut a: DdMat) -> (Dd, Vec<Dd>) {
    let n = a.n;
    let mut v = DdMat::from_fn(n, |i, j| Dd::from(if i == j { 1.0 } else { 0.0 }));
    let total: f64 = a.data.iter().map(|x| x.hi() * x.hi()).sum();
    let target = 1e-31 * libm::sqrt(total);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.at(i, j).hi() * a.at(i, j).hi())
            .sum();
        if libm::sqrt(off) <= target {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq == Dd::from(0.0) {
                    continue;
                }
                let theta = div(a.at(q, q) - a.at(p, p), apq * 2.0);
                let t = if theta.hi().abs() > 1e100 {
                    div(Dd::from(0.5), theta)
                } else if theta.hi() >= 0.0 {
                    div(Dd::from(1.0), theta + (theta * theta + 1.0).sqrt())
                } else {
                    -div(Dd::from(1.0), (-theta) + (theta * theta + 1.0).sqrt())
                };
                let c = div(Dd::from(1.0), (t * t + 1.0).sqrt());
                let s = t * c;
                a.set(p, p, a.at(p, p) - t * apq);
                a.set(q, q, a.at(q, q) + t * apq);
                a.set(p, q, Dd::from(0.0));
                a.set(q, p, Dd::from(0.0));
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a.at(r, p);
                        let arq = a.at(r, q);
                        let np = c * arp - s * arq;
                        let nq = s * arp + c * arq;
                        a.set(r, p, np);
                        a.set(p, r, np);
                        a.set(r, q, nq);
                        a.set(q, r, nq);
                    }
                    let vrp = v.at(r, p);
                    let vrq = v.at(r, q);
                    v.set(r, p, c * vrp - s * vrq);
                    v.set(r, q, s * vrp + c * vrq);
                }
            }
        }
    }
    let k = (0..n).max_by(|&i, &j| a.at(i, i).partial_cmp(&a.at(j, j)).unwrap()).unwrap();
    (a.at(k, k), (0..n).map(|i| v.at(i, k)).collect())
}

/// Gram blocks `∫_{c0}^{1} p̄_ℓ^m p̄_{ℓ'}^m dx`, `m ≤ ℓ, ℓ' ≤ L`, by
/// Gauss–Legendre on `[c0, 1]` (exact: the integrands are polynomials of
/// degree `≤ 2L`).
fn legendre_grams(cutoff: usize, c0: f64) -> Vec<DdMat> {
    let (xs, ws) = gauss_legendre_dd(cutoff + 2);
    let c0 = Dd::from(c0);
    let half = (Dd::from(1.0) - c0) / 2.0;
    let mut blocks: Vec<DdMat> = (0..=cutoff).map(|m| DdMat::zeros(cutoff - m + 1)).collect();
    for (x, w) in xs.iter().zip(&ws) {
        let x = c0 + half * (*x + 1.0);
        let w = *w * half;
        let p = normalized_legendre(cutoff, x);
        for (m, block) in blocks.iter_mut().enumerate() {
            let n = cutoff - m + 1;
            for i in 0..n {
                for j in 0..=i {
                    let v = block.at(i, j) + w * p[m][i] * p[m][j];
                    block.set(i, j, v);
                    block.set(j, i, v);
                }
            }
        }
    }
    blocks
}

/// `p̄_ℓ^m(x)` for `m ≤ ℓ ≤ L`, indexed `[m][ℓ − m]`, normalised so that
/// `∫_{−1}^{1} p̄² dx = 1`.
fn normalized_legendre(cutoff: usize, x: Dd) -> Vec<Vec<Dd>> {
    let s = (Dd::from(1.0) - x * x).max(Dd::from(0.0)).sqrt();
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut qmm = twofloat::consts::FRAC_1_SQRT_2;
    for m in 0..=cutoff {
        if m > 0 {
            qmm = qmm * (Dd::from((2 * m + 1) as f64) / (2 * m) as f64).sqrt() * s;
        }
        let mut row = Vec::with_capacity(cutoff - m + 1);
        row.push(qmm);
        if m < cutoff {
            row.push(Dd::from((2 * m + 3) as f64).sqrt() * x * qmm);
        }
        for l in m + 2..=cutoff {
            let (lf, mf) = (l as f64, m as f64);
            let a = (Dd::from(4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (Dd::from((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let k = row.len();
            let next = a * (x * row[k - 1] - b * row[k - 2]);
            row.push(next);
        }
        out.push(row);
    }
    out
}

fn gauss_legendre_dd(n: usize) -> (Vec<Dd>, Vec<Dd>) {
    let (x0, _) = crate::quadrature::gauss_legendre(n);
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for z in x0 {
        let mut x = Dd::from(z);
        for _ in 0..3 {
            let (p, dp) = legendre_dd(n, x);
            x -= div(p, dp);
        }
        let (_, dp) = legendre_dd(n, x);
        xs.push(x);
        ws.push(div(Dd::from(2.0), (Dd::from(1.0) - x * x) * dp * dp));
    }
    (xs, ws)
}

fn legendre_dd(n: usize, x: Dd) -> (Dd, Dd) {
    let (mut p0, mut p1) = (Dd::from(1.0), x);
    if n == 0 {
        return (p0, Dd::from(0.0));
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = (x * p1 * (2.0 * k - 1.0) - p0 * (k - 1.0)) / k;
        p0 = p1;
        p1 = p2;
    }
    (p1, div((x * p1 - p0) * n as f64, x * x - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LO_EXP_M02: f64 = 2.859368976827291e-17;
    const LO_EXPM1_1EM5: f64 = -3.111926571619883e-22;

    #[test]
    fn exp_matches_reference_digits() {
        // reference digits from a 50-digit evaluation at the binary value of -0.2
        let e = exp(Dd::from(-0.2));
        let err = (e - Dd::new_add(0.8187307530779818, LO_EXP_M02)).hi().abs();
        assert!(err < 1e-28, "{err:e}");
        let x = Dd::from(-48.1);
        let y = exp(x) * exp(-x);
        assert!((y - 1.0).hi().abs() < 1e-29);
        let small = expm1(Dd::from(1e-5));
        let reference = Dd::new_add(1.0000050000166668e-05, LO_EXPM1_1EM5);
        assert!(div(small - reference, small).hi().abs() < 1e-20);
    }

    #[test]
    fn full_interval_gram_is_identity() {
        for m in legendre_grams(6, -1.0) {
            for i in 0..m.n {
                for j in 0..m.n {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((m.at(i, j) - e).hi().abs() < 1e-28, "{i} {j} {:e}", (m.at(i, j) - e).hi());
                }
            }
        }
    }

    #[test]
    fn quotient_keeps_both_words() {
        let third = div(Dd::from(1.0), Dd::from(3.0));
        assert!((third * 3.0 - 1.0).hi().abs() < 1e-31);
    }

    #[test]
    fn whole_sphere_closed_form() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let cap = Cap::new(&ctx, ctx.pole(), 1.0).unwrap();
        for t in [0.05, 0.7] {
            let p = polar_cap_observability(&ctx, &cap, 5, t).unwrap();
            let expect = (1..=5)
                .map(|l| {
                    let mu = (l * (l + 1)) as f64;
                    2.0 * mu * (-2.0 * t * mu).exp() / -(-2.0 * t * mu).exp_m1()
                })
                .fold(1.0 / t, f64::max);
            assert!((p.c_obs / expect - 1.0).abs() < 1e-13, "T={t}");
        }
    }

    #[test]
    fn agrees_with_double_gramian_when_well_conditioned() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let rule = crate::heat_control::sweep_rule(&ctx, 0.02, 4).unwrap();
        let row = crate::heat_control::sweep_row(&ctx, 0.02, 4, 0.5, &rule).unwrap();
        let cap = crate::heat_control::cap_for_fraction(&ctx, 0.02).unwrap();
        let p = polar_cap_observability(&ctx, &cap, 4, 0.5).unwrap();
        assert!((row.c_obs / p.c_obs - 1.0).abs() < 1e-8);
        assert!((p.cost_sq_ratio / p.c_obs - 1.0).abs() < 1e-12);
        assert!(p.residual < 1e-20);
    }

    #[test]
    fn rejects_off_pole_caps() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let cap = Cap::new(&ctx, ctx.project([1.0, 0.0, 0.0]), 0.3).unwrap();
        assert!(polar_cap_observability(&ctx, &cap, 3, 1.0).is_err());
    }
}
