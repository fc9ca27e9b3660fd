//! Checks against independently computed reference values.

use caplight_core::concentration::gram;
use caplight_core::geometry::{Cap, Region, SphereContext};
use caplight_core::heat_control::{
    cap_for_fraction, cost_sweep, hum_control, lebeau_robbiano_control, mode_eigenvalues, observability_constant,
    polar_cap_observability, sweep_row, sweep_rule, weighted_gramian, LrSchedule, ModeVector,
};
use caplight_core::quadrature::QuadratureRule;

fn s2() -> SphereContext {
    SphereContext::new(3, 1.0).unwrap()
}

fn polar_cap(ctx: &SphereContext, a: f64) -> Region {
    Region::cap(Cap::new(ctx, ctx.pole(), a).unwrap())
}

#[test]
fn gramian_matches_time_quadrature() {
    let ctx = s2();
    let region = Region::union(vec![
        polar_cap(&ctx, 0.3),
        Region::cap(Cap::new(&ctx, ctx.project([1.0, 0.5, -0.4]), 0.2).unwrap()),
    ]);
    let rule = QuadratureRule::fitted(&ctx, 8, &region);
    let (l, t) = (4, 0.7);
    let w = weighted_gramian(&region, l, t, &rule).unwrap();
    let g = gram(&region, l, &rule).unwrap().matrix;
    let mu = mode_eigenvalues(&ctx, l);
    // composite Simpson on 10⁴ intervals of ∫₀ᵀ e^{−tμᵢ} Gᵢⱼ e^{−tμⱼ} dt
    let n = 10_000;
    let h = t / n as f64;
    let mut worst: f64 = 0.0;
    for i in 0..mu.len() {
        for j in 0..mu.len() {
            let f = |s: f64| (-(mu[i] + mu[j]) * s).exp();
            let mut acc = f(0.0) + f(t);
            for k in 1..n {
                acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
            }
            worst = worst.max((w[(i, j)] - g[(i, j)] * acc * h / 3.0).abs());
        }
    }
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn gramian_vanishes_at_small_time() {
    let ctx = s2();
    let region = polar_cap(&ctx, 0.4);
    let rule = QuadratureRule::fitted(&ctx, 6, &region);
    let w = weighted_gramian(&region, 3, 1e-6, &rule).unwrap();
    assert!(w.max_abs() <= 1e-6);
}

#[test]
fn hum_end_to_end_on_a_cap() {
    let ctx = s2();
    let region = polar_cap(&ctx, 0.4);
    let rule = QuadratureRule::fitted(&ctx, 12, &region);
    let rep = observability_constant(&region, 6, 1.0, &rule, None).unwrap();
    for seed in 0..5 {
        let u0 = ModeVector::random(ctx, 6, seed);
        let sol = hum_control(&u0, &region, 1.0, &rule, 1e-8).unwrap();
        assert!(sol.within_tolerance && sol.terminal_residual <= 1e-8);
        let cost_sq = sol.cost * sol.cost;
        assert!(cost_sq <= rep.c_obs * u0.norm().powi(2) * (1.0 + 1e-8));
        let w = weighted_gramian(&region, 6, 1.0, &rule).unwrap();
        assert!((w.quadratic_form(sol.eta.coeffs()) - cost_sq).abs() <= 1e-10 * cost_sq.max(1.0));
    }
}

#[test]
fn observability_decreases_in_time() {
    let ctx = s2();
    let region = polar_cap(&ctx, 0.4);
    let rule = QuadratureRule::fitted(&ctx, 16, &region);
    let c = |t| observability_constant(&region, 8, t, &rule, None).unwrap().c_obs;
    assert!(c(1.0) < c(0.5));
}

#[test]
fn staged_control_of_low_modes_finishes_in_stage_zero() {
    let ctx = s2();
    let region = polar_cap(&ctx, 0.5);
    let rule = QuadratureRule::fitted(&ctx, 8, &region);
    // a vector of cutoff L₀ = 1: stage 0 already reaches the cutoff
    let u0 = ModeVector::new(ctx, 1, vec![0.3, -0.7, 0.2, 0.5]).unwrap();
    let sol = lebeau_robbiano_control(&u0, &region, 1.0, &rule, 1e-8, LrSchedule::default()).unwrap();
    assert_eq!(sol.segments.len(), 1);
    assert!(sol.stage_residuals[0] <= 1e-12, "{:?}", sol.stage_residuals);
    assert!(sol.terminal_residual <= 1e-12);
}

#[test]
fn sweep_rows_match_single_calls() {
    let circle = SphereContext::new(2, 1.0).unwrap();
    let rows = cost_sweep(&circle, &[0.1], 5, &[0.4, 0.9]).unwrap();
    let region = Region::cap(cap_for_fraction(&circle, 0.1).unwrap());
    let rule = sweep_rule(&circle, 0.1, 5).unwrap();
    for row in &rows {
        let direct = observability_constant(&region, 5, row.time, &rule, None).unwrap();
        assert_eq!(row.c_obs, direct.c_obs);
        assert!(!row.extended_precision);
    }

    let ctx = s2();
    let row = cost_sweep(&ctx, &[0.1], 3, &[0.8]).unwrap().remove(0);
    let double = sweep_row(&ctx, 0.1, 3, 0.8, &sweep_rule(&ctx, 0.1, 3).unwrap()).unwrap();
    assert!(row.extended_precision);
    assert!((row.c_obs / double.c_obs - 1.0).abs() < 1e-9);
    assert!((row.cost_sq_max / double.cost_sq_max - 1.0).abs() < 1e-8);
}

/// `log C_obs` for the polar cap of fraction `γ` on `S²₁` at `L = 8`,
/// `T = 0.05, 0.10, …, 0.50`, from a 50-digit evaluation of the generalized
/// eigenproblem with exact Legendre Gram integrals (rounded to 3 decimals).
const LOG_C_OBS_GAMMA_002: [f64; 10] = [48.099, 38.241, 32.247, 27.994, 24.757, 22.186, 20.085, 18.332, 16.846, 15.572];
const LOG_C_OBS_GAMMA_005: [f64; 10] = [43.431, 34.598, 29.151, 25.296, 22.362, 20.033, 18.127, 16.533, 15.178, 14.010];

#[test]
fn polar_blocks_match_high_precision_reference() {
    let ctx = s2();
    for (gamma, reference) in [(0.02, LOG_C_OBS_GAMMA_002), (0.05, LOG_C_OBS_GAMMA_005)] {
        let cap = cap_for_fraction(&ctx, gamma).unwrap();
        for (k, expect) in reference.iter().enumerate() {
            let t = 0.05 * (k + 1) as f64;
            let p = polar_cap_observability(&ctx, &cap, 8, t).unwrap();
            assert!((p.c_obs.ln() - expect).abs() <= 1e-3, "γ={gamma} T={t}: {}", p.c_obs.ln());
            assert!((p.cost_sq_ratio / p.c_obs - 1.0).abs() <= 1e-10);
            assert!(p.residual <= 1e-10);
        }
    }
}
