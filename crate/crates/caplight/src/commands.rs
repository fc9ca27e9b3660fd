//! The subcommands. Each returns an [`Outcome`]; independent jobs run on
//! the ambient rayon pool and are collected in input order, so the output
//! does not depend on the thread count.

use caplight_core::concentration::{sharp_constant, SpectralReport, Thickness};
use caplight_core::geometry::{
    build_cap_cover, multiplicity_bound, region_measure, thickness, Cap, Region, SphereContext,
};
use caplight_core::harmonics::{random_poly, SphericalPolynomial};
use caplight_core::heat_control::{
    cost_sweep, hum_control, lebeau_robbiano_control, observability_constant, BoundInputs, LrSchedule, ModeVector,
};
use caplight_core::quadrature::{integrate, polar_integrate, sphere_rule, QuadratureRule};
use caplight_core::turan::{check_nazarov, random_instance, verify_local_lemma, LocalOptions};
use caplight_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, ResolvedConfig};
use crate::output::{Cell, Outcome, Table};
use crate::CliError;

/// Polar-integration resolution used by `polar-check`.
const POLAR_N_T: usize = 512;
const POLAR_N_DIR: usize = 256;
const POLAR_TOL: f64 = 1e-6;

pub fn run(cfg: &ResolvedConfig) -> Result<Outcome, CliError> {
    let ctx = SphereContext::new(cfg.d, cfg.r)?;
    match cfg.command {
        Command::PolarCheck => polar_check(cfg, &ctx),
        Command::TuranFuzz => turan_fuzz(cfg),
        Command::LocalLemma => local_lemma(cfg, &ctx),
        Command::Cover => cover(cfg, &ctx),
        Command::Thickness => thickness_cmd(cfg, &ctx),
        Command::Spectral => spectral(cfg, &ctx),
        Command::Observe => observe(cfg, &ctx),
        Command::Control => control(cfg, &ctx),
        Command::Sweep => sweep(cfg, &ctx),
    }
}

fn collect<T: Send>(jobs: Vec<Result<T, CliError>>) -> Result<Vec<T>, CliError> {
    jobs.into_iter().collect()
}

fn poly_json(f: &SphericalPolynomial) -> Value {
    json!({"d": f.ctx().dim(), "R": f.ctx().radius(), "N": f.degree(), "coeffs": f.coeffs()})
}

fn polar_check(cfg: &ResolvedConfig, ctx: &SphereContext) -> Result<Outcome, CliError> {
    let rule = sphere_rule(ctx, cfg.quad_degree.max(2 * cfg.degree));
    let rows = collect(
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = rng.random_range(0..=cfg.degree);
                let f = random_poly(n, seed, ctx);
                let p = ctx.random_point(&mut rng);
                let direct = integrate(&rule, |x| f.eval(x))?;
                let direct_sq = integrate(&rule, |x| f.eval(x).powi(2))?;
                let polar = polar_integrate(&p, ctx, |x| f.eval(x), POLAR_N_T, POLAR_N_DIR);
                let polar_sq = polar_integrate(&p, ctx, |x| f.eval(x).powi(2), POLAR_N_T, POLAR_N_DIR);
                // ∫f² is the natural scale: ∫f alone can vanish
                let err = ((polar - direct).abs() / direct_sq.max(direct.abs()))
                    .max((polar_sq - direct_sq).abs() / direct_sq);
                Ok((seed, n, direct, polar, direct_sq, polar_sq, err))
            })
            .collect(),
    )?;
    let mut table = Table::new(&["seed", "degree", "direct", "polar", "direct_sq", "polar_sq", "discrepancy"]);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (seed, n, a, b, c, d, err) in rows {
        worst = worst.max(err);
        if !(err <= POLAR_TOL) {
            failures.push(format!("seed {seed}: discrepancy {err:e} > {POLAR_TOL:e}"));
        }
        table.push(vec![seed.into(), n.into(), a.into(), b.into(), c.into(), d.into(), err.into()]);
    }
    let summary = json!({"max_discrepancy": worst, "tolerance": POLAR_TOL, "n_t": POLAR_N_T, "n_dir": POLAR_N_DIR});
    Ok(Outcome { table, summary, failures })
}

fn turan_fuzz(cfg: &ResolvedConfig) -> Result<Outcome, CliError> {
    let reports = collect(
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let (sum, set) = random_instance(seed);
                Ok((seed, check_nazarov(&sum, &set, 4096)?))
            })
            .collect(),
    )?;
    let mut table =
        Table::new(&["seed", "n_terms", "set_measure", "lhs", "sup_on_set", "rhs_bound", "holds", "sampling_n"]);
    let mut failures = Vec::new();
    for (seed, r) in &reports {
        if !r.holds {
            failures.push(format!("seed {seed}: sup {} exceeds bound {}", r.lhs, r.rhs_bound));
        }
        table.push(vec![
            (*seed).into(),
            r.n_terms.into(),
            r.set_measure.into(),
            r.lhs.into(),
            r.sup_on_set.into(),
            r.rhs_bound.into(),
            r.holds.into(),
            r.sampling_n.into(),
        ]);
    }
    let summary = json!({"instances": reports.len(), "violations": failures.len()});
    Ok(Outcome { table, summary, failures })
}

/// Draws of test caps per trial before giving up on `K ∩ S ≠ ∅`.
const CAP_ATTEMPTS: usize = 64;

fn local_lemma(cfg: &ResolvedConfig, ctx: &SphereContext) -> Result<Outcome, CliError> {
    let region = cfg.region.build(ctx)?;
    let r = ctx.radius();
    let rows = collect(
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n = rng.random_range(1..=cfg.degree.max(1));
                let f = random_poly(n, seed, ctx);
                for _ in 0..CAP_ATTEMPTS {
                    let k = Cap::new(ctx, ctx.random_point(&mut rng), r * rng.random_range(0.15..0.4))?;
                    let fit = Region::union(vec![region.clone(), Region::cap(k)]);
                    let rule = QuadratureRule::fitted(ctx, cfg.quad_degree.max(2 * n + 4), &fit);
                    match verify_local_lemma(ctx, &f, &k, &region, cfg.q, &rule, LocalOptions::default()) {
                        Ok(rep) => return Ok((seed, k, Some(rep))),
                        Err(Error::ZeroMeasure) => continue,
                        Err(e) => return Err(e.into()),
                    }
                }
                let k = Cap::new(ctx, ctx.pole(), r)?;
                Ok((seed, k, None))
            })
            .collect(),
    )?;
    let mut table =
        Table::new(&["seed", "degree", "cap_a", "lhs", "rhs", "margin", "point_condition", "holds", "implied_c4"]);
    let mut failures = Vec::new();
    let mut skipped = 0;
    for (seed, k, rep) in rows {
        let Some(rep) = rep else {
            skipped += 1;
            continue;
        };
        if !(rep.holds && rep.point_condition) {
            failures.push(format!("seed {seed}: lhs {} vs rhs {}", rep.lhs, rep.rhs));
        }
        table.push_with(
            vec![
                seed.into(),
                rep.degree.into(),
                k.radius_a().into(),
                rep.lhs.into(),
                rep.rhs.into(),
                rep.margin.into(),
                rep.point_condition.into(),
                rep.holds.into(),
                rep.implied_c4.into(),
            ],
            Some(json!({"cap_center": k.center().ambient(ctx), "set_measure": rep.set_measure})),
        );
    }
    let summary =
        json!({"trials": table.rows.len(), "skipped_no_overlap": skipped, "failures": failures.len(), "q": cfg.q});
    Ok(Outcome { table, summary, failures })
}

fn cover(cfg: &ResolvedConfig, ctx: &SphereContext) -> Result<Outcome, CliError> {
    let a = cfg.gamma_scale.unwrap_or(0.2 * ctx.radius());
    let bound = multiplicity_bound(ctx.dim());
    let mut table = Table::new(&["d", "R", "a", "caps", "kappa", "kappa_bound", "coverage_verified", "samples"]);
    let mut failures = Vec::new();
    match build_cap_cover(ctx, a) {
        Ok(c) => table.push(vec![
            ctx.dim().into(),
            ctx.radius().into(),
            a.into(),
            c.caps.len().into(),
            c.multiplicity_kappa.into(),
            bound.into(),
            c.coverage_verified.into(),
            c.verification_samples.into(),
        ]),
        Err(e @ (Error::CoverageFailure { .. } | Error::MultiplicityBound { .. })) => failures.push(e.to_string()),
        Err(e) => return Err(e.into()),
    }
    let summary = json!({"a": a, "kappa_bound": bound});
    Ok(Outcome { table, summary, failures })
}

/// Thickness at the configured scale, or `None` without `gamma_scale`.
fn configured_thickness(
    cfg: &ResolvedConfig,
    ctx: &SphereContext,
    region: &Region,
    rule: &QuadratureRule,
) -> Result<Option<Thickness>, CliError> {
    cfg.gamma_scale
        .map(|a| {
            let t = thickness(ctx, region, a, cfg.grid, rule)?;
            Ok(Thickness { gamma: t.gamma_estimate, scale_a: a })
        })
        .transpose()
}

fn thickness_cmd(cfg: &ResolvedConfig, ctx: &SphereContext) -> Result<Outcome, CliError> {
    let region = cfg.region.build(ctx)?;
    let a = cfg.gamma_scale.unwrap_or(0.25 * ctx.radius());
    let rule = QuadratureRule::fitted(ctx, cfg.quad_degree, &region);
    let rep = thickness(ctx, &region, a, cfg.grid, &rule)?;
    let fraction = region_measure(&region, &rule) / ctx.surface_measure();
    let mut failures = Vec::new();
    let kappa = match build_cap_cover(ctx, a) {
        Ok(c) => c.multiplicity_kappa,
        Err(e) => return Ok(Outcome { table: Table::new(&[]), summary: json!({}), failures: vec![e.to_string()] }),
    };
    let lower = rep.gamma_estimate / kappa as f64;
    let holds = fraction >= lower - 1e-6;
    if !holds {
        failures.push(format!("measure fraction {fraction} below γ₀/κ = {lower}"));
    }
    let mut table =
        Table::new(&["d", "R", "a", "gamma_estimate", "measure_fraction", "kappa", "gamma_over_kappa", "holds"]);
    table.push_with(
        vec![
            ctx.dim().into(),
            ctx.radius().into(),
            a.into(),
            rep.gamma_estimate.into(),
            fraction.into(),
            kappa.into(),
            lower.into(),
            holds.into(),
        ],
        Some(json!({
            "worst_cap": {"center": rep.worst_cap.center().ambient(ctx), "a": rep.worst_cap.radius_a()},
            "grid_resolution": rep.grid_resolution,
            "caps_skipped": rep.caps_skipped,
        })),
    );
    Ok(Outcome { table, summary: json!({"a": a}), failures })
}

fn spectral(cfg: &ResolvedConfig, ctx: &SphereContext) -> Result<Outcome, CliError> {
    let region = cfg.region.build(ctx)?;
    let rule = QuadratureRule::fitted(ctx, cfg.quad_degree, &region);
    let th = configured_thickness(cfg, ctx, &region, &rule)?;
    let reports: Vec<Result<SpectralReport, Error>> =
        (0..=cfg.degree).into_par_iter().map(|n| sharp_constant(&region, n, &rule, th)).collect();
    let mut table = Table::new(&["d", "R", "N", "q", "gamma", "a", "C_star", "implied_c1", "lambda_min"]);
    let mut failures = Vec::new();
    let mut singular_from = None;
    let mut prev: f64 = 0.0;
    for (n, rep) in reports.into_iter().enumerate() {
        let rep = match rep {
            Ok(rep) => rep,
            Err(Error::NearSingularGram { .. }) => {
                singular_from = Some(n);
                break;
            }
            Err(e) => return Err(e.into()),
        };
        if rep.c_star < 1.0 - 1e-12 || rep.c_star < prev * (1.0 - 1e-12) {
            failures.push(format!("N = {n}: C* = {} breaks C* ≥ 1 or monotonicity in N", rep.c_star));
        }
        prev = rep.c_star;
        table.push_with(
            vec![
                ctx.dim().into(),
                ctx.radius().into(),
                n.into(),
                rep.q.into(),
                rep.gamma_used.into(),
                rep.scale_a.into(),
                rep.c_star.into(),
                rep.implied_c1.into(),
                rep.lambda_min.into(),
            ],
            Some(json!({"extremizer": poly_json(&rep.extremizer)})),
        );
    }
    let summary = json!({"near_singular_from_degree": singular_from});
    Ok(Outcome { table, summary, failures })
}

fn bound_inputs(
    cfg: &ResolvedConfig,
    ctx: &SphereContext,
    region: &Region,
    rule: &QuadratureRule,
) -> Result<BoundInputs, CliError> {
    let th = configured_thickness(cfg, ctx, region, rule)?
        .unwrap_or(Thickness { gamma: region_measure(region, rule) / ctx.surface_measure(), scale_a: ctx.radius() });
    Ok(BoundInputs { c2: cfg.c2, gamma: th.gamma, scale_a: th.scale_a, c: cfg.c })
}

fn observe(cfg: &ResolvedConfig, ctx: &SphereContext) -> Result<Outcome, CliError> {
    let region = cfg.region.build(ctx)?;
    let rule = QuadratureRule::fitted(ctx, cfg.quad_degree, &region);
    let inputs = bound_inputs(cfg, ctx, &region, &rule)?;
    let reports = collect(
        cfg.t.par_iter().map(|&t| Ok(observability_constant(&region, cfg.cutoff, t, &rule, Some(inputs))?)).collect(),
    )?;
    let mut table =
        Table::new(&["d", "R", "L", "T", "C_obs", "predicted_bound", "implied_c2", "gamma", "a", "d0", "d1", "shift"]);
    let mut failures = Vec::new();
    for rep in &reports {
        if !(rep.c_obs > 0.0 && rep.c_obs.is_finite()) {
            failures.push(format!("T = {}: C_obs = {}", rep.time, rep.c_obs));
        }
        table.push_with(
            vec![
                ctx.dim().into(),
                ctx.radius().into(),
                rep.cutoff.into(),
                rep.time.into(),
                rep.c_obs.into(),
                rep.predicted_bound.into(),
                rep.implied_c2.into(),
                inputs.gamma.into(),
                inputs.scale_a.into(),
                rep.d0.into(),
                rep.d1.into(),
                rep.shift.into(),
            ],
            Some(json!({"extremal_g": rep.extremal_g.coeffs()})),
        );
    }
    let summary = json!({"c2": cfg.c2, "c": cfg.c});
    Ok(Outcome { table, summary, failures })
}

fn control(cfg: &ResolvedConfig, ctx: &SphereContext) -> Result<Outcome, CliError> {
    let region = cfg.region.build(ctx)?;
    let rule = QuadratureRule::fitted(ctx, cfg.quad_degree, &region);
    let t = cfg.t[0];
    let seed = cfg.seeds[0];
    let u0 = ModeVector::random(*ctx, cfg.cutoff, seed);
    let c_obs = observability_constant(&region, cfg.cutoff, t, &rule, None)?.c_obs;
    let hum = hum_control(&u0, &region, t, &rule, cfg.tol)?;
    let lr = lebeau_robbiano_control(&u0, &region, t, &rule, cfg.tol, LrSchedule::default())?;

    let mut failures = Vec::new();
    let n2 = u0.norm() * u0.norm();
    if hum.cost * hum.cost > c_obs * n2 * (1.0 + 1e-8) {
        failures.push(format!("HUM cost² {} exceeds C_obs·|u₀|² = {}", hum.cost * hum.cost, c_obs * n2));
    }
    for (name, sol) in [("hum", &hum), ("lebeau-robbiano", &lr)] {
        if !sol.within_tolerance {
            failures.push(format!("{name}: residual {:e} above tolerance {:e}", sol.terminal_residual, cfg.tol));
        }
    }
    if !lr.stage_residuals.windows(2).all(|w| w[1] < w[0]) {
        failures.push(format!("lebeau-robbiano: stage residuals not strictly decreasing: {:?}", lr.stage_residuals));
    }

    let mut table = Table::new(&["method", "L", "T", "cost", "cost_sq_over_norm_sq", "terminal_residual", "stages"]);
    for (name, sol) in [("hum", &hum), ("lebeau-robbiano", &lr)] {
        table.push_with(
            vec![
                Cell::S(name.into()),
                cfg.cutoff.into(),
                t.into(),
                sol.cost.into(),
                (sol.cost * sol.cost / n2).into(),
                sol.terminal_residual.into(),
                sol.segments.len().into(),
            ],
            Some(json!({
                "eta": sol.eta.coeffs(),
                "stage_residuals": sol.stage_residuals,
                "segments": sol.segments.iter().map(|s| json!({
                    "start": s.start, "end": s.end, "cutoff": s.cutoff, "cost_sq": s.cost_sq,
                })).collect::<Vec<_>>(),
            })),
        );
    }
    let summary =
        json!({"C_obs": c_obs, "seed": seed, "u0_norm": u0.norm(), "cost_ratio_lr_over_hum": lr.cost / hum.cost});
    Ok(Outcome { table, summary, failures })
}

fn sweep(cfg: &ResolvedConfig, ctx: &SphereContext) -> Result<Outcome, CliError> {
    let jobs: Vec<(f64, f64)> = cfg.gammas.iter().flat_map(|&g| cfg.t.iter().map(move |&t| (g, t))).collect();
    let rows =
        collect(jobs.par_iter().map(|&(g, t)| Ok(cost_sweep(ctx, &[g], cfg.cutoff, &[t])?.remove(0))).collect())?;
    let mut table = Table::new(&["d", "R", "gamma", "a", "L", "T", "C_obs", "implied_c2", "cost_sq_max", "residual"]);
    let mut failures = Vec::new();
    for r in &rows {
        if !(r.c_obs.is_finite() && r.cost_sq_max <= r.c_obs * (1.0 + 1e-6)) {
            failures.push(format!("γ = {}, T = {}: cost² {} vs C_obs {}", r.gamma, r.time, r.cost_sq_max, r.c_obs));
        }
        table.push_with(
            vec![
                ctx.dim().into(),
                ctx.radius().into(),
                r.gamma.into(),
                r.scale_a.into(),
                r.cutoff.into(),
                r.time.into(),
                r.c_obs.into(),
                r.implied_c2.into(),
                r.cost_sq_max.into(),
                r.residual.into(),
            ],
            Some(json!({"extended_precision": r.extended_precision})),
        );
    }
    // log cost² against 1/T, per γ
    let fits: Vec<Value> = rows
        .chunks(cfg.t.len())
        .filter(|c| c.len() >= 2)
        .map(|chunk| {
            let xs: Vec<f64> = chunk.iter().map(|r| 1.0 / r.time).collect();
            let ys: Vec<f64> = chunk.iter().map(|r| r.cost_sq_max.ln()).collect();
            let (slope, r2) = linear_fit(&xs, &ys);
            json!({"gamma": chunk[0].gamma, "slope": slope, "r_squared": r2})
        })
        .collect();
    // slopes scale like log²(1/γ); compare the first two gammas
    let mut summary = json!({"fits": fits});
    if let [a, b, ..] = fits.as_slice() {
        let observed = a["slope"].as_f64().unwrap_or(f64::NAN) / b["slope"].as_f64().unwrap_or(f64::NAN);
        let (g0, g1) = (cfg.gammas[0], cfg.gammas[1]);
        summary["slope_ratio"] = json!({"observed": observed, "log_squared_prediction": (g0.ln() / g1.ln()).powi(2)});
    }
    Ok(Outcome { table, summary, failures })
}

/// Least-squares slope and `R²`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    (sxy / sxx, sxy * sxy / (sxx * syy))
}
