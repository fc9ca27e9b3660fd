use std::path::PathBuf;
use std::process::ExitCode;

use caplight::config::{Command, ExperimentConfig, Format, OneOrMany, ResolvedConfig};
use caplight::output::{emit, SCHEMA};
use caplight::region_json::RegionSpec;
use caplight::{commands, CliError, EXIT_FAILED, EXIT_INVALID};
use clap::Parser;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "caplight", version, about = "Uncertainty principles and heat control on spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Ambient dimension (2: circle, 3: sphere).
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Sphere radius.
    #[arg(long = "R", global = true)]
    r: Option<f64>,
    /// Region as inline JSON or a path to a JSON file.
    #[arg(long, global = true)]
    region: Option<String>,
    #[arg(long, global = true)]
    degree: Option<usize>,
    /// Spectral cutoff L for the control commands.
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Comma-separated times.
    #[arg(long = "T", global = true, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    /// Cap radius a for thickness and covers.
    #[arg(long, global = true)]
    gamma_scale: Option<f64>,
    #[arg(long, global = true)]
    quad_degree: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

impl Cli {
    fn resolve(self) -> Result<ResolvedConfig, CliError> {
        let file = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            d: self.d,
            r: self.r,
            region: self.region.as_deref().map(RegionSpec::from_arg).transpose()?,
            degree: self.degree,
            cutoff: self.cutoff,
            t: self.t.map(OneOrMany::Many),
            gamma_scale: self.gamma_scale,
            quad_degree: self.quad_degree,
            seed: self.seed,
            trials: self.trials,
            out: self.out,
            format: self.format,
            ..Default::default()
        };
        ResolvedConfig::resolve(self.command, file.overlay(flags))
    }
}

fn diagnose(code: u8, message: &str, failures: &[String]) -> ExitCode {
    let status = if code == EXIT_FAILED { "failed" } else { "invalid" };
    let diag = json!({"schema": SCHEMA, "status": status, "exit_code": code, "message": message, "failures": failures});
    eprintln!("{diag}");
    ExitCode::from(code)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let n = match std::env::var("CAPLIGHT_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| CliError::invalid(format!("CAPLIGHT_THREADS = {v:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::invalid(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return diagnose(EXIT_INVALID, e.to_string().trim_end(), &[]),
    };
    let run = || -> Result<Vec<String>, CliError> {
        let cfg = cli.resolve()?;
        let outcome = thread_pool()?.install(|| commands::run(&cfg))?;
        emit(&cfg, &outcome)?;
        Ok(outcome.failures)
    };
    match run() {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => diagnose(EXIT_FAILED, "contract failed", &failures),
        Err(e) => diagnose(e.exit_code(), &e.to_string(), &[]),
    }
}
