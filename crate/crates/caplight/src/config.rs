//! Experiment configuration: a strict JSON file merged with command-line
//! flags into a [`ResolvedConfig`] that every report embeds.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::region_json::RegionSpec;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// A single number or a list.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Contents of a `--config` file. Every key is optional; unknown keys are
/// rejected.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: Option<usize>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub region: Option<RegionSpec>,
    pub degree: Option<usize>,
    pub cutoff: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<OneOrMany>,
    pub gamma_scale: Option<f64>,
    pub gammas: Option<Vec<f64>>,
    pub quad_degree: Option<usize>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub seed_file: Option<PathBuf>,
    pub trials: Option<usize>,
    pub q: Option<f64>,
    pub tol: Option<f64>,
    pub c2: Option<f64>,
    pub c: Option<f64>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("config {}: {e}", path.display())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(self, other: ExperimentConfig) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { ExperimentConfig { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            d,
            r,
            region,
            degree,
            cutoff,
            t,
            gamma_scale,
            gammas,
            quad_degree,
            seed,
            seeds,
            seed_file,
            trials,
            q,
            tol,
            c2,
            c,
            grid,
            out,
            format
        )
    }
}

/// Subcommands, used to pick defaults.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Polar-coordinates integration identity against the sphere rule.
    PolarCheck,
    /// Nazarov–Turán bound on a seeded corpus of exponential sums.
    TuranFuzz,
    /// Local cap-wise inequality on seeded polynomials and caps.
    LocalLemma,
    /// Cap cover of the sphere and its multiplicity.
    Cover,
    /// Thickness of a region and the measure–thickness inequality.
    Thickness,
    /// Sharp L² constants over degrees 0..=N.
    Spectral,
    /// Observability constants over a list of times.
    Observe,
    /// HUM and staged null controls for a seeded initial datum.
    Control,
    /// Small-time cost sweep over polar caps.
    Sweep,
}

/// Configuration with every default filled in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub command: Command,
    pub d: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub region: RegionSpec,
    pub degree: usize,
    pub cutoff: usize,
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    pub gamma_scale: Option<f64>,
    pub gammas: Vec<f64>,
    pub quad_degree: usize,
    pub seeds: Vec<u64>,
    pub q: f64,
    pub tol: f64,
    pub c2: f64,
    pub c: f64,
    pub grid: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ResolvedConfig {
    pub fn resolve(command: Command, cfg: ExperimentConfig) -> Result<Self, CliError> {
        use Command::*;
        let d = cfg.d.unwrap_or(3);
        let r = cfg.r.unwrap_or(1.0);
        if !(d == 2 || d == 3) {
            return Err(CliError::invalid(format!("d = {d}: only 2 and 3 are supported")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(CliError::invalid(format!("R = {r} must be positive")));
        }
        let degree = cfg.degree.unwrap_or(match command {
            PolarCheck => 8,
            LocalLemma => 4,
            _ => 6,
        });
        let cutoff = cfg.cutoff.unwrap_or(if command == Sweep { 8 } else { 6 });
        let t = match cfg.t {
            Some(v) => v.into_vec(),
            None => match command {
                Sweep => (1..=10).map(|k| 0.05 * k as f64).collect(),
                Observe => vec![0.5, 1.0],
                _ => vec![1.0],
            },
        };
        if t.is_empty() || t.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(CliError::invalid(format!("T = {t:?}: times must be positive")));
        }
        let needed = match command {
            PolarCheck | LocalLemma | Spectral => 2 * degree,
            Observe | Control | Sweep => 2 * cutoff,
            Cover | Thickness | TuranFuzz => 2 * degree,
        };
        let quad_degree = cfg.quad_degree.unwrap_or(needed);
        if quad_degree < needed {
            return Err(CliError::invalid(format!(
                "quad_degree {quad_degree} is below the {needed} this command needs"
            )));
        }
        let trials = cfg.trials.unwrap_or(match command {
            TuranFuzz => 500,
            LocalLemma => 100,
            PolarCheck => 10,
            _ => 1,
        });
        let seeds = match (cfg.seeds, cfg.seed_file) {
            (Some(_), Some(_)) => return Err(CliError::invalid("give either seeds or seed_file, not both")),
            (Some(s), None) => s,
            (None, Some(path)) => read_seed_file(&path)?,
            (None, None) => {
                let base = cfg.seed.unwrap_or(0);
                (0..trials as u64).map(|k| base.wrapping_add(k)).collect()
            }
        };
        if seeds.is_empty() {
            return Err(CliError::invalid("no seeds: trials must be ≥ 1"));
        }
        let q = cfg.q.unwrap_or(2.0);
        if !(q >= 1.0) {
            return Err(CliError::invalid(format!("q = {q} must be ≥ 1")));
        }
        let tol = cfg.tol.unwrap_or(1e-8);
        if !(tol > 0.0) {
            return Err(CliError::invalid(format!("tol = {tol} must be positive")));
        }
        if let Some(a) = cfg.gamma_scale {
            if !(a > 0.0 && a <= r) {
                return Err(CliError::invalid(format!("gamma_scale = {a} must lie in (0, R]")));
            }
        }
        let gammas = cfg.gammas.unwrap_or_else(|| vec![0.02, 0.05]);
        if gammas.is_empty() || gammas.iter().any(|g| !(*g > 0.0 && *g <= (-1.0f64).exp())) {
            return Err(CliError::invalid(format!("gammas = {gammas:?} must lie in (0, 1/e]")));
        }
        Ok(ResolvedConfig {
            command,
            d,
            r,
            region: cfg.region.unwrap_or(RegionSpec::Full {}),
            degree,
            cutoff,
            t,
            gamma_scale: cfg.gamma_scale,
            gammas,
            quad_degree,
            seeds,
            q,
            tol,
            c2: cfg.c2.unwrap_or(1.0),
            c: cfg.c.unwrap_or(1.0),
            grid: cfg.grid.unwrap_or(400),
            out: cfg.out,
            format: cfg.format.unwrap_or(Format::Json),
        })
    }
}

/// One integer per line; blank lines and `#` comments are skipped.
fn read_seed_file(path: &Path) -> Result<Vec<u64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read seed file {}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse().map_err(|e| CliError::invalid(format!("seed file line {l:?}: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_keys() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"d":3,"radius":1}"#).unwrap_err();
        assert!(err.to_string().contains("radius"));
        let ok: ExperimentConfig = serde_json::from_str(r#"{"d":2,"R":2.5,"T":[0.1,0.2],"format":"csv"}"#).unwrap();
        assert_eq!(ok.r, Some(2.5));
        assert_eq!(ok.t, Some(OneOrMany::Many(vec![0.1, 0.2])));
    }

    #[test]
    fn overlay_prefers_flags() {
        let file = ExperimentConfig { d: Some(2), seed: Some(4), ..Default::default() };
        let flags = ExperimentConfig { seed: Some(9), ..Default::default() };
        let merged = file.overlay(flags);
        assert_eq!((merged.d, merged.seed), (Some(2), Some(9)));
    }

    #[test]
    fn defaults_and_validation() {
        let r = ResolvedConfig::resolve(Command::TuranFuzz, ExperimentConfig::default()).unwrap();
        assert_eq!(r.seeds.len(), 500);
        let r = ResolvedConfig::resolve(Command::Sweep, ExperimentConfig::default()).unwrap();
        assert_eq!((r.cutoff, r.t.len(), r.quad_degree), (8, 10, 16));
        let bad = ExperimentConfig { d: Some(4), ..Default::default() };
        assert!(ResolvedConfig::resolve(Command::Spectral, bad).is_err());
        let bad = ExperimentConfig { quad_degree: Some(3), degree: Some(4), ..Default::default() };
        assert!(ResolvedConfig::resolve(Command::Spectral, bad).is_err());
        let bad = ExperimentConfig { gammas: Some(vec![0.5]), ..Default::default() };
        assert!(ResolvedConfig::resolve(Command::Sweep, bad).is_err());
    }
}
