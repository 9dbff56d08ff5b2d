//! Run configuration: a TOML file with one table per mode. Every field has a
//! default taken from the corresponding figure caption, so an empty file (or
//! none at all) reproduces the published curves.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SweepEnvCoupling,
    SweepEnvSqueezing,
    SweepModccr,
    Validate,
    PhaseMc,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Self::SweepEnvCoupling => "sweep-env-coupling",
            Self::SweepEnvSqueezing => "sweep-env-squeezing",
            Self::SweepModccr => "sweep-modccr",
            Self::Validate => "validate",
            Self::PhaseMc => "phase-mc",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default = "GridSpec::linear")]
    pub scale: Scale,
}

impl GridSpec {
    fn linear() -> Scale {
        Scale::Linear
    }

    pub const fn new(start: f64, stop: f64, points: usize, scale: Scale) -> Self {
        Self { start, stop, points, scale }
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }

    fn check(&self) -> Result<(), String> {
        if self.points < 2 {
            return Err(format!("grid needs at least 2 points, got {}", self.points));
        }
        if !(self.stop > self.start) {
            return Err(format!("grid stop {} must exceed start {}", self.stop, self.start));
        }
        if self.scale == Scale::Log && !(self.start > 0.0) {
            return Err("log grid needs a positive start".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvCouplingConfig {
    pub r: f64,
    pub m: Vec<f64>,
    pub lambda_tau: GridSpec,
    /// Prepends a `λτ = 0` row to the log grid.
    pub include_zero: bool,
    pub mu: f64,
}

impl Default for EnvCouplingConfig {
    fn default() -> Self {
        Self {
            r: 2.0,
            m: vec![0.0, 0.5, 1.0, 2.0],
            lambda_tau: GridSpec::new(1e-6, 1e-2, 41, Scale::Log),
            include_zero: true,
            mu: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSqueezingConfig {
    pub lambda_tau: f64,
    pub m: Vec<f64>,
    pub r: GridSpec,
    pub mu: f64,
}

impl Default for EnvSqueezingConfig {
    fn default() -> Self {
        Self {
            lambda_tau: 1e-3,
            m: vec![0.0, 0.5, 1.0, 2.0],
            r: GridSpec::new(0.25, 3.0, 56, Scale::Linear),
            mu: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModccrConfig {
    pub epsilon: Vec<f64>,
    pub r: GridSpec,
    /// Adds Fock-oracle values for grid points with `r ≤ oracle_r_max`.
    pub oracle: bool,
    pub oracle_r_max: f64,
    /// Tail tolerance used to size the oracle cutoff when none is given.
    pub oracle_tail: f64,
}

impl Default for ModccrConfig {
    fn default() -> Self {
        Self {
            epsilon: vec![0.01, 0.05, 0.1],
            r: GridSpec::new(0.25, 3.0, 56, Scale::Linear),
            oracle: true,
            oracle_r_max: 1.2,
            oracle_tail: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseMcConfig {
    pub r: f64,
    pub mu: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub samples: usize,
    pub h: f64,
    pub phi1_0: f64,
    pub phi2_0: f64,
}

impl Default for PhaseMcConfig {
    fn default() -> Self {
        Self { r: 0.6, mu: 0.8, sigma1: 1e-2, sigma2: 1e-2, rho: 0.5, samples: 100_000, h: 1e-3, phi1_0: 0.0, phi2_0: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    #[default]
    None,
    /// Flips the sign of the initial-covariance term in the evolution law.
    EvolveSign,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub fault: Fault,
}

/// File contents; every table is optional.
#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub cutoff: Option<usize>,
    pub workers: Option<usize>,
    #[serde(rename = "sweep-env-coupling")]
    pub env_coupling: EnvCouplingConfig,
    #[serde(rename = "sweep-env-squeezing")]
    pub env_squeezing: EnvSqueezingConfig,
    #[serde(rename = "sweep-modccr")]
    pub modccr: ModccrConfig,
    #[serde(rename = "phase-mc")]
    pub phase_mc: PhaseMcConfig,
    pub validate: ValidateConfig,
}

/// Everything one run needs, after defaults and command-line overrides.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub cutoff: Option<usize>,
    pub workers: Option<usize>,
    pub file: FileConfig,
}

impl RunConfig {
    /// Only the tables that affect this mode, for the output header.
    pub fn echo(&self) -> serde_json::Value {
        let section = match self.mode {
            Mode::SweepEnvCoupling => serde_json::to_value(&self.file.env_coupling),
            Mode::SweepEnvSqueezing => serde_json::to_value(&self.file.env_squeezing),
            Mode::SweepModccr => serde_json::to_value(&self.file.modccr),
            Mode::PhaseMc => serde_json::to_value(&self.file.phase_mc),
            Mode::Validate => serde_json::to_value(&self.file.validate),
        }
        .expect("config tables serialize");
        serde_json::json!({
            "mode": self.mode.name(),
            "seed": self.seed,
            "cutoff": self.cutoff,
            self.mode.name(): section,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub cutoff: Option<usize>,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[table]` (or at top level for `table = ""`).
fn locate(src: &str, table: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().trim_matches('"').to_string();
            if current == table && key.is_empty() {
                return Some(i + 1);
            }
            continue;
        }
        if current == table {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

struct Checker<'a> {
    src: &'a str,
}

impl Checker<'_> {
    fn fail(&self, table: &str, key: &str, message: impl Into<String>) -> CliError {
        let line = locate(self.src, table, key).or_else(|| locate(self.src, table, ""));
        let field = if table.is_empty() { key.to_string() } else { format!("{table}.{key}") };
        CliError::Config { line, message: format!("{field}: {}", message.into()) }
    }

    fn ensure(&self, ok: bool, table: &str, key: &str, message: impl Into<String>) -> CliResult<()> {
        if ok {
            Ok(())
        } else {
            Err(self.fail(table, key, message))
        }
    }

    fn grid(&self, table: &str, key: &str, g: &GridSpec) -> CliResult<()> {
        g.check().map_err(|m| self.fail(table, key, m))
    }

    fn non_negative(&self, table: &str, key: &str, v: f64) -> CliResult<()> {
        self.ensure(v >= 0.0 && v.is_finite(), table, key, format!("must be a finite value ≥ 0, got {v}"))
    }

    fn list(&self, table: &str, key: &str, vs: &[f64]) -> CliResult<()> {
        self.ensure(!vs.is_empty(), table, key, "list must not be empty")?;
        vs.iter().try_for_each(|&v| self.non_negative(table, key, v))
    }
}

pub fn parse_file(src: &str) -> CliResult<FileConfig> {
    let file: FileConfig = toml::from_str(src).map_err(|e| CliError::Config {
        line: e.span().map(|Range { start, .. }| line_of(src, start)),
        message: e.message().trim().to_string(),
    })?;
    validate(&file, src)?;
    Ok(file)
}

fn validate(f: &FileConfig, src: &str) -> CliResult<()> {
    let c = Checker { src };
    c.ensure(f.workers != Some(0), "", "workers", "must be at least 1")?;
    if let Some(n) = f.cutoff {
        c.ensure(n >= 2, "", "cutoff", format!("n_max must be at least 2, got {n}"))?;
    }

    let t = "sweep-env-coupling";
    let e = &f.env_coupling;
    c.ensure(e.r > 0.0 && e.r.is_finite(), t, "r", "squeezing must be positive")?;
    c.list(t, "m", &e.m)?;
    c.grid(t, "lambda_tau", &e.lambda_tau)?;
    c.non_negative(t, "lambda_tau", e.lambda_tau.start)?;
    c.ensure(e.mu != 0.0, t, "mu", "coherent amplitude must be nonzero")?;

    let t = "sweep-env-squeezing";
    let s = &f.env_squeezing;
    c.non_negative(t, "lambda_tau", s.lambda_tau)?;
    c.list(t, "m", &s.m)?;
    c.grid(t, "r", &s.r)?;
    c.ensure(s.r.start > 0.0, t, "r", "squeezing grid must start above 0")?;
    c.ensure(s.mu != 0.0, t, "mu", "coherent amplitude must be nonzero")?;

    let t = "sweep-modccr";
    let m = &f.modccr;
    c.ensure(!m.epsilon.is_empty(), t, "epsilon", "list must not be empty")?;
    for &eps in &m.epsilon {
        c.ensure(eps.abs() <= 0.2, t, "epsilon", format!("|{eps}| exceeds the first-order bound 0.2"))?;
    }
    c.grid(t, "r", &m.r)?;
    c.ensure(m.r.start > 0.0, t, "r", "squeezing grid must start above 0")?;
    c.ensure((0.0..=1.2).contains(&m.oracle_r_max), t, "oracle_r_max", "oracle covers 0 ≤ r ≤ 1.2")?;
    c.ensure(m.oracle_tail > 0.0 && m.oracle_tail < 1.0, t, "oracle_tail", "must lie in (0, 1)")?;

    let t = "phase-mc";
    let p = &f.phase_mc;
    c.non_negative(t, "r", p.r)?;
    c.ensure(p.mu != 0.0, t, "mu", "coherent amplitude must be nonzero")?;
    c.non_negative(t, "sigma1", p.sigma1)?;
    c.non_negative(t, "sigma2", p.sigma2)?;
    c.ensure((-1.0..=1.0).contains(&p.rho), t, "rho", "correlation must lie in [-1, 1]")?;
    c.ensure(p.samples >= 1000, t, "samples", format!("need at least 1000 samples, got {}", p.samples))?;
    c.ensure((1e-4..=1e-2).contains(&p.h), t, "h", "finite-difference step must lie in [1e-4, 1e-2]")?;
    Ok(())
}

pub fn resolve(mode: Mode, file: FileConfig, overrides: &Overrides) -> CliResult<RunConfig> {
    let cutoff = overrides.cutoff.or(file.cutoff);
    if let Some(n) = cutoff {
        if n < 2 {
            return Err(CliError::Config { line: None, message: format!("--cutoff: n_max must be at least 2, got {n}") });
        }
    }
    Ok(RunConfig {
        mode,
        seed: overrides.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        cutoff,
        workers: file.workers,
        file,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_caption_defaults() {
        let f = parse_file("").unwrap();
        assert_eq!(f.env_coupling.r, 2.0);
        assert_eq!(f.env_squeezing.lambda_tau, 1e-3);
        assert_eq!(f.env_squeezing.r.values().len(), 56);
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let err = parse_file("seed = 3\n[phase-mc]\nrho = = 1\n").unwrap_err();
        assert!(matches!(err, CliError::Config { line: Some(3), .. }), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_file("[sweep-modccr]\nepsilon = [0.1]\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, CliError::Config { line: Some(3), .. }), "{err}");
    }

    #[test]
    fn semantic_errors_carry_lines() {
        let src = "[sweep-env-squeezing]\nlambda_tau = 1e-3\nr = { start = 2.0, stop = 1.0, points = 10 }\n";
        let err = parse_file(src).unwrap_err();
        assert!(matches!(err, CliError::Config { line: Some(3), .. }), "{err}");
        let src = "[phase-mc]\n\nsamples = 10\n";
        assert!(matches!(parse_file(src).unwrap_err(), CliError::Config { line: Some(3), .. }));
        let src = "[sweep-env-coupling]\nlambda_tau = { start = 1e-6, stop = 1e-2, points = 1, scale = \"log\" }\n";
        assert!(matches!(parse_file(src).unwrap_err(), CliError::Config { line: Some(2), .. }));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = GridSpec::new(1e-6, 1e-2, 5, Scale::Log).values();
        assert!((g[0] - 1e-6).abs() < 1e-20 && (g[4] - 1e-2).abs() < 1e-16);
        assert!((g[2] - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn overrides_win() {
        let f = parse_file("seed = 4\ncutoff = 10\n").unwrap();
        let r = resolve(Mode::PhaseMc, f, &Overrides { seed: Some(9), cutoff: None }).unwrap();
        assert_eq!((r.seed, r.cutoff), (9, Some(10)));
    }
}
