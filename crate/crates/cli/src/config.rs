//! Run configuration: defaults, then the `--config` file, then flags.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use spacelike_core::estimate::PlaneBump;
use spacelike_core::io::Encoding;
use spacelike_core::problem::ProblemSpec;

use crate::CliError;

/// Overrides the output directory of the config file.
pub const OUT_DIR_ENV: &str = "SPACELIKE_OUT_DIR";
pub const DEFAULT_OUT: &str = "spacelike-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Analyze,
    VerifyEstimate,
    RigidityTrend,
    Codim2,
    HyperbolicSelftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Analyze => "analyze",
            Command::VerifyEstimate => "verify-estimate",
            Command::RigidityTrend => "rigidity-trend",
            Command::Codim2 => "codim2",
            Command::HyperbolicSelftest => "hyperbolic-selftest",
        }
    }
}

/// Per-command numeric overrides. Each command reads the ones it uses.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
    #[serde(default, rename = "H", skip_serializing_if = "Option::is_none")]
    pub mean_curvature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Sample count for the hyperbolic self-test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Number of random fields in the codim-2 suite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<usize>,
}

impl Overrides {
    fn merge(&mut self, other: Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(grid, mean_curvature, c, a_list, tol, samples, fields);
    }
}

/// Contents of a `--config` file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub input: Option<PathBuf>,
    pub problem: Option<ProblemSpec>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub deterministic: Option<bool>,
    #[serde(default)]
    pub overrides: Overrides,
    pub family: Option<PlaneBump>,
    pub encoding: Option<Encoding>,
}

impl FileConfig {
    /// Relative `input` paths are taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: FileConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Schema(format!("config {}: {e}", path.display())))?;
        if let (Some(input), Some(dir)) = (&cfg.input, path.parent()) {
            if input.is_relative() {
                cfg.input = Some(dir.join(input));
            }
        }
        Ok(cfg)
    }
}

/// Flag values; `None` leaves the config file's value in place.
#[derive(Clone, Debug, Default)]
pub struct FlagConfig {
    pub config: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub deterministic: bool,
    pub overrides: Overrides,
    pub encoding: Option<Encoding>,
}

/// The resolved configuration, embedded in every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub problem: Option<ProblemSpec>,
    pub out: PathBuf,
    pub seed: u64,
    pub deterministic: bool,
    pub overrides: Overrides,
    pub family: Option<PlaneBump>,
    pub encoding: Encoding,
}

impl RunConfig {
    /// Precedence for the output directory: `--out`, then the environment
    /// variable, then the config file, then the default.
    pub fn resolve(command: Command, flags: FlagConfig) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        if let Some(c) = file.command {
            if c != command {
                return Err(CliError::Schema(format!(
                    "config is for command {}, not {}",
                    c.name(),
                    command.name()
                )));
            }
        }
        let mut overrides = file.overrides;
        overrides.merge(flags.overrides);
        let out = flags
            .out
            .or_else(|| env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let cfg = RunConfig {
            command,
            input: flags.input.or(file.input),
            problem: file.problem,
            out,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            deterministic: flags.deterministic || file.deterministic.unwrap_or(false),
            overrides,
            family: file.family,
            encoding: flags.encoding.or(file.encoding).unwrap_or(Encoding::Csv),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let o = &self.overrides;
        let schema = |msg: String| Err(CliError::Schema(msg));
        if let Some(grid) = &o.grid {
            if grid.is_empty() || grid.iter().any(|&n| n < 5) {
                return schema(format!("grid sizes must be at least 5, got {grid:?}"));
            }
        }
        if let Some(a) = &o.a_list {
            if a.is_empty() || a.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return schema(format!("a-list must hold positive values, got {a:?}"));
            }
        }
        if let Some(c) = o.c {
            if !(c > 0.0 && c.is_finite()) {
                return schema(format!("c must be positive, got {c}"));
            }
        }
        if let Some(t) = o.tol {
            if !(t > 0.0 && t.is_finite()) {
                return schema(format!("tol must be positive, got {t}"));
            }
        }
        if let Some(h) = o.mean_curvature {
            if !h.is_finite() {
                return schema(format!("H must be finite, got {h}"));
            }
        }
        if self.input.is_some() && self.problem.is_some() {
            return schema("give either input or an inline problem, not both".into());
        }
        if let Some(path) = &self.input {
            if !path.exists() {
                return Err(CliError::Io(format!("input {} does not exist", path.display())));
            }
        }
        Ok(())
    }
}
