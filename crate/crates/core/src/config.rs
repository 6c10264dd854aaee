//! Experiment configuration: a versioned defaults file plus overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::SampleMode;
use crate::recolor::{Criterion, Strategy};
use crate::tree::Mode;

pub const DEFAULTS_TOML: &str = include_str!("../config/defaults.toml");
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config version {0} is not supported (expected {CONFIG_VERSION})")]
    Version(u32),
    #[error("config value `{0}` is missing from [common]")]
    Missing(&'static str),
    #[error("invalid value for {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Tree,
    Graph,
    Maxcut,
    Cycles,
    Internal,
}

/// Any subset of the configurable values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Section {
    pub d: Option<usize>,
    pub eps: Option<f64>,
    pub mode: Option<Mode>,
    pub prune_threshold: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub criterion: Option<Criterion>,
    pub strategy: Option<Strategy>,
    pub sample_mode: Option<SampleMode>,
    pub kmax: Option<usize>,
    pub max_moves: Option<usize>,
    pub schedule: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Section {
    /// Values of `self`, falling back to `base`.
    pub fn or(&self, base: &Section) -> Section {
        Section {
            d: self.d.or(base.d),
            eps: self.eps.or(base.eps),
            mode: self.mode.or(base.mode),
            prune_threshold: self.prune_threshold.or(base.prune_threshold),
            n: self.n.or(base.n),
            seed: self.seed.or(base.seed),
            reps: self.reps.or(base.reps),
            criterion: self.criterion.or(base.criterion),
            strategy: self.strategy.or(base.strategy),
            sample_mode: self.sample_mode.or(base.sample_mode),
            kmax: self.kmax.or(base.kmax),
            max_moves: self.max_moves.or(base.max_moves),
            schedule: self.schedule.clone().or_else(|| base.schedule.clone()),
            out: self.out.clone().or_else(|| base.out.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    pub config_version: u32,
    pub common: Section,
    #[serde(default)]
    pub tree: Section,
    #[serde(default)]
    pub graph: Section,
    #[serde(default)]
    pub maxcut: Section,
    #[serde(default)]
    pub cycles: Section,
    #[serde(default)]
    pub internal: Section,
}

impl Defaults {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let d: Defaults = toml::from_str(text)?;
        if d.config_version != CONFIG_VERSION {
            return Err(ConfigError::Version(d.config_version));
        }
        Ok(d)
    }

    /// The defaults compiled into the binary.
    pub fn builtin() -> Self {
        Defaults::parse(DEFAULTS_TOML).expect("built-in defaults parse")
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Defaults::parse(&text)
    }

    pub fn section(&self, cmd: Subcommand) -> &Section {
        match cmd {
            Subcommand::Tree => &self.tree,
            Subcommand::Graph => &self.graph,
            Subcommand::Maxcut => &self.maxcut,
            Subcommand::Cycles => &self.cycles,
            Subcommand::Internal => &self.internal,
        }
    }
}

/// Fully resolved settings of one invocation; embedded in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub config_version: u32,
    pub subcommand: Subcommand,
    pub d: usize,
    pub eps: f64,
    pub mode: Mode,
    pub prune_threshold: f64,
    pub n: usize,
    pub master_seed: u64,
    pub repetitions: usize,
    pub criterion: Criterion,
    pub strategy: Strategy,
    pub sample_mode: SampleMode,
    pub kmax: usize,
    pub max_moves: usize,
    pub schedule: Option<PathBuf>,
    pub out: PathBuf,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    /// Flags, then the subcommand's table, then `[common]`.
    pub fn resolve(cmd: Subcommand, defaults: &Defaults, flags: &Section) -> Result<Self, ConfigError> {
        let s = flags.or(defaults.section(cmd)).or(&defaults.common);
        let c = ExperimentConfig {
            config_version: defaults.config_version,
            subcommand: cmd,
            d: s.d.ok_or(ConfigError::Missing("d"))?,
            eps: s.eps.ok_or(ConfigError::Missing("eps"))?,
            mode: s.mode.ok_or(ConfigError::Missing("mode"))?,
            prune_threshold: s.prune_threshold.ok_or(ConfigError::Missing("prune_threshold"))?,
            n: s.n.ok_or(ConfigError::Missing("n"))?,
            master_seed: s.seed.ok_or(ConfigError::Missing("seed"))?,
            repetitions: s.reps.ok_or(ConfigError::Missing("reps"))?,
            criterion: s.criterion.ok_or(ConfigError::Missing("criterion"))?,
            strategy: s.strategy.ok_or(ConfigError::Missing("strategy"))?,
            sample_mode: s.sample_mode.ok_or(ConfigError::Missing("sample_mode"))?,
            kmax: s.kmax.ok_or(ConfigError::Missing("kmax"))?,
            max_moves: s.max_moves.ok_or(ConfigError::Missing("max_moves"))?,
            schedule: s.schedule,
            out: s.out.ok_or(ConfigError::Missing("out"))?,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.d < 2 {
            return Err(invalid("d", format!("degree must be at least 2, got {}", self.d)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid("eps", format!("must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.prune_threshold >= 0.0) {
            return Err(invalid("prune_threshold", "must be nonnegative"));
        }
        if self.subcommand != Subcommand::Tree {
            if self.n < self.d + 1 {
                return Err(invalid("n", format!("need n > d, got n={} d={}", self.n, self.d)));
            }
            if self.n * self.d % 2 == 1 {
                return Err(invalid("n", format!("n*d must be even, got n={} d={}", self.n, self.d)));
            }
            if self.repetitions == 0 {
                return Err(invalid("reps", "must be positive"));
            }
        }
        if !(3..=crate::graph::MAX_CYCLE_LENGTH).contains(&self.kmax) {
            return Err(invalid("kmax", format!("must lie in 3..={}", crate::graph::MAX_CYCLE_LENGTH)));
        }
        Ok(())
    }
}
