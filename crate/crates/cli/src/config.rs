//! Experiment configuration and CLI error classes.

use thiserror::Error;

use ifi_core::lowerbound::{default_rows_per_block, BlockLayout, CodecError};
use ifi_core::sketch::{SketchError, SketchKind, SketchParams};
use ifi_core::Ratio64;

/// Command errors, classed by exit code: configuration problems exit 2,
/// I/O problems (including unreadable or corrupt files) exit 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn config(msg: impl std::fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn io(msg: impl std::fmt::Display) -> Self {
        CliError::Io(msg.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<SketchError> for CliError {
    fn from(e: SketchError) -> Self {
        match e {
            SketchError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Parse an exact fraction `p/q` (or a bare integer `p`). Floating-point
/// input is rejected: thresholds are compared exactly and a decimal
/// epsilon would silently change them.
pub fn parse_fraction(s: &str) -> Result<Ratio64, String> {
    if s.contains('.') {
        return Err(format!(
            "\"{s}\" looks like a float; give an exact fraction such as 1/4"
        ));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let p: u64 = num
        .trim()
        .parse()
        .map_err(|_| format!("bad numerator \"{num}\""))?;
    let q: u64 = den
        .trim()
        .parse()
        .map_err(|_| format!("bad denominator \"{den}\""))?;
    if q == 0 {
        return Err("denominator must be nonzero".to_string());
    }
    if p == 0 || p > q {
        return Err(format!("fraction {p}/{q} must lie in (0, 1]"));
    }
    Ok(Ratio64::new(p, q))
}

/// A fully-resolved experiment: every integrality constraint is checked
/// here, before any trial runs or file is touched.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub d: usize,
    pub epsilon: Ratio64,
    pub rows_per_block: usize,
    pub seed: u64,
    pub trials: usize,
    pub sketch_kind: SketchKind,
    pub sketch_epsilon: Ratio64,
}

impl ExperimentConfig {
    pub fn new(
        d: usize,
        epsilon: Ratio64,
        rows_per_block: Option<usize>,
        seed: u64,
        trials: usize,
        sketch_kind: SketchKind,
        sketch_epsilon: Option<Ratio64>,
    ) -> Result<Self, CliError> {
        BlockLayout::for_epsilon(d, epsilon).map_err(CliError::from)?;
        if trials == 0 {
            return Err(CliError::config("trials must be at least 1"));
        }
        let rows_per_block = rows_per_block.unwrap_or_else(|| default_rows_per_block(d));
        if rows_per_block == 0 {
            return Err(CliError::config("rows-per-block must be at least 1"));
        }
        let sketch_epsilon = sketch_epsilon.unwrap_or(epsilon / Ratio64::new(8, 1));
        SketchParams::new(sketch_epsilon, 2, d).map_err(CliError::from)?;
        Ok(ExperimentConfig {
            d,
            epsilon,
            rows_per_block,
            seed,
            trials,
            sketch_kind,
            sketch_epsilon,
        })
    }

    /// Seed of an individual trial, derived so any trial can be replayed
    /// alone: base seed plus trial index.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }
}
