use clap::ValueEnum;
use dilation_core::Tolerances;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SEED_ENV: &str = "DILATION_LAB_SEED";

/// Largest matrix dump, in complex entries, written without complaint.
pub const DEFAULT_DUMP_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Truncation degree `M`.
    pub degree: usize,
    pub tol: f64,
    pub rank_tol: f64,
    pub seed: u64,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            degree: 5,
            tol: 1e-10,
            rank_tol: 1e-9,
            seed: 0,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.degree < 2 {
            return Err(CliError::Input(format!("degree must be at least 2, got {}", self.degree)));
        }
        for (name, v) in [("tol", self.tol), ("rank-tol", self.rank_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Input(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances::default().with_tol(self.tol).with_rank_tol(self.rank_tol)
    }

    /// Applies the seed override from the environment, if set.
    pub fn apply_env(&mut self, value: Option<String>) -> Result<(), CliError> {
        if let Some(v) = value {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
        }
        Ok(())
    }
}
