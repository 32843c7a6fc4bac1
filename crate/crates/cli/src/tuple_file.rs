//! On-disk tuple format: `matrices[i][row][col] = [re, im]`.

use std::fs;
use std::path::Path;

use dilation_core::{Mat, OperatorTuple, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub n: usize,
    pub dim: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

impl TupleFile {
    pub fn from_tuple(t: &OperatorTuple) -> Self {
        let d = t.dim();
        let matrices = t
            .matrices()
            .iter()
            .map(|m| (0..d).map(|r| (0..d).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect())
            .collect();
        Self {
            name: None,
            description: None,
            n: t.n(),
            dim: d,
            matrices,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Checks shape consistency and finiteness.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 {
            return Err(CliError::Input("tuple must have n ≥ 1 matrices".into()));
        }
        if self.matrices.len() != self.n {
            return Err(CliError::Input(format!(
                "n = {} but {} matrices were given",
                self.n,
                self.matrices.len()
            )));
        }
        for (i, m) in self.matrices.iter().enumerate() {
            if m.len() != self.dim || m.iter().any(|row| row.len() != self.dim) {
                return Err(CliError::Input(format!(
                    "matrix {} is not {}×{}",
                    i + 1,
                    self.dim,
                    self.dim
                )));
            }
            if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
                return Err(CliError::Input(format!("matrix {} has a non-finite entry", i + 1)));
            }
        }
        Ok(())
    }

    pub fn to_tuple(&self) -> Result<OperatorTuple, CliError> {
        self.validate()?;
        let d = self.dim;
        let matrices = self
            .matrices
            .iter()
            .map(|m| Mat::from_fn(d, d, |r, c| C64::new(m[r][c][0], m[r][c][1])))
            .collect();
        Ok(OperatorTuple::new(matrices)?)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: TupleFile = serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed tuple file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tuple files always serialize")
    }
}
