//! Named, reportable checks that compose the other modules.
//!
//! Every check produces a [`CheckReport`]; a failing sub-assertion or a
//! construction error is recorded in the report and never aborts a suite.

mod chain;
mod checks;

pub use chain::proof_chain_check;
pub use checks::{
    check_corollary5, check_lemma10, check_prop6, check_thm15, check_thm15_batch, check_thm9, check_trivial_piece,
    Thm9Outcome,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::parallel::Execution;
use crate::sample;
use crate::tuples::OperatorTuple;
use crate::Tolerances;

/// Scope statement carried by every report.
pub const REPORT_HEADER: &str = "Finite-dimensional check on a Fock space truncated at total degree M. \
The general statement is exercised only through its spherical-unitary and pure-tuple specializations, \
and truncated constructions are trusted only on the reported safe window.";

/// One measured quantity compared against a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub header: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub tolerances: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            header: REPORT_HEADER.to_string(),
            inputs: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            residuals: BTreeMap::new(),
            assertions: Vec::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    /// A report whose construction failed before any assertion could run.
    pub fn from_error(name: impl Into<String>, err: &Error) -> Self {
        let mut r = Self::new(name);
        r.note(format!("error: {err}"));
        r.assert_true("construction succeeded", false);
        r
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.inputs.insert(key.to_string(), v);
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    pub fn residual(&mut self, key: &str, value: f64) -> &mut Self {
        self.residuals.insert(key.to_string(), value);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    /// Records `measured ≤ bound`; NaN never passes.
    pub fn assert_le(&mut self, name: &str, measured: f64, bound: f64) -> bool {
        let pass = measured <= bound;
        self.push(name, measured, bound, pass)
    }

    /// Records exact equality of two counts.
    pub fn assert_count(&mut self, name: &str, measured: usize, expected: usize) -> bool {
        self.push(name, measured as f64, expected as f64, measured == expected)
    }

    pub fn assert_true(&mut self, name: &str, cond: bool) -> bool {
        self.push(name, if cond { 1.0 } else { 0.0 }, 1.0, cond)
    }

    fn push(&mut self, name: &str, measured: f64, bound: f64, pass: bool) -> bool {
        self.assertions.push(Assertion {
            name: name.to_string(),
            measured,
            bound,
            pass,
        });
        self.pass &= pass;
        pass
    }

    /// Names of the failed assertions.
    pub fn failures(&self) -> Vec<&str> {
        self.assertions.iter().filter(|a| !a.pass).map(|a| a.name.as_str()).collect()
    }
}

/// Suites accepted by [`run_suite`], in report order.
pub const SUITES: [&str; 6] = ["chain", "corollary5", "lemma10", "prop6", "thm15", "thm9"];

/// Pinned bounds used by the suites.
pub mod bounds {
    pub const PROP6_ANGLE: f64 = 1e-8;
    pub const THM15_ANGLE: f64 = 1e-7;
    pub const CUNTZ_WINDOW: f64 = 1e-12;
    pub const CHAIN_NORM: f64 = 1e-8;
    pub const CHAIN_IDENTITY: f64 = 1e-9;
    pub const COROLLARY5_ANGLE: f64 = 1e-8;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Truncation degree `M`.
    pub degree: usize,
    pub tol: Tolerances,
    pub seed: u64,
    /// Overrides the per-suite default number of random cases.
    pub trials: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            degree: 5,
            tol: Tolerances::default(),
            seed: 0,
            trials: None,
        }
    }
}

/// Runs one suite, or all of them for `"all"`, and returns the reports sorted by name.
pub fn run_suite(name: &str, config: &SuiteConfig, exec: Execution) -> Result<Vec<CheckReport>> {
    let mut reports = match name {
        "all" => exec.map(&SUITES, |s| single_suite(s, config, exec)).into_iter().flatten().collect(),
        s if SUITES.contains(&s) => single_suite(s, config, exec),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown suite {other:?}; expected one of {} or all",
                SUITES.join(", ")
            )))
        }
    };
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(reports)
}

fn single_suite(name: &str, cfg: &SuiteConfig, exec: Execution) -> Vec<CheckReport> {
    let tol = &cfg.tol;
    match name {
        "prop6" => vec![
            check_prop6(2, 4, bounds::PROP6_ANGLE, tol),
            check_prop6(3, 3, bounds::PROP6_ANGLE, tol),
        ],
        "thm15" => vec![
            check_thm15_batch(cfg.trials.unwrap_or(20), cfg.seed, cfg.degree, bounds::THM15_ANGLE, tol, exec),
            check_trivial_piece(cfg.degree.min(4).max(2), tol),
        ],
        "thm9" => thm9_suite(cfg),
        "lemma10" => vec![check_lemma10(cfg.trials.unwrap_or(200), (4, 4), cfg.seed, tol.rank_tol, exec)],
        "chain" => vec![chain_suite(cfg, exec)],
        "corollary5" => vec![check_corollary5(cfg.seed, cfg.trials.unwrap_or(50), bounds::COROLLARY5_ANGLE, tol, exec)],
        _ => unreachable!("suite names are validated by run_suite"),
    }
}

/// Smallest degree `≥ start` at which `‖Φ^{M+1}(I)‖ ≤ tol`, capped at `cap`.
fn purity_degree(t: &OperatorTuple, start: usize, cap: usize, tol: f64) -> usize {
    let decay = t.decay_sequence(cap + 1);
    (start..=cap).find(|&m| decay[m + 1] <= tol).unwrap_or(cap)
}

fn thm9_suite(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let tol = &cfg.tol;
    let mut rng = sample::rng(cfg.seed);
    let mut cases: Vec<(String, OperatorTuple, bool)> = Vec::new();
    for (n, dim) in [(2, 3), (3, 3)] {
        let t = sample::random_nilpotent_commuting(&mut rng, n, dim, sample::DEFAULT_MARGIN);
        cases.push((format!("thm9/commuting-n{n}-d{dim}"), t, true));
    }
    let c = sample::random_nilpotent_commuting(&mut rng, 2, 2, sample::DEFAULT_MARGIN);
    let half_flip = crate::tuples::flip_pair().scaled(0.5);
    match c.direct_sum(&half_flip) {
        Ok(t) => cases.push(("thm9/commuting-plus-half-flip".to_string(), t, false)),
        Err(e) => return vec![CheckReport::from_error("thm9/commuting-plus-half-flip", &e)],
    }
    cases
        .into_iter()
        .map(|(name, t, expected)| {
            let m = purity_degree(&t, cfg.degree.max(2), 60, tol.tol);
            match check_thm9(&t, m, 3, tol) {
                Ok(outcome) => {
                    let mut report = outcome.report;
                    report.name = name;
                    report.assert_true("defect criterion matches the construction", outcome.defect_criterion == expected);
                    report
                }
                Err(e) => CheckReport::from_error(name, &e),
            }
        })
        .collect()
}

fn chain_suite(cfg: &SuiteConfig, exec: Execution) -> CheckReport {
    let trials = cfg.trials.unwrap_or(10);
    let mut rng = sample::rng(cfg.seed);
    let cases: Vec<(OperatorTuple, Vec<Vector>)> = (0..trials)
        .map(|k| {
            let n = 2 + k % 2;
            let dim = 1 + (k % 4);
            let (z, _, _) = sample::random_spherical_unitary(&mut rng, n, dim);
            let h = (0..n).map(|_| sample::gaussian_vector(&mut rng, dim)).collect();
            (z, h)
        })
        .collect();
    let degree = cfg.degree.max(2);
    let results = exec.map(&cases, |(z, h)| {
        proof_chain_check(z, h, degree, bounds::CHAIN_NORM, bounds::CHAIN_IDENTITY, &cfg.tol)
    });
    let mut report = CheckReport::new("chain/random-spherical");
    report
        .input("cases", trials)
        .input("degree", degree)
        .input("seed", cfg.seed)
        .tolerance("norm", bounds::CHAIN_NORM)
        .tolerance("identity", bounds::CHAIN_IDENTITY);
    let mut worst_norm: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    let mut errors = 0;
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(sub) => {
                for (key, v) in &sub.residuals {
                    if key.starts_with("norm_deviation") {
                        worst_norm = worst_norm.max(*v);
                    } else if key.starts_with("identity") {
                        worst_identity = worst_identity.max(*v);
                    }
                }
                if !sub.pass {
                    report.note(format!("case {k} failed: {}", sub.failures().join(", ")));
                }
            }
            Err(e) => {
                errors += 1;
                report.note(format!("case {k}: {e}"));
            }
        }
    }
    report.residual("max_norm_deviation", worst_norm);
    report.residual("max_identity_residual", worst_identity);
    report.assert_count("case errors", errors, 0);
    report.assert_le("chain norms |‖x_m‖ − 1|", worst_norm, bounds::CHAIN_NORM);
    report.assert_le("telescoping identities", worst_identity, bounds::CHAIN_IDENTITY);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_bookkeeping() {
        let mut r = CheckReport::new("x");
        assert!(r.pass);
        r.assert_le("a", 1.0, 2.0);
        assert!(r.pass);
        r.assert_le("b", f64::NAN, 2.0);
        assert!(!r.pass);
        assert_eq!(r.failures(), vec!["b"]);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", &SuiteConfig::default(), Execution::Sequential).is_err());
    }

    #[test]
    fn prop6_suite_passes() {
        let reports = run_suite("prop6", &SuiteConfig::default(), Execution::Sequential).unwrap();
        assert_eq!(reports.len(), 2);
        for r in &reports {
            assert!(r.pass, "{r:?}");
        }
    }
}
