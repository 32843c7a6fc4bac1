use std::fs;
use std::path::{Path, PathBuf};

use dilation_core::cuntz::{cuntz_residual, equivalent_spherical, spectral_atoms, spherical_decomposition_of, SphericalAtoms, DEFAULT_MERGE_TOL};
use dilation_core::dilate::{
    cuntz_state_rep, pure_embedding, schaeffer_dilation, standard_commuting_dilation_pure,
    symmetric_leakage, DilationResult, CLOSURE_CHECK_LIMIT,
};
use dilation_core::piece::{maximal_commuting_piece_with, PieceOptions};
use dilation_core::verify::{run_suite, SuiteConfig};
use dilation_core::{Execution, OperatorTuple};
use serde_json::{json, Value};

use crate::{CliError, Method, Report, RunConfig, TupleFile};

/// Distance below which two joint eigenvalues count as the same atom.
pub const EQUIVALENCE_TOL: f64 = 1e-8;

/// Slack on top of `10 · tail_bound` for the dilation invariants.
const INVARIANT_SLACK: f64 = 1e-9;

fn single_input(inputs: &[PathBuf]) -> Result<(TupleFile, OperatorTuple), CliError> {
    match inputs {
        [path] => {
            let file = TupleFile::read(path)?;
            let t = file.to_tuple()?;
            Ok((file, t))
        }
        [] => Err(CliError::Input("--input FILE is required".into())),
        _ => Err(CliError::Input("this command takes exactly one --input".into())),
    }
}

fn label(file: &TupleFile, path: &Path) -> String {
    file.name.clone().unwrap_or_else(|| path.display().to_string())
}

pub fn piece(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<Report, CliError> {
    let (file, t) = single_input(inputs)?;
    let tol = cfg.tolerances();
    let cross_check = t.dim() <= CLOSURE_CHECK_LIMIT;
    let p = maximal_commuting_piece_with(&t, &tol, PieceOptions { cross_check })?;
    let mut report = Report::new("piece", cfg);
    report.warnings = p.warnings.clone();
    if !cross_check {
        report
            .warnings
            .push(format!("closure cross-check skipped above dimension {CLOSURE_CHECK_LIMIT}"));
    }
    report.results.push(json!({
        "name": "piece",
        "input": label(&file, &inputs[0]),
        "n": t.n(),
        "dim": t.dim(),
        "piece_dim": p.subspace.dim(),
        "commutator_residual": p.residual,
        "coinvariance_residual": p.coinvariance_residual,
        "closure_dim": p.closure_dim,
        "duality_residual": p.duality_residual,
        "iterations": p.iterations,
        "piece": TupleFile::from_tuple(&p.piece),
        "pass": true,
    }));
    Ok(report)
}

fn build_dilation(cfg: &RunConfig, t: &OperatorTuple, method: Method) -> Result<DilationResult, CliError> {
    let tol = cfg.tolerances();
    let m = cfg.degree;
    Ok(match method {
        Method::Pure => pure_embedding(t, m, &tol)?,
        Method::Symmetric => standard_commuting_dilation_pure(t, m, &tol)?,
        Method::Schaeffer => schaeffer_dilation(t, m, &tol)?,
        Method::CuntzState => {
            if t.dim() != 1 {
                return Err(CliError::Input(format!(
                    "cuntz-state expects a point on the sphere as a tuple of 1×1 matrices, got dimension {}",
                    t.dim()
                )));
            }
            let w: Vec<_> = t.matrices().iter().map(|m| m[(0, 0)]).collect();
            cuntz_state_rep(&w, m, &tol)?
        }
    })
}

pub fn dilate(
    cfg: &RunConfig,
    inputs: &[PathBuf],
    method: Method,
    dump: Option<&Path>,
    dump_limit: usize,
) -> Result<Report, CliError> {
    let (file, t) = single_input(inputs)?;
    let dil = build_dilation(cfg, &t, method)?;
    if dump.is_some() {
        let entries = t.n().saturating_mul(dil.ambient_dim().saturating_mul(dil.ambient_dim()));
        if entries > dump_limit {
            return Err(CliError::DumpTooLarge {
                entries,
                limit: dump_limit,
            });
        }
    }
    let moment_degree = dil.safe_degree.min(3);
    let inv = dil.invariants(moment_degree)?;
    let bound = 10.0 * dil.tail_bound + INVARIANT_SLACK;
    let mut pass = inv.isometry <= bound && inv.adjoint <= bound && inv.moment <= bound;
    let window = dil.window_frame();
    let cuntz = match method {
        Method::Schaeffer | Method::CuntzState => Some(cuntz_residual(&dil.dilation, &window)),
        _ => None,
    };
    let coisometric = t.cuntz_row_residual() <= cfg.tol;
    if let (Some(c), true) = (cuntz, coisometric) {
        pass &= c <= INVARIANT_SLACK;
    }
    let leakage = match method {
        Method::Pure => Some(symmetric_leakage(&dil)),
        _ => None,
    };
    let mut report = Report::new("dilate", cfg);
    if matches!(method, Method::Schaeffer) && !coisometric {
        report
            .warnings
            .push("the input is not a coisometry, so the Cuntz relations are reported but not asserted".into());
    }
    report.results.push(json!({
        "name": "dilate",
        "input": label(&file, &inputs[0]),
        "method": method_name(method),
        "kind": dil.kind,
        "n": t.n(),
        "dim": t.dim(),
        "ambient_dim": dil.ambient_dim(),
        "base_dim": dil.dilation.base_dim(),
        "defect_rank": dil.defect_rank,
        "safe_degree": dil.safe_degree,
        "window_dim": window.ncols(),
        "tail_bound": dil.tail_bound,
        "invariants": inv,
        "invariant_bound": bound,
        "cuntz_window_residual": cuntz,
        "symmetric_leakage": leakage,
        "pass": pass,
    }));
    report.pass = pass;
    if let Some(path) = dump {
        let dense = dil.dilation.to_tuple()?;
        let out = TupleFile::from_tuple(&dense).with_name(format!("{} dilation of {}", method_name(method), label(&file, &inputs[0])));
        fs::write(path, out.to_json()).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    }
    Ok(report)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Pure => "pure",
        Method::Symmetric => "symmetric",
        Method::Schaeffer => "schaeffer",
        Method::CuntzState => "cuntz-state",
    }
}

/// Atoms of the spherical part of one input, with a JSON summary.
fn analyse(cfg: &RunConfig, t: &OperatorTuple, warnings: &mut Vec<String>) -> Result<(SphericalAtoms, Value), CliError> {
    let tol = cfg.tolerances();
    if t.is_spherical_unitary(cfg.tol) {
        let atoms = spectral_atoms(t, &tol, DEFAULT_MERGE_TOL, cfg.seed)?;
        let summary = json!({
            "input_kind": "spherical-unitary",
            "spherical_dim": t.dim(),
            "atoms": atoms,
        });
        return Ok((atoms, summary));
    }
    let row = t.cuntz_row_residual();
    if row > cfg.tol {
        return Err(CliError::Core(dilation_core::Error::CuntzViolation { residual: row }));
    }
    let dil = schaeffer_dilation(t, cfg.degree, &tol)?;
    let dec = spherical_decomposition_of(&dil, &tol)?;
    warnings.extend(dec.warnings.iter().cloned());
    let atoms = if dec.piece.dim() == 0 {
        SphericalAtoms {
            n: t.n(),
            atoms: Vec::new(),
            merge_tol: DEFAULT_MERGE_TOL,
            reconstruction_residual: 0.0,
        }
    } else {
        spectral_atoms(&dec.piece, &tol, DEFAULT_MERGE_TOL, cfg.seed)?
    };
    let summary = json!({
        "input_kind": "coisometry",
        "dilation_ambient_dim": dil.ambient_dim(),
        "safe_degree": dec.safe_degree,
        "piece_dim": dec.piece_subspace.dim(),
        "spherical_dim": dec.spherical_part.dim(),
        "residual_dim": dec.residual_part.dim(),
        "cuntz_window_residual": dec.cuntz_residual,
        "reducing_residual": dec.reducing_residual,
        "spherical_part": if dec.piece_subspace.dim() == 0 { "none" } else { "present" },
        "atoms": atoms,
    });
    Ok((atoms, summary))
}

pub fn classify(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<Report, CliError> {
    if inputs.is_empty() || inputs.len() > 2 {
        return Err(CliError::Input("classify takes one or two --input files".into()));
    }
    let mut report = Report::new("classify", cfg);
    let mut analysed = Vec::new();
    for path in inputs {
        let file = TupleFile::read(path)?;
        let t = file.to_tuple()?;
        let (atoms, mut summary) = analyse(cfg, &t, &mut report.warnings)?;
        summary["name"] = json!(label(&file, path));
        summary["pass"] = json!(true);
        report.results.push(summary);
        analysed.push(atoms);
    }
    if let [a, b] = analysed.as_slice() {
        let equivalent = equivalent_spherical(a, b, EQUIVALENCE_TOL);
        report.results.push(json!({
            "name": "equivalence",
            "verdict": if equivalent { "equivalent" } else { "inequivalent" },
            "equivalent": equivalent,
            "tolerance": EQUIVALENCE_TOL,
            "pass": true,
        }));
    }
    Ok(report)
}

pub fn check(cfg: &RunConfig, suite: &str, trials: Option<usize>, exec: Execution) -> Result<Report, CliError> {
    let suite_cfg = SuiteConfig {
        degree: cfg.degree,
        tol: cfg.tolerances(),
        seed: cfg.seed,
        trials,
    };
    let reports = run_suite(suite, &suite_cfg, exec).map_err(|e| CliError::Input(e.to_string()))?;
    let mut report = Report::new(&format!("check {suite}"), cfg);
    report.pass = reports.iter().all(|r| r.pass);
    report.results = reports
        .iter()
        .map(|r| serde_json::to_value(r).expect("check reports serialize"))
        .collect();
    Ok(report)
}
