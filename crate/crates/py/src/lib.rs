//! Python bindings: reference spectrum, pipeline ledger, property suites and
//! the CLI commands.

use std::path::PathBuf;

use num_complex::Complex64;
use nqp_core::cli::{self, CliError, RunConfig, Suite};
use nqp_core::tfseries::io::parse_field;
use nqp_core::tfseries::{Domain, DomainWeights};
use nqp_core::twolayer::{main_pipeline, reference_config, solve_spectrum};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn cli_err(e: CliError) -> PyErr {
    match e.exit_code() {
        cli::EXIT_VIOLATION => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Eigenvalues of the linearized block for the reference parameters.
#[pyfunction]
fn reference_spectrum() -> PyResult<Vec<Complex64>> {
    let s = solve_spectrum(&reference_config().params).map_err(err)?;
    Ok(s.eigenvalues.to_vec())
}

type LedgerTuple = (usize, String, f64, f64, bool);

/// Runs the reference pipeline with perturbations multiplied by `scale`;
/// returns the ledger as `(step, label, claimed, measured, pass)` rows.
#[pyfunction]
#[pyo3(signature = (scale = 1.0))]
fn pipeline_ledger(scale: f64) -> PyResult<Vec<LedgerTuple>> {
    let mut cfg = reference_config();
    cfg.perturbations = nqp_core::twolayer::reference_perturbations(scale);
    let r = main_pipeline(&cfg).map_err(err)?;
    Ok(r.ledger
        .rows()
        .iter()
        .map(|row| (row.step, row.label.clone(), row.claimed, row.measured, row.pass()))
        .collect())
}

/// Runs a property suite; returns `(pass, cases, violations, report)`.
#[pyfunction]
#[pyo3(signature = (suite, seed = 1, instances = None))]
fn verify(suite: &str, seed: u64, instances: Option<usize>) -> PyResult<(bool, usize, usize, String)> {
    let s: Suite = suite.parse().map_err(cli_err)?;
    let r = cli::run_suite(s, seed, instances, cli::VERIFY_CONJUGATION_TOL).map_err(cli_err)?;
    Ok((r.pass(), r.cases.len(), r.violations(), r.to_text()))
}

/// Weighted majorant norm of a field given in the series text format.
#[pyfunction]
#[pyo3(signature = (text, eps, s, weights = None))]
fn field_norm(text: &str, eps: f64, s: f64, weights: Option<Vec<f64>>) -> PyResult<f64> {
    let f = parse_field(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let w = weights.unwrap_or_else(|| vec![1.0; f.dim()]);
    if w.len() != f.dim() {
        return Err(PyValueError::new_err(format!("expected {} weights, got {}", f.dim(), w.len())));
    }
    let u = DomainWeights::new(Domain::new(eps, s), w).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(f.weighted_norm(&u))
}

/// Runs a CLI command; returns `(exit_code, summary, report)`.
#[pyfunction]
#[pyo3(signature = (command, out, config = None, seed = None, suite = None))]
fn run(
    command: &str,
    out: PathBuf,
    config: Option<PathBuf>,
    seed: Option<u64>,
    suite: Option<&str>,
) -> PyResult<(i32, String, String)> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(&p).map_err(cli_err)?,
        None => RunConfig::default(),
    };
    cfg.out_dir = out;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let outcome = match command {
        "spectrum" => cli::cmd_spectrum(&cfg),
        "normalize" => cli::cmd_normalize(&cfg),
        "pipeline" => cli::cmd_pipeline(&cfg),
        "shadow" => cli::cmd_shadow(&cfg),
        "simulate" => cli::cmd_simulate(&cfg),
        "export-field" => cli::cmd_export_field(&cfg),
        "verify" => cli::cmd_verify(&cfg, suite.ok_or_else(|| PyValueError::new_err("verify needs suite="))?),
        other => return Err(PyValueError::new_err(format!("unknown command '{other}'"))),
    };
    match outcome {
        Ok(o) => Ok((o.code, o.summary, o.report)),
        Err(e) => Ok((e.exit_code(), e.to_string(), String::new())),
    }
}

#[pymodule]
fn nqp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(reference_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(pipeline_ledger, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(field_norm, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
