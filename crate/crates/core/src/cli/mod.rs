//! Configuration, command implementations and property suites behind the
//! `nqp` binary. Every command returns a [`CommandOutcome`]; errors map to
//! exit codes through [`CliError::exit_code`].

mod commands;
mod config;
mod verify;

pub use commands::{
    VERIFY_CONJUGATION_TOL,
    cmd_export_field, cmd_normalize, cmd_pipeline, cmd_shadow, cmd_simulate, cmd_spectrum, cmd_verify,
    CommandOutcome,
};
pub use config::{NormalizeField, NormalizeSpec, PerturbationSource, RunConfig};
pub use verify::{random_field, run_suite, CaseResult, RandomFieldSpec, Suite, SuiteReport};

use std::path::PathBuf;

use crate::dynamics::DynamicsError;
use crate::normalform::{format_point, NormalFormError};
use crate::tfseries::SeriesError;
use crate::twolayer::TwoLayerError;
use thiserror::Error;

/// Exit code of a passing run.
pub const EXIT_PASS: i32 = 0;
/// Exit code for I/O, parse errors and unknown names.
pub const EXIT_IO: i32 = 1;
/// Exit code for violated preconditions and failed invariants.
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("config {path}, line {line}: {message}")]
    Config { path: PathBuf, line: usize, message: String },
    #[error("invalid setting: {0}")]
    Setting(String),
    #[error("unknown suite '{0}' (expected one of: cauchy, bracket, lie-tail, homological, conjugation, pencil, ultraviolet)")]
    UnknownSuite(String),
    #[error("series file: {0}")]
    Series(SeriesError),
    /// A mathematical precondition or invariant failed; the message names it.
    #[error("violated condition: {0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) => EXIT_VIOLATION,
            _ => EXIT_IO,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> CliError {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

/// Names the condition behind a normal-form failure by its content.
pub fn describe_normal_form(err: &NormalFormError) -> String {
    match err.root() {
        NormalFormError::KSigmaTooSmall { k_sigma } => {
            format!("tail condition K sigma_bar >= log 12 (K sigma_bar = {k_sigma:.6})")
        }
        NormalFormError::SmallnessViolated { condition, value } => {
            format!("smallness condition {condition} (value {value:.6e})")
        }
        NormalFormError::ResonanceFound { point, m, value, gamma } => format!(
            "nonresonance condition |lambda.alpha + i omega.k| >= gamma at {} (|divisor| = {value:.3e}, gamma = {gamma:.3e})",
            format_point(point, *m)
        ),
        NormalFormError::SmallDivisor { index, value, gamma, .. } => format!(
            "nonresonance condition |lambda.alpha + i omega.k| >= gamma at {index} (|divisor| = {value:.3e}, gamma = {gamma:.3e})"
        ),
        NormalFormError::DivergentSeries { q } => format!("Lie-series contraction e[[Y]] < 1 (q = {q:.6})"),
        NormalFormError::PreconditionViolated(s) => format!("precondition: {s}"),
        e => e.to_string(),
    }
}

/// Names the condition behind a model failure by its content.
pub fn describe_two_layer(err: &TwoLayerError) -> String {
    match err {
        TwoLayerError::InvalidParams { condition, detail } => format!("{condition} ({detail})"),
        TwoLayerError::NoEquilibrium { ratio } => {
            format!("equilibrium existence ups |v0| / c2 < 1 (ratio = {ratio:.6})")
        }
        TwoLayerError::PerturbationAverageNonzero { component, size } => format!(
            "zero angle average of the oscillating perturbation (component {}, size {size:.3e})",
            component + 1
        ),
        TwoLayerError::DegenerateSpectrum(s) => format!("two distinct complex-conjugate eigenvalue pairs ({s})"),
        TwoLayerError::WindowViolation { index, re, lo, hi } => format!(
            "Rayleigh-quotient window for Re lambda_{} = {re:.6e} not in [{lo:.6e}, {hi:.6e}]",
            index + 1
        ),
        TwoLayerError::SingularEigenbasis => "invertible eigenvector matrix".into(),
        TwoLayerError::NormalForm { stage, source } => format!("{stage}: {}", describe_normal_form(source)),
        TwoLayerError::BudgetViolated {
            stage,
            condition,
            value,
            bound,
        } => format!("{stage}: {condition} (value {value:.6e} > bound {bound:.6e})"),
        TwoLayerError::Series(e) => e.to_string(),
    }
}

impl From<TwoLayerError> for CliError {
    fn from(e: TwoLayerError) -> Self {
        match e {
            TwoLayerError::Series(s) => CliError::Series(s),
            e => CliError::Violation(describe_two_layer(&e)),
        }
    }
}

impl From<NormalFormError> for CliError {
    fn from(e: NormalFormError) -> Self {
        match e.root() {
            NormalFormError::Series(s) => CliError::Series(s.clone()),
            _ => CliError::Violation(describe_normal_form(&e)),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::NormalForm(n) => n.into(),
            DynamicsError::TwoLayer(t) => t.into(),
            DynamicsError::InvalidOption(s) => CliError::Setting(s),
            e => CliError::Violation(e.to_string()),
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::DomainShrink { .. } | SeriesError::InvalidDomain(_) => CliError::Violation(e.to_string()),
            e => CliError::Series(e),
        }
    }
}
