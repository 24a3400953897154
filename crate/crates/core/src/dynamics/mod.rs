//! Time integration, conjugation checks and shadowing experiments.

mod conjugation;
mod eval;
mod integrate;
mod shadow;

pub use conjugation::{pull_back, verify_conjugation, ConjugationReport};
pub use eval::{evaluate_field, CompiledField};
pub use integrate::{harmonic_drift, integrate, IntegratorOptions, Trajectory};
pub use shadow::{
    damped_reference, shadowing_experiment, DampedReference, ShadowOptions, ShadowReport, PLOT_SCRIPT,
};

use crate::normalform::NormalFormError;
use crate::twolayer::TwoLayerError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("point outside the analyticity domain: {0}")]
    OutOfDomain(String),
    #[error("trajectory left the domain at t = {t:.6e} (|x| = {norm:.6e} > {radius:.6e})")]
    DomainExit { t: f64, norm: f64, radius: f64 },
    #[error("step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step limit {0} reached")]
    MaxSteps(usize),
    #[error("Newton iteration failed to converge (residual {residual:.3e} after {iterations} iterations)")]
    NewtonFailed { iterations: usize, residual: f64 },
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
    #[error(transparent)]
    TwoLayer(#[from] TwoLayerError),
}
