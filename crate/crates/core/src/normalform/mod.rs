//! Homological equation, Lie series and the iterated normal form.

mod frequencies;
mod homological;
mod iteration;
mod ledger;
mod lie;

pub use frequencies::{check_lambda_resonant, check_nonresonant, Frequencies, NonresonanceCertificate};
pub use homological::solve_homological;
pub use iteration::{
    default_c_star, iteration_step, normalize, single_harmonic, GeneratorStep, NormalFormOutcome, StepOutcome,
    CLOSE_TO_ID_SAMPLES, CLOSE_TO_ID_SEED,
};
pub use ledger::{Ledger, LedgerRow, LEDGER_SLACK};
pub use lie::{
    contraction_factor, lie_series_apply, sample_close_to_identity, terms_for_tail, time_one_map, LieSeries,
    LIE_TAIL_TARGET,
};

use crate::tfseries::{MultiIndex, SeriesError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalFormError {
    /// `point` is the signed lattice point `(alpha, k) - p_h` attaining the divisor.
    #[error("resonance: |divisor| = {value:.3e} < gamma = {gamma:.3e} at point {}", format_point(point, *m))]
    ResonanceFound { point: Vec<i64>, m: usize, value: f64, gamma: f64 },
    #[error("small divisor {value:.3e} < gamma = {gamma:.3e} in component {component} at index {index}")]
    SmallDivisor { component: usize, index: MultiIndex, value: f64, gamma: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("Lie series diverges: q = {q:.6} >= 1")]
    DivergentSeries { q: f64 },
    #[error("smallness violated: {condition} (value {value:.6e})")]
    SmallnessViolated { condition: String, value: f64 },
    #[error("K sigma_bar = {k_sigma:.6} is below log 12")]
    KSigmaTooSmall { k_sigma: f64 },
    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<NormalFormError> },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `(a_1,..,a_m;k_1,..,k_n)`.
pub fn format_point(point: &[i64], m: usize) -> String {
    let join = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    format!("({};{})", join(&point[..m]), join(&point[m..]))
}

impl NormalFormError {
    pub(crate) fn at_step(self, step: usize) -> NormalFormError {
        NormalFormError::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// The innermost error, without step annotations.
    pub fn root(&self) -> &NormalFormError {
        match self {
            NormalFormError::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}
