//! Two-layer spin-orbit model: parameters, vector fields, linear spectrum,
//! constants and the four-step normalization pipeline.

mod budget;
mod model;
mod params;
mod pipeline;
mod spectrum;

pub use budget::{compute_budget, BudgetConstants, Gamma1Rule};
pub use model::{
    build_full_field, build_linearized_field, equilibrium, linear_block, Equilibrium, LinearBlock, LinearizedModel,
    PerturbationSet, ANGLE_DIM, SLOW_DIM,
};
pub use params::{restoring_coefficient, sample_admissible, TwoLayerParams};
pub use pipeline::{
    main_pipeline, reference_config, reference_perturbations, PipelineConfig, PipelineReport, StageSummary,
    DEFAULT_PRUNE_REL,
};
pub use spectrum::{
    characteristic_roots, pencil_bounds, reduce_to_pencil, solve_spectrum, PencilBounds, QuadraticPencil, Spectrum,
};

use crate::normalform::NormalFormError;
use crate::tfseries::SeriesError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwoLayerError {
    #[error("invalid parameters: {condition} ({detail})")]
    InvalidParams { condition: String, detail: String },
    #[error("no equilibrium: ups |v0| / c2 = {ratio:.6} must be below 1")]
    NoEquilibrium { ratio: f64 },
    #[error("perturbation P~ must have zero angle average (component {component}, size {size:.3e})")]
    PerturbationAverageNonzero { component: usize, size: f64 },
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("eigenvalue {index} has real part {re:.6e} outside the window [{lo:.6e}, {hi:.6e}]")]
    WindowViolation { index: usize, re: f64, lo: f64, hi: f64 },
    #[error("eigenvector basis is singular")]
    SingularEigenbasis,
    #[error("{stage}: {source}")]
    NormalForm { stage: String, source: NormalFormError },
    #[error("{stage}: {condition} (value {value:.6e}, bound {bound:.6e})")]
    BudgetViolated { stage: String, condition: String, value: f64, bound: f64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}
