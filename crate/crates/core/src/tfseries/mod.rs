//! Sparse Taylor–Fourier series, weighted norms, projectors and Lie brackets.

mod component;
mod domain;
mod field;
mod index;
pub mod io;
mod lattice;
mod sum;

pub use component::{component_norm, TFComponent, Var};
pub use domain::{tail_decay_rate, Domain, DomainWeights, TailRates};
pub use field::{
    lie_bracket, project_lattice, project_order, sup_field_norm, ultraviolet_tail, weighted_field_norm,
    TFVectorField,
};
pub use index::{for_each_index, LatticePoint, MultiIndex};
pub use lattice::Lattice;
pub use sum::{compensated_sum, ComplexSum, CompensatedSum};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("domain shrink (rho, sigma) = ({rho}, {sigma}) not admissible for (eps, s) = ({eps}, {s})")]
    DomainShrink { eps: f64, s: f64, rho: f64, sigma: f64 },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("dimension mismatch: expected (m, n) = {expected:?}, found {found:?}")]
    DimensionMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("expected {expected} components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}
