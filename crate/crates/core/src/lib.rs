//! Normal forms for vector fields with damped and rotational linear parts,
//! and their application to a two-layer spin-orbit model.

// Checks are written `!(x <= bound)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod normalform;
pub mod tfseries;
pub mod twolayer;
