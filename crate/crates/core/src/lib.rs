//! Pseudospectral solver and verification harness for ground states of
//! one-dimensional fractional problems
//! D^sigma u + c u - f(u) = 0 with double-power nonlinearities on a periodic grid.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod functionals;
pub mod grid;
pub mod par;
pub mod rearrange;
pub mod solvers;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use functionals::{Problem, ProblemSpec, ThresholdConstants, Variant};
pub use grid::{Field, GridSpec};
pub use par::Exec;
pub use solvers::{GroundStateReport, SolverConfig};
