//! Numerical invariance checks for jump-diffusions on finite-dimensional
//! submanifolds with boundary.
//!
//! The crate is `no_std` (it needs `alloc`). It provides
//!
//! * [`geometry`]: charts, tangent frames, inward normals, chart inversion and
//!   distances to the closure of a chart patch,
//! * [`levy`]: product-form Lévy measures, activity classes, dyadic-shell
//!   quadrature and compound-Poisson sampling of big jumps,
//! * [`sde`]: jump-diffusion coefficients, Stratonovich corrections and the
//!   pull-back of the coefficients to chart coordinates,
//! * [`checker`]: the tangency / closure / drift / boundary conditions evaluated
//!   on a sampling plan, collected in a [`checker::ConditionReport`],
//! * [`sim`]: an ambient Euler scheme and the projected half-space chart scheme,
//! * [`examples`]: the circle, ball, cone and subordinator worked examples.
//!
//! IO, file formats, parallel ensembles and the command line live in the
//! companion `ijd` crate.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > tol)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod checker;
pub mod examples;
pub mod geometry;
pub mod levy;
pub mod linalg;
pub mod quadrature;
pub mod sde;
pub mod sim;

use alloc::string::String;

/// Dense column vector used for every point and tangent vector.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix (Jacobians, frames, generators).
pub type Matrix = nalgebra::DMatrix<f64>;

/// Errors raised by the core numerics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate chart: singular-value ratio {ratio:e} below 1e-10")]
    DegenerateChart { ratio: f64 },
    #[error("chart inversion did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("integral is not convergent: shell contributions stopped decaying (partial sum {partial:e})")]
    NonIntegrable { partial: f64 },
    #[error("jump region has infinite mass")]
    InfiniteMass,
    #[error("invalid model: {0}")]
    Model(String),
    #[error("jump target or state left the chart patch")]
    ChartEscape,
    #[error("model has no Lévy decomposition of the jump coefficient")]
    MissingDecomposition,
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("invalid simulation configuration: {0}")]
    Config(String),
    #[error("chart scheme refused: {0}")]
    NotInvariant(String),
}

pub type Result<T> = core::result::Result<T, Error>;
