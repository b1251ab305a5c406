//! Dense numerical kernels: closed-form Gaussian moments, symmetric
//! eigensolvers, semi-infinite quadrature and a Rayleigh-quotient minimizer.

mod eigen;
mod gauss;
mod quadrature;
mod rayleigh;

use nalgebra::DVector;
use thiserror::Error;

pub use eigen::{
    cholesky_lower, generalized_sym_eig, jacobi_eigen, sym_eig, SpectrumCheck, SpectrumResult,
};
pub use gauss::gauss_integral;
pub use quadrature::{build_quadrature, QuadratureGrid, DEFAULT_QUADRATURE_NODES};
pub use rayleigh::{
    minimize_rayleigh, LinearOperator, Preconditioner, RayleighOptions, RayleighOutcome,
};

/// Best iterate of a minimization that ran out of iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct BestIterate {
    pub vector: DVector<f64>,
    pub value: f64,
    /// `‖M c − q S c‖₂ / ‖M‖_F` at `vector`.
    pub relative_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not positive definite: leading minor {minor} has pivot {pivot:e}")]
    NotPositiveDefinite { minor: usize, pivot: f64 },
    #[error("{0}")]
    NoConvergence(String),
    #[error(
        "minimizer stopped after {} iterations without converging (value {:e}, relative residual {:e})",
        .0.iterations, .0.value, .0.relative_residual
    )]
    NotConverged(Box<BestIterate>),
}
