//! Crate-wide error type.

use thiserror::Error;

/// Errors shared by the linear-algebra kernel, the dynamics layer and the
/// thermodynamic pipelines. Numeric payloads are carried as `f64` regardless
/// of the working scalar.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Dimension or length mismatch.
    #[error("shape error: {0}")]
    Shape(String),

    /// A matrix required to be Hermitian deviated beyond tolerance.
    #[error("not Hermitian: max|M - M†| = {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    /// A matrix required to be positive definite has an eigenvalue at or
    /// below the configured floor.
    #[error(
        "not positive definite: min eigenvalue {min_eigenvalue:.6e} <= {threshold:.3e}{}",
        context_suffix(context)
    )]
    NotPositiveDefinite {
        min_eigenvalue: f64,
        threshold: f64,
        context: String,
    },

    /// An operator failed the density-matrix invariants.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Iterative eigensolver did not converge.
    #[error("eigensolver failed to converge ({0})")]
    EigConvergence(String),

    /// Matrix exponential argument out of floating-point range.
    #[error("exponential out of range: scale*lambda_max = {exponent:.3e} > 700")]
    ExpRange { exponent: f64 },

    /// Inversion refused because the matrix is singular or too ill-conditioned.
    #[error("ill-conditioned inversion: condition estimate {cond:.3e} exceeds {limit:.1e}")]
    IllConditioned { cond: f64, limit: f64 },

    /// A dynamical map failed its CPTP validation.
    #[error("map construction failed: {0}")]
    MapConstruction(String),

    /// A propagated state violated trace or positivity tolerances.
    #[error("propagation accuracy: {0}")]
    Propagation(String),

    /// Generic numerical failure (fallback paths, non-finite results).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A measurement branch has vanishing probability.
    #[error("degenerate measurement branch {index}: p = {weight:.3e}")]
    DegenerateBranch { index: usize, weight: f64 },

    /// Requested configuration outside the supported regime.
    #[error("unsupported configuration: {0}")]
    UnsupportedConfig(String),

    /// Invalid user input (grids, protocols, projector sets, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn context_suffix(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!(" ({context})")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
