//! Strong-coupling thermodynamics of open quantum systems.
//!
//! The crate builds, layer by layer: a dense complex linear-algebra kernel
//! ([`qmatrix`]), GKLS generators with exact superoperator propagation
//! ([`gkls`]), the composite spin-boson case study ([`spinboson`]),
//! dynamical-map diagnostics ([`dynmaps`]), the nonequilibrium thermodynamic
//! pipelines ([`thermo`]), and a thermodynamic non-Markovianity witness
//! ([`witness`]).
//!
//! Everything is generic over the real scalar (`f32` or `f64`) through
//! [`scalar::Scalar`]; the `f64` instantiations below are the ones exercised
//! by the test suite and the CLI.

// Validation guards use `!(x > 0)` so that NaN inputs are rejected; the
// un-negated comparison would silently accept them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynmaps;
pub mod error;
pub mod gkls;
pub mod qmatrix;
pub mod scalar;
pub mod spinboson;
pub mod thermo;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::{Cx, Scalar};

/// `f64` aliases for the main operator types.
pub type ComplexMatrix64 = qmatrix::ComplexMatrix<f64>;
pub type HermitianMatrix64 = qmatrix::HermitianMatrix<f64>;
pub type DensityMatrix64 = qmatrix::DensityMatrix<f64>;
pub type SuperOperator64 = gkls::SuperOperator<f64>;
pub type GKLSGenerator64 = gkls::GKLSGenerator<f64>;
pub type ModelConfig64 = spinboson::ModelConfig<f64>;
pub type ThermoPoint64 = thermo::ThermoPoint<f64>;
pub type ThermoTrace64 = thermo::ThermoTrace<f64>;
