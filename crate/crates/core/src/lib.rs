//! Energy-efficiency analysis of training-based point-to-point large-scale
//! MIMO links whose transmitters carry residual RF impairments.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: complex matrices, CSCG sampling, Cholesky inverse diagonals.
//! * [`channel`]: one coherence block (pilots, LMMSE estimate, ZF SINR).
//! * [`closed_forms`]: deterministic equivalents of SINR, rate and energy efficiency.
//! * [`optimizer`]: sequential line-search maximization and the lattice oracle.
//! * [`montecarlo`]: ergodic averages and concentration experiments.
//! * [`cli`]: config files, sweeps and CSV output behind `mimo-ee-opt`.
//!
//! The math is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! it to `f64`, which is what the CLI uses.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod closed_forms;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod optimizer;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ComplexMatrix = numerics::ComplexMatrix<f64>;
pub type SystemConfig = channel::SystemConfig<f64>;
pub type ChannelBlock = channel::ChannelBlock<f64>;
pub type PowerModel = closed_forms::PowerModel<f64>;
pub type EeContext = closed_forms::EeContext<f64>;
pub type EstimationStats = closed_forms::EstimationStats<f64>;
pub type DeterministicPoint = closed_forms::DeterministicPoint<f64>;
pub type OptimizerSettings = optimizer::OptimizerSettings<f64>;
pub type OptimizationResult = optimizer::OptimizationResult<f64>;
pub type McEstimate = montecarlo::McEstimate<f64>;

pub type ComplexMatrix32 = numerics::ComplexMatrix<f32>;
pub type SystemConfig32 = channel::SystemConfig<f32>;
pub type PowerModel32 = closed_forms::PowerModel<f32>;
pub type EeContext32 = closed_forms::EeContext<f32>;
