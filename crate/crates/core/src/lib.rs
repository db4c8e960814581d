//! Total-variation compressed sensing for signals on `N^d` grids.
//!
//! Signals are complex arrays stored in lexicographic order (last axis
//! fastest). The crate provides the discrete gradient and TV seminorms, the
//! orthonormal multidimensional Haar transform, measurement operators with
//! direct sums and zero-pad lifts, RIP estimation, a primal–dual TV solver,
//! checkers for the recovery inequalities and an experiment harness.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod gradient;
pub mod haar;
pub mod ndcs;
pub mod operators;
pub mod phantom;
pub mod solver;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use gradient::{gradient, tv_seminorm, BlockSupport, GradientField, TvVariant};
pub use haar::{haar_forward, haar_inverse, HaarCoefficients};
pub use operators::{LinearMap, LinearMeasurementOp, RipCertificate};
pub use solver::{solve_l1_haar, solve_tv, SolveOptions, SolveResult, SolveVariant};
pub use tensor::{MixedField, NdArray, NdSignal, Shape, C64};
