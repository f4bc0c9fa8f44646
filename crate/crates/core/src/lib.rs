//! Rough-path construction of periodic KdV solutions in Fourier-Lebesgue
//! spaces: exact multiplier operators, sewing on dyadic grids, rough Euler
//! and corrected Galerkin integrators, additive noise, and an experiment
//! harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod harness;
pub mod increments;
pub mod operators;
pub mod oracles;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod stochastic;

pub use increments::{NormedSpace, TimeGrid, TwoIndexField, ThreeIndexField};
pub use operators::{OperatorSpec, RegularityPair, Truncation};
pub use spectral::{FLNormParams, SpectralCoeffs};
