//! Analysis and simulation of communication matrices for collaborative mean
//! estimation over networks.
//!
//! A group of `N` agents estimates the mean of a random variable while
//! exchanging messages along a directed graph, weighted by a row-stochastic
//! matrix `A`. This crate provides:
//!
//! - construction and graph diagnostics of communication matrices ([`matrix`]),
//! - eigenvalue analysis and the statistical performance ratio of the
//!   network estimator relative to the centralized one ([`spectral`]),
//! - Sinkhorn-Knopp balancing of a support pattern into a bistochastic
//!   matrix ([`sinkhorn`]),
//! - random regular graph generation with a Ramanujan spectral test
//!   ([`ramanujan`]),
//! - Monte Carlo simulation of the synchronous and delayed-asynchronous
//!   estimation recursions ([`simulate`]),
//! - efficiency/complexity tradeoff studies ([`tradeoff`]).

pub mod matrix;
pub mod ramanujan;
pub mod seeds;
pub mod simulate;
pub mod sinkhorn;
pub mod spectral;
pub mod tradeoff;

pub use matrix::{CommGraph, GraphDiagnostics, MatrixError, MatrixKind, StochasticMatrix};
pub use spectral::{SpectralError, SpectrumReport, StationaryDistribution};
