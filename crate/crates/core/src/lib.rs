//! Spectral community detection with the Bethe-Hessian `H(t) = t²I − tA + (D − I)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: stochastic block model parameters, the eigen-structure of
//!   `Q = PΠ`, closed-form predictions and graph sampling.
//! - [`graph`]: sparse undirected graphs and their file formats.
//! - [`operators`]: Bethe-Hessian, weighted Bethe-Hessian and the two
//!   non-backtracking matrices, plus exact algebraic identity checks.
//! - [`eig`]: eigensolvers, exact eigenvalue counting by inertia, subspace
//!   alignment and perturbation certificates.
//! - [`detect`]: count estimation, spectral embedding, k-means, overlap and
//!   theory-vs-measurement reports.

pub mod detect;
pub mod eig;
pub mod error;
pub mod graph;
pub mod model;
pub mod operators;
pub mod sparse;

pub use error::{Error, Result};
pub use graph::SparseGraph;
pub use model::{LabeledGraph, ModelParams, Sign, SignalSpectrum};
