//! Command-line front end for Bethe-Hessian community detection: graph
//! generation, spectra, counts, clustering, theory checks and multi-seed
//! experiments.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod histogram;
pub mod output;

pub use error::{CliError, CliResult};
