//! File formats, experiment protocols and the command-line front end for
//! the `gbtsvm-core` classifiers.

pub mod cli;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod experiment;
pub mod persist;
pub mod report;

pub use error::{AppError, Result};
pub use gbtsvm_core as core;
