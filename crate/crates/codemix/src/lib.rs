//! File formats, reports and the command-line front end for
//! [`codemix_core`].

pub mod cli;
pub mod dataset;
pub mod error;
pub mod modelfile;
pub mod report;

pub use error::{CliError, CliResult};
