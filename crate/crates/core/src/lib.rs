//! Offensive-language detection for code-mixed social-media text.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every algorithmic
//! piece of the pipeline:
//!
//! - [`corpus`]: labels, records, datasets and their summary statistics
//! - [`preprocess`]: the noise-removal cleaner for raw messages
//! - [`features`]: word/char n-gram extraction and TF-IDF vectorizers
//! - [`classifiers`]: multinomial naive Bayes, linear models, random forest
//!   and hard voting
//! - [`neuralnet`]: a word-embedding → flatten → sigmoid network trained with Adam
//! - [`eval`]: splits, stratified k-fold, confusion matrices and metrics
//! - [`pipeline`]: the glue that turns a [`pipeline::PipelineSpec`] into a
//!   trained text classifier
//!
//! File loading, model persistence and the command-line front end live in
//! the companion `codemix` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod neuralnet;
pub mod pipeline;
pub mod preprocess;
mod rng;

pub use corpus::{Dataset, Label, Record, StatsReport};
pub use error::{Error, Result};
pub use features::{NgramMode, NgramSpec, SparseVector, TfidfModel};
