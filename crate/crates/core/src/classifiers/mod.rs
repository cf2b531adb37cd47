//! Classical classifiers over sparse TF-IDF vectors.
//!
//! Every model predicts a [`Label`]; the positive class is `OFF` and all
//! ties go to `NOT`.

use alloc::vec::Vec;

use crate::corpus::Label;
use crate::error::{bail, Result};
use crate::features::SparseVector;

pub mod forest;
pub mod linear;
pub mod mnb;
pub mod voting;

pub use forest::{train_forest, ForestConfig, ForestModel};
pub use linear::{linear_objective_grad, train_linear, LinearConfig, LinearModel, Loss};
pub use mnb::{train_mnb, MnbConfig, MnbModel};
pub use voting::{hard_vote, EnsembleModel, Member};

/// A trained model that labels feature vectors of a fixed dimension.
pub trait Classifier {
    fn dim(&self) -> usize;

    fn predict(&self, x: &SparseVector) -> Result<Label>;

    fn predict_all(&self, xs: &[SparseVector]) -> Result<Vec<Label>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

pub(crate) fn check_dim(expected: usize, x: &SparseVector) -> Result<()> {
    if x.dim() != expected {
        bail!(
            Usage,
            "feature dimension {} does not match model dimension {}",
            x.dim(),
            expected
        );
    }
    Ok(())
}

/// Shared preconditions for supervised training; returns the feature
/// dimension.
pub(crate) fn check_training_set(x: &[SparseVector], y: &[Label]) -> Result<usize> {
    if x.len() != y.len() {
        bail!(Usage, "{} feature vectors but {} labels", x.len(), y.len());
    }
    if x.len() < 2 {
        bail!(Training, "need at least 2 training examples, got {}", x.len());
    }
    let dim = x[0].dim();
    if let Some(bad) = x.iter().position(|v| v.dim() != dim) {
        bail!(
            Usage,
            "example {} has dimension {}, expected {}",
            bad,
            x[bad].dim(),
            dim
        );
    }
    let mut seen = [false; 2];
    for l in y {
        seen[l.index()] = true;
    }
    if !(seen[0] && seen[1]) {
        bail!(Training, "training labels contain a single class");
    }
    Ok(dim)
}

/// Argmax over `[NOT, OFF]` scores; equal scores give `NOT`.
pub(crate) fn argmax_label(scores: [f64; 2]) -> Label {
    if scores[1] > scores[0] {
        Label::Off
    } else {
        Label::Not
    }
}
