//! Hard-voting ensemble.

use alloc::vec::Vec;

use super::{Classifier, ForestModel, LinearModel, MnbModel};
use crate::corpus::Label;
use crate::error::{bail, Result};
use crate::features::SparseVector;

/// Label with the most votes; a tie goes to `NOT`.
pub fn hard_vote(predictions: &[Label]) -> Result<Label> {
    if predictions.is_empty() {
        bail!(Usage, "hard vote over an empty prediction list");
    }
    let off = predictions.iter().filter(|&&l| l == Label::Off).count();
    Ok(if 2 * off > predictions.len() {
        Label::Off
    } else {
        Label::Not
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Member {
    Linear(LinearModel),
    Mnb(MnbModel),
    Forest(ForestModel),
}

impl Classifier for Member {
    fn dim(&self) -> usize {
        match self {
            Member::Linear(m) => m.dim(),
            Member::Mnb(m) => m.dim(),
            Member::Forest(m) => m.dim(),
        }
    }

    fn predict(&self, x: &SparseVector) -> Result<Label> {
        match self {
            Member::Linear(m) => m.predict(x),
            Member::Mnb(m) => m.predict(x),
            Member::Forest(m) => m.predict(x),
        }
    }
}

/// Ordered members voting with equal weight. The usual line-up is
/// `[linear SVM, MNB, logistic regression]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    members: Vec<Member>,
}

impl EnsembleModel {
    pub fn new(members: Vec<Member>) -> Result<Self> {
        if members.len() < 2 {
            bail!(Config, "an ensemble needs at least 2 members, got {}", members.len());
        }
        let dim = members[0].dim();
        if members.iter().any(|m| m.dim() != dim) {
            bail!(Config, "ensemble members disagree on feature dimension");
        }
        Ok(EnsembleModel { members })
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn member_votes(&self, x: &SparseVector) -> Result<Vec<Label>> {
        self.members.iter().map(|m| m.predict(x)).collect()
    }
}

impl Classifier for EnsembleModel {
    fn dim(&self) -> usize {
        self.members[0].dim()
    }

    fn predict(&self, x: &SparseVector) -> Result<Label> {
        hard_vote(&self.member_votes(x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{LinearConfig, MnbConfig};
    use alloc::vec;
    use Label::{Not, Off};

    #[test]
    fn vote_examples() {
        assert_eq!(hard_vote(&[Off, Not, Off]).unwrap(), Off);
        assert_eq!(hard_vote(&[Not, Not, Off]).unwrap(), Not);
        assert_eq!(hard_vote(&[Off, Not]).unwrap(), Not);
        assert!(matches!(hard_vote(&[]), Err(crate::Error::Usage(_))));
    }

    fn linear(w: f64) -> Member {
        Member::Linear(LinearModel {
            weights: vec![w],
            bias: 0.0,
            config: LinearConfig::default(),
            objective: 0.0,
            iterations: 0,
        })
    }

    #[test]
    fn ensemble_follows_member_majority() {
        let e = EnsembleModel::new(vec![linear(1.0), linear(1.0), linear(-1.0)]).unwrap();
        let x = SparseVector::from_dense(&[1.0]);
        assert_eq!(e.member_votes(&x).unwrap(), vec![Off, Off, Not]);
        assert_eq!(e.predict(&x).unwrap(), Off);
    }

    #[test]
    fn ensemble_validation() {
        assert!(EnsembleModel::new(vec![linear(1.0)]).is_err());
        let mnb = crate::classifiers::train_mnb(
            &[
                SparseVector::from_dense(&[1.0, 0.0]),
                SparseVector::from_dense(&[0.0, 1.0]),
            ],
            &[Off, Not],
            &MnbConfig::default(),
        )
        .unwrap();
        assert!(EnsembleModel::new(vec![linear(1.0), Member::Mnb(mnb)]).is_err());
    }
}
