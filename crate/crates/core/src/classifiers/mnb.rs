//! Multinomial naive Bayes on non-negative (possibly fractional) weights.
//!
//! Sufficient statistics are per-class feature weight sums `S[c][t]`:
//!
//! ```text
//! log P(c)   = ln(count(c) / N)
//! log P(t|c) = ln((S[c][t] + alpha) / (S[c] + alpha * dim))
//! score(c|x) = log P(c) + sum_t x_t * log P(t|c)
//! ```

use alloc::vec;
use alloc::vec::Vec;

use super::{argmax_label, check_dim, check_training_set, Classifier};
use crate::corpus::Label;
use crate::error::{bail, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MnbConfig {
    pub alpha: f64,
}

impl Default for MnbConfig {
    fn default() -> Self {
        MnbConfig { alpha: 1.0 }
    }
}

impl MnbConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            bail!(Config, "alpha must be positive, got {}", self.alpha);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MnbModel {
    pub alpha: f64,
    /// Indexed by [`Label::index`].
    pub class_log_prior: [f64; 2],
    /// `feature_log_prob[c][t]`, indexed by [`Label::index`] then feature.
    pub feature_log_prob: [Vec<f64>; 2],
}

pub fn train_mnb(x: &[SparseVector], y: &[Label], cfg: &MnbConfig) -> Result<MnbModel> {
    cfg.validate()?;
    let dim = check_training_set(x, y)?;
    let mut sums = [vec![0.0f64; dim], vec![0.0f64; dim]];
    let mut class_counts = [0usize; 2];
    for (v, &label) in x.iter().zip(y) {
        let c = label.index();
        class_counts[c] += 1;
        for (i, w) in v.iter() {
            if w < 0.0 {
                bail!(Data, "negative feature weight {} at index {}", w, i);
            }
            sums[c][i] += w;
        }
    }
    let n = x.len() as f64;
    let alpha = cfg.alpha;
    let log_prob = |s: &[f64]| -> Vec<f64> {
        let denom = libm::log(s.iter().sum::<f64>() + alpha * dim as f64);
        s.iter().map(|&v| libm::log(v + alpha) - denom).collect()
    };
    Ok(MnbModel {
        alpha,
        class_log_prior: [
            libm::log(class_counts[0] as f64 / n),
            libm::log(class_counts[1] as f64 / n),
        ],
        feature_log_prob: [log_prob(&sums[0]), log_prob(&sums[1])],
    })
}

impl MnbModel {
    /// Per-class joint log scores `[NOT, OFF]`.
    pub fn scores(&self, x: &SparseVector) -> Result<[f64; 2]> {
        check_dim(self.dim(), x)?;
        let mut out = self.class_log_prior;
        for (c, s) in out.iter_mut().enumerate() {
            *s += x.dot(&self.feature_log_prob[c]);
        }
        Ok(out)
    }

    /// Log-posteriors `[NOT, OFF]` (scores normalised with log-sum-exp).
    pub fn log_posteriors(&self, x: &SparseVector) -> Result<[f64; 2]> {
        let s = self.scores(x)?;
        let m = s[0].max(s[1]);
        let lse = m + libm::log(libm::exp(s[0] - m) + libm::exp(s[1] - m));
        Ok([s[0] - lse, s[1] - lse])
    }
}

impl Classifier for MnbModel {
    fn dim(&self) -> usize {
        self.feature_log_prob[0].len()
    }

    fn predict(&self, x: &SparseVector) -> Result<Label> {
        self.scores(x).map(argmax_label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(dense: &[f64]) -> SparseVector {
        SparseVector::from_dense(dense)
    }

    // features: [bad, good]
    fn toy() -> (Vec<SparseVector>, Vec<Label>) {
        (vec![sv(&[2.0, 0.0]), sv(&[0.0, 1.0])], vec![Label::Off, Label::Not])
    }

    #[test]
    fn hand_computed_likelihoods() {
        let (x, y) = toy();
        let m = train_mnb(&x, &y, &MnbConfig::default()).unwrap();
        let off = Label::Off.index();
        let not = Label::Not.index();
        assert!((libm::exp(m.feature_log_prob[off][0]) - 0.75).abs() < 1e-12);
        assert!((libm::exp(m.feature_log_prob[not][0]) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.predict(&sv(&[1.0, 0.0])).unwrap(), Label::Off);
        let s = m.scores(&sv(&[1.0, 0.0])).unwrap();
        assert!(s[off] > s[not]);
    }

    #[test]
    fn balanced_priors_and_zero_vector_tie() {
        let (x, y) = toy();
        let m = train_mnb(&x, &y, &MnbConfig::default()).unwrap();
        assert_eq!(m.class_log_prior, [libm::log(0.5), libm::log(0.5)]);
        assert_eq!(m.scores(&SparseVector::zeros(2)).unwrap(), m.class_log_prior);
        assert_eq!(m.predict(&SparseVector::zeros(2)).unwrap(), Label::Not);
    }

    #[test]
    fn large_alpha_flattens_to_priors() {
        let x = vec![sv(&[3.0, 1.0]), sv(&[1.0, 3.0]), sv(&[2.0, 2.0])];
        let y = vec![Label::Off, Label::Not, Label::Not];
        let m = train_mnb(&x, &y, &MnbConfig { alpha: 1e6 }).unwrap();
        let post = m.log_posteriors(&sv(&[5.0, 0.0])).unwrap();
        // Both classes give each feature probability ~1/2; posterior ~ prior.
        assert!((libm::exp(post[1]) - 1.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn normalisation_invariants() {
        let x = vec![sv(&[0.3, 0.0, 0.9]), sv(&[0.0, 0.5, 0.1]), sv(&[0.2, 0.2, 0.2])];
        let y = vec![Label::Off, Label::Not, Label::Off];
        let m = train_mnb(&x, &y, &MnbConfig { alpha: 0.5 }).unwrap();
        for c in 0..2 {
            let total: f64 = m.feature_log_prob[c].iter().map(|v| libm::exp(*v)).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
        let priors: f64 = m.class_log_prior.iter().map(|v| libm::exp(*v)).sum();
        assert!((priors - 1.0).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let (x, _) = toy();
        assert!(matches!(
            train_mnb(&x, &[Label::Off, Label::Off], &MnbConfig::default()),
            Err(crate::Error::Training(_))
        ));
        let neg = vec![sv(&[-1.0, 0.0]), sv(&[0.0, 1.0])];
        assert!(matches!(
            train_mnb(&neg, &[Label::Off, Label::Not], &MnbConfig::default()),
            Err(crate::Error::Data(_))
        ));
        assert!(train_mnb(&x, &[Label::Off, Label::Not], &MnbConfig { alpha: 0.0 }).is_err());
        let m = train_mnb(&x, &[Label::Off, Label::Not], &MnbConfig::default()).unwrap();
        assert!(matches!(m.scores(&SparseVector::zeros(3)), Err(crate::Error::Usage(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn positive_scaling_keeps_argmax_with_equal_priors(
                a in proptest::collection::vec(0.0f64..3.0, 4),
                b in proptest::collection::vec(0.0f64..3.0, 4),
                probe in proptest::collection::vec(0.0f64..3.0, 4),
                k in 0.01f64..50.0,
            ) {
                let x = vec![sv(&a), sv(&b)];
                let m = train_mnb(&x, &[Label::Off, Label::Not], &MnbConfig::default()).unwrap();
                let p = sv(&probe);
                let s = m.scores(&p).unwrap();
                // skip near-ties where rounding could flip the comparison
                prop_assume!((s[0] - s[1]).abs() > 1e-9);
                prop_assert_eq!(m.predict(&p).unwrap(), m.predict(&p.scaled(k)).unwrap());
            }
        }
    }
}
