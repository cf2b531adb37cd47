//! Word-embedding text classifier: embedding -> flatten -> one sigmoid unit.
//!
//! Sentences become fixed-length index sequences (index 0 is padding,
//! appended at the end). The network looks up one `embed_dim` row per
//! position, flattens the `max_len x embed_dim` block and feeds it to a
//! single dense unit with a sigmoid activation. Training minimises binary
//! cross-entropy with Adam over seeded mini-batches.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::corpus::Label;
use crate::error::{bail, Result};
use crate::rng;

/// Vocabulary sizes are rounded up to a multiple of this.
pub const CAPACITY_STEP: usize = 50;

/// Smallest multiple of [`CAPACITY_STEP`] that holds the padding row plus
/// `size` word rows (15430 words -> 15450, 15292 -> 15300).
pub fn capacity_for(size: usize) -> usize {
    (size + 1).div_ceil(CAPACITY_STEP) * CAPACITY_STEP
}

/// Words indexed from 1 in lexicographic order; 0 is padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordIndex {
    words: Vec<String>,
}

impl WordIndex {
    pub fn from_sorted(words: Vec<String>) -> Result<Self> {
        if words.windows(2).any(|w| w[0] >= w[1]) || words.iter().any(|w| w.is_empty()) {
            bail!(Data, "word index entries must be non-empty, unique and sorted");
        }
        Ok(WordIndex { words })
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn capacity(&self) -> usize {
        capacity_for(self.words.len())
    }

    /// 1-based index of `word`, or 0 when unknown.
    pub fn index_of(&self, word: &str) -> u32 {
        match self.words.binary_search_by(|w| w.as_str().cmp(word)) {
            Ok(i) => i as u32 + 1,
            Err(_) => 0,
        }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

pub fn build_word_index<S: AsRef<str>>(corpus: &[S]) -> Result<WordIndex> {
    if corpus.is_empty() {
        bail!(Usage, "cannot build a word index from an empty corpus");
    }
    let words: BTreeSet<&str> = corpus.iter().flat_map(|t| t.as_ref().split_whitespace()).collect();
    Ok(WordIndex {
        words: words.into_iter().map(String::from).collect(),
    })
}

/// Number of whitespace tokens in the longest text.
pub fn longest_sentence<S: AsRef<str>>(corpus: &[S]) -> usize {
    corpus
        .iter()
        .map(|t| t.as_ref().split_whitespace().count())
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedSequence(pub Vec<u32>);

/// Maps tokens to indices (unknown -> 0), keeps the first `max_len`, and
/// right-pads with 0.
pub fn encode_pad(index: &WordIndex, text: &str, max_len: usize) -> PaddedSequence {
    let mut seq: Vec<u32> = text
        .split_whitespace()
        .take(max_len)
        .map(|w| index.index_of(w))
        .collect();
    seq.resize(max_len, 0);
    PaddedSequence(seq)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnConfig {
    pub vocab_capacity: usize,
    pub embed_dim: usize,
    pub max_len: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl NnConfig {
    pub fn new(vocab_capacity: usize, max_len: usize) -> Self {
        NnConfig {
            vocab_capacity,
            embed_dim: 200,
            max_len,
            learning_rate: 0.001,
            epochs: 10,
            batch_size: 32,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_capacity == 0 || self.embed_dim == 0 || self.max_len == 0 {
            bail!(Config, "vocab_capacity, embed_dim and max_len must all be at least 1");
        }
        if self.batch_size == 0 {
            bail!(Config, "batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            bail!(Config, "learning rate must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamCount {
    pub embedding: usize,
    pub flatten: usize,
    /// Dense weights plus the bias.
    pub dense: usize,
}

impl ParamCount {
    pub fn trainable(&self) -> usize {
        self.embedding + self.dense
    }
}

pub fn nn_param_count(cfg: &NnConfig) -> ParamCount {
    let flatten = cfg.max_len * cfg.embed_dim;
    ParamCount {
        embedding: cfg.vocab_capacity * cfg.embed_dim,
        flatten,
        dense: flatten + 1,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingNet {
    /// Row-major `vocab_capacity x embed_dim`; row 0 stays zero.
    pub embedding: Vec<f64>,
    /// `max_len * embed_dim` weights, position-major.
    pub dense: Vec<f64>,
    pub bias: f64,
    pub config: NnConfig,
}

/// Gradients of the loss for one example or a mini-batch mean.
#[derive(Debug, Clone, PartialEq)]
pub struct NnGrad {
    pub dense: Vec<f64>,
    pub bias: f64,
    /// Only rows referenced by the input; row 0 never appears.
    pub embedding: BTreeMap<u32, Vec<f64>>,
}

const P_CLAMP: f64 = 1e-12;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

impl EmbeddingNet {
    /// Embedding rows 1.. uniform in (-0.05, 0.05), dense layer zero.
    pub fn init(cfg: &NnConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = rng::seeded(cfg.seed);
        let d = cfg.embed_dim;
        let mut embedding = vec![0.0; cfg.vocab_capacity * d];
        for v in embedding.iter_mut().skip(d) {
            *v = rng.random_range(-0.05..0.05);
        }
        Ok(EmbeddingNet {
            embedding,
            dense: vec![0.0; cfg.max_len * d],
            bias: 0.0,
            config: *cfg,
        })
    }

    pub fn param_count(&self) -> ParamCount {
        nn_param_count(&self.config)
    }

    fn check(&self, seq: &PaddedSequence) -> Result<()> {
        if seq.0.len() != self.config.max_len {
            bail!(
                Usage,
                "sequence length {} != max_len {}",
                seq.0.len(),
                self.config.max_len
            );
        }
        if let Some(&bad) = seq.0.iter().find(|&&i| i as usize >= self.config.vocab_capacity) {
            bail!(
                Usage,
                "word index {} outside capacity {}",
                bad,
                self.config.vocab_capacity
            );
        }
        Ok(())
    }

    fn row(&self, index: u32) -> &[f64] {
        let d = self.config.embed_dim;
        &self.embedding[index as usize * d..(index as usize + 1) * d]
    }

    fn logit(&self, seq: &PaddedSequence) -> f64 {
        let d = self.config.embed_dim;
        let mut z = self.bias;
        for (pos, &w) in seq.0.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let weights = &self.dense[pos * d..(pos + 1) * d];
            z += weights.iter().zip(self.row(w)).map(|(a, b)| a * b).sum::<f64>();
        }
        z
    }

    /// Probability of `OFF`.
    pub fn forward(&self, seq: &PaddedSequence) -> Result<f64> {
        self.check(seq)?;
        Ok(sigmoid(self.logit(seq)))
    }

    /// `OFF` when the probability is strictly above 0.5.
    pub fn predict(&self, seq: &PaddedSequence) -> Result<Label> {
        Ok(if self.forward(seq)? > 0.5 {
            Label::Off
        } else {
            Label::Not
        })
    }

    /// Binary cross-entropy (probability clamped to `[1e-12, 1 - 1e-12]`)
    /// and its gradients.
    pub fn loss_grad(&self, seq: &PaddedSequence, label: Label) -> Result<(f64, NnGrad)> {
        self.check(seq)?;
        let mut grad = NnGrad {
            dense: vec![0.0; self.dense.len()],
            bias: 0.0,
            embedding: BTreeMap::new(),
        };
        let loss = self.accumulate(seq, label, 1.0, &mut grad);
        Ok((loss, grad))
    }

    /// Adds `scale` times this example's gradient into `grad`; returns the
    /// loss.
    fn accumulate(&self, seq: &PaddedSequence, label: Label, scale: f64, grad: &mut NnGrad) -> f64 {
        let d = self.config.embed_dim;
        let y = if label == Label::Off { 1.0 } else { 0.0 };
        let p = sigmoid(self.logit(seq));
        let pc = p.clamp(P_CLAMP, 1.0 - P_CLAMP);
        let loss = -(y * libm::log(pc) + (1.0 - y) * libm::log(1.0 - pc));
        let dz = scale * (p - y);
        grad.bias += dz;
        for (pos, &w) in seq.0.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let row = self.row(w);
            let weights = &self.dense[pos * d..(pos + 1) * d];
            for (g, e) in grad.dense[pos * d..(pos + 1) * d].iter_mut().zip(row) {
                *g += dz * e;
            }
            let erow = grad.embedding.entry(w).or_insert_with(|| vec![0.0; d]);
            for (g, wt) in erow.iter_mut().zip(weights) {
                *g += dz * wt;
            }
        }
        loss
    }
}

/// Net plus the mean training loss of every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedNet {
    pub net: EmbeddingNet,
    pub epoch_losses: Vec<f64>,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

pub fn nn_train(seqs: &[PaddedSequence], labels: &[Label], cfg: &NnConfig) -> Result<TrainedNet> {
    if seqs.len() != labels.len() {
        bail!(Usage, "{} sequences but {} labels", seqs.len(), labels.len());
    }
    if !(labels.contains(&Label::Off) && labels.contains(&Label::Not)) {
        bail!(Training, "training labels contain a single class");
    }
    let mut net = EmbeddingNet::init(cfg)?;
    for s in seqs {
        net.check(s)?;
    }
    let d = cfg.embed_dim;
    let n_emb = net.embedding.len();
    let n_dense = net.dense.len();
    // parameter layout for the optimiser: [embedding | dense | bias]
    let mut adam = Adam::new(n_emb + n_dense + 1);
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    let mut shuffle_rng = rng::derive(cfg.seed, 1);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut grad_emb = vec![0.0; n_emb];

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let scale = 1.0 / batch.len() as f64;
            let mut grad = NnGrad {
                dense: vec![0.0; n_dense],
                bias: 0.0,
                embedding: BTreeMap::new(),
            };
            let mut batch_loss = 0.0;
            for &i in batch {
                batch_loss += net.accumulate(&seqs[i], labels[i], scale, &mut grad);
            }
            if !batch_loss.is_finite() {
                bail!(Numeric, "non-finite loss at epoch {} batch {}", epoch + 1, b + 1);
            }
            total += batch_loss;

            grad_emb.iter_mut().for_each(|g| *g = 0.0);
            for (row, g) in &grad.embedding {
                let start = *row as usize * d;
                grad_emb[start..start + d].copy_from_slice(g);
            }
            adam.step += 1;
            let bc1 = 1.0 - libm::pow(cfg.beta1, adam.step as f64);
            let bc2 = 1.0 - libm::pow(cfg.beta2, adam.step as f64);
            let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                *p -= cfg.learning_rate * (*m / bc1) / (libm::sqrt(*v / bc2) + cfg.epsilon);
            };
            let (m_emb, m_rest) = adam.m.split_at_mut(n_emb);
            let (v_emb, v_rest) = adam.v.split_at_mut(n_emb);
            // row 0 is padding and never moves
            for k in d..n_emb {
                update(&mut net.embedding[k], grad_emb[k], &mut m_emb[k], &mut v_emb[k]);
            }
            for k in 0..n_dense {
                update(&mut net.dense[k], grad.dense[k], &mut m_rest[k], &mut v_rest[k]);
            }
            update(&mut net.bias, grad.bias, &mut m_rest[n_dense], &mut v_rest[n_dense]);
        }
        epoch_losses.push(total / seqs.len().max(1) as f64);
    }
    Ok(TrainedNet { net, epoch_losses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn tiny_cfg(capacity: usize, max_len: usize, dim: usize) -> NnConfig {
        NnConfig {
            embed_dim: dim,
            ..NnConfig::new(capacity, max_len)
        }
    }

    #[test]
    fn word_index_rules() {
        let idx = build_word_index(&["nalla padam", "padam super"]).unwrap();
        assert_eq!(idx.size(), 3);
        assert_eq!(idx.capacity(), 50);
        assert_eq!(idx.index_of("nalla"), 1);
        assert_eq!(idx.index_of("padam"), 2);
        assert_eq!(idx.index_of("super"), 3);
        assert_eq!(idx.index_of("other"), 0);
        let empty: [&str; 0] = [];
        assert!(build_word_index(&empty).is_err());
    }

    #[test]
    fn capacity_rounding() {
        assert_eq!(capacity_for(15430), 15450);
        assert_eq!(capacity_for(15292), 15300);
        assert_eq!(capacity_for(49), 50);
        // 50 words + padding row no longer fit in 50 rows
        assert_eq!(capacity_for(50), 100);
        assert_eq!(capacity_for(15449), 15450);
    }

    #[test]
    fn padding_and_truncation() {
        let idx = build_word_index(&["aa bb"]).unwrap();
        assert_eq!(encode_pad(&idx, "bb aa", 4).0, vec![2, 1, 0, 0]);
        assert_eq!(encode_pad(&idx, "", 3).0, vec![0, 0, 0]);
        let long: Vec<&str> = core::iter::repeat_n("aa", 70).collect();
        let seq = encode_pad(&idx, &long.join(" "), 65);
        assert_eq!(seq.0.len(), 65);
        assert!(seq.0.iter().all(|&i| i == 1));
    }

    #[test]
    fn parameter_counts() {
        let ml = nn_param_count(&NnConfig::new(15450, 65));
        assert_eq!((ml.embedding, ml.flatten, ml.dense), (3_090_000, 13_000, 13_001));
        let ta = nn_param_count(&NnConfig::new(15300, 64));
        assert_eq!((ta.embedding, ta.flatten, ta.dense), (3_060_000, 12_800, 12_801));
        let one = nn_param_count(&tiny_cfg(1, 1, 1));
        assert_eq!((one.embedding, one.flatten, one.dense), (1, 1, 2));
    }

    #[test]
    fn fresh_net_outputs_one_half() {
        let net = EmbeddingNet::init(&tiny_cfg(50, 4, 8)).unwrap();
        assert_eq!(net.forward(&PaddedSequence(vec![3, 7, 1, 0])).unwrap(), 0.5);
        assert_eq!(net.predict(&PaddedSequence(vec![3, 7, 1, 0])).unwrap(), Label::Not);
        assert!(net.embedding[..8].iter().all(|&v| v == 0.0));
        assert!(net.embedding[8..].iter().all(|&v| v.abs() < 0.05 && v != 0.0));
    }

    #[test]
    fn padding_only_input_sees_only_the_bias() {
        let mut net = EmbeddingNet::init(&tiny_cfg(50, 3, 4)).unwrap();
        net.dense.iter_mut().for_each(|w| *w = 0.7);
        net.bias = -1.3;
        let seq = PaddedSequence(vec![0, 0, 0]);
        assert_eq!(net.forward(&seq).unwrap(), sigmoid(-1.3));
        let (_, g) = net.loss_grad(&seq, Label::Off).unwrap();
        assert!(g.embedding.is_empty());
    }

    #[test]
    fn hand_built_two_word_net() {
        // capacity 3, dim 2, max_len 2
        let net = EmbeddingNet {
            embedding: vec![0.0, 0.0, 0.5, -1.0, 2.0, 0.25],
            dense: vec![1.0, 2.0, -0.5, 4.0],
            bias: 0.1,
            config: tiny_cfg(3, 2, 2),
        };
        // z = (1*0.5 + 2*-1) + (-0.5*2 + 4*0.25) + 0.1 = -1.4
        let p = net.forward(&PaddedSequence(vec![1, 2])).unwrap();
        assert!((p - 1.0 / (1.0 + libm::exp(1.4))).abs() < 1e-12);
        assert!(matches!(
            net.forward(&PaddedSequence(vec![1, 3])),
            Err(crate::Error::Usage(_))
        ));
        assert!(matches!(
            net.forward(&PaddedSequence(vec![1])),
            Err(crate::Error::Usage(_))
        ));
    }

    #[test]
    fn loss_at_one_half_is_ln2() {
        let net = EmbeddingNet::init(&tiny_cfg(50, 2, 3)).unwrap();
        let (loss, _) = net.loss_grad(&PaddedSequence(vec![1, 2]), Label::Off).unwrap();
        assert!((loss - core::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn zero_epochs_returns_initial_net() {
        let mut cfg = tiny_cfg(50, 2, 4);
        cfg.epochs = 0;
        let seqs = [PaddedSequence(vec![1, 0]), PaddedSequence(vec![2, 0])];
        let t = nn_train(&seqs, &[Label::Off, Label::Not], &cfg).unwrap();
        assert_eq!(t.net, EmbeddingNet::init(&cfg).unwrap());
        assert!(t.epoch_losses.is_empty());
        for s in &seqs {
            assert_eq!(t.net.forward(s).unwrap(), 0.5);
        }
    }

    fn planted(n: usize) -> (WordIndex, Vec<PaddedSequence>, Vec<Label>) {
        let neutral = ["nalla", "padam", "super", "mass", "trailer", "waiting", "fans", "kidu"];
        let mut texts = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let mut words: Vec<String> = (0..4)
                .map(|k| neutral[(i * 3 + k * 5) % neutral.len()].to_string())
                .collect();
            let off = i % 2 == 0;
            if off {
                words.insert(i % 4, "vettukili".to_string());
            }
            texts.push(words.join(" "));
            labels.push(if off { Label::Off } else { Label::Not });
        }
        let idx = build_word_index(&texts).unwrap();
        let max_len = longest_sentence(&texts);
        let seqs = texts.iter().map(|t| encode_pad(&idx, t, max_len)).collect();
        (idx, seqs, labels)
    }

    #[test]
    fn planted_keyword_is_learned() {
        let (idx, seqs, labels) = planted(20);
        let cfg = NnConfig::new(idx.capacity(), seqs[0].0.len());
        let t = nn_train(&seqs, &labels, &cfg).unwrap();
        let correct = seqs
            .iter()
            .zip(&labels)
            .filter(|(s, l)| t.net.predict(s).unwrap() == **l)
            .count();
        assert!(correct as f64 / 20.0 >= 0.95, "{correct}/20");
        assert_eq!(t.epoch_losses.len(), 10);
        assert!(t.net.embedding[..cfg.embed_dim].iter().all(|&v| v == 0.0));
        let non_monotone = t.epoch_losses.windows(2).filter(|w| w[1] > w[0]).count();
        assert!(non_monotone <= 1, "{:?}", t.epoch_losses);
    }

    #[test]
    fn training_is_deterministic() {
        let (idx, seqs, labels) = planted(12);
        let mut cfg = tiny_cfg(idx.capacity(), seqs[0].0.len(), 16);
        cfg.seed = 9;
        let a = nn_train(&seqs, &labels, &cfg).unwrap();
        let b = nn_train(&seqs, &labels, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_is_rejected() {
        let (idx, seqs, _) = planted(4);
        let cfg = tiny_cfg(idx.capacity(), seqs[0].0.len(), 4);
        assert!(matches!(
            nn_train(&seqs, &[Label::Off; 4], &cfg),
            Err(crate::Error::Training(_))
        ));
    }
}
