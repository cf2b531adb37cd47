//! Holdout and stratified k-fold evaluation with binary confusion metrics.
//!
//! `OFF` is the positive class of every [`ConfusionMatrix`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::corpus::{Dataset, Label};
use crate::error::{bail, Error, Result};
use crate::pipeline::{PipelineSpec, TextClassifier};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub folds: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            folds: 5,
            test_fraction: 0.30,
            seed: 0,
            stratified: true,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            bail!(Usage, "need at least 2 folds, got {}", self.folds);
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            bail!(Usage, "test fraction must lie in (0, 1), got {}", self.test_fraction);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }
}

pub fn confusion(preds: &[Label], golds: &[Label]) -> Result<ConfusionMatrix> {
    if preds.len() != golds.len() {
        bail!(Usage, "{} predictions but {} gold labels", preds.len(), golds.len());
    }
    if preds.is_empty() {
        bail!(Usage, "confusion matrix of zero predictions");
    }
    let mut cm = ConfusionMatrix::default();
    for (p, g) in preds.iter().zip(golds) {
        match (p, g) {
            (Label::Off, Label::Off) => cm.tp += 1,
            (Label::Off, Label::Not) => cm.fp += 1,
            (Label::Not, Label::Off) => cm.fn_ += 1,
            (Label::Not, Label::Not) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold count of the class.
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub accuracy: f64,
    /// Indexed by [`Label::index`].
    pub per_class: [ClassMetrics; 2],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn class_metrics(tp: usize, fp: usize, fn_: usize) -> ClassMetrics {
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        support: tp + fn_,
    }
}

/// Undefined ratios (0/0) are reported as 0.
pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let off = class_metrics(cm.tp, cm.fp, cm.fn_);
    let not = class_metrics(cm.tn, cm.fn_, cm.fp);
    let total = cm.total();
    let weighted_f1 = if total == 0 {
        0.0
    } else {
        (off.f1 * off.support as f64 + not.f1 * not.support as f64) / total as f64
    };
    Metrics {
        accuracy: ratio(cm.tp + cm.tn, total),
        per_class: [not, off],
        macro_precision: 0.5 * (not.precision + off.precision),
        macro_recall: 0.5 * (not.recall + off.recall),
        macro_f1: 0.5 * (not.f1 + off.f1),
        weighted_f1,
    }
}

impl Metrics {
    pub fn class(&self, label: Label) -> &ClassMetrics {
        &self.per_class[label.index()]
    }

    /// Names of the scalar fields, in the order of [`Metrics::values`].
    pub const NAMES: [&'static str; 11] = [
        "accuracy",
        "not_precision",
        "not_recall",
        "not_f1",
        "off_precision",
        "off_recall",
        "off_f1",
        "macro_precision",
        "macro_recall",
        "macro_f1",
        "weighted_f1",
    ];

    pub fn values(&self) -> [f64; 11] {
        let [n, o] = &self.per_class;
        [
            self.accuracy,
            n.precision,
            n.recall,
            n.f1,
            o.precision,
            o.recall,
            o.f1,
            self.macro_precision,
            self.macro_recall,
            self.macro_f1,
            self.weighted_f1,
        ]
    }
}

/// Mean and population standard deviation of each metric over folds,
/// aligned with [`Metrics::NAMES`].
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub mean: [f64; 11],
    pub std: [f64; 11],
}

impl MetricSummary {
    pub fn of(all: &[Metrics]) -> Self {
        let n = all.len().max(1) as f64;
        let mut mean = [0.0; 11];
        for m in all {
            for (acc, v) in mean.iter_mut().zip(m.values()) {
                *acc += v / n;
            }
        }
        let mut std = [0.0; 11];
        for m in all {
            for ((acc, v), mu) in std.iter_mut().zip(m.values()).zip(mean) {
                *acc += (v - mu) * (v - mu) / n;
            }
        }
        std.iter_mut().for_each(|s| *s = libm::sqrt(*s));
        MetricSummary { mean, std }
    }

    pub fn mean_of(&self, name: &str) -> Option<f64> {
        Metrics::NAMES.iter().position(|n| *n == name).map(|i| self.mean[i])
    }
}

/// Indices of each class, shuffled with `seed`; `[NOT, OFF]`.
fn shuffled_class_indices(labels: &[Label], seed: u64) -> [Vec<usize>; 2] {
    let mut by_class = [Vec::new(), Vec::new()];
    for (i, l) in labels.iter().enumerate() {
        by_class[l.index()].push(i);
    }
    let mut r = rng::seeded(seed);
    for c in by_class.iter_mut() {
        c.shuffle(&mut r);
    }
    by_class
}

/// Train/test index split. The test part has `round(fraction * N)` records;
/// when stratified, each class contributes its proportional share (largest
/// remainder, ties to `NOT`).
pub fn holdout_indices(labels: &[Label], cfg: &EvalConfig) -> Result<(Vec<usize>, Vec<usize>)> {
    cfg.validate()?;
    let n = labels.len();
    if n < 2 * cfg.folds {
        bail!(
            Usage,
            "dataset of {} records is too small (need at least {})",
            n,
            2 * cfg.folds
        );
    }
    let n_test = libm::round(cfg.test_fraction * n as f64) as usize;
    let mut test = Vec::with_capacity(n_test);
    let mut train = Vec::with_capacity(n - n_test);
    if cfg.stratified {
        let by_class = shuffled_class_indices(labels, cfg.seed);
        let exact: [f64; 2] = [0, 1].map(|c| cfg.test_fraction * by_class[c].len() as f64);
        let mut quota: [usize; 2] = exact.map(|e| libm::floor(e) as usize);
        let mut remaining = n_test - quota[0] - quota[1];
        let mut order = [0usize, 1];
        order.sort_by(|&a, &b| (exact[b] - quota[b] as f64).total_cmp(&(exact[a] - quota[a] as f64)));
        for c in order {
            if remaining > 0 && quota[c] < by_class[c].len() {
                quota[c] += 1;
                remaining -= 1;
            }
        }
        for c in 0..2 {
            test.extend_from_slice(&by_class[c][..quota[c]]);
            train.extend_from_slice(&by_class[c][quota[c]..]);
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng::seeded(cfg.seed));
        test.extend_from_slice(&all[..n_test]);
        train.extend_from_slice(&all[n_test..]);
    }
    let mut r = rng::derive(cfg.seed, 1);
    train.shuffle(&mut r);
    test.shuffle(&mut r);
    Ok((train, test))
}

pub fn holdout_split(ds: &Dataset, cfg: &EvalConfig) -> Result<(Dataset, Dataset)> {
    let labels = ds.labels()?;
    let (train, test) = holdout_indices(&labels, cfg)?;
    Ok((
        ds.select(format!("{}:train", ds.name), &train),
        ds.select(format!("{}:test", ds.name), &test),
    ))
}

/// Fold id of every record. Class members are dealt round-robin over the
/// folds (NOT first, then OFF continuing where NOT stopped), so per-class
/// fold counts differ by at most one.
pub fn kfold_assignment(labels: &[Label], cfg: &EvalConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let n = labels.len();
    if cfg.folds > n {
        bail!(Usage, "{} folds requested for {} records", cfg.folds, n);
    }
    let mut fold = vec![0usize; n];
    if cfg.stratified {
        let by_class = shuffled_class_indices(labels, cfg.seed);
        for (pos, &i) in by_class.iter().flatten().enumerate() {
            fold[i] = pos % cfg.folds;
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng::seeded(cfg.seed));
        for (pos, &i) in all.iter().enumerate() {
            fold[i] = pos % cfg.folds;
        }
    }
    Ok(fold)
}

/// `(train, validation)` index lists per fold, each in ascending order.
pub fn kfold_indices(labels: &[Label], cfg: &EvalConfig) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let fold = kfold_assignment(labels, cfg)?;
    Ok((0..cfg.folds)
        .map(|k| (0..labels.len()).partition(|&i| fold[i] != k))
        .collect())
}

pub fn stratified_kfold(ds: &Dataset, cfg: &EvalConfig) -> Result<Vec<(Dataset, Dataset)>> {
    let labels = ds.labels()?;
    Ok(kfold_indices(&labels, cfg)?
        .into_iter()
        .enumerate()
        .map(|(k, (train, val))| {
            (
                ds.select(format!("{}:fold{}:train", ds.name, k + 1), &train),
                ds.select(format!("{}:fold{}:validation", ds.name, k + 1), &val),
            )
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub n_train: usize,
    pub n_validation: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub summary: MetricSummary,
    pub pooled: ConfusionMatrix,
    pub pooled_metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutReport {
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

fn evaluate_on<C: TextClassifier>(model: &C, ds: &Dataset) -> Result<ConfusionMatrix> {
    let preds = ds.texts().map(|t| model.predict_text(t)).collect::<Result<Vec<_>>>()?;
    confusion(&preds, &ds.labels()?)
}

/// k-fold cross-validation where `fit` is called once per fold with only
/// that fold's training part.
pub fn cross_validate_with<C, F>(ds: &Dataset, cfg: &EvalConfig, mut fit: F) -> Result<CvReport>
where
    C: TextClassifier,
    F: FnMut(usize, &Dataset) -> Result<C>,
{
    let mut folds = Vec::with_capacity(cfg.folds);
    for (k, (train, val)) in stratified_kfold(ds, cfg)?.into_iter().enumerate() {
        let counts = train.label_counts();
        if counts[0] == 0 || counts[1] == 0 {
            bail!(Training, "fold {}: training part contains a single class", k + 1);
        }
        let model = fit(k, &train).map_err(|e| match e {
            Error::Training(m) => Error::Training(format!("fold {}: {}", k + 1, m)),
            other => other,
        })?;
        let cm = evaluate_on(&model, &val)?;
        folds.push(FoldResult {
            n_train: train.len(),
            n_validation: val.len(),
            confusion: cm,
            metrics: metrics(&cm),
        });
    }
    let pooled = folds
        .iter()
        .fold(ConfusionMatrix::default(), |acc, f| acc.merge(&f.confusion));
    let all: Vec<Metrics> = folds.iter().map(|f| f.metrics).collect();
    Ok(CvReport {
        summary: MetricSummary::of(&all),
        pooled_metrics: metrics(&pooled),
        pooled,
        folds,
    })
}

/// Fits the whole pipeline (cleaning, vectoriser, model) inside every fold.
pub fn cross_validate(spec: &PipelineSpec, ds: &Dataset, cfg: &EvalConfig) -> Result<CvReport> {
    cross_validate_with(ds, cfg, |_, train| spec.fit(train))
}

pub fn holdout_evaluate(spec: &PipelineSpec, ds: &Dataset, cfg: &EvalConfig) -> Result<HoldoutReport> {
    let (train, test) = holdout_split(ds, cfg)?;
    let model = spec.fit(&train)?;
    let cm = evaluate_on(&model, &test)?;
    Ok(HoldoutReport {
        n_train: train.len(),
        n_test: test.len(),
        confusion: cm,
        metrics: metrics(&cm),
    })
}
