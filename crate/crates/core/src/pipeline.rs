//! End-to-end text classifiers: cleaning, featurisation and a model, fitted
//! together from a labeled dataset.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::classifiers::{
    train_forest, train_linear, train_mnb, Classifier, EnsembleModel, ForestConfig, ForestModel, LinearConfig,
    LinearModel, Loss, Member, MnbConfig, MnbModel,
};
use crate::corpus::{Dataset, Label};
use crate::error::{bail, Error, Result};
use crate::features::{fit_tfidf, NgramSpec, TfidfModel};
use crate::neuralnet::{build_word_index, encode_pad, longest_sentence, nn_train, EmbeddingNet, NnConfig, WordIndex};
use crate::preprocess::{clean_dataset, clean_text, PreprocessConfig};

/// Which TF-IDF blocks feed the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Analyzer {
    Word,
    Char,
    /// Word block followed by char block.
    Union,
}

impl Analyzer {
    pub const ALL: [Analyzer; 3] = [Analyzer::Word, Analyzer::Char, Analyzer::Union];

    pub fn as_str(self) -> &'static str {
        match self {
            Analyzer::Word => "word",
            Analyzer::Char => "char",
            Analyzer::Union => "union",
        }
    }
}

impl fmt::Display for Analyzer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Analyzer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Analyzer::Word),
            "char" => Ok(Analyzer::Char),
            "union" => Ok(Analyzer::Union),
            _ => bail!(Config, "unknown analyzer {:?} (word, char, union)", s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Svc,
    Mnb,
    Lr,
    Rfc,
    Ensemble,
    Nn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Svc,
        ModelKind::Mnb,
        ModelKind::Lr,
        ModelKind::Rfc,
        ModelKind::Ensemble,
        ModelKind::Nn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Svc => "svc",
            ModelKind::Mnb => "mnb",
            ModelKind::Lr => "lr",
            ModelKind::Rfc => "rfc",
            ModelKind::Ensemble => "ensemble",
            ModelKind::Nn => "nn",
        }
    }

    pub fn uses_tfidf(self) -> bool {
        self != ModelKind::Nn
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            Error::Config(alloc::format!(
                "unknown model {:?} (svc, mnb, lr, rfc, ensemble, nn)",
                s
            ))
        })
    }
}

/// Embedding-net settings that do not depend on the training data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnParams {
    pub embed_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for NnParams {
    fn default() -> Self {
        let d = NnConfig::new(1, 1);
        NnParams {
            embed_dim: d.embed_dim,
            epochs: d.epochs,
            learning_rate: d.learning_rate,
            batch_size: d.batch_size,
        }
    }
}

/// Everything needed to fit a text classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSpec {
    pub preprocess: PreprocessConfig,
    pub analyzer: Analyzer,
    pub word: NgramSpec,
    pub char: NgramSpec,
    pub model: ModelKind,
    pub mnb: MnbConfig,
    /// `C`, `max_iter` and `tol` for SVC and LR; the loss is set per model.
    pub linear: LinearConfig,
    pub forest: ForestConfig,
    pub nn: NnParams,
    pub seed: u64,
}

impl PipelineSpec {
    /// Defaults: word (1, 2) and char (1, 5) n-grams, default stopwords.
    pub fn new(model: ModelKind, analyzer: Analyzer) -> Self {
        PipelineSpec {
            preprocess: PreprocessConfig::default(),
            analyzer,
            word: NgramSpec::word(1, 2).expect("valid range"),
            char: NgramSpec::char(1, 5).expect("valid range"),
            model,
            mnb: MnbConfig::default(),
            linear: LinearConfig::default(),
            forest: ForestConfig::default(),
            nn: NnParams::default(),
            seed: 0,
        }
    }

    pub fn feature_specs(&self) -> Vec<NgramSpec> {
        match self.analyzer {
            Analyzer::Word => vec![self.word],
            Analyzer::Char => vec![self.char],
            Analyzer::Union => vec![self.word, self.char],
        }
    }

    fn linear_config(&self, loss: Loss, member: u64) -> LinearConfig {
        LinearConfig {
            loss,
            seed: self.seed.wrapping_add(member),
            ..self.linear
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        self.mnb.validate()?;
        self.linear.validate()?;
        self.forest.validate()?;
        Ok(())
    }

    /// Cleans `ds`, then fits the featuriser and the model on what is left.
    pub fn fit(&self, ds: &Dataset) -> Result<TrainedPipeline> {
        self.validate()?;
        let cleaned = clean_dataset(ds, &self.preprocess);
        let labels = cleaned.labels()?;
        let texts: Vec<&str> = cleaned.texts().collect();
        if texts.is_empty() {
            bail!(Data, "no records left after cleaning {:?}", ds.name);
        }
        let model = if self.model == ModelKind::Nn {
            let index = build_word_index(&texts)?;
            let max_len = longest_sentence(&texts).max(1);
            let cfg = NnConfig {
                embed_dim: self.nn.embed_dim,
                epochs: self.nn.epochs,
                learning_rate: self.nn.learning_rate,
                batch_size: self.nn.batch_size,
                seed: self.seed,
                ..NnConfig::new(index.capacity(), max_len)
            };
            let seqs: Vec<_> = texts.iter().map(|t| encode_pad(&index, t, max_len)).collect();
            let trained = nn_train(&seqs, &labels, &cfg)?;
            PipelineModel::Nn {
                index,
                net: trained.net,
            }
        } else {
            let vectorizer = fit_tfidf(&texts, &self.feature_specs())?;
            let x = vectorizer.transform_all(&texts);
            let classifier = match self.model {
                ModelKind::Svc => {
                    TfidfClassifier::Svc(train_linear(&x, &labels, &self.linear_config(Loss::SquaredHinge, 0))?)
                }
                ModelKind::Lr => {
                    TfidfClassifier::Lr(train_linear(&x, &labels, &self.linear_config(Loss::Logistic, 0))?)
                }
                ModelKind::Mnb => TfidfClassifier::Mnb(train_mnb(&x, &labels, &self.mnb)?),
                ModelKind::Rfc => TfidfClassifier::Rfc(train_forest(
                    &x,
                    &labels,
                    &ForestConfig {
                        seed: self.seed,
                        ..self.forest
                    },
                )?),
                ModelKind::Ensemble => TfidfClassifier::Ensemble(EnsembleModel::new(vec![
                    Member::Linear(train_linear(&x, &labels, &self.linear_config(Loss::SquaredHinge, 0))?),
                    Member::Mnb(train_mnb(&x, &labels, &self.mnb)?),
                    Member::Linear(train_linear(&x, &labels, &self.linear_config(Loss::Logistic, 2))?),
                ])?),
                ModelKind::Nn => unreachable!(),
            };
            PipelineModel::Tfidf { vectorizer, classifier }
        };
        Ok(TrainedPipeline {
            preprocess: self.preprocess.clone(),
            model,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TfidfClassifier {
    Svc(LinearModel),
    Lr(LinearModel),
    Mnb(MnbModel),
    Rfc(ForestModel),
    Ensemble(EnsembleModel),
}

impl TfidfClassifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            TfidfClassifier::Svc(_) => ModelKind::Svc,
            TfidfClassifier::Lr(_) => ModelKind::Lr,
            TfidfClassifier::Mnb(_) => ModelKind::Mnb,
            TfidfClassifier::Rfc(_) => ModelKind::Rfc,
            TfidfClassifier::Ensemble(_) => ModelKind::Ensemble,
        }
    }

    fn as_classifier(&self) -> &dyn Classifier {
        match self {
            TfidfClassifier::Svc(m) | TfidfClassifier::Lr(m) => m,
            TfidfClassifier::Mnb(m) => m,
            TfidfClassifier::Rfc(m) => m,
            TfidfClassifier::Ensemble(m) => m,
        }
    }
}

impl Classifier for TfidfClassifier {
    fn dim(&self) -> usize {
        self.as_classifier().dim()
    }

    fn predict(&self, x: &crate::SparseVector) -> Result<Label> {
        self.as_classifier().predict(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineModel {
    Tfidf {
        vectorizer: TfidfModel,
        classifier: TfidfClassifier,
    },
    Nn {
        index: WordIndex,
        net: EmbeddingNet,
    },
}

/// Anything that labels raw text.
pub trait TextClassifier {
    fn predict_text(&self, text: &str) -> Result<Label>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPipeline {
    pub preprocess: PreprocessConfig,
    pub model: PipelineModel,
}

impl TrainedPipeline {
    pub fn kind(&self) -> ModelKind {
        match &self.model {
            PipelineModel::Tfidf { classifier, .. } => classifier.kind(),
            PipelineModel::Nn { .. } => ModelKind::Nn,
        }
    }

    pub fn vectorizer(&self) -> Option<&TfidfModel> {
        match &self.model {
            PipelineModel::Tfidf { vectorizer, .. } => Some(vectorizer),
            PipelineModel::Nn { .. } => None,
        }
    }

    /// Label for text that has already been cleaned.
    pub fn predict_clean(&self, cleaned: &str) -> Result<Label> {
        match &self.model {
            PipelineModel::Tfidf { vectorizer, classifier } => classifier.predict(&vectorizer.transform(cleaned)),
            PipelineModel::Nn { index, net } => net.predict(&encode_pad(index, cleaned, net.config.max_len)),
        }
    }

    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<Label>> {
        ds.texts().map(|t| self.predict_text(t)).collect()
    }

    pub fn clean(&self, text: &str) -> String {
        clean_text(text, &self.preprocess)
    }
}

impl TextClassifier for TrainedPipeline {
    fn predict_text(&self, text: &str) -> Result<Label> {
        self.predict_clean(&self.clean(text))
    }
}
