//! Text model files.
//!
//! A model file is line oriented: a magic/version line, the model kind, the
//! preprocessing settings, then either a TF-IDF vectorizer followed by the
//! classifier parameters or a word index followed by the network weights.
//! Terms are escaped so each sits on one line; floats are written in the
//! shortest form that parses back to the same value, so a load followed by
//! a save reproduces the file byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use codemix_core::classifiers::forest::{Node, Tree};
use codemix_core::classifiers::{
    EnsembleModel, ForestConfig, ForestModel, LinearConfig, LinearModel, Loss, Member, MnbModel,
};
use codemix_core::features::{TfidfBlock, Vocabulary};
use codemix_core::neuralnet::{EmbeddingNet, NnConfig, WordIndex};
use codemix_core::pipeline::{ModelKind, PipelineModel, TfidfClassifier, TrainedPipeline};
use codemix_core::preprocess::PreprocessConfig;
use codemix_core::{NgramMode, NgramSpec, TfidfModel};

use crate::error::{CliError, CliResult};

pub const MAGIC: &str = "HKBC1";
const END: &str = "end";

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

pub fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => {
                return Err(format!(
                    "bad escape sequence \\{}",
                    other.map(String::from).unwrap_or_default()
                ))
            }
        }
    }
    Ok(out)
}

fn float(out: &mut String, v: f64) {
    write!(out, "{v:?}").unwrap();
}

fn floats(out: &mut String, key: &str, values: &[f64]) {
    out.push_str(key);
    for &v in values {
        out.push(' ');
        float(out, v);
    }
    out.push('\n');
}

fn write_preprocess(out: &mut String, p: &PreprocessConfig) {
    writeln!(
        out,
        "preprocess remove_stopwords={} strip_social_markers={} lowercase={} stopwords={}",
        p.remove_stopwords,
        p.strip_social_markers,
        p.lowercase,
        p.stopwords.len()
    )
    .unwrap();
    for w in &p.stopwords {
        writeln!(out, "{}", escape(w)).unwrap();
    }
}

fn write_vectorizer(out: &mut String, v: &TfidfModel) {
    writeln!(out, "vectorizer n_docs={} blocks={}", v.n_docs(), v.blocks().len()).unwrap();
    for b in v.blocks() {
        writeln!(
            out,
            "block mode={} lo={} hi={} terms={}",
            b.spec.mode(),
            b.spec.lo(),
            b.spec.hi(),
            b.vocabulary.len()
        )
        .unwrap();
        for (t, &idf) in b.vocabulary.terms().iter().zip(&b.idf) {
            out.push_str(&escape(t));
            out.push('\t');
            float(out, idf);
            out.push('\n');
        }
    }
}

fn write_linear(out: &mut String, m: &LinearModel) {
    let c = &m.config;
    write!(out, "linear loss={} c=", c.loss).unwrap();
    float(out, c.c);
    write!(out, " max_iter={} tol=", c.max_iter).unwrap();
    float(out, c.tol);
    write!(out, " seed={} objective=", c.seed).unwrap();
    float(out, m.objective);
    writeln!(out, " iterations={} dim={}", m.iterations, m.weights.len()).unwrap();
    floats(out, "bias", &[m.bias]);
    floats(out, "weights", &m.weights);
}

fn write_mnb(out: &mut String, m: &MnbModel) {
    out.push_str("mnb alpha=");
    float(out, m.alpha);
    writeln!(out, " dim={}", m.feature_log_prob[0].len()).unwrap();
    floats(out, "prior", &m.class_log_prior);
    floats(out, "loglik_not", &m.feature_log_prob[0]);
    floats(out, "loglik_off", &m.feature_log_prob[1]);
}

fn write_forest(out: &mut String, m: &ForestModel) {
    let c = &m.config;
    let mf = c.max_features.map_or("auto".to_string(), |k| k.to_string());
    writeln!(
        out,
        "forest n_estimators={} max_depth={} max_features={} seed={} dim={} trees={}",
        c.n_estimators,
        c.max_depth,
        mf,
        c.seed,
        m.dim,
        m.trees.len()
    )
    .unwrap();
    for t in &m.trees {
        writeln!(out, "tree nodes={}", t.nodes.len()).unwrap();
        for n in &t.nodes {
            match n {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    write!(out, "split {feature} ").unwrap();
                    float(out, *threshold);
                    writeln!(out, " {left} {right}").unwrap();
                }
                Node::Leaf { counts } => writeln!(out, "leaf {} {}", counts[0], counts[1]).unwrap(),
            }
        }
    }
}

fn write_nn(out: &mut String, index: &WordIndex, net: &EmbeddingNet) {
    writeln!(out, "wordindex words={}", index.size()).unwrap();
    for w in index.words() {
        writeln!(out, "{}", escape(w)).unwrap();
    }
    let c = &net.config;
    write!(
        out,
        "nn vocab_capacity={} embed_dim={} max_len={} epochs={} batch_size={} seed={} learning_rate=",
        c.vocab_capacity, c.embed_dim, c.max_len, c.epochs, c.batch_size, c.seed
    )
    .unwrap();
    float(out, c.learning_rate);
    out.push_str(" beta1=");
    float(out, c.beta1);
    out.push_str(" beta2=");
    float(out, c.beta2);
    out.push_str(" epsilon=");
    float(out, c.epsilon);
    out.push('\n');
    floats(out, "bias", &[net.bias]);
    floats(out, "dense", &net.dense);
    writeln!(out, "embedding rows={}", c.vocab_capacity).unwrap();
    for row in net.embedding.chunks(c.embed_dim) {
        floats(out, "row", row);
    }
}

/// Serializes a trained pipeline.
pub fn to_text(model: &TrainedPipeline) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "kind {}", model.kind()).unwrap();
    write_preprocess(&mut out, &model.preprocess);
    match &model.model {
        PipelineModel::Tfidf { vectorizer, classifier } => {
            write_vectorizer(&mut out, vectorizer);
            match classifier {
                TfidfClassifier::Svc(m) | TfidfClassifier::Lr(m) => write_linear(&mut out, m),
                TfidfClassifier::Mnb(m) => write_mnb(&mut out, m),
                TfidfClassifier::Rfc(m) => write_forest(&mut out, m),
                TfidfClassifier::Ensemble(e) => {
                    writeln!(out, "ensemble members={}", e.members().len()).unwrap();
                    for m in e.members() {
                        match m {
                            Member::Linear(m) => write_linear(&mut out, m),
                            Member::Mnb(m) => write_mnb(&mut out, m),
                            Member::Forest(m) => write_forest(&mut out, m),
                        }
                    }
                }
            }
        }
        PipelineModel::Nn { index, net } => write_nn(&mut out, index, net),
    }
    writeln!(out, "{END}").unwrap();
    out
}

struct Parser<'a> {
    lines: std::str::Split<'a, char>,
    line_no: usize,
}

/// `keyword key=value ...` header line.
struct Header<'a> {
    line_no: usize,
    pairs: Vec<(&'a str, &'a str)>,
}

impl Header<'_> {
    fn get<T: FromStr>(&self, key: &str) -> Result<T, String> {
        let raw = self
            .pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| format!("line {}: missing field {key}", self.line_no))?;
        raw.parse()
            .map_err(|_| format!("line {}: bad value {raw:?} for {key}", self.line_no))
    }
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            lines: text.split('\n'),
            line_no: 0,
        }
    }

    fn line(&mut self) -> Result<&'a str, String> {
        self.line_no += 1;
        match self.lines.next() {
            Some(l) => Ok(l),
            None => Err("file is truncated".into()),
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> String {
        format!("line {}: {msg}", self.line_no)
    }

    fn header(&mut self, keyword: &str) -> Result<Header<'a>, String> {
        let line = self.line()?;
        let mut parts = line.split(' ');
        if parts.next() != Some(keyword) {
            return Err(self.err(format_args!("expected `{keyword}`")));
        }
        let pairs = parts
            .map(|p| {
                p.split_once('=')
                    .ok_or_else(|| self.err(format_args!("expected key=value, got {p:?}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Header {
            line_no: self.line_no,
            pairs,
        })
    }

    /// `keyword v1 v2 ...` with exactly `n` values.
    fn values<T: FromStr>(&mut self, keyword: &str, n: usize) -> Result<Vec<T>, String> {
        let line = self.line()?;
        let mut parts = line.split(' ');
        if parts.next() != Some(keyword) {
            return Err(self.err(format_args!("expected `{keyword}`")));
        }
        let v = parts
            .map(|p| p.parse::<T>().map_err(|_| self.err(format_args!("bad number {p:?}"))))
            .collect::<Result<Vec<T>, _>>()?;
        if v.len() != n {
            return Err(self.err(format_args!("expected {n} values after `{keyword}`, found {}", v.len())));
        }
        Ok(v)
    }

    fn escaped_lines(&mut self, n: usize) -> Result<Vec<String>, String> {
        (0..n)
            .map(|_| {
                let l = self.line()?;
                unescape(l).map_err(|e| self.err(e))
            })
            .collect()
    }

    fn preprocess(&mut self) -> Result<PreprocessConfig, String> {
        let h = self.header("preprocess")?;
        let n: usize = h.get("stopwords")?;
        Ok(PreprocessConfig {
            remove_stopwords: h.get("remove_stopwords")?,
            strip_social_markers: h.get("strip_social_markers")?,
            lowercase: h.get("lowercase")?,
            stopwords: self.escaped_lines(n)?.into_iter().collect(),
        })
    }

    fn vectorizer(&mut self) -> Result<TfidfModel, String> {
        let h = self.header("vectorizer")?;
        let n_blocks: usize = h.get("blocks")?;
        let mut blocks = Vec::with_capacity(n_blocks);
        for _ in 0..n_blocks {
            let b = self.header("block")?;
            let mode: NgramMode = b
                .get::<String>("mode")?
                .parse()
                .map_err(|e: codemix_core::Error| self.err(e))?;
            let spec = NgramSpec::new(mode, b.get("lo")?, b.get("hi")?).map_err(|e| self.err(e))?;
            let n_terms: usize = b.get("terms")?;
            let mut terms = Vec::with_capacity(n_terms);
            let mut idf = Vec::with_capacity(n_terms);
            for _ in 0..n_terms {
                let line = self.line()?;
                let (t, v) = line
                    .rsplit_once('\t')
                    .ok_or_else(|| self.err("expected term<TAB>idf"))?;
                terms.push(unescape(t).map_err(|e| self.err(e))?);
                idf.push(v.parse::<f64>().map_err(|_| self.err(format_args!("bad idf {v:?}")))?);
            }
            let vocabulary = Vocabulary::from_sorted(terms).map_err(|e| self.err(e))?;
            blocks.push(TfidfBlock { spec, vocabulary, idf });
        }
        TfidfModel::from_blocks(blocks, h.get("n_docs")?).map_err(|e| self.err(e))
    }

    fn linear(&mut self) -> Result<LinearModel, String> {
        let h = self.header("linear")?;
        let loss: Loss = h
            .get::<String>("loss")?
            .parse()
            .map_err(|e: codemix_core::Error| self.err(e))?;
        let dim: usize = h.get("dim")?;
        let config = LinearConfig {
            loss,
            c: h.get("c")?,
            max_iter: h.get("max_iter")?,
            tol: h.get("tol")?,
            seed: h.get("seed")?,
        };
        let bias = self.values::<f64>("bias", 1)?[0];
        let weights = self.values("weights", dim)?;
        Ok(LinearModel {
            weights,
            bias,
            config,
            objective: h.get("objective")?,
            iterations: h.get("iterations")?,
        })
    }

    fn mnb(&mut self) -> Result<MnbModel, String> {
        let h = self.header("mnb")?;
        let dim: usize = h.get("dim")?;
        let prior = self.values::<f64>("prior", 2)?;
        Ok(MnbModel {
            alpha: h.get("alpha")?,
            class_log_prior: [prior[0], prior[1]],
            feature_log_prob: [self.values("loglik_not", dim)?, self.values("loglik_off", dim)?],
        })
    }

    fn forest(&mut self) -> Result<ForestModel, String> {
        let h = self.header("forest")?;
        let max_features = match h.get::<String>("max_features")?.as_str() {
            "auto" => None,
            _ => Some(h.get("max_features")?),
        };
        let config = ForestConfig {
            n_estimators: h.get("n_estimators")?,
            max_depth: h.get("max_depth")?,
            max_features,
            seed: h.get("seed")?,
        };
        let dim: usize = h.get("dim")?;
        let n_trees: usize = h.get("trees")?;
        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            let n_nodes: usize = self.header("tree")?.get("nodes")?;
            let mut nodes = Vec::with_capacity(n_nodes);
            for _ in 0..n_nodes {
                let line = self.line()?;
                let parts: Vec<&str> = line.split(' ').collect();
                let bad = || self.err(format_args!("bad tree node {line:?}"));
                let node = match parts.as_slice() {
                    ["split", f, t, l, r] => {
                        let feature: u32 = f.parse().map_err(|_| bad())?;
                        let (left, right): (u32, u32) = (l.parse().map_err(|_| bad())?, r.parse().map_err(|_| bad())?);
                        if feature as usize >= dim || left as usize >= n_nodes || right as usize >= n_nodes {
                            return Err(bad());
                        }
                        Node::Split {
                            feature,
                            threshold: t.parse().map_err(|_| bad())?,
                            left,
                            right,
                        }
                    }
                    ["leaf", a, b] => Node::Leaf {
                        counts: [a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?],
                    },
                    _ => return Err(bad()),
                };
                nodes.push(node);
            }
            if nodes.is_empty() {
                return Err(self.err("tree with no nodes"));
            }
            trees.push(Tree { nodes });
        }
        Ok(ForestModel { trees, dim, config })
    }

    fn member(&mut self) -> Result<Member, String> {
        let kind = self.peek_keyword();
        match kind {
            Some("linear") => Ok(Member::Linear(self.linear()?)),
            Some("mnb") => Ok(Member::Mnb(self.mnb()?)),
            Some("forest") => Ok(Member::Forest(self.forest()?)),
            _ => {
                self.line_no += 1;
                Err(self.err("expected an ensemble member"))
            }
        }
    }

    fn peek_keyword(&self) -> Option<&'a str> {
        self.lines.clone().next().and_then(|l| l.split(' ').next())
    }

    fn nn(&mut self) -> Result<PipelineModel, String> {
        let n_words: usize = self.header("wordindex")?.get("words")?;
        let index = WordIndex::from_sorted(self.escaped_lines(n_words)?).map_err(|e| self.err(e))?;
        let h = self.header("nn")?;
        let config = NnConfig {
            vocab_capacity: h.get("vocab_capacity")?,
            embed_dim: h.get("embed_dim")?,
            max_len: h.get("max_len")?,
            learning_rate: h.get("learning_rate")?,
            epochs: h.get("epochs")?,
            batch_size: h.get("batch_size")?,
            seed: h.get("seed")?,
            beta1: h.get("beta1")?,
            beta2: h.get("beta2")?,
            epsilon: h.get("epsilon")?,
        };
        config.validate().map_err(|e| self.err(e))?;
        if config.vocab_capacity != index.capacity() {
            return Err(self.err("network capacity does not match the word index"));
        }
        let bias = self.values::<f64>("bias", 1)?[0];
        let dense = self.values("dense", config.max_len * config.embed_dim)?;
        let rows: usize = self.header("embedding")?.get("rows")?;
        if rows != config.vocab_capacity {
            return Err(self.err("embedding row count does not match capacity"));
        }
        let mut embedding = Vec::with_capacity(rows * config.embed_dim);
        for _ in 0..rows {
            embedding.extend(self.values::<f64>("row", config.embed_dim)?);
        }
        Ok(PipelineModel::Nn {
            index,
            net: EmbeddingNet {
                embedding,
                dense,
                bias,
                config,
            },
        })
    }

    fn pipeline(&mut self) -> Result<TrainedPipeline, String> {
        let magic = self.line()?;
        if magic != MAGIC {
            return Err(if magic.starts_with("HKBC") {
                format!("unsupported model file version {magic:?} (expected {MAGIC})")
            } else {
                "not a model file (bad magic)".into()
            });
        }
        let kind_line = self.line()?;
        let kind: ModelKind = kind_line
            .strip_prefix("kind ")
            .ok_or_else(|| self.err("expected `kind`"))?
            .parse()
            .map_err(|e: codemix_core::Error| self.err(e))?;
        let preprocess = self.preprocess()?;
        let model = if kind == ModelKind::Nn {
            self.nn()?
        } else {
            let vectorizer = self.vectorizer()?;
            let classifier = match kind {
                ModelKind::Svc => TfidfClassifier::Svc(self.linear()?),
                ModelKind::Lr => TfidfClassifier::Lr(self.linear()?),
                ModelKind::Mnb => TfidfClassifier::Mnb(self.mnb()?),
                ModelKind::Rfc => TfidfClassifier::Rfc(self.forest()?),
                ModelKind::Ensemble => {
                    let n: usize = self.header("ensemble")?.get("members")?;
                    let members = (0..n).map(|_| self.member()).collect::<Result<Vec<_>, _>>()?;
                    TfidfClassifier::Ensemble(EnsembleModel::new(members).map_err(|e| self.err(e))?)
                }
                ModelKind::Nn => unreachable!(),
            };
            use codemix_core::classifiers::Classifier;
            if classifier.dim() != vectorizer.dim() {
                return Err(format!(
                    "classifier expects {} features but the vectorizer produces {}",
                    classifier.dim(),
                    vectorizer.dim()
                ));
            }
            PipelineModel::Tfidf { vectorizer, classifier }
        };
        if self.line()? != END {
            return Err(self.err("expected `end`"));
        }
        let rest: Vec<&str> = self.lines.by_ref().collect();
        if !(rest.is_empty() || rest == [""]) {
            return Err("trailing data after `end`".into());
        }
        Ok(TrainedPipeline { preprocess, model })
    }
}

/// Parses a model file's contents; errors carry the offending line number.
pub fn from_text(text: &str) -> Result<TrainedPipeline, String> {
    Parser::new(text).pipeline()
}

pub fn save_model(model: &TrainedPipeline, path: &Path) -> CliResult<()> {
    fs::write(path, to_text(model)).map_err(|e| CliError::io(path, e))
}

pub fn load_model(path: &Path) -> CliResult<TrainedPipeline> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let format_err = |message| CliError::Format {
        path: path.to_path_buf(),
        message,
    };
    let text = String::from_utf8(bytes).map_err(|_| format_err("not valid UTF-8".into()))?;
    from_text(&text).map_err(format_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_round_trip() {
        for s in ["plain", " a b", "tab\there", "back\\slash\\t", "nl\nr\r"] {
            let e = escape(s);
            assert!(!e.contains('\n') && !e.contains('\t'));
            assert_eq!(unescape(&e).unwrap(), s);
        }
        assert!(unescape("bad\\q").is_err());
        assert!(unescape("dangling\\").is_err());
    }

    #[test]
    fn float_text_round_trips() {
        for v in [0.1, 1.0, -2.5e-300, 1e21, f64::MIN_POSITIVE, 0.30000000000000004] {
            let mut s = String::new();
            float(&mut s, v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        assert!(from_text("NOPE\n").unwrap_err().contains("magic"));
        assert!(from_text("HKBC9\n").unwrap_err().contains("version"));
        assert!(from_text("").is_err());
    }
}
