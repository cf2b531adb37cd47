//! Word and character n-gram TF-IDF features.
//!
//! A [`TfidfModel`] holds one block per [`NgramSpec`]. Within a block the
//! vocabulary is every gram seen during fitting, indexed in byte-wise
//! lexicographic order, and
//!
//! ```text
//! idf(t)    = ln((1 + n_docs) / (1 + df(t))) + 1
//! weight(t) = count(t in doc) * idf(t)
//! ```
//!
//! Each block is L2-normalised on its own and the blocks are concatenated in
//! spec order, so a word+char union has dimension `|V_word| + |V_char|`.

use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{bail, Error, Result};

/// Largest n-gram order accepted by [`NgramSpec::new`].
pub const MAX_NGRAM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NgramMode {
    Word,
    Char,
}

impl NgramMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NgramMode::Word => "word",
            NgramMode::Char => "char",
        }
    }
}

impl fmt::Display for NgramMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for NgramMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(NgramMode::Word),
            "char" => Ok(NgramMode::Char),
            _ => bail!(Config, "unknown n-gram mode {:?}", s),
        }
    }
}

/// An n-gram mode with an inclusive order range `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NgramSpec {
    mode: NgramMode,
    lo: usize,
    hi: usize,
}

impl NgramSpec {
    pub fn new(mode: NgramMode, lo: usize, hi: usize) -> Result<Self> {
        if lo < 1 || hi < lo || hi > MAX_NGRAM {
            bail!(
                Config,
                "invalid {} n-gram range ({}, {}): need 1 <= lo <= hi <= {}",
                mode,
                lo,
                hi,
                MAX_NGRAM
            );
        }
        Ok(NgramSpec { mode, lo, hi })
    }

    pub fn word(lo: usize, hi: usize) -> Result<Self> {
        Self::new(NgramMode::Word, lo, hi)
    }

    pub fn char(lo: usize, hi: usize) -> Result<Self> {
        Self::new(NgramMode::Char, lo, hi)
    }

    pub fn mode(&self) -> NgramMode {
        self.mode
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }
}

impl fmt::Display for NgramSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}, {})", self.mode, self.lo, self.hi)
    }
}

/// Maximal runs of ASCII letters with at least two letters, in order.
pub fn tokenize(text: &str) -> Vec<&str> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, b) in bytes.iter().enumerate() {
        match (b.is_ascii_alphabetic(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= 2 {
                    tokens.push(&text[s..i]);
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if bytes.len() - s >= 2 {
            tokens.push(&text[s..]);
        }
    }
    tokens
}

/// Word n-grams of orders `lo..=hi`, grouped by order then position, joined
/// with single spaces.
pub fn word_ngrams(tokens: &[&str], lo: usize, hi: usize) -> Vec<String> {
    let mut out = Vec::new();
    for n in lo..=hi.min(tokens.len()) {
        for w in tokens.windows(n) {
            out.push(w.join(" "));
        }
    }
    out
}

/// Character n-grams (as substrings of `text`, spaces included) of orders
/// `lo..=hi`, grouped by order then position.
pub fn char_ngrams(text: &str, lo: usize, hi: usize) -> Vec<&str> {
    let mut bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
    bounds.push(text.len());
    let len = bounds.len() - 1;
    let mut out = Vec::new();
    for n in lo..=hi.min(len) {
        for start in 0..=(len - n) {
            out.push(&text[bounds[start]..bounds[start + n]]);
        }
    }
    out
}

/// All grams of `text` under `spec`. Word mode tokenizes first; char mode
/// reads the text verbatim.
pub fn extract_ngrams<'a>(text: &'a str, spec: &NgramSpec) -> Vec<Cow<'a, str>> {
    match spec.mode {
        NgramMode::Word => word_ngrams(&tokenize(text), spec.lo, spec.hi)
            .into_iter()
            .map(Cow::Owned)
            .collect(),
        NgramMode::Char => char_ngrams(text, spec.lo, spec.hi)
            .into_iter()
            .map(Cow::Borrowed)
            .collect(),
    }
}

/// Sorted term list; a term's index is its position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary from terms already in strictly increasing byte
    /// order.
    pub fn from_sorted(terms: Vec<String>) -> Result<Self> {
        if terms.windows(2).any(|w| w[0].as_bytes() >= w[1].as_bytes()) {
            bail!(Data, "vocabulary terms must be unique and sorted");
        }
        Ok(Vocabulary { terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

/// Fitted state for one n-gram spec.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfBlock {
    pub spec: NgramSpec,
    pub vocabulary: Vocabulary,
    pub idf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    blocks: Vec<TfidfBlock>,
    n_docs: usize,
}

pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    libm::log((1.0 + n_docs as f64) / (1.0 + df as f64)) + 1.0
}

pub fn fit_tfidf<S: AsRef<str>>(corpus: &[S], specs: &[NgramSpec]) -> Result<TfidfModel> {
    if corpus.is_empty() {
        bail!(Usage, "cannot fit TF-IDF on an empty corpus");
    }
    if specs.is_empty() {
        bail!(Usage, "at least one n-gram spec is required");
    }
    let n_docs = corpus.len();
    let blocks = specs
        .iter()
        .map(|spec| {
            let mut df: BTreeMap<String, usize> = BTreeMap::new();
            for doc in corpus {
                let mut grams = extract_ngrams(doc.as_ref(), spec);
                grams.sort_unstable();
                grams.dedup();
                for g in grams {
                    match df.get_mut(g.as_ref()) {
                        Some(c) => *c += 1,
                        None => {
                            df.insert(g.into_owned(), 1);
                        }
                    }
                }
            }
            let (terms, idf) = df.into_iter().map(|(t, d)| (t, smoothed_idf(n_docs, d))).unzip();
            TfidfBlock {
                spec: *spec,
                vocabulary: Vocabulary { terms },
                idf,
            }
        })
        .collect();
    Ok(TfidfModel { blocks, n_docs })
}

impl TfidfModel {
    /// Reassembles a model from persisted parts.
    pub fn from_blocks(blocks: Vec<TfidfBlock>, n_docs: usize) -> Result<Self> {
        if blocks.is_empty() {
            bail!(Data, "TF-IDF model has no blocks");
        }
        for b in &blocks {
            if b.idf.len() != b.vocabulary.len() {
                bail!(
                    Data,
                    "{} block: {} idf values for {} terms",
                    b.spec,
                    b.idf.len(),
                    b.vocabulary.len()
                );
            }
            if b.idf.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                bail!(Data, "{} block: idf values must be positive and finite", b.spec);
            }
        }
        Ok(TfidfModel { blocks, n_docs })
    }

    pub fn blocks(&self) -> &[TfidfBlock] {
        &self.blocks
    }

    pub fn specs(&self) -> Vec<NgramSpec> {
        self.blocks.iter().map(|b| b.spec).collect()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.vocabulary.len()).collect()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.vocabulary.len()).sum()
    }

    pub fn idf_of(&self, spec_index: usize, term: &str) -> Result<f64> {
        let block = self
            .blocks
            .get(spec_index)
            .ok_or_else(|| Error::Usage(alloc::format!("no n-gram block {}", spec_index)))?;
        block
            .vocabulary
            .index_of(term)
            .map(|i| block.idf[i])
            .ok_or_else(|| Error::Lookup(String::from(term)))
    }

    pub fn transform(&self, text: &str) -> SparseVector {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut offset = 0usize;
        for block in &self.blocks {
            let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
            for g in extract_ngrams(text, &block.spec) {
                if let Some(i) = block.vocabulary.index_of(&g) {
                    *counts.entry(i).or_insert(0.0) += 1.0;
                }
            }
            let weighted: Vec<(usize, f64)> = counts.into_iter().map(|(i, c)| (i, c * block.idf[i])).collect();
            let norm = libm::sqrt(weighted.iter().map(|(_, w)| w * w).sum::<f64>());
            if norm > 0.0 {
                for (i, w) in weighted {
                    indices.push((offset + i) as u32);
                    values.push(w / norm);
                }
            }
            offset += block.vocabulary.len();
        }
        SparseVector {
            dim: offset,
            indices,
            values,
        }
    }

    pub fn transform_all<S: AsRef<str>>(&self, texts: &[S]) -> Vec<SparseVector> {
        texts.iter().map(|t| self.transform(t.as_ref())).collect()
    }
}

/// Sparse non-negative feature vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new(dim: usize, pairs: Vec<(usize, f64)>) -> Result<Self> {
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values = Vec::with_capacity(pairs.len());
        let mut prev: Option<usize> = None;
        for (i, v) in pairs {
            if i >= dim || prev.is_some_and(|p| p >= i) {
                bail!(Data, "sparse indices must be strictly increasing and below {}", dim);
            }
            if !v.is_finite() {
                bail!(Data, "sparse value at {} is not finite", i);
            }
            prev = Some(i);
            indices.push(i as u32);
            values.push(v);
        }
        Ok(SparseVector { dim, indices, values })
    }

    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v))
            .unzip();
        SparseVector {
            dim: dense.len(),
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().zip(&self.values).map(|(&i, &v)| (i as usize, v))
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&(index as u32)) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * dense[i]).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|v| v * v).sum())
    }

    pub fn scaled(&self, k: f64) -> SparseVector {
        SparseVector {
            dim: self.dim,
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * k).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}
