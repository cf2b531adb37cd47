//! Noise removal for raw social-media messages.
//!
//! [`clean_text`] runs a fixed sequence of steps:
//!
//! 1. drop whitespace tokens that start with `@` or `#` (mentions, retweet
//!    markers, hashtags)
//! 2. replace every non-ASCII code point with a space (emoji, native script)
//! 3. delete ASCII digits
//! 4. replace `@ # % $ ^ ( ) -` with spaces
//! 5. lowercase
//! 6. remove stopwords, when enabled
//! 7. collapse whitespace runs to one space and trim
//!
//! Marker removal has to come before step 4, otherwise `@USER` would survive
//! as `user`. Punctuation outside the step-4 set (`!`, `?`, `.`, `'`, ...) is
//! kept.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::Dataset;
use crate::error::{bail, Result};

/// Characters turned into spaces by step 4.
pub const SPECIAL_CHARS: [char; 8] = ['@', '#', '%', '$', '^', '(', ')', '-'];

/// Default English stopword list shipped with the crate.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub remove_stopwords: bool,
    pub stopwords: BTreeSet<String>,
    pub strip_social_markers: bool,
    pub lowercase: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            remove_stopwords: true,
            stopwords: default_stopwords(),
            strip_social_markers: true,
            lowercase: true,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        for w in &self.stopwords {
            check_stopword(w)?;
        }
        Ok(())
    }
}

fn check_stopword(w: &str) -> Result<()> {
    if w.is_empty() || !w.is_ascii() || w.bytes().any(|b| b.is_ascii_uppercase() || b.is_ascii_whitespace()) {
        bail!(Config, "stopword {:?} must be a non-empty lowercase ASCII word", w);
    }
    Ok(())
}

/// Parses a stopword list: one word per line, `#` starts a comment line,
/// blank lines ignored.
pub fn parse_stopwords(text: &str) -> Result<BTreeSet<String>> {
    let mut set = BTreeSet::new();
    for line in text.lines() {
        let w = line.trim();
        if w.is_empty() || w.starts_with('#') {
            continue;
        }
        check_stopword(w)?;
        set.insert(w.to_string());
    }
    Ok(set)
}

pub fn default_stopwords() -> BTreeSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS).expect("bundled stopword list is well-formed")
}

pub fn remove_social_markers(text: &str) -> String {
    join_tokens(text.split_whitespace().filter(|t| !t.starts_with(['@', '#'])))
}

pub fn strip_non_ascii(text: &str) -> String {
    text.chars().map(|c| if c.is_ascii() { c } else { ' ' }).collect()
}

pub fn remove_stopwords(text: &str, stopwords: &BTreeSet<String>) -> String {
    join_tokens(text.split_whitespace().filter(|t| !stopwords.contains(*t)))
}

fn join_tokens<'a>(tokens: impl Iterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for t in tokens {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(t);
    }
    out
}

fn is_null_like(text: &str) -> bool {
    let t = text.trim();
    t.is_empty() || t.eq_ignore_ascii_case("nan") || t.eq_ignore_ascii_case("null")
}

pub fn clean_text(text: &str, cfg: &PreprocessConfig) -> String {
    if is_null_like(text) {
        return String::new();
    }
    let mut s = if cfg.strip_social_markers {
        remove_social_markers(text)
    } else {
        text.to_string()
    };
    s = strip_non_ascii(&s);
    s.retain(|c| !c.is_ascii_digit());
    let mut s: String = s
        .chars()
        .map(|c| if SPECIAL_CHARS.contains(&c) { ' ' } else { c })
        .collect();
    if cfg.lowercase {
        s.make_ascii_lowercase();
    }
    if cfg.remove_stopwords {
        remove_stopwords(&s, &cfg.stopwords)
    } else {
        join_tokens(s.split_whitespace())
    }
}

/// Cleans every record and drops those whose text ends up empty. Labels
/// and ids are untouched.
pub fn clean_dataset(ds: &Dataset, cfg: &PreprocessConfig) -> Dataset {
    let records: Vec<_> = ds
        .records
        .iter()
        .filter_map(|r| {
            let text = clean_text(&r.text, cfg);
            (!text.is_empty()).then(|| {
                let mut r = r.clone();
                r.text = text;
                r
            })
        })
        .collect();
    Dataset::new(ds.name.clone(), records)
}
