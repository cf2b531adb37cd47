//! Seeded synthetic code-mixed corpora with a planted offensive keyword family.
#![allow(dead_code)]

use codemix_core::{Dataset, Label, Record};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SYLLABLES: [&str; 24] = [
    "ka", "ma", "la", "va", "na", "ra", "ta", "pa", "ki", "mi", "li", "vi", "ni", "ru", "tu", "pu", "ke", "me", "le",
    "ve", "ne", "ro", "to", "po",
];

const ENGLISH: [&str; 20] = [
    "movie", "song", "trailer", "super", "mass", "waiting", "fans", "hero", "look", "bgm", "release", "day", "first",
    "show", "level", "best", "acting", "story", "music", "director",
];

/// The planted family. The stems share no syllable shape with the filler
/// vocabulary, so any n-gram analyzer can separate them.
pub const KEYWORDS: [&str; 8] = [
    "xoozhq", "xoozhqq", "zvxbrq", "zvxbrqa", "qwyjx", "qwyjxx", "jjxqz", "jjxqzo",
];

pub fn filler_vocabulary(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut words: Vec<String> = ENGLISH.iter().map(|w| w.to_string()).collect();
    while words.len() < 150 {
        let n = rng.random_range(2..=3);
        let w: String = (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        if !words.contains(&w) {
            words.push(w);
        }
    }
    words
}

/// Raw message: filler words with Zipfian frequencies (rank r drawn with
/// weight 1/r), optional keywords, and social-media noise (mentions,
/// hashtags, digits, emoji) that the cleaner strips.
pub fn message(rng: &mut ChaCha8Rng, vocab: &[String], offensive: bool) -> String {
    let ranked: Vec<(usize, &String)> = vocab.iter().enumerate().collect();
    let mut words: Vec<String> = (0..rng.random_range(4..=12))
        .map(|_| {
            ranked
                .choose_weighted(rng, |(r, _)| 1.0 / (*r as f64 + 1.0))
                .unwrap()
                .1
                .clone()
        })
        .collect();
    if offensive {
        for _ in 0..rng.random_range(1..=2) {
            let at = rng.random_range(0..=words.len());
            words.insert(at, KEYWORDS.choose(rng).unwrap().to_string());
        }
    }
    if rng.random_bool(0.3) {
        words.insert(0, "@user".into());
    }
    if rng.random_bool(0.3) {
        words.push(format!("#{}", vocab.choose(rng).unwrap()));
    }
    if rng.random_bool(0.2) {
        words.push("\u{1F525}\u{1F525}".into());
    }
    if rng.random_bool(0.2) {
        words.push(rng.random_range(1..3000).to_string());
    }
    words.join(" ")
}

pub fn planted_corpus(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = filler_vocabulary(&mut rng);
    let records = (0..n)
        .map(|i| {
            let offensive = rng.random_bool(0.48);
            let text = message(&mut rng, &vocab, offensive);
            let label = if offensive { Label::Off } else { Label::Not };
            Record::new(format!("doc{i:04}"), text, Some(label)).unwrap()
        })
        .collect();
    Dataset::new("planted", records)
}

pub fn to_tsv(ds: &Dataset) -> String {
    let mut s = String::new();
    for r in &ds.records {
        s.push_str(&r.id);
        s.push('\t');
        s.push_str(&r.text);
        if let Some(l) = r.label {
            s.push('\t');
            s.push_str(l.as_str());
        }
        s.push('\n');
    }
    s
}
