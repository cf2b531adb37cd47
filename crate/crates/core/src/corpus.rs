//! Labeled message collections.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;

use crate::error::{bail, Error, Result};
use crate::rng;

/// Binary offensiveness label. `Not` orders before `Off`, and every tie in
/// the crate resolves to `Not`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Not,
    Off,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Not, Label::Off];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Not => "NOT",
            Label::Off => "OFF",
        }
    }

    /// Position in the canonical ordering (`Not` = 0, `Off` = 1).
    pub fn index(self) -> usize {
        match self {
            Label::Not => 0,
            Label::Off => 1,
        }
    }

    /// +1 for offensive, −1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Label::Not => -1.0,
            Label::Off => 1.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    /// Case-insensitive, surrounding whitespace ignored.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("OFF") {
            Ok(Label::Off)
        } else if t.eq_ignore_ascii_case("NOT") {
            Ok(Label::Not)
        } else {
            bail!(Data, "unknown label token {:?}", t)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
}

impl Record {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<Label>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            bail!(Data, "record id is empty");
        }
        Ok(Record {
            id,
            text: text.into(),
            label,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub name: String,
    pub records: Vec<Record>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, records: Vec<Record>) -> Self {
        Dataset {
            name: name.into(),
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// True when every record carries a label. Empty datasets count as
    /// labeled.
    pub fn is_labeled(&self) -> bool {
        self.records.iter().all(|r| r.label.is_some())
    }

    fn is_unlabeled(&self) -> bool {
        self.records.iter().all(|r| r.label.is_none())
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.text.as_str())
    }

    /// Labels of a labeled dataset, in record order.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.label
                    .ok_or_else(|| Error::Usage(format!("record {} ({}) has no label", i + 1, r.id)))
            })
            .collect()
    }

    /// Counts per label in canonical order `[NOT, OFF]`; unlabeled records
    /// are skipped.
    pub fn label_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for label in self.records.iter().filter_map(|r| r.label) {
            counts[label.index()] += 1;
        }
        counts
    }

    /// Sub-dataset made of the records at `indices`, in that order.
    pub fn select(&self, name: impl Into<String>, indices: &[usize]) -> Dataset {
        Dataset::new(name, indices.iter().map(|&i| self.records[i].clone()).collect())
    }
}

/// Per-label share of a labeled dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub name: String,
    pub total: usize,
    /// Indexed by [`Label::index`].
    pub counts: [usize; 2],
    /// Percentages to two decimals (ties to even), indexed by [`Label::index`].
    pub percentages: [f64; 2],
}

impl StatsReport {
    pub fn count(&self, label: Label) -> usize {
        self.counts[label.index()]
    }

    pub fn percentage(&self, label: Label) -> f64 {
        self.percentages[label.index()]
    }
}

/// `100 * count / total` in hundredths of a percent, rounded half to even
/// with exact integer arithmetic (51.175 -> 51.18, 48.825 -> 48.82).
fn percentage_2dp(count: usize, total: usize) -> f64 {
    let scaled = 10_000 * count as u128;
    let t = total as u128;
    let (q, r) = (scaled / t, scaled % t);
    let hundredths = match (2 * r).cmp(&t) {
        core::cmp::Ordering::Less => q,
        core::cmp::Ordering::Greater => q + 1,
        core::cmp::Ordering::Equal => q + (q & 1),
    };
    hundredths as f64 / 100.0
}

pub fn dataset_stats(ds: &Dataset) -> Result<StatsReport> {
    if ds.is_empty() {
        bail!(Data, "dataset {:?} has no records", ds.name);
    }
    if !ds.is_labeled() {
        bail!(Usage, "dataset {:?} is unlabeled; statistics need labels", ds.name);
    }
    let counts = ds.label_counts();
    let total = ds.len();
    let pct = |c: usize| percentage_2dp(c, total);
    Ok(StatsReport {
        name: ds.name.clone(),
        total,
        counts,
        percentages: [pct(counts[0]), pct(counts[1])],
    })
}

/// Seeded permutation of the records.
pub fn shuffle(ds: &Dataset, seed: u64) -> Dataset {
    let mut records = ds.records.clone();
    records.shuffle(&mut rng::seeded(seed));
    Dataset::new(ds.name.clone(), records)
}

/// Records of `a` followed by those of `b`. Duplicate ids are kept.
pub fn concat(a: &Dataset, b: &Dataset) -> Result<Dataset> {
    let compatible = (a.is_labeled() && b.is_labeled()) || (a.is_unlabeled() && b.is_unlabeled());
    if !compatible {
        bail!(
            Usage,
            "cannot concatenate {:?} and {:?}: one is labeled, the other is not",
            a.name,
            b.name
        );
    }
    let mut records = Vec::with_capacity(a.len() + b.len());
    records.extend_from_slice(&a.records);
    records.extend_from_slice(&b.records);
    Ok(Dataset::new(format!("{}+{}", a.name, b.name), records))
}

/// Builds a dataset from already-split rows. `rows` yields
/// `(line_number, fields)`; labeled rows need 3 fields, unlabeled rows 2.
pub fn dataset_from_rows<'a, I, F>(name: &str, rows: I, labeled: bool) -> Result<Dataset>
where
    I: IntoIterator<Item = (usize, F)>,
    F: AsRef<[&'a str]>,
{
    let expected = if labeled { 3 } else { 2 };
    let mut records = Vec::new();
    for (line, fields) in rows {
        let fields = fields.as_ref();
        if fields.len() != expected {
            bail!(
                Data,
                "row {}: expected {} columns, found {}",
                line,
                expected,
                fields.len()
            );
        }
        let label = if labeled {
            Some(
                fields[2]
                    .parse::<Label>()
                    .map_err(|e| Error::Data(format!("row {}: {}", line, e.message())))?,
            )
        } else {
            None
        };
        let record = Record::new(fields[0].trim(), fields[1], label)
            .map_err(|e| Error::Data(format!("row {}: {}", line, e.message())))?;
        records.push(record);
    }
    if records.is_empty() {
        bail!(Data, "{}: no data rows", name);
    }
    Ok(Dataset::new(name, records))
}

/// Parses delimiter-separated text with no quoting rules: each line is split
/// on `delimiter` exactly. Blank lines are skipped.
pub fn parse_dataset(name: &str, text: &str, delimiter: char, has_header: bool, labeled: bool) -> Result<Dataset> {
    let rows = text
        .lines()
        .enumerate()
        .skip(usize::from(has_header))
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split(delimiter).collect::<Vec<&str>>()));
    dataset_from_rows(name, rows, labeled)
}
