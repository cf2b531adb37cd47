//! Reading delimiter-separated dataset files.
//!
//! Labeled files have `id, text, label` columns, unlabeled files `id, text`.
//! Comma-separated files follow CSV quoting rules; any other delimiter is
//! split literally.

use std::fs;
use std::path::Path;

use codemix_core::corpus::{concat, dataset_from_rows};
use codemix_core::{Dataset, Error};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadOptions {
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions {
            delimiter: b'\t',
            has_header: false,
        }
    }
}

/// Accepts `tab`, `comma`, or any single ASCII character.
pub fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        "comma" => Ok(b','),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!(
            "delimiter must be `tab`, `comma` or a single ASCII character, got {s:?}"
        )),
    }
}

/// Labeled-ness of a file to read. `Auto` decides from the first row's width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Columns {
    Labeled,
    Unlabeled,
    Auto,
}

pub fn parse_text(name: &str, text: &str, opts: &ReadOptions, columns: Columns) -> Result<Dataset, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .flexible(true)
        .quoting(opts.delimiter == b',')
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Data(format!("{name}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        rows.push((line, rec));
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{name}: no data rows")));
    }
    let labeled = match columns {
        Columns::Labeled => true,
        Columns::Unlabeled => false,
        Columns::Auto => rows[0].1.len() >= 3,
    };
    let fields = rows
        .iter()
        .map(|(line, rec)| (*line, rec.iter().collect::<Vec<&str>>()));
    dataset_from_rows(name, fields, labeled)
}

pub fn load_dataset(path: &Path, opts: &ReadOptions, columns: Columns) -> CliResult<Dataset> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let name = path.display().to_string();
    let text = String::from_utf8(bytes).map_err(|e| Error::Data(format!("{name}: not valid UTF-8: {e}")))?;
    Ok(parse_text(&name, &text, opts, columns)?)
}

/// Loads every path and concatenates them in order.
pub fn load_all(paths: &[impl AsRef<Path>], opts: &ReadOptions, columns: Columns) -> CliResult<Dataset> {
    let mut iter = paths.iter();
    let first = iter
        .next()
        .ok_or_else(|| CliError::Usage("at least one --data file is required".into()))?;
    let mut ds = load_dataset(first.as_ref(), opts, columns)?;
    for p in iter {
        ds = concat(&ds, &load_dataset(p.as_ref(), opts, columns)?)?;
    }
    Ok(ds)
}
