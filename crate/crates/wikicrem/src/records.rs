//! On-disk record formats: mined datasets, annotation fixtures and the
//! plain-text resource lists.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use wikicrem_core::cremgen::{MaskedExample, Rule};
use wikicrem_core::stats::AnnotationFixture;
use wikicrem_core::MASK_TOKEN;

use crate::error::{Error, Result};

/// One line of a dataset file. Field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub example_id: String,
    pub masked_text: String,
    pub correct: String,
    pub incorrect: String,
    pub doc_id: String,
    pub mask_offset: usize,
}

impl From<&MaskedExample> for DatasetRecord {
    fn from(ex: &MaskedExample) -> Self {
        Self {
            example_id: ex.example_id.clone(),
            masked_text: ex.masked_text.clone(),
            correct: ex.correct.clone(),
            incorrect: ex.incorrect.clone(),
            doc_id: ex.doc_id.clone(),
            mask_offset: ex.absolute_mask_offset(),
        }
    }
}

impl DatasetRecord {
    /// Rebuild an example. The record keeps only the absolute mask offset, so
    /// the passage span is reported relative to the masked text.
    pub fn into_example(self) -> MaskedExample {
        let len = self.masked_text.chars().count() - MASK_TOKEN.chars().count() + self.correct.chars().count();
        let local = self
            .masked_text
            .find(MASK_TOKEN)
            .map_or(0, |b| self.masked_text[..b].chars().count());
        let start = self.mask_offset.saturating_sub(local);
        MaskedExample {
            example_id: self.example_id,
            masked_text: self.masked_text,
            correct: self.correct,
            incorrect: self.incorrect,
            mask_offset: local,
            doc_id: self.doc_id,
            passage_start: start,
            passage_end: start + len,
            rule: Rule::SingleSentence,
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.masked_text.matches(MASK_TOKEN).count() != 1 {
            return Err(format!("record {} must contain exactly one {MASK_TOKEN}", self.example_id));
        }
        if self.correct == self.incorrect {
            return Err(format!("record {}: correct and incorrect are equal", self.example_id));
        }
        Ok(())
    }
}

pub fn to_json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("records serialise")
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with their 1-based numbers.
fn numbered_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRecord>> {
    numbered_lines(path)?
        .into_iter()
        .map(|(n, line)| {
            let rec: DatasetRecord = serde_json::from_str(&line).map_err(|e| Error::parse(path, n, e.to_string()))?;
            rec.check().map_err(|m| Error::parse(path, n, m))?;
            Ok(rec)
        })
        .collect()
}

pub fn write_dataset<'a, I>(path: &Path, records: I) -> Result<usize>
where
    I: IntoIterator<Item = &'a DatasetRecord>,
{
    let mut w = create(path)?;
    let mut n = 0;
    for r in records {
        writeln!(w, "{}", to_json_line(r)).map_err(|e| Error::io(path, e))?;
        n += 1;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(n)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureRecord {
    index: u32,
    text: String,
    ambiguous: bool,
    natural_pronoun: bool,
    annotator_answer: Option<String>,
    annotator_correct: Option<bool>,
}

pub fn read_fixtures(path: &Path) -> Result<Vec<AnnotationFixture>> {
    numbered_lines(path)?
        .into_iter()
        .map(|(n, line)| {
            let r: FixtureRecord = serde_json::from_str(&line).map_err(|e| Error::parse(path, n, e.to_string()))?;
            let f = AnnotationFixture {
                index: r.index,
                text: r.text,
                ambiguous: r.ambiguous,
                natural_pronoun: r.natural_pronoun,
                annotator_answer: r.annotator_answer,
                annotator_correct: r.annotator_correct,
            };
            if !f.is_consistent() {
                return Err(Error::parse(path, n, "annotator fields must be present exactly when not ambiguous"));
            }
            Ok(f)
        })
        .collect()
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
