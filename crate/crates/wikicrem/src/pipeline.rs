//! Parallel mining and evaluation over a dedicated worker pool.
//!
//! Output order never depends on the worker count: documents are mined in
//! batches and each batch is written in stream order.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use wikicrem_core::cremgen::{mine_document, MaskedExample, MiningTally};
use wikicrem_core::eval::{score_item, Accumulator, EvalItem, ItemOutcome, Metrics};
use wikicrem_core::names::{GazetteerDetector, NameDetector};
use wikicrem_core::scorer::{Scorer, UnigramScorer};
use wikicrem_core::segment::Segmenter;

use crate::corpus::{CorpusCounters, DocumentStream};
use crate::error::{Error, Result};
use crate::protocol::{DetectorPool, ScorerPool};
use crate::records::{read_text, to_json_line, DatasetRecord};

/// Documents handed to each worker per batch.
const BATCH_PER_WORKER: usize = 16;

/// Count given to unseen tokens by the reference scorer.
pub const DEFAULT_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DetectorSpec {
    Builtin,
    External(String),
}

impl FromStr for DetectorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            _ if s == "builtin" => Ok(DetectorSpec::Builtin),
            Some(("external", cmd)) if !cmd.trim().is_empty() => Ok(DetectorSpec::External(cmd.to_string())),
            _ => Err(Error::Usage(format!("detector must be builtin or external:<command>, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScorerSpec {
    Unigram(PathBuf),
    External(String),
}

impl FromStr for ScorerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("unigram", p)) if !p.is_empty() => Ok(ScorerSpec::Unigram(p.into())),
            Some(("external", cmd)) if !cmd.trim().is_empty() => Ok(ScorerSpec::External(cmd.to_string())),
            _ => Err(Error::Usage(format!("scorer must be unigram:<table> or external:<command>, got {s:?}"))),
        }
    }
}

pub type SharedDetector = Box<dyn NameDetector + Send + Sync>;
pub type SharedScorer = Box<dyn Scorer + Send + Sync>;

pub fn build_detector(spec: &DetectorSpec, workers: usize) -> Result<SharedDetector> {
    Ok(match spec {
        DetectorSpec::Builtin => Box::new(GazetteerDetector::default()),
        DetectorSpec::External(cmd) => Box::new(DetectorPool::spawn(cmd, workers).map_err(|e| Error::Protocol(e.to_string()))?),
    })
}

pub fn load_unigram(path: &Path, floor: f64) -> Result<UnigramScorer> {
    let counts = UnigramScorer::parse_table(&read_text(path)?).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    UnigramScorer::new(counts, floor).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn build_scorer(spec: &ScorerSpec, workers: usize, floor: f64) -> Result<SharedScorer> {
    Ok(match spec {
        ScorerSpec::Unigram(p) => Box::new(load_unigram(p, floor)?),
        ScorerSpec::External(cmd) => Box::new(ScorerPool::spawn(cmd, workers).map_err(|e| Error::Protocol(e.to_string()))?),
    })
}

pub fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::Usage("workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .thread_name(|i| format!("worker-{i}"))
        .build()
        .map_err(|e| Error::Input(format!("cannot start workers: {e}")))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MineSummary {
    pub corpus: CorpusCounters,
    pub tally: MiningTally,
    /// Documents that could not be read.
    pub unreadable: u64,
}

/// Mine every document of `inputs`, writing dataset records to `out`.
///
/// With `deterministic`, all per-document outputs are held until the end
/// and written sorted by document id (stable, so a repeated id keeps stream
/// order). Otherwise each batch is written as soon as it is done.
pub fn mine<D, W>(inputs: &[PathBuf], detector: &D, workers: usize, deterministic: bool, out: &mut W) -> Result<MineSummary>
where
    D: NameDetector + Sync + ?Sized,
    W: Write,
{
    let pool = worker_pool(workers)?;
    let segmenter = Segmenter::default();
    let mut stream = DocumentStream::open(inputs)?;
    let mut summary = MineSummary::default();
    let mut held: Vec<(String, Vec<MaskedExample>)> = Vec::new();
    let batch_len = workers * BATCH_PER_WORKER;
    let sink = Path::new("<output>");
    loop {
        let mut batch = Vec::with_capacity(batch_len);
        for doc in stream.by_ref() {
            match doc {
                Ok(d) => batch.push(d),
                Err(e) => {
                    log::warn!("{e}");
                    summary.unreadable += 1;
                }
            }
            if batch.len() == batch_len {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        let mined: Vec<(String, Vec<MaskedExample>, MiningTally)> = pool.install(|| {
            batch
                .par_iter()
                .map(|doc| {
                    let mut t = MiningTally::default();
                    let ex = mine_document(doc, &segmenter, detector, &mut t);
                    (doc.doc_id.clone(), ex, t)
                })
                .collect()
        });
        for (doc_id, examples, t) in mined {
            summary.tally.merge(&t);
            if deterministic {
                held.push((doc_id, examples));
            } else {
                write_examples(out, &examples, sink)?;
            }
        }
    }
    held.sort_by(|a, b| a.0.cmp(&b.0));
    for (_, examples) in &held {
        write_examples(out, examples, sink)?;
    }
    out.flush().map_err(|e| Error::io(sink, e))?;
    summary.corpus = stream.counters;
    Ok(summary)
}

fn write_examples<W: Write>(out: &mut W, examples: &[MaskedExample], sink: &Path) -> Result<()> {
    for ex in examples {
        writeln!(out, "{}", to_json_line(&DatasetRecord::from(ex))).map_err(|e| Error::io(sink, e))?;
    }
    Ok(())
}

/// Score every item on the pool. Outcomes come back in item order.
pub fn score_all<S: Scorer + Sync + ?Sized>(items: &[EvalItem], scorer: &S, pool: &rayon::ThreadPool) -> Vec<ItemOutcome> {
    pool.install(|| items.par_iter().map(|it| score_item(it, scorer)).collect())
}

/// Fold outcomes in item order.
pub fn fold(items: &[EvalItem], outcomes: &[ItemOutcome]) -> Metrics {
    let mut acc = Accumulator::default();
    for (item, out) in items.iter().zip(outcomes) {
        acc.add(item, out);
    }
    acc.finish()
}
