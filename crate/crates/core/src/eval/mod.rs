//! Evaluation items, dataset-specific conversions and metrics.

mod gap;
mod metrics;
mod wnli;

pub use gap::{
    SimulationError,
    extract_gap_candidates, f1_cap, gap_discard_unanswerable, gap_slots, gap_strict_match, prepare_gap_items,
    simulate_extraction_failures, CapError, GapPreparation, GapSlot,
};
pub use metrics::{
    evaluate, loss_summary, score_item, Accumulator, Confusion, ItemOutcome, LossSummary, Metrics, SubsetAccuracy,
};
pub use wnli::{
    wnli_item, wnli_to_schema, ConversionError, HeuristicNounDetector, NounDetector, WnliAlignment, PRONOUNS,
};

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::cremgen::MASK_TOKEN;
use crate::text::{normalize_for_match, replace_chars};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DatasetKind {
    WikiCrem,
    Gap,
    Dpr,
    Wsc273,
    Pdp,
    Wnli,
    WinoGender,
    WinoBias,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 8] = [
        DatasetKind::WikiCrem,
        DatasetKind::Gap,
        DatasetKind::Dpr,
        DatasetKind::Wsc273,
        DatasetKind::Pdp,
        DatasetKind::Wnli,
        DatasetKind::WinoGender,
        DatasetKind::WinoBias,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetKind::WikiCrem => "wikicrem",
            DatasetKind::Gap => "gap",
            DatasetKind::Dpr => "dpr",
            DatasetKind::Wsc273 => "wsc273",
            DatasetKind::Pdp => "pdp",
            DatasetKind::Wnli => "wnli",
            DatasetKind::WinoGender => "winogender",
            DatasetKind::WinoBias => "winobias",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown dataset kind {0:?}")]
pub struct UnknownKind(pub String);

impl FromStr for DatasetKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DatasetKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .or(match s.to_ascii_lowercase().as_str() {
                "wsc" => Some(DatasetKind::Wsc273),
                _ => None,
            })
            .ok_or_else(|| UnknownKind(s.into()))
    }
}

/// What counts as the right answer for an item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gold {
    /// Index into the candidate list.
    Index(usize),
    /// GAP: two named candidates with independent coreference labels (both may be false).
    Gap { a: String, b: String, a_coref: bool, b_coref: bool },
    /// Entailment-style item: true iff the first candidate is the referent.
    /// `None` for unlabeled test sets.
    Entailment(Option<bool>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PronounGender {
    Masculine,
    Feminine,
    Neutral,
}

impl PronounGender {
    pub fn of_pronoun(p: &str) -> Option<Self> {
        match p.to_lowercase().as_str() {
            "he" | "him" | "his" | "himself" => Some(PronounGender::Masculine),
            "she" | "her" | "hers" | "herself" => Some(PronounGender::Feminine),
            "they" | "them" | "their" | "theirs" | "themselves" | "themself" => Some(PronounGender::Neutral),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PronounGender::Masculine => "masc",
            PronounGender::Feminine => "fem",
            PronounGender::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stereotype {
    Pro,
    Anti,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tags {
    pub gender: Option<PronounGender>,
    /// WinoBias type (1 or 2).
    pub winobias_type: Option<u8>,
    pub stereotype: Option<Stereotype>,
    pub split: Option<Split>,
}

impl Tags {
    /// Subset labels an item contributes to, e.g. `fem`, `T1-anti`, `split:test`.
    pub fn subset_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(g) = self.gender {
            out.push(String::from(g.as_str()));
        }
        match (self.winobias_type, self.stereotype) {
            (Some(t), Some(s)) => out.push(alloc::format!(
                "T{t}-{}",
                match s {
                    Stereotype::Pro => "pro",
                    Stereotype::Anti => "anti",
                }
            )),
            (Some(t), None) => out.push(alloc::format!("T{t}")),
            _ => {}
        }
        if let Some(s) = self.split {
            out.push(alloc::format!("split:{}", s.as_str()));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalItem {
    pub item_id: String,
    pub kind: DatasetKind,
    /// Source text before masking.
    pub text: String,
    /// Text with exactly one mask token.
    pub masked_text: String,
    pub candidates: Vec<String>,
    pub gold: Gold,
    pub tags: Tags,
    /// Set when a conversion could not locate the pronoun (WNLI); the item
    /// is then answered with the majority class.
    pub conversion_failed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ItemError {
    #[error("item {0}: gold index out of range")]
    GoldIndex(String),
    #[error("item {0}: masked text must contain exactly one mask token")]
    Mask(String),
}

impl EvalItem {
    pub fn validate(&self) -> Result<(), ItemError> {
        if let Gold::Index(i) = self.gold {
            if i >= self.candidates.len() {
                return Err(ItemError::GoldIndex(self.item_id.clone()));
            }
        }
        if !self.conversion_failed && self.masked_text.matches(MASK_TOKEN).count() != 1 {
            return Err(ItemError::Mask(self.item_id.clone()));
        }
        Ok(())
    }
}

/// Replace the char span `[start, start + len)` with the mask token.
pub fn mask_span(text: &str, start: usize, len: usize) -> String {
    replace_chars(text, start, start + len, MASK_TOKEN)
}

/// Drop DPR training items whose normalised text (whitespace collapsed,
/// lowercased) equals that of a WSC item. Returns the kept items and the
/// number removed.
pub fn dedupe_dpr(dpr_train: Vec<EvalItem>, wsc: &[EvalItem]) -> (Vec<EvalItem>, usize) {
    let wsc_texts: BTreeSet<String> = wsc.iter().map(|i| normalize_for_match(&i.text)).collect();
    let before = dpr_train.len();
    let kept: Vec<EvalItem> = dpr_train
        .into_iter()
        .filter(|i| !wsc_texts.contains(&normalize_for_match(&i.text)))
        .collect();
    let removed = before - kept.len();
    (kept, removed)
}
