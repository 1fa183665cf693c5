//! Per-item scoring and the count-based metric fold.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::gap::gap_strict_match;
use super::{EvalItem, Gold, PronounGender};
use crate::scorer::{loss, score_candidates, select_candidate, LossParams, ScoreQuery, Scorer};

/// What the scorer said about one item.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemOutcome {
    pub logprobs: Option<Vec<f64>>,
    pub selected: Option<usize>,
    /// Scorer failure; the item still counts, as a wrong answer.
    pub error: Option<String>,
}

impl ItemOutcome {
    fn skipped() -> Self {
        Self { logprobs: None, selected: None, error: None }
    }
}

/// Score one item. Items without candidates, or whose conversion failed,
/// are not sent to the scorer.
pub fn score_item<S: Scorer + ?Sized>(item: &EvalItem, scorer: &S) -> ItemOutcome {
    if item.conversion_failed || item.candidates.is_empty() {
        return ItemOutcome::skipped();
    }
    let query = ScoreQuery {
        query_id: item.item_id.clone(),
        masked_text: item.masked_text.clone(),
        candidates: item.candidates.clone(),
    };
    match score_candidates(&query, scorer) {
        Ok(scores) => ItemOutcome {
            selected: select_candidate(&scores).ok(),
            logprobs: Some(scores.logprobs),
            error: None,
        },
        Err(e) => ItemOutcome { logprobs: None, selected: None, error: Some(alloc::format!("{e}")) },
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn merge(&mut self, o: &Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `2TP / (2TP + FP + FN)`; absent when there is nothing positive on either side.
    pub fn f1(&self) -> Option<f64> {
        let denom = 2 * self.tp + self.fp + self.fn_;
        (denom > 0).then(|| 2.0 * self.tp as f64 / denom as f64)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SubsetAccuracy {
    pub correct: u64,
    pub total: u64,
}

impl SubsetAccuracy {
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

/// Integer counts behind [`Metrics`]. Merging is commutative and
/// associative, so any partition of the items folds to the same result.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Accumulator {
    pub items: u64,
    /// Decisions with a gold answer: one per labeled choice item, two per GAP item.
    pub labeled: u64,
    pub correct: u64,
    pub unlabeled: u64,
    pub confusion: Confusion,
    pub feminine: Confusion,
    pub masculine: Confusion,
    pub subsets: BTreeMap<String, SubsetAccuracy>,
    pub scorer_failures: u64,
    pub conversion_fallbacks: u64,
}

impl Accumulator {
    fn tally(&mut self, labels: &[String], right: bool) {
        self.labeled += 1;
        self.correct += right as u64;
        for l in labels {
            let s = self.subsets.entry(l.clone()).or_default();
            s.total += 1;
            s.correct += right as u64;
        }
    }

    pub fn add(&mut self, item: &EvalItem, outcome: &ItemOutcome) {
        self.items += 1;
        if outcome.error.is_some() {
            self.scorer_failures += 1;
        }
        let labels = item.tags.subset_labels();
        match &item.gold {
            Gold::Index(g) => self.tally(&labels, outcome.selected == Some(*g)),
            Gold::Entailment(label) => {
                if item.conversion_failed {
                    self.conversion_fallbacks += 1;
                }
                // majority class on failed conversions is "not entailed"
                let predicted = !item.conversion_failed && outcome.selected == Some(0);
                match label {
                    Some(l) => self.tally(&labels, predicted == *l),
                    None => self.unlabeled += 1,
                }
            }
            Gold::Gap { a, b, a_coref, b_coref } => {
                let chosen = outcome.selected.and_then(|i| item.candidates.get(i));
                for (name, actual) in [(a, *a_coref), (b, *b_coref)] {
                    let predicted = chosen.is_some_and(|c| gap_strict_match(c, name));
                    self.confusion.add(predicted, actual);
                    match item.tags.gender {
                        Some(PronounGender::Feminine) => self.feminine.add(predicted, actual),
                        Some(PronounGender::Masculine) => self.masculine.add(predicted, actual),
                        _ => {}
                    }
                    self.tally(&labels, predicted == actual);
                }
            }
        }
    }

    pub fn merge(&mut self, o: &Accumulator) {
        self.items += o.items;
        self.labeled += o.labeled;
        self.correct += o.correct;
        self.unlabeled += o.unlabeled;
        self.confusion.merge(&o.confusion);
        self.feminine.merge(&o.feminine);
        self.masculine.merge(&o.masculine);
        for (k, v) in &o.subsets {
            let s = self.subsets.entry(k.clone()).or_default();
            s.total += v.total;
            s.correct += v.correct;
        }
        self.scorer_failures += o.scorer_failures;
        self.conversion_fallbacks += o.conversion_fallbacks;
    }

    pub fn finish(&self) -> Metrics {
        let f1_feminine = self.feminine.f1();
        let f1_masculine = self.masculine.f1();
        Metrics {
            items: self.items,
            labeled: self.labeled,
            correct: self.correct,
            unlabeled: self.unlabeled,
            accuracy: (self.labeled > 0).then(|| self.correct as f64 / self.labeled as f64),
            f1_overall: self.confusion.f1(),
            f1_feminine,
            f1_masculine,
            bias_ratio: match (f1_feminine, f1_masculine) {
                (Some(f), Some(m)) if m > 0.0 => Some(f / m),
                _ => None,
            },
            confusion: self.confusion,
            subsets: self.subsets.clone(),
            scorer_failures: self.scorer_failures,
            conversion_fallbacks: self.conversion_fallbacks,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub items: u64,
    pub labeled: u64,
    pub correct: u64,
    pub unlabeled: u64,
    /// Correct decisions over labeled decisions. For GAP this is per candidate.
    pub accuracy: Option<f64>,
    pub f1_overall: Option<f64>,
    pub f1_feminine: Option<f64>,
    pub f1_masculine: Option<f64>,
    /// `f1_feminine / f1_masculine`, absent when either is undefined or the
    /// masculine score is zero.
    pub bias_ratio: Option<f64>,
    pub confusion: Confusion,
    pub subsets: BTreeMap<String, SubsetAccuracy>,
    pub scorer_failures: u64,
    pub conversion_fallbacks: u64,
}

/// Score every item in order and fold the outcomes.
pub fn evaluate<S: Scorer + ?Sized>(items: &[EvalItem], scorer: &S) -> Metrics {
    let mut acc = Accumulator::default();
    for item in items {
        acc.add(item, &score_item(item, scorer));
    }
    acc.finish()
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossSummary {
    pub items: u64,
    pub mean: Option<f64>,
}

/// Mean ranking loss over scored choice items, taking the best-scoring
/// wrong candidate as the competitor. Summed in item order.
pub fn loss_summary(items: &[EvalItem], outcomes: &[ItemOutcome], params: LossParams) -> LossSummary {
    let mut n = 0u64;
    let mut sum = 0.0;
    for (item, out) in items.iter().zip(outcomes) {
        let (Gold::Index(g), Some(lp)) = (&item.gold, &out.logprobs) else { continue };
        let best_wrong = lp
            .iter()
            .enumerate()
            .filter(|(i, _)| i != g)
            .map(|(_, &x)| x)
            .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| if x > m { x } else { m })));
        if let (Some(&a), Some(b)) = (lp.get(*g), best_wrong) {
            sum += loss(a, b, params);
            n += 1;
        }
    }
    LossSummary { items: n, mean: (n > 0).then(|| sum / n as f64) }
}
