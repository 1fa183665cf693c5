//! GAP conventions: strict matching, candidate extraction and the F1 ceiling.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EvalItem, Gold, Split};
use crate::names::{detect_names, DetectError, NameDetector};
use crate::window::Passage;

/// Full-answer match: equal after trimming, case-sensitive.
pub fn gap_strict_match(selected: &str, gold: &str) -> bool {
    selected.trim() == gold.trim()
}

/// Drop training items with neither candidate coreferent. Items of other
/// splits, or without GAP labels, pass through.
pub fn gap_discard_unanswerable(items: Vec<EvalItem>) -> Vec<EvalItem> {
    items
        .into_iter()
        .filter(|i| {
            let unanswerable = matches!(i.gold, Gold::Gap { a_coref: false, b_coref: false, .. });
            !(unanswerable && i.tags.split == Some(Split::Train))
        })
        .collect()
}

/// Distinct person-name keys in passage order.
pub fn extract_gap_candidates<D: NameDetector + ?Sized>(
    passage_text: &str,
    detector: &D,
) -> Result<Vec<String>, DetectError> {
    let passage = Passage::single("", passage_text);
    let mut out: Vec<String> = Vec::new();
    for m in detect_names(&passage, detector)? {
        let key = m.key().into_string();
        if !out.contains(&key) {
            out.push(key);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GapPreparation {
    pub items: Vec<EvalItem>,
    /// Items where at least one gold name is missing from the candidates.
    pub failed_items: usize,
    pub failed_slots: usize,
    pub detector_failures: usize,
}

impl GapPreparation {
    pub fn failure_rate(&self) -> Option<f64> {
        (!self.items.is_empty()).then(|| self.failed_items as f64 / self.items.len() as f64)
    }
}

/// Replace each GAP item's candidates with the detector's extraction.
/// A detector error leaves the item with no candidates.
pub fn prepare_gap_items<D: NameDetector + ?Sized>(items: Vec<EvalItem>, detector: &D) -> GapPreparation {
    let mut prep = GapPreparation::default();
    for mut item in items {
        item.candidates = match extract_gap_candidates(&item.text, detector) {
            Ok(c) => c,
            Err(_) => {
                prep.detector_failures += 1;
                Vec::new()
            }
        };
        let missing = slots_of(&item).iter().filter(|s| !s.extracted).count();
        prep.failed_slots += missing;
        if missing > 0 {
            prep.failed_items += 1;
        }
        prep.items.push(item);
    }
    prep
}

/// One (item, gold candidate) decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapSlot {
    pub positive: bool,
    pub extracted: bool,
}

fn slots_of(item: &EvalItem) -> Vec<GapSlot> {
    match &item.gold {
        Gold::Gap { a, b, a_coref, b_coref } => [(a, *a_coref), (b, *b_coref)]
            .into_iter()
            .map(|(name, positive)| GapSlot {
                positive,
                extracted: item.candidates.iter().any(|c| gap_strict_match(c, name)),
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// Two slots per GAP item, A then B.
pub fn gap_slots(items: &[EvalItem]) -> Vec<GapSlot> {
    items.iter().flat_map(slots_of).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no positive labels")]
pub struct CapError;

/// Best reachable F1 when every extracted slot is answered correctly and
/// every missed slot is answered false.
pub fn f1_cap<I: IntoIterator<Item = GapSlot>>(slots: I) -> Result<f64, CapError> {
    let (mut positives, mut forced_fn) = (0u64, 0u64);
    for s in slots {
        if s.positive {
            positives += 1;
            if !s.extracted {
                forced_fn += 1;
            }
        }
    }
    if positives == 0 {
        return Err(CapError);
    }
    let tp = positives - forced_fn;
    Ok(2.0 * tp as f64 / (2 * tp + forced_fn) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("cannot force {requested} failures among {available} {what} slots")]
pub struct SimulationError {
    pub requested: usize,
    pub available: usize,
    pub what: &'static str,
}

/// Mark exactly `forced_fn` positive slots and `forced_tn` negative slots
/// as not extracted, chosen with a seeded RNG. Slot order follows `labels`.
pub fn simulate_extraction_failures(
    labels: &[bool],
    forced_fn: usize,
    forced_tn: usize,
    seed: u64,
) -> Result<Vec<GapSlot>, SimulationError> {
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if forced_fn > pos.len() {
        return Err(SimulationError { requested: forced_fn, available: pos.len(), what: "positive" });
    }
    if forced_tn > neg.len() {
        return Err(SimulationError { requested: forced_tn, available: neg.len(), what: "negative" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slots: Vec<GapSlot> = labels.iter().map(|&positive| GapSlot { positive, extracted: true }).collect();
    for i in sample(&mut rng, pos.len(), forced_fn) {
        slots[pos[i]].extracted = false;
    }
    for i in sample(&mut rng, neg.len(), forced_tn) {
        slots[neg[i]].extracted = false;
    }
    Ok(slots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{DatasetKind, Tags};
    use crate::names::{Gazetteer, GazetteerDetector, StopWords};
    use alloc::vec;

    fn gap(a_coref: bool, b_coref: bool, split: Split) -> EvalItem {
        EvalItem {
            item_id: "g".into(),
            kind: DatasetKind::Gap,
            text: "Cheryl Cassidy met Sessum before she left.".into(),
            masked_text: "Cheryl Cassidy met Sessum before [MASK] left.".into(),
            candidates: vec![],
            gold: Gold::Gap { a: "Cheryl Cassidy".into(), b: "Sessum".into(), a_coref, b_coref },
            tags: Tags { split: Some(split), ..Tags::default() },
            conversion_failed: false,
        }
    }

    #[test]
    fn strictness() {
        assert!(gap_strict_match("Adams", "Adams"));
        assert!(gap_strict_match(" Adams ", "Adams"));
        assert!(!gap_strict_match("Adams", "John Adams"));
        assert!(!gap_strict_match("adams", "Adams"));
    }

    #[test]
    fn discard_only_train() {
        let kept = gap_discard_unanswerable(vec![
            gap(false, false, Split::Train),
            gap(false, false, Split::Test),
            gap(true, false, Split::Train),
        ]);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].tags.split, Some(Split::Test));
    }

    #[test]
    fn extraction_and_flags() {
        let det = GazetteerDetector::new(
            Gazetteer::from_names(vec!["Cheryl"], vec!["Cassidy", "Sessum"]),
            StopWords::shipped(),
        );
        assert_eq!(
            extract_gap_candidates("Cheryl Cassidy met Sessum and Sessum's dog.", &det).unwrap(),
            vec!["Cheryl Cassidy", "Sessum"]
        );
        let prep = prepare_gap_items(vec![gap(true, false, Split::Test)], &det);
        assert_eq!((prep.failed_items, prep.failed_slots), (0, 0));

        let blind = GazetteerDetector::new(Gazetteer::from_names(vec!["Cheryl"], vec!["Cassidy"]), StopWords::shipped());
        let prep = prepare_gap_items(vec![gap(true, false, Split::Test)], &blind);
        assert_eq!((prep.failed_items, prep.failed_slots), (1, 1));
        assert_eq!(gap_slots(&prep.items)[1], GapSlot { positive: false, extracted: false });
    }

    #[test]
    fn cap_arithmetic() {
        let all = [GapSlot { positive: true, extracted: true }, GapSlot { positive: false, extracted: true }];
        assert_eq!(f1_cap(all), Ok(1.0));
        assert_eq!(f1_cap([GapSlot { positive: false, extracted: true }]), Err(CapError));
        // 4 positives, 1 missed: 2*3 / (6 + 1)
        let s = [true, true, true, true].map(|p| GapSlot { positive: p, extracted: true });
        let mut s = s.to_vec();
        s[2].extracted = false;
        assert!((f1_cap(s).unwrap() - 6.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn simulation_forces_exact_counts() {
        let labels: Vec<bool> = (0..200).map(|i| i % 3 == 0).collect();
        let slots = simulate_extraction_failures(&labels, 5, 9, 7).unwrap();
        assert_eq!(slots.iter().filter(|s| s.positive && !s.extracted).count(), 5);
        assert_eq!(slots.iter().filter(|s| !s.positive && !s.extracted).count(), 9);
        assert_eq!(slots, simulate_extraction_failures(&labels, 5, 9, 7).unwrap());
        assert!(simulate_extraction_failures(&labels, 1000, 0, 7).is_err());
    }
}
