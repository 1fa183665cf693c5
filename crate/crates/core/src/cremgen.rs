//! Masked-name example generation.
//!
//! A passage yields examples when some name key `R` occurs at least twice.
//! The masked occurrence is a non-first occurrence of `R`, and every other
//! distinct name `B` that qualifies as an alternative produces one example
//! `(correct = R, incorrect = B)`.
//!
//! * Single-sentence passages: `B` must occur before the masked occurrence.
//! * Two-sentence passages: the masked occurrence must lie in the second
//!   sentence, and both `R` and `B` must occur in the first. If exactly one
//!   of `R` (another occurrence) and `B` also appears in the masked
//!   sentence, the pair is discarded.
//!
//! Only the earliest eligible occurrence of each repeated key is masked.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::names::{detect_names, NameDetector, NameKey, NameMention};
use crate::segment::Segmenter;
use crate::text::replace_chars;
use crate::window::{windows, Document, Passage};

pub const MASK_TOKEN: &str = "[MASK]";

/// Which positional rule admitted an example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Everything in one sentence, alternatives before the mask.
    SingleSentence,
    /// Both candidates in the first sentence, mask in the second.
    FollowingSentence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedExample {
    pub example_id: String,
    pub masked_text: String,
    pub correct: String,
    pub incorrect: String,
    /// Char offset of the mask token in `masked_text`.
    pub mask_offset: usize,
    pub doc_id: String,
    /// Document char span of the source passage.
    pub passage_start: usize,
    pub passage_end: usize,
    pub rule: Rule,
}

impl MaskedExample {
    pub fn absolute_mask_offset(&self) -> usize {
        self.passage_start + self.mask_offset
    }

    /// The passage text with the correct name put back in place of the mask.
    pub fn unmasked(&self) -> String {
        self.masked_text.replacen(MASK_TOKEN, &self.correct, 1)
    }
}

/// Stable identifier from `(doc_id, absolute mask offset, incorrect key)`.
pub fn example_id(doc_id: &str, absolute_mask_offset: usize, incorrect: &str) -> String {
    let mut h = Sha256::new();
    h.update(doc_id.as_bytes());
    h.update([0x1f]);
    h.update(absolute_mask_offset.to_string().as_bytes());
    h.update([0x1f]);
    h.update(incorrect.as_bytes());
    let digest = h.finalize();
    hex::encode(&digest[..8])
}

/// Counters for one or more generation runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerationTally {
    pub passages: u64,
    pub passages_without_repeat: u64,
    /// Examined (repeated, occurrence, alternative) triples where the
    /// alternative does not appear in the required position.
    pub rejected_order: u64,
    /// Triples dropped because only one candidate shares the masked sentence.
    pub rejected_same_sentence: u64,
    pub emitted: u64,
}

impl GenerationTally {
    pub fn merge(&mut self, other: &GenerationTally) {
        self.passages += other.passages;
        self.passages_without_repeat += other.passages_without_repeat;
        self.rejected_order += other.rejected_order;
        self.rejected_same_sentence += other.rejected_same_sentence;
        self.emitted += other.emitted;
    }
}

pub fn generate(passage: &Passage, mentions: &[NameMention]) -> Vec<MaskedExample> {
    generate_tallied(passage, mentions, &mut GenerationTally::default())
}

pub fn generate_tallied(
    passage: &Passage,
    mentions: &[NameMention],
    tally: &mut GenerationTally,
) -> Vec<MaskedExample> {
    tally.passages += 1;
    let keys: Vec<NameKey> = mentions.iter().map(NameMention::key).collect();
    let mut occurrences: BTreeMap<&NameKey, Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        occurrences.entry(k).or_default().push(i);
    }
    if occurrences.values().all(|o| o.len() < 2) {
        tally.passages_without_repeat += 1;
        return Vec::new();
    }

    let two = passage.sentence_count() == 2;
    // per key: present in sentence 0 / sentence 1
    let mut in_sentence: BTreeMap<&NameKey, [bool; 2]> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        in_sentence.entry(k).or_default()[mentions[i].sentence_index.min(1)] = true;
    }

    let mut out = Vec::new();
    for (&repeated, occs) in occurrences.iter().filter(|(_, o)| o.len() >= 2) {
        for &mi in &occs[1..] {
            let masked = &mentions[mi];
            let mut chosen: Vec<&NameKey> = Vec::new();
            if !two {
                let before: BTreeSet<&NameKey> = keys[..mi].iter().filter(|k| *k != repeated).collect();
                tally.rejected_order += (occurrences.len() - 1 - before.len()) as u64;
                chosen.extend(before);
            } else {
                let alternatives = occurrences.len() as u64 - 1;
                if masked.sentence_index != 1 || !in_sentence[repeated][0] {
                    tally.rejected_order += alternatives;
                    continue;
                }
                let repeated_shares = occs.iter().any(|&o| o != mi && mentions[o].sentence_index == 1);
                for (&alt, present) in in_sentence.iter().filter(|(k, _)| **k != repeated) {
                    if !present[0] {
                        tally.rejected_order += 1;
                    } else if present[1] != repeated_shares {
                        tally.rejected_same_sentence += 1;
                    } else {
                        chosen.push(alt);
                    }
                }
            }
            if chosen.is_empty() {
                continue;
            }
            let rule = if two { Rule::FollowingSentence } else { Rule::SingleSentence };
            for alt in chosen {
                out.push(build(passage, masked, repeated, alt, rule));
            }
            break;
        }
    }
    out.sort_by(|a, b| (a.mask_offset, &a.incorrect).cmp(&(b.mask_offset, &b.incorrect)));
    tally.emitted += out.len() as u64;
    out
}

fn build(passage: &Passage, masked: &NameMention, correct: &NameKey, incorrect: &NameKey, rule: Rule) -> MaskedExample {
    let key_len = correct.as_str().chars().count();
    let masked_text = replace_chars(&passage.text, masked.start, masked.start + key_len, MASK_TOKEN);
    let passage_end = passage.start + passage.text.chars().count();
    MaskedExample {
        example_id: example_id(&passage.doc_id, passage.start + masked.start, incorrect.as_str()),
        masked_text,
        correct: correct.as_str().to_string(),
        incorrect: incorrect.as_str().to_string(),
        mask_offset: masked.start,
        doc_id: passage.doc_id.clone(),
        passage_start: passage.start,
        passage_end,
        rule,
    }
}

/// Counters for mining whole documents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MiningTally {
    pub documents: u64,
    pub generation: GenerationTally,
    pub detector_failures: u64,
    /// Examples already produced by a smaller window of the same document.
    pub duplicates_suppressed: u64,
    pub examples: u64,
}

impl MiningTally {
    pub fn merge(&mut self, other: &MiningTally) {
        self.documents += other.documents;
        self.generation.merge(&other.generation);
        self.detector_failures += other.detector_failures;
        self.duplicates_suppressed += other.duplicates_suppressed;
        self.examples += other.examples;
    }
}

/// Segment, window, detect and generate for one document.
///
/// Windows are visited singles first, so an example that a sentence pair
/// would repeat (same absolute mask offset and alternative) is kept from the
/// single sentence and suppressed from the pair. Passages whose detector
/// call fails are skipped and counted.
pub fn mine_document<D: NameDetector + ?Sized>(
    doc: &Document,
    segmenter: &Segmenter,
    detector: &D,
    tally: &mut MiningTally,
) -> Vec<MaskedExample> {
    tally.documents += 1;
    let sentences = segmenter.segment(&doc.text);
    let mut seen: BTreeSet<(usize, String)> = BTreeSet::new();
    let mut out = Vec::new();
    for passage in windows(doc, &sentences) {
        let mentions = match detect_names(&passage, detector) {
            Ok(m) => m,
            Err(_) => {
                tally.detector_failures += 1;
                continue;
            }
        };
        for ex in generate_tallied(&passage, &mentions, &mut tally.generation) {
            if seen.insert((ex.absolute_mask_offset(), ex.incorrect.clone())) {
                out.push(ex);
            } else {
                tally.duplicates_suppressed += 1;
            }
        }
    }
    tally.examples += out.len() as u64;
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("cannot hold out {requested} examples from a dataset of {available}")]
pub struct SplitError {
    pub requested: usize,
    pub available: usize,
}

/// Hold out exactly `n` items, chosen uniformly without replacement from a
/// ChaCha8 stream seeded with `seed`. Returns `(train, validation)`, both in
/// input order.
pub fn holdout_split<T>(dataset: Vec<T>, n: usize, seed: u64) -> Result<(Vec<T>, Vec<T>), SplitError> {
    let len = dataset.len();
    if n > len {
        return Err(SplitError { requested: n, available: len });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut held = alloc::vec![false; len];
    for i in rand::seq::index::sample(&mut rng, len, n) {
        held[i] = true;
    }
    let mut train = Vec::with_capacity(len - n);
    let mut validation = Vec::with_capacity(n);
    for (item, h) in dataset.into_iter().zip(held) {
        if h {
            validation.push(item);
        } else {
            train.push(item);
        }
    }
    Ok((train, validation))
}
