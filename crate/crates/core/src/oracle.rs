//! Exhaustive reference for [`crate::cremgen::generate`].
//!
//! Enumerates every (repeated key, non-first occurrence, alternative key)
//! triple and keeps those that satisfy the positional predicates read
//! literally. Nothing here is shared with the fast path except the id hash.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cremgen::{example_id, MaskedExample, Rule, MASK_TOKEN};
use crate::names::{NameKey, NameMention};
use crate::window::Passage;

struct Triple {
    repeated: NameKey,
    masked: usize,
    alternative: NameKey,
}

pub fn brute_force_generate(passage: &Passage, mentions: &[NameMention]) -> Vec<MaskedExample> {
    let key = |m: &NameMention| NameKey::of(&m.surface);
    let sentence = |m: &NameMention| passage.sentence_of(m.start);
    let single = passage.sentences.len() == 1;

    let mut distinct: Vec<NameKey> = Vec::new();
    for m in mentions {
        if !distinct.contains(&key(m)) {
            distinct.push(key(m));
        }
    }

    let mut kept: Vec<Triple> = Vec::new();
    for (mi, m) in mentions.iter().enumerate() {
        let r = key(m);
        let repeated_before = mentions.iter().any(|o| key(o) == r && o.start < m.start);
        if !repeated_before {
            continue;
        }
        for b in distinct.iter().filter(|b| **b != r) {
            let positional = if single {
                mentions.iter().any(|o| key(o) == *b && o.start < m.start)
            } else {
                sentence(m) == 1
                    && mentions.iter().any(|o| key(o) == r && sentence(o) == 0)
                    && mentions.iter().any(|o| key(o) == *b && sentence(o) == 0)
            };
            let r_shares = mentions
                .iter()
                .enumerate()
                .any(|(oi, o)| oi != mi && key(o) == r && sentence(o) == sentence(m));
            let b_shares = mentions.iter().any(|o| key(o) == *b && sentence(o) == sentence(m));
            let discarded = r_shares != b_shares;
            if positional && !discarded {
                kept.push(Triple { repeated: r.clone(), masked: mi, alternative: b.clone() });
            }
        }
    }

    let mut out = Vec::new();
    for t in &kept {
        let earliest = kept
            .iter()
            .filter(|u| u.repeated == t.repeated)
            .map(|u| mentions[u.masked].start)
            .min()
            .unwrap();
        if mentions[t.masked].start != earliest {
            continue;
        }
        let m = &mentions[t.masked];
        let chars: Vec<char> = passage.text.chars().collect();
        let key_chars = t.repeated.as_str().chars().count();
        let mut masked_text: String = chars[..m.start].iter().collect();
        masked_text.push_str(MASK_TOKEN);
        masked_text.extend(&chars[m.start + key_chars..]);
        out.push(MaskedExample {
            example_id: example_id(&passage.doc_id, passage.start + m.start, t.alternative.as_str()),
            masked_text,
            correct: String::from(t.repeated.as_str()),
            incorrect: String::from(t.alternative.as_str()),
            mask_offset: m.start,
            doc_id: passage.doc_id.clone(),
            passage_start: passage.start,
            passage_end: passage.start + chars.len(),
            rule: if single { Rule::SingleSentence } else { Rule::FollowingSentence },
        });
    }
    out.sort_by(|a, b| a.mask_offset.cmp(&b.mask_offset).then_with(|| a.incorrect.cmp(&b.incorrect)));
    out
}

const SYNTH_NAMES: [&str; 5] = ["Alice", "Bob", "Carol", "Dana", "Erin"];
const SYNTH_FILLER: [&str; 8] = ["met", "and", "saw", "the", "dog", "then", "with", "left"];

/// A random one- or two-sentence passage over a five-name vocabulary, with
/// every name token (possessives included) given as a mention.
pub fn synthetic_case(seed: u64) -> (Passage, Vec<NameMention>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentence = |rng: &mut ChaCha8Rng| -> (String, Vec<(usize, usize)>) {
        let n = rng.random_range(1..=9);
        let mut text = String::new();
        let mut spans = Vec::new();
        for i in 0..n {
            if i > 0 {
                text.push(' ');
            }
            let at = text.chars().count();
            if rng.random_bool(0.55) {
                let name = SYNTH_NAMES[rng.random_range(0..SYNTH_NAMES.len())];
                text.push_str(name);
                if rng.random_bool(0.15) {
                    text.push_str("'s");
                }
                spans.push((at, text.chars().count()));
            } else {
                text.push_str(SYNTH_FILLER[rng.random_range(0..SYNTH_FILLER.len())]);
            }
        }
        text.push('.');
        (text, spans)
    };
    let (first, mut spans) = sentence(&mut rng);
    let passage = if rng.random_bool(0.5) {
        Passage::single("synthetic", first)
    } else {
        let (second, more) = sentence(&mut rng);
        let boundary = first.chars().count() + 1;
        spans.extend(more.into_iter().map(|(s, e)| (s + boundary, e + boundary)));
        let mut text = first;
        text.push(' ');
        text.push_str(&second);
        Passage::pair("synthetic", text, boundary)
    };
    let mentions = spans.into_iter().map(|(s, e)| NameMention::from_span(&passage, s, e)).collect();
    (passage, mentions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cremgen::generate;
    use crate::names::{detect_names, GazetteerDetector};

    fn both(p: &Passage) -> (Vec<MaskedExample>, Vec<MaskedExample>) {
        let m = detect_names(p, &GazetteerDetector::default()).unwrap();
        (generate(p, &m), brute_force_generate(p, &m))
    }

    #[test]
    fn empty_mentions() {
        let p = Passage::single("d", "nothing here");
        assert!(brute_force_generate(&p, &[]).is_empty());
    }

    #[test]
    fn agrees_on_worked_cases() {
        for p in [
            Passage::single("d", "Alice met Bob."),
            Passage::pair("d", "Alice smiled. Alice met Bob.", 14),
            Passage::single("d", "Carol told Dana and Erin that Carol would drive."),
            Passage::pair("d", "Alice thanked Bob. Bob and Alice left.", 19),
            Passage::pair("d", "Alice thanked Bob. Later Alice left.", 19),
        ] {
            let (fast, slow) = both(&p);
            assert_eq!(fast, slow, "{}", p.text);
        }
    }

    #[test]
    fn synthetic_cases_are_reproducible() {
        let (a, ma) = synthetic_case(11);
        let (b, mb) = synthetic_case(11);
        assert_eq!((a, ma), (b, mb));
        let (p, m) = synthetic_case(12);
        assert!(m.iter().all(|x| crate::text::slice_chars(&p.text, x.start, x.end) == x.surface));
    }
}
