//! Entailment pairs to masked-choice items.
//!
//! The hypothesis copies part of the premise with a pronoun replaced by a
//! noun phrase. Aligning the two token streams finds the copied part; the
//! replacement becomes the queried candidate, the pronoun is masked and the
//! premise's other noun phrases become alternatives.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::{mask_span, DatasetKind, EvalItem, Gold, Tags};
use crate::names::StopWords;
use crate::text::{list_entries, slice_chars};

const DEFAULT_NOUNS: &str = include_str!("../../data/nouns.txt");

pub const PRONOUNS: [&str; 17] = [
    "he", "she", "it", "they", "him", "her", "them", "his", "its", "their", "hers", "theirs", "himself",
    "herself", "itself", "themselves", "we",
];

const POSSESSIVE: [&str; 4] = ["his", "her", "its", "their"];

const DETERMINERS: [&str; 17] = [
    "the", "a", "an", "this", "that", "these", "those", "his", "her", "their", "its", "my", "our", "your",
    "some", "every", "each",
];

/// How far from the copied span a pronoun may sit.
const PRONOUN_REACH: usize = 3;

fn is_pronoun(t: &str) -> bool {
    PRONOUNS.contains(&t.to_lowercase().as_str())
}

/// Finds noun phrases as char spans, in order, non-overlapping.
pub trait NounDetector {
    fn noun_phrases(&self, text: &str) -> Vec<(usize, usize)>;
}

impl<D: NounDetector + ?Sized> NounDetector for &D {
    fn noun_phrases(&self, text: &str) -> Vec<(usize, usize)> {
        (**self).noun_phrases(text)
    }
}

/// Determiner followed by words up to the last known or capitalised noun,
/// plus bare runs of capitalised words.
#[derive(Debug, Clone)]
pub struct HeuristicNounDetector {
    nouns: BTreeSet<String>,
    stopwords: StopWords,
}

impl Default for HeuristicNounDetector {
    fn default() -> Self {
        Self::new(list_entries(DEFAULT_NOUNS), StopWords::shipped())
    }
}

impl HeuristicNounDetector {
    pub fn new<I, S>(nouns: I, stopwords: StopWords) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self { nouns: nouns.into_iter().map(|n| n.as_ref().to_lowercase()).collect(), stopwords }
    }

    pub fn is_noun(&self, word: &str) -> bool {
        let lower = word.to_lowercase();
        let w = lower.strip_suffix("'s").unwrap_or(&lower);
        if self.nouns.contains(w) {
            return true;
        }
        if let Some(stem) = w.strip_suffix("ies") {
            if self.nouns.contains(&alloc::format!("{stem}y")) {
                return true;
            }
        }
        let plural = [w.strip_suffix("es"), w.strip_suffix('s')]
            .into_iter()
            .flatten()
            .any(|stem| self.nouns.contains(stem));
        plural
    }

    fn is_function_word(&self, word: &str) -> bool {
        let lower = word.to_lowercase();
        DETERMINERS.contains(&lower.as_str()) || is_pronoun(word) || self.stopwords.contains(word)
    }
}

fn capitalised(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

impl NounDetector for HeuristicNounDetector {
    fn noun_phrases(&self, text: &str) -> Vec<(usize, usize)> {
        let toks = tokenize(text);
        let mut out = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let t = &toks[i];
            if t.word && DETERMINERS.contains(&t.lower.as_str()) {
                let mut last_noun = None;
                let mut j = i + 1;
                while j < toks.len() && toks[j].word && !self.is_function_word(&toks[j].text) && j - i <= 4 {
                    if self.is_noun(&toks[j].text) || capitalised(&toks[j].text) {
                        last_noun = Some(j);
                    }
                    j += 1;
                }
                if let Some(end) = last_noun {
                    out.push((t.start, toks[end].end));
                    i = end + 1;
                    continue;
                }
            } else if t.word && capitalised(&t.text) && !self.is_function_word(&t.text) {
                let mut j = i;
                while j + 1 < toks.len()
                    && toks[j + 1].word
                    && capitalised(&toks[j + 1].text)
                    && !self.is_function_word(&toks[j + 1].text)
                {
                    j += 1;
                }
                out.push((t.start, toks[j].end));
                i = j + 1;
                continue;
            }
            i += 1;
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Token {
    text: String,
    lower: String,
    start: usize,
    end: usize,
    word: bool,
}

/// Words (letters and digits with inner apostrophes or hyphens) and single
/// punctuation marks, as char spans.
fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_alphanumeric() {
            i += 1;
            while i < chars.len() {
                let inner = matches!(chars[i], '\'' | '’' | '-')
                    && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
                if chars[i].is_alphanumeric() || inner {
                    i += 1;
                } else {
                    break;
                }
            }
        } else {
            i += 1;
        }
        let s: String = chars[start..i].iter().collect();
        out.push(Token {
            lower: s.to_lowercase().replace('’', "'"),
            text: s,
            start,
            end: i,
            word: c.is_alphanumeric(),
        });
    }
    out
}

/// Longest run of equal tokens `(p_start, h_start, len)`; earliest in the
/// hypothesis, then in the premise, on ties. Runs must contain a word.
fn longest_common_run(p: &[Token], h: &[Token]) -> Option<(usize, usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    let mut prev = alloc::vec![0usize; p.len() + 1];
    for hj in 0..h.len() {
        let mut cur = alloc::vec![0usize; p.len() + 1];
        for pi in 0..p.len() {
            if p[pi].lower == h[hj].lower {
                cur[pi + 1] = prev[pi] + 1;
            }
        }
        for pi in 0..p.len() {
            let len = cur[pi + 1];
            if len == 0 {
                continue;
            }
            let (ps, hs) = (pi + 1 - len, hj + 1 - len);
            if !h[hs..=hj].iter().any(|t| t.word) {
                continue;
            }
            let better = match best {
                None => true,
                Some((bp, bh, bl)) => len > bl || (len == bl && (hs, ps) < (bh, bp)),
            };
            if better {
                best = Some((ps, hs, len));
            }
        }
        prev = cur;
    }
    best
}

fn words(toks: &[Token]) -> bool {
    toks.iter().any(|t| t.word)
}

/// Trim leading and trailing punctuation tokens.
fn trim_punct(toks: &[Token]) -> &[Token] {
    let s = toks.iter().position(|t| t.word).unwrap_or(toks.len());
    let e = toks.iter().rposition(|t| t.word).map_or(s, |e| e + 1);
    &toks[s..e]
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConversionError {
    #[error("premise or hypothesis is empty")]
    Empty,
    #[error("no shared span between premise and hypothesis")]
    NoAlignment,
    #[error("no pronoun next to the shared span")]
    NoPronoun,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WnliAlignment {
    pub masked_text: String,
    pub candidate: String,
    pub alternatives: Vec<String>,
    /// Masked premise span, in chars.
    pub masked_span: (usize, usize),
    /// Queried phrase in the hypothesis, in chars.
    pub candidate_span: (usize, usize),
}

struct Site {
    premise: (usize, usize),
    hypothesis: (usize, usize),
}

/// Substitution on one side of the anchor. `left` means the hypothesis has
/// unmatched tokens before the anchor.
fn site_beside(p: &[Token], h: &[Token], pi: usize, hi: usize, len: usize, left: bool) -> Option<Site> {
    let (h_side, p_side) = if left { (&h[..hi], &p[..pi]) } else { (&h[hi + len..], &p[pi + len..]) };
    if !words(h_side) {
        return None;
    }
    let pronoun_in = |toks: &[Token]| toks.len() <= PRONOUN_REACH && toks.iter().any(|t| t.word && is_pronoun(&t.text));
    // a second shared run may bound the substitution on the far side
    if let Some((p2, h2, l2)) = longest_common_run(p_side, h_side) {
        let (h_gap, p_gap) = if left {
            (&h_side[h2 + l2..], &p_side[p2 + l2..])
        } else {
            (&h_side[..h2], &p_side[..p2])
        };
        let h_gap = trim_punct(h_gap);
        if words(h_gap) && pronoun_in(p_gap) {
            let pr = p_gap.iter().find(|t| t.word && is_pronoun(&t.text)).unwrap();
            return Some(Site {
                premise: (pr.start, pr.end),
                hypothesis: (h_gap[0].start, h_gap[h_gap.len() - 1].end),
            });
        }
    }
    let cand = trim_punct(h_side);
    let near: Vec<&Token> = if left {
        p_side.iter().rev().take(PRONOUN_REACH).collect()
    } else {
        p_side.iter().take(PRONOUN_REACH).collect()
    };
    let pr = near.into_iter().find(|t| t.word && is_pronoun(&t.text))?;
    Some(Site { premise: (pr.start, pr.end), hypothesis: (cand[0].start, cand[cand.len() - 1].end) })
}

fn strip_determiner(phrase: &str) -> String {
    let lower = phrase.trim().to_lowercase();
    for d in DETERMINERS {
        if let Some(rest) = lower.strip_prefix(d).and_then(|r| r.strip_prefix(' ')) {
            return String::from(rest.trim());
        }
    }
    lower
}

pub fn wnli_to_schema<N: NounDetector + ?Sized>(
    premise: &str,
    hypothesis: &str,
    nouns: &N,
) -> Result<WnliAlignment, ConversionError> {
    let p = tokenize(premise);
    let h = tokenize(hypothesis);
    if !words(&p) || !words(&h) {
        return Err(ConversionError::Empty);
    }
    let (pi, hi, len) = longest_common_run(&p, &h).ok_or(ConversionError::NoAlignment)?;

    let site = if !words(&h[..hi]) && !words(&h[hi + len..]) {
        // the hypothesis is a premise clause with the referent already named;
        // its leading noun phrase is the candidate and sits at the same spot
        let lead = nouns
            .noun_phrases(hypothesis)
            .into_iter()
            .find(|&(s, _)| s == h[hi].start)
            .unwrap_or((h[hi].start, h[hi].end));
        let n_tokens = h.iter().filter(|t| t.start >= lead.0 && t.end <= lead.1).count().clamp(1, len);
        Site {
            premise: (p[pi].start, p[pi + n_tokens - 1].end),
            hypothesis: lead,
        }
    } else {
        site_beside(&p, &h, pi, hi, len, true)
            .or_else(|| site_beside(&p, &h, pi, hi, len, false))
            .ok_or(ConversionError::NoPronoun)?
    };

    let mut candidate = String::from(slice_chars(hypothesis, site.hypothesis.0, site.hypothesis.1));
    let pronoun = slice_chars(premise, site.premise.0, site.premise.1).to_lowercase();
    let mut masked_text = mask_span(premise, site.premise.0, site.premise.1 - site.premise.0);
    if POSSESSIVE.contains(&pronoun.as_str()) {
        if let Some(stem) = candidate.strip_suffix("'s").or_else(|| candidate.strip_suffix("’s")) {
            candidate = String::from(stem);
            let at = site.premise.0;
            let rest = crate::text::replace_chars(premise, at, site.premise.1, "");
            let mut m = String::from(slice_chars(&rest, 0, at));
            m.push_str(crate::cremgen::MASK_TOKEN);
            m.push_str("'s");
            m.push_str(slice_chars(&rest, at, crate::text::char_len(&rest)));
            masked_text = m;
        }
    }

    let mut seen: BTreeSet<String> = BTreeSet::new();
    seen.insert(strip_determiner(&candidate));
    let mut alternatives = Vec::new();
    for (s, e) in nouns.noun_phrases(premise) {
        if s < site.premise.1 && site.premise.0 < e {
            continue;
        }
        let phrase = slice_chars(premise, s, e);
        if seen.insert(strip_determiner(phrase)) {
            alternatives.push(String::from(phrase));
        }
    }

    Ok(WnliAlignment { masked_text, candidate, alternatives, masked_span: site.premise, candidate_span: site.hypothesis })
}

/// Build the evaluation item; a failed conversion yields a placeholder item
/// answered with the majority class.
pub fn wnli_item<N: NounDetector + ?Sized>(
    item_id: String,
    premise: &str,
    hypothesis: &str,
    label: Option<bool>,
    nouns: &N,
) -> EvalItem {
    let base = EvalItem {
        item_id,
        kind: DatasetKind::Wnli,
        text: String::from(premise),
        masked_text: String::from(premise),
        candidates: Vec::new(),
        gold: Gold::Entailment(label),
        tags: Tags::default(),
        conversion_failed: true,
    };
    match wnli_to_schema(premise, hypothesis, nouns) {
        Ok(a) => {
            let mut candidates = alloc::vec![a.candidate];
            candidates.extend(a.alternatives);
            EvalItem { masked_text: a.masked_text, candidates, conversion_failed: false, ..base }
        }
        Err(_) => base,
    }
}
