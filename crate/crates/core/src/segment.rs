//! Rule-based sentence segmentation.
//!
//! A boundary is placed after a run of terminal punctuation (`.`, `!`, `?`,
//! plus any closing quotes or brackets) when it is followed by whitespace and
//! then an uppercase letter or an opening quote. A single `.` does not split
//! when the token before it is a listed abbreviation or a single uppercase
//! initial. A blank line always ends a sentence.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::text::list_entries;

const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

/// A sentence span in char offsets, `start` inclusive and `end` exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sentence {
    pub start: usize,
    pub end: usize,
    pub index: usize,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: BTreeSet<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Self::from_list(DEFAULT_ABBREVIATIONS)
    }
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201D}' | '\u{2019}' | '\u{00BB}')
}

fn is_opening(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '\u{201C}' | '\u{2018}' | '\u{00AB}')
}

impl Segmenter {
    /// Build from an abbreviation list file (one token per line, final period omitted).
    pub fn from_list(src: &str) -> Self {
        Self {
            abbreviations: list_entries(src)
                .map(|t| t.trim_end_matches('.').to_lowercase())
                .collect(),
        }
    }

    pub fn with_abbreviations<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            abbreviations: tokens
                .into_iter()
                .map(|t| t.as_ref().trim_end_matches('.').to_lowercase())
                .collect(),
        }
    }

    pub fn is_abbreviation(&self, token: &str) -> bool {
        self.abbreviations.contains(&token.to_lowercase())
    }

    /// Whether the `.` at `dot` closes an abbreviation or an initial.
    fn protects(&self, chars: &[char], dot: usize) -> bool {
        let mut from = dot;
        while from > 0 && !chars[from - 1].is_whitespace() {
            from -= 1;
        }
        let mut token = &chars[from..dot];
        while let Some((first, rest)) = token.split_first() {
            if is_opening(*first) {
                token = rest;
            } else {
                break;
            }
        }
        if token.is_empty() {
            return false;
        }
        if token.len() == 1 && token[0].is_uppercase() {
            return true;
        }
        let token: String = token.iter().collect();
        self.is_abbreviation(&token)
    }

    pub fn segment(&self, text: &str) -> Vec<Sentence> {
        let chars: Vec<char> = text.chars().collect();
        let n = chars.len();
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        let push = |out: &mut Vec<Sentence>, s: usize, e: usize| {
            let mut e = e;
            while e > s && chars[e - 1].is_whitespace() {
                e -= 1;
            }
            if e > s {
                let index = out.len();
                out.push(Sentence { start: s, end: e, index });
            }
        };

        let mut i = 0;
        while i < n {
            let c = chars[i];
            let Some(s) = start else {
                if !c.is_whitespace() {
                    start = Some(i);
                }
                i += 1;
                continue;
            };
            if c == '\n' {
                let mut j = i + 1;
                let mut blank = false;
                while j < n && chars[j].is_whitespace() {
                    blank |= chars[j] == '\n';
                    j += 1;
                }
                if blank {
                    push(&mut out, s, i);
                    start = None;
                    i = j;
                    continue;
                }
                i += 1;
                continue;
            }
            if is_terminal(c) {
                let mut j = i + 1;
                while j < n && is_terminal(chars[j]) {
                    j += 1;
                }
                let single_dot = c == '.' && j == i + 1;
                while j < n && is_closing(chars[j]) {
                    j += 1;
                }
                if j < n && chars[j].is_whitespace() {
                    let mut k = j;
                    while k < n && chars[k].is_whitespace() {
                        k += 1;
                    }
                    let opens = k < n && (chars[k].is_uppercase() || is_opening(chars[k]));
                    if opens && !(single_dot && self.protects(&chars, i)) {
                        push(&mut out, s, j);
                        start = None;
                    }
                }
                i = j;
                continue;
            }
            i += 1;
        }
        if let Some(s) = start {
            push(&mut out, s, n);
        }
        out
    }

    pub fn abbreviations(&self) -> impl Iterator<Item = &str> {
        self.abbreviations.iter().map(|s| s.as_str())
    }
}

/// Segment with the shipped abbreviation list.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    Segmenter::default().segment(text)
}

/// Render the shipped abbreviation list, one token per line.
pub fn default_abbreviation_list() -> String {
    DEFAULT_ABBREVIATIONS.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::slice_chars;
    use alloc::vec;

    fn spans(text: &str) -> Vec<(usize, usize)> {
        segment_sentences(text).iter().map(|s| (s.start, s.end)).collect()
    }

    #[test]
    fn empty_text() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences("   \n ").is_empty());
    }

    #[test]
    fn two_plain_sentences() {
        assert_eq!(spans("Alice ran. Bob sat."), vec![(0, 10), (11, 19)]);
    }

    #[test]
    fn abbreviation_does_not_split() {
        let text = "Dr. Smith left. He returned.";
        let s = segment_sentences(text);
        assert_eq!(s.len(), 2);
        assert_eq!(slice_chars(text, s[0].start, s[0].end), "Dr. Smith left.");
        assert_eq!(slice_chars(text, s[1].start, s[1].end), "He returned.");
    }

    #[test]
    fn initials_and_lowercase_followers() {
        let text = "Joseph C. Smith arrived. then nothing happened? Yes.";
        let s = segment_sentences(text);
        assert_eq!(s.len(), 2);
        assert_eq!(
            slice_chars(text, s[0].start, s[0].end),
            "Joseph C. Smith arrived. then nothing happened?"
        );
    }

    #[test]
    fn quotes_and_blank_lines() {
        let text = "He said \"Stop.\" \"Why?\" she asked.\n\nHeading\n\nNext one";
        let got: Vec<&str> = segment_sentences(text)
            .iter()
            .map(|s| slice_chars(text, s.start, s.end))
            .collect();
        assert_eq!(got, vec!["He said \"Stop.\"", "\"Why?\" she asked.", "Heading", "Next one"]);
    }

    #[test]
    fn spaced_tokens_from_tokenized_text() {
        let text = "Jackson competed against Dennard . On August 2 , it was announced .";
        assert_eq!(segment_sentences(text).len(), 2);
    }

    #[test]
    fn custom_abbreviations() {
        let seg = Segmenter::with_abbreviations(["Foo."]);
        assert_eq!(seg.segment("A Foo. Bar.").len(), 1);
        assert_eq!(Segmenter::with_abbreviations(Vec::<&str>::new()).segment("A Dr. Bar.").len(), 2);
    }
}
