//! Personal-name mentions and name identity.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::text::{list_entries, slice_chars};
use crate::window::Passage;

const DEFAULT_NAMES: &str = include_str!("../data/names.txt");
const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// A detected name span, in passage-relative char offsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NameMention {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub sentence_index: usize,
}

impl NameMention {
    /// Build a mention for `[start, end)` of `passage`, filling in surface and sentence.
    pub fn from_span(passage: &Passage, start: usize, end: usize) -> Self {
        Self {
            start,
            end,
            surface: slice_chars(&passage.text, start, end).to_string(),
            sentence_index: passage.sentence_of(start),
        }
    }

    pub fn key(&self) -> NameKey {
        name_key(self)
    }

    /// Char length of the identity part of the surface (possessive clitic excluded).
    pub fn key_len(&self) -> usize {
        self.key().as_str().chars().count()
    }
}

/// Identity of a name: the surface with a trailing possessive clitic removed.
/// Comparison is exact and case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NameKey(String);

impl NameKey {
    pub fn of(surface: &str) -> Self {
        NameKey(strip_possessive(surface).to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for NameKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn strip_possessive(surface: &str) -> &str {
    for suffix in ["'s", "\u{2019}s", "'S", "\u{2019}S"] {
        if let Some(rest) = surface.strip_suffix(suffix) {
            if !rest.is_empty() {
                return rest;
            }
        }
    }
    for suffix in ["'", "\u{2019}"] {
        if let Some(rest) = surface.strip_suffix(suffix) {
            if !rest.is_empty() {
                return rest;
            }
        }
    }
    surface
}

pub fn name_key(mention: &NameMention) -> NameKey {
    NameKey::of(&mention.surface)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DetectError {
    #[error("name detector failed: {0}")]
    Detector(String),
    #[error("name detector returned an invalid mention list: {0}")]
    InvalidOutput(String),
}

/// Anything that can find personal names in a passage.
pub trait NameDetector {
    fn detect(&self, passage: &Passage) -> Result<Vec<NameMention>, DetectError>;
}

impl<D: NameDetector + ?Sized> NameDetector for &D {
    fn detect(&self, passage: &Passage) -> Result<Vec<NameMention>, DetectError> {
        (**self).detect(passage)
    }
}

/// Run `detector` and check its output: ordered, non-overlapping, in bounds,
/// surfaces equal to their slices and sentence indices consistent with the passage.
pub fn detect_names<D: NameDetector + ?Sized>(
    passage: &Passage,
    detector: &D,
) -> Result<Vec<NameMention>, DetectError> {
    let mentions = detector.detect(passage)?;
    let len = passage.text.chars().count();
    let mut prev_end = 0;
    for (i, m) in mentions.iter().enumerate() {
        if m.start >= m.end || m.end > len {
            return Err(DetectError::InvalidOutput(alloc::format!(
                "mention {i} has span {}..{} outside 0..{len}",
                m.start,
                m.end
            )));
        }
        if i > 0 && m.start < prev_end {
            return Err(DetectError::InvalidOutput(alloc::format!(
                "mention {i} overlaps or precedes the previous one"
            )));
        }
        if slice_chars(&passage.text, m.start, m.end) != m.surface {
            return Err(DetectError::InvalidOutput(alloc::format!(
                "mention {i} surface {:?} does not match its span",
                m.surface
            )));
        }
        if m.sentence_index != passage.sentence_of(m.start) {
            return Err(DetectError::InvalidOutput(alloc::format!(
                "mention {i} has sentence index {} but starts in sentence {}",
                m.sentence_index,
                passage.sentence_of(m.start)
            )));
        }
        prev_end = m.end;
    }
    Ok(mentions)
}

/// Given names and family names, loaded from a `#given` / `#family` sectioned list.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    given: BTreeSet<String>,
    family: BTreeSet<String>,
}

impl Gazetteer {
    /// Parse the sectioned list format. Lines before any header count as given names.
    pub fn parse(src: &str) -> Self {
        let mut g = Gazetteer::default();
        let mut family = false;
        for line in list_entries(src) {
            match line {
                "#given" => family = false,
                "#family" => family = true,
                name if name.starts_with('#') => {}
                name => {
                    if family {
                        g.family.insert(name.to_string());
                    } else {
                        g.given.insert(name.to_string());
                    }
                }
            }
        }
        g
    }

    pub fn shipped() -> Self {
        Self::parse(DEFAULT_NAMES)
    }

    pub fn from_names<I, S>(given: I, family: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            given: given.into_iter().map(Into::into).collect(),
            family: family.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_given(&self, name: &str) -> bool {
        self.given.contains(name)
    }

    pub fn is_family(&self, name: &str) -> bool {
        self.family.contains(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.is_given(name) || self.is_family(name)
    }

    pub fn len(&self) -> usize {
        self.given.len() + self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.given.is_empty() && self.family.is_empty()
    }
}

/// Capitalised words that never start or continue a name (matched case-insensitively).
#[derive(Debug, Clone, Default)]
pub struct StopWords(BTreeSet<String>);

impl StopWords {
    pub fn parse(src: &str) -> Self {
        StopWords(list_entries(src).filter(|l| !l.starts_with('#')).map(|l| l.to_lowercase()).collect())
    }

    pub fn shipped() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(&word.to_lowercase())
    }
}

#[derive(Debug, Clone, Copy)]
struct Word {
    start: usize,
    end: usize,
    key_end: usize,
}

impl Word {
    fn possessive(&self) -> bool {
        self.key_end != self.end
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn scan_words(chars: &[char]) -> Vec<Word> {
    let n = chars.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if !is_word_char(chars[i]) {
            i += 1;
            continue;
        }
        let start = i;
        let mut j = i + 1;
        loop {
            while j < n && is_word_char(chars[j]) {
                j += 1;
            }
            // inner apostrophes and hyphens (O'Brien, Jean-Luc) keep the word going,
            // except a final 's which is a possessive clitic
            if j + 1 < n && (is_apostrophe(chars[j]) || chars[j] == '-') && is_word_char(chars[j + 1]) {
                let clitic = is_apostrophe(chars[j])
                    && matches!(chars[j + 1], 's' | 'S')
                    && (j + 2 >= n || !is_word_char(chars[j + 2]));
                if !clitic {
                    j += 1;
                    continue;
                }
            }
            break;
        }
        let key_end = j;
        let mut end = j;
        if j < n && is_apostrophe(chars[j]) {
            if j + 1 < n && matches!(chars[j + 1], 's' | 'S') && (j + 2 >= n || !is_word_char(chars[j + 2])) {
                end = j + 2;
            } else if matches!(chars[j - 1], 's' | 'S') && (j + 1 >= n || !is_word_char(chars[j + 1])) {
                end = j + 1;
            }
        }
        out.push(Word { start, end, key_end });
        i = end;
    }
    out
}

/// The built-in detector: maximal runs of capitalised words that contain a
/// gazetteer name, with stopwords breaking runs.
///
/// A run is accepted when its first word is a given name, its last word a
/// family name, or any of its words is listed. The whole run becomes one
/// mention, including a trailing possessive clitic. Honorifics such as "Dr"
/// are stopwords, so they are never part of a mention.
#[derive(Debug, Clone)]
pub struct GazetteerDetector {
    gazetteer: Gazetteer,
    stopwords: StopWords,
}

impl Default for GazetteerDetector {
    fn default() -> Self {
        Self::new(Gazetteer::shipped(), StopWords::shipped())
    }
}

impl GazetteerDetector {
    pub fn new(gazetteer: Gazetteer, stopwords: StopWords) -> Self {
        Self { gazetteer, stopwords }
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    /// Name spans `(start, end)` in `text`, char offsets.
    pub fn find_spans(&self, text: &str) -> Vec<(usize, usize)> {
        let chars: Vec<char> = text.chars().collect();
        let words = scan_words(&chars);
        let key = |w: &Word| -> String { chars[w.start..w.key_end].iter().collect() };
        let usable = |w: &Word| chars[w.start].is_uppercase() && !self.stopwords.contains(&key(w));

        let mut spans = Vec::new();
        let mut i = 0;
        while i < words.len() {
            if !usable(&words[i]) {
                i += 1;
                continue;
            }
            let mut j = i;
            while j + 1 < words.len()
                && !words[j].possessive()
                && usable(&words[j + 1])
                && chars[words[j].end..words[j + 1].start].iter().all(|c| *c == ' ' || *c == '\t')
            {
                j += 1;
            }
            let run = &words[i..=j];
            let accept = self.gazetteer.is_given(&key(&run[0]))
                || self.gazetteer.is_family(&key(&run[run.len() - 1]))
                || run.iter().any(|w| self.gazetteer.contains(&key(w)));
            if accept {
                spans.push((run[0].start, run[run.len() - 1].end));
            }
            i = j + 1;
        }
        spans
    }
}

impl NameDetector for GazetteerDetector {
    fn detect(&self, passage: &Passage) -> Result<Vec<NameMention>, DetectError> {
        Ok(self
            .find_spans(&passage.text)
            .into_iter()
            .map(|(s, e)| NameMention::from_span(passage, s, e))
            .collect())
    }
}
