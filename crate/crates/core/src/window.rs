//! Documents and their 1–2 sentence passages.

use alloc::string::String;
use alloc::vec::Vec;

use crate::segment::{Segmenter, Sentence};
use crate::text::slice_chars;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    WikiDump,
    PlainText,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    pub source: SourceKind,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>, source: SourceKind) -> Self {
        Self {
            doc_id: doc_id.into(),
            text: text.into(),
            source,
        }
    }
}

/// One sentence or two adjacent sentences of a document.
///
/// `text` is the document slice from the first sentence start to the last
/// sentence end, so offsets inside the passage map back to the document by
/// adding `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Passage {
    pub doc_id: String,
    /// Ordinal of this window in [`windows`] order.
    pub position: usize,
    pub sentences: Vec<Sentence>,
    pub text: String,
    /// Char offset of the passage in the document.
    pub start: usize,
    /// Passage-relative char offset where the second sentence begins.
    pub boundary: Option<usize>,
}

impl Passage {
    /// A standalone single-sentence passage over all of `text`.
    pub fn single(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let len = text.chars().count();
        Self {
            doc_id: doc_id.into(),
            position: 0,
            sentences: alloc::vec![Sentence { start: 0, end: len, index: 0 }],
            text,
            start: 0,
            boundary: None,
        }
    }

    /// A standalone passage of two sentences; `boundary` is where the second begins.
    pub fn pair(doc_id: impl Into<String>, text: impl Into<String>, boundary: usize) -> Self {
        let text = text.into();
        let len = text.chars().count();
        let mut first_end = boundary;
        let chars: Vec<char> = text.chars().collect();
        while first_end > 0 && chars[first_end - 1].is_whitespace() {
            first_end -= 1;
        }
        Self {
            doc_id: doc_id.into(),
            position: 0,
            sentences: alloc::vec![
                Sentence { start: 0, end: first_end, index: 0 },
                Sentence { start: boundary, end: len, index: 1 },
            ],
            text,
            start: 0,
            boundary: Some(boundary),
        }
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    /// Sentence (0 or 1) containing the passage-relative char offset.
    pub fn sentence_of(&self, offset: usize) -> usize {
        match self.boundary {
            Some(b) if offset >= b => 1,
            _ => 0,
        }
    }

    /// Char length of the passage text.
    pub fn len(&self) -> usize {
        let s = self.sentences.first().map_or(0, |s| s.start);
        let e = self.sentences.last().map_or(0, |s| s.end);
        e - s
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Every single sentence, then every adjacent pair, in document order.
pub fn windows<'a>(doc: &'a Document, sentences: &'a [Sentence]) -> impl Iterator<Item = Passage> + 'a {
    let singles = sentences.iter().map(|s| (*s, None));
    let pairs = sentences.windows(2).map(|w| (w[0], Some(w[1])));
    singles
        .chain(pairs)
        .enumerate()
        .map(move |(position, (first, second))| {
            let end = second.map_or(first.end, |s| s.end);
            let mut picked = alloc::vec![first];
            picked.extend(second);
            Passage {
                doc_id: doc.doc_id.clone(),
                position,
                text: String::from(slice_chars(&doc.text, first.start, end)),
                start: first.start,
                boundary: second.map(|s| s.start - first.start),
                sentences: picked,
            }
        })
}

/// Segment `doc` and return all of its passages.
pub fn passages(doc: &Document, segmenter: &Segmenter) -> Vec<Passage> {
    let sentences = segmenter.segment(&doc.text);
    windows(doc, &sentences).collect()
}
