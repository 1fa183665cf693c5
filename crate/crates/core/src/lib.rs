//! Mining masked-name cloze examples from prose, and scoring and evaluating
//! candidate choices for pronoun resolution.
//!
//! Everything here is pure computation over strings and numbers; file
//! formats, processes and the command line live in the `wikicrem` crate.

#![no_std]

extern crate alloc;

pub mod cremgen;
pub mod eval;
pub mod names;
pub mod oracle;
pub mod scorer;
pub mod segment;
pub mod stats;
pub mod text;
pub mod wikitext;
pub mod window;

pub use cremgen::{generate, holdout_split, mine_document, MaskedExample, MASK_TOKEN};
pub use names::{detect_names, GazetteerDetector, NameDetector, NameKey, NameMention};
pub use scorer::{argmax, loss, select_candidate, LossParams, Scorer, UnigramScorer};
pub use segment::{segment_sentences, Segmenter, Sentence};
pub use window::{passages, windows, Document, Passage};
