//! Character-offset helpers.
//!
//! Every offset in this crate counts Unicode scalar values, never bytes, so
//! that mask positions survive re-encoding of the surrounding text.

use alloc::string::String;

/// Number of chars in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Byte offset of char offset `at`. Offsets past the end clamp to `text.len()`.
pub fn byte_offset(text: &str, at: usize) -> usize {
    text.char_indices().nth(at).map_or(text.len(), |(b, _)| b)
}

/// Slice `text` by char offsets `[start, end)`.
pub fn slice_chars(text: &str, start: usize, end: usize) -> &str {
    let b0 = byte_offset(text, start);
    let b1 = b0 + byte_offset(&text[b0..], end.saturating_sub(start));
    &text[b0..b1]
}

/// Replace the char range `[start, end)` with `with`.
pub fn replace_chars(text: &str, start: usize, end: usize, with: &str) -> String {
    let b0 = byte_offset(text, start);
    let b1 = b0 + byte_offset(&text[b0..], end.saturating_sub(start));
    let mut out = String::with_capacity(text.len() + with.len());
    out.push_str(&text[..b0]);
    out.push_str(with);
    out.push_str(&text[b1..]);
    out
}

/// Char offset of the first occurrence of `needle` in `haystack`.
pub fn find_chars(haystack: &str, needle: &str) -> Option<usize> {
    haystack.find(needle).map(|b| haystack[..b].chars().count())
}

/// Collapse whitespace runs to single spaces, trim, and lowercase.
pub fn normalize_for_match(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out.to_lowercase()
}

/// Parse a UTF-8 list file: one entry per line, blank lines and `//` comment
/// lines ignored, surrounding whitespace trimmed.
pub(crate) fn list_entries(src: &str) -> impl Iterator<Item = &str> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("//"))
}
