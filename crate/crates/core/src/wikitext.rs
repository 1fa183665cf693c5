//! Wikitext markup to plain prose.
//!
//! Drops templates, tables, references, comments, media and category links,
//! headings and list lines; keeps link anchors and paragraph breaks. This is
//! a best-effort reduction, not a parser; unbalanced markup is cut at the end
//! of the page.

use alloc::string::String;
use alloc::vec::Vec;

const DROPPED_LINKS: [&str; 5] = ["file:", "image:", "category:", "media:", "wikipedia:"];
const DROPPED_ELEMENTS: [&str; 6] = ["ref", "math", "gallery", "timeline", "score", "syntaxhighlight"];

pub fn strip_wikitext(src: &str) -> String {
    let s = remove_comments(src);
    let s = remove_elements(&s);
    let s = remove_nested(&s, "{{", "}}");
    let s = remove_nested(&s, "{|", "|}");
    let s = rewrite_links(&s);
    let s = rewrite_external_links(&s);
    let s = remove_tags(&s);
    let s = s.replace("'''", "").replace("''", "");
    let s = decode_entities(&s);
    tidy_lines(&s)
}

fn remove_comments(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find("<!--") {
        out.push_str(&rest[..i]);
        match rest[i..].find("-->") {
            Some(j) => rest = &rest[i + j + 3..],
            None => return out,
        }
    }
    out.push_str(rest);
    out
}

fn starts_with_ci(hay: &str, needle: &str) -> bool {
    hay.len() >= needle.len() && hay.is_char_boundary(needle.len()) && hay[..needle.len()].eq_ignore_ascii_case(needle)
}

/// Remove `<name ...>...</name>` and `<name .../>` for the dropped elements.
fn remove_elements(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    'scan: while i < s.len() {
        let rest = &s[i..];
        if rest.starts_with('<') {
            for name in DROPPED_ELEMENTS {
                let open = &rest[1..];
                if starts_with_ci(open, name)
                    && open[name.len()..].starts_with(|c: char| c == '>' || c == '/' || c.is_whitespace())
                {
                    let Some(gt) = rest.find('>') else { return out };
                    if rest[..gt].ends_with('/') {
                        i += gt + 1;
                        continue 'scan;
                    }
                    let close = alloc::format!("</{name}");
                    let lower = rest.to_ascii_lowercase();
                    match lower[gt..].find(&close) {
                        Some(c) => {
                            let end = gt + c;
                            let tail = rest[end..].find('>').map_or(rest.len(), |t| end + t + 1);
                            i += tail;
                        }
                        None => return out,
                    }
                    continue 'scan;
                }
            }
        }
        let c = rest.chars().next().unwrap();
        out.push(c);
        i += c.len_utf8();
    }
    out
}

/// Remove balanced `open ... close` regions, nesting allowed.
fn remove_nested(s: &str, open: &str, close: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut depth = 0usize;
    let mut i = 0;
    while i < s.len() {
        let rest = &s[i..];
        if rest.starts_with(open) {
            depth += 1;
            i += open.len();
        } else if depth > 0 && rest.starts_with(close) {
            depth -= 1;
            i += close.len();
        } else {
            let c = rest.chars().next().unwrap();
            if depth == 0 {
                out.push(c);
            }
            i += c.len_utf8();
        }
    }
    out
}

/// Index just past the `]]` matching the `[[` at the start of `s`.
fn link_end(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    let mut i = 0;
    while i < s.len() {
        let rest = &s[i..];
        if rest.starts_with("[[") {
            depth += 1;
            i += 2;
        } else if rest.starts_with("]]") {
            depth -= 1;
            i += 2;
            if depth == 0 {
                return Some(i);
            }
        } else {
            i += rest.chars().next().unwrap().len_utf8();
        }
    }
    None
}

fn rewrite_links(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    while i < s.len() {
        let rest = &s[i..];
        if rest.starts_with("[[") {
            let Some(end) = link_end(rest) else { return out };
            let inner = &rest[2..end - 2];
            let target = inner.trim_start().trim_start_matches(':');
            if !DROPPED_LINKS.iter().any(|p| starts_with_ci(target, p)) {
                let anchor = match inner.find('|') {
                    Some(bar) => &inner[bar + 1..],
                    None => inner,
                };
                out.push_str(&rewrite_links(anchor));
            }
            i += end;
        } else {
            let c = rest.chars().next().unwrap();
            out.push(c);
            i += c.len_utf8();
        }
    }
    out
}

/// `[http://x label]` keeps the label; a bare bracketed URL goes.
fn rewrite_external_links(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('[') {
        out.push_str(&rest[..i]);
        let after = &rest[i + 1..];
        let is_url = ["http://", "https://", "ftp://", "//"].iter().any(|p| after.starts_with(p));
        match (is_url, after.find(']')) {
            (true, Some(j)) => {
                if let Some(sp) = after[..j].find(' ') {
                    out.push_str(after[sp + 1..j].trim());
                }
                rest = &after[j + 1..];
            }
            _ => {
                out.push('[');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Remove remaining HTML-like tags, keeping their content.
fn remove_tags(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('<') {
        out.push_str(&rest[..i]);
        let after = &rest[i + 1..];
        let tagish = after.starts_with(|c: char| c.is_ascii_alphabetic() || c == '/');
        match (tagish, after.find('>')) {
            (true, Some(j)) if !after[..j].contains('\n') => {
                if after[..j].eq_ignore_ascii_case("br") || after[..j].starts_with("br ") || after[..j] == *"br/" {
                    out.push(' ');
                }
                rest = &after[j + 1..];
            }
            _ => {
                out.push('<');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        let after = &rest[i + 1..];
        let decoded = after.find(';').filter(|&j| j <= 8).and_then(|j| {
            let name = &after[..j];
            let c = match name {
                "nbsp" | "ensp" | "emsp" | "thinsp" => Some(' '),
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "ndash" => Some('\u{2013}'),
                "mdash" => Some('\u{2014}'),
                _ => name
                    .strip_prefix("#x")
                    .or_else(|| name.strip_prefix("#X"))
                    .and_then(|h| u32::from_str_radix(h, 16).ok())
                    .or_else(|| name.strip_prefix('#').and_then(|d| d.parse().ok()))
                    .and_then(char::from_u32),
            };
            c.map(|c| (c, j))
        });
        match decoded {
            Some((c, j)) => {
                out.push(c);
                rest = &after[j + 1..];
            }
            None => {
                out.push('&');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn is_markup_line(line: &str) -> bool {
    let t = line.trim_start();
    t.starts_with('=')
        || t.starts_with(['*', '#', ';', ':', '|', '!'])
        || t.starts_with("----")
        || t.starts_with("__")
}

/// Drop markup lines, collapse spaces, keep single blank lines between paragraphs.
fn tidy_lines(s: &str) -> String {
    let mut paragraphs: Vec<String> = Vec::new();
    let mut current = String::new();
    for line in s.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                paragraphs.push(core::mem::take(&mut current));
            }
            continue;
        }
        if is_markup_line(line) {
            continue;
        }
        for w in line.split_whitespace() {
            if !current.is_empty() {
                current.push(' ');
            }
            current.push_str(w);
        }
    }
    if !current.is_empty() {
        paragraphs.push(current);
    }
    paragraphs.join("\n\n")
}
