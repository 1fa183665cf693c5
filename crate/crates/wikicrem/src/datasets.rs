//! Adapters from the public release formats to evaluation items.
//!
//! | kind | format |
//! |---|---|
//! | wikicrem | dataset records (JSON lines) |
//! | gap | TSV with a header: ID, Text, Pronoun, Pronoun-offset, A, A-offset, A-coref, B, B-offset, B-coref, URL |
//! | dpr | blocks of four lines (sentence, pronoun, comma-separated candidates, answer) separated by blank lines |
//! | wsc273, pdp | XML `<schema>` records with `txt1`, `pron`, `txt2`, `answer`s and `correctAnswer` |
//! | wnli | TSV with a header: index, sentence1, sentence2 and, except for test, label |
//! | winogender | TSV `sentid<TAB>sentence`, sentid = `occupation.participant.answer.gender.txt` |
//! | winobias | one sentence per line, `N [referent] ... [pronoun] ...` |
//!
//! Offsets are in chars. The split tag comes from the file name.

use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;
use wikicrem_core::eval::{
    mask_span, wnli_item, DatasetKind, EvalItem, Gold, HeuristicNounDetector, NounDetector, PronounGender, Split,
    Stereotype, Tags, PRONOUNS,
};
use wikicrem_core::text::{char_len, slice_chars};

use crate::error::{Error, Result};
use crate::records::{read_dataset, read_text};

const OCCUPATIONS: &str = include_str!("../data/occupations.txt");

/// Number of problems in the standard WSC collection subset.
pub const WSC273_SIZE: usize = 273;

pub fn load_dataset(kind: DatasetKind, path: &Path) -> Result<Vec<EvalItem>> {
    let items = match kind {
        DatasetKind::WikiCrem => load_wikicrem(path)?,
        DatasetKind::Gap => load_gap(path)?,
        DatasetKind::Dpr => load_dpr(path)?,
        DatasetKind::Wsc273 => {
            let mut items = load_schemas(path, kind)?;
            if items.len() > WSC273_SIZE {
                log::info!("{}: keeping the first {WSC273_SIZE} of {} problems", path.display(), items.len());
                items.truncate(WSC273_SIZE);
            }
            items
        }
        DatasetKind::Pdp => load_schemas(path, kind)?,
        DatasetKind::Wnli => load_wnli(path, &HeuristicNounDetector::default())?,
        DatasetKind::WinoGender => load_winogender(path)?,
        DatasetKind::WinoBias => load_winobias(path)?,
    };
    for item in &items {
        item.validate().map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(items)
}

pub fn split_of(path: &Path) -> Option<Split> {
    let name = path.file_name()?.to_string_lossy().to_lowercase();
    if name.contains("test") {
        Some(Split::Test)
    } else if name.contains("development") || name.contains("train") {
        Some(Split::Train)
    } else if name.contains("valid") || name.contains("dev") {
        Some(Split::Validation)
    } else {
        None
    }
}

fn pronoun_gender(p: &str) -> Option<PronounGender> {
    PronounGender::of_pronoun(p)
}

/// Char spans of whole-word, case-insensitive occurrences of `word`.
fn word_spans(text: &str, word: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let target: Vec<char> = word.to_lowercase().chars().collect();
    let n = target.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let is_word = |c: char| c.is_alphanumeric();
    for i in 0..chars.len().saturating_sub(n - 1) {
        let matches = chars[i..i + n].iter().zip(&target).all(|(a, b)| a.to_lowercase().eq(std::iter::once(*b)));
        let left = i == 0 || !is_word(chars[i - 1]);
        let right = i + n == chars.len() || !is_word(chars[i + n]);
        if matches && left && right {
            out.push((i, i + n));
        }
    }
    out
}

fn load_wikicrem(path: &Path) -> Result<Vec<EvalItem>> {
    let split = split_of(path);
    Ok(read_dataset(path)?
        .into_iter()
        .map(|r| {
            let text = r.masked_text.replacen(wikicrem_core::MASK_TOKEN, &r.correct, 1);
            // alphabetical order so the gold position carries no signal
            let (candidates, gold) = if r.correct <= r.incorrect {
                (vec![r.correct.clone(), r.incorrect.clone()], 0)
            } else {
                (vec![r.incorrect.clone(), r.correct.clone()], 1)
            };
            EvalItem {
                item_id: r.example_id,
                kind: DatasetKind::WikiCrem,
                text,
                masked_text: r.masked_text,
                candidates,
                gold: Gold::Index(gold),
                tags: Tags { split, ..Tags::default() },
                conversion_failed: false,
            }
        })
        .collect())
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

/// Header-indexed TSV rows with their line numbers.
struct Tsv {
    header: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

impl Tsv {
    fn read(path: &Path) -> Result<Self> {
        let src = read_text(path)?;
        let mut lines = src.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing header"))?
            .1
            .split('\t')
            .map(|h| h.trim().to_string())
            .collect();
        let rows = lines.map(|(i, l)| (i + 1, l.trim_end_matches('\r').split('\t').map(str::to_string).collect())).collect();
        Ok(Self { header, rows })
    }

    fn column(&self, path: &Path, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::parse(path, 1, format!("missing column {name:?}")))
    }
}

fn field<'a>(path: &Path, line: usize, row: &'a [String], col: usize) -> Result<&'a str> {
    row.get(col)
        .map(String::as_str)
        .ok_or_else(|| Error::parse(path, line, format!("expected at least {} fields, found {}", col + 1, row.len())))
}

fn load_gap(path: &Path) -> Result<Vec<EvalItem>> {
    let tsv = Tsv::read(path)?;
    let c = |n: &str| tsv.column(path, n);
    let (id, text, pron, pron_off, a, a_coref, b, b_coref) =
        (c("ID")?, c("Text")?, c("Pronoun")?, c("Pronoun-offset")?, c("A")?, c("A-coref")?, c("B")?, c("B-coref")?);
    let split = split_of(path);
    let mut out = Vec::new();
    for (line, row) in &tsv.rows {
        let f = |col| field(path, *line, row, col);
        let t = f(text)?;
        let p = f(pron)?;
        let off: usize = f(pron_off)?.trim().parse().map_err(|_| Error::parse(path, *line, "bad Pronoun-offset"))?;
        let plen = char_len(p);
        if off + plen > char_len(t) || slice_chars(t, off, off + plen) != p {
            return Err(Error::parse(path, *line, format!("pronoun {p:?} not found at offset {off}")));
        }
        let label = |col| parse_bool(f(col)?).ok_or_else(|| Error::parse(path, *line, "coref label must be TRUE or FALSE"));
        let (a_name, b_name) = (f(a)?.trim().to_string(), f(b)?.trim().to_string());
        out.push(EvalItem {
            item_id: f(id)?.to_string(),
            kind: DatasetKind::Gap,
            text: t.to_string(),
            masked_text: mask_span(t, off, plen),
            candidates: vec![a_name.clone(), b_name.clone()],
            gold: Gold::Gap { a: a_name, b: b_name, a_coref: label(a_coref)?, b_coref: label(b_coref)? },
            tags: Tags { gender: pronoun_gender(p), split, ..Tags::default() },
            conversion_failed: false,
        });
    }
    Ok(out)
}

/// Which occurrence of the pronoun to mask when the format gives no offset:
/// the first one after every candidate has appeared, else the last one.
fn pick_pronoun(text: &str, pronoun: &str, candidates: &[String]) -> Option<(usize, usize)> {
    let spans = word_spans(text, pronoun);
    let after = candidates
        .iter()
        .filter_map(|c| word_spans(text, c).first().map(|s| s.1))
        .max()
        .unwrap_or(0);
    spans.iter().find(|s| s.0 >= after).or(spans.last()).copied()
}

fn load_dpr(path: &Path) -> Result<Vec<EvalItem>> {
    let src = read_text(path)?;
    let split = split_of(path);
    let mut out = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    let lines: Vec<(usize, &str)> = src.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))).collect();
    for chunk in lines.split(|(_, l)| l.trim().is_empty()) {
        block.clear();
        block.extend(chunk.iter().copied());
        if block.is_empty() {
            continue;
        }
        let first = block[0].0;
        if block.len() < 4 {
            return Err(Error::parse(path, first, format!("record {}: expected 4 lines, found {}", out.len() + 1, block.len())));
        }
        let sentence = block[0].1.trim();
        let pronoun = block[1].1.trim();
        let candidates: Vec<String> = block[2].1.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect();
        let answer = block[3].1.trim();
        let gold = candidates
            .iter()
            .position(|c| c.eq_ignore_ascii_case(answer))
            .ok_or_else(|| Error::parse(path, block[3].0, format!("answer {answer:?} is not a candidate")))?;
        let (s, e) = pick_pronoun(sentence, pronoun, &candidates)
            .ok_or_else(|| Error::parse(path, block[1].0, format!("pronoun {pronoun:?} not in sentence")))?;
        out.push(EvalItem {
            item_id: format!("dpr-{}", out.len() + 1),
            kind: DatasetKind::Dpr,
            text: sentence.to_string(),
            masked_text: mask_span(sentence, s, e - s),
            candidates,
            gold: Gold::Index(gold),
            tags: Tags { gender: pronoun_gender(pronoun), split, ..Tags::default() },
            conversion_failed: false,
        });
    }
    Ok(out)
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Join sentence pieces with single spaces, without a space before punctuation.
fn join_pieces(pieces: &[&str]) -> String {
    let mut out = String::new();
    for p in pieces.iter().map(|p| collapse(p)).filter(|p| !p.is_empty()) {
        let glue = p.starts_with(|c: char| ".,;:!?'’)".contains(c));
        if !out.is_empty() && !glue {
            out.push(' ');
        }
        out.push_str(&p);
    }
    out
}

#[derive(Default)]
struct Schema {
    txt1: String,
    pron: String,
    txt2: String,
    answers: Vec<String>,
    correct: String,
}

fn load_schemas(path: &Path, kind: DatasetKind) -> Result<Vec<EvalItem>> {
    let src = read_text(path)?;
    let mut reader = Reader::from_str(&src);
    reader.config_mut().trim_text(false);
    let line_at = |pos: usize| src[..pos.min(src.len())].matches('\n').count() + 1;
    let mut out = Vec::new();
    let mut current: Option<(Schema, usize)> = None;
    let mut field: Option<Vec<u8>> = None;
    let mut in_text = false;
    loop {
        let pos = reader.buffer_position() as usize;
        let ev = reader.read_event().map_err(|e| Error::parse(path, line_at(pos), e.to_string()))?;
        match ev {
            Event::Start(e) => {
                let name = e.local_name().as_ref().to_vec();
                match name.as_slice() {
                    b"schema" => current = Some((Schema::default(), line_at(pos))),
                    b"text" => in_text = true,
                    b"answer" => {
                        if let Some((s, _)) = current.as_mut() {
                            s.answers.push(String::new());
                        }
                        field = Some(name);
                    }
                    b"txt1" | b"pron" | b"txt2" | b"correctAnswer" => field = Some(name),
                    _ => {}
                }
            }
            Event::Text(t) => {
                if let (Some(f), Some((s, _))) = (&field, current.as_mut()) {
                    let t = t.unescape().map_err(|e| Error::parse(path, line_at(pos), e.to_string()))?;
                    match f.as_slice() {
                        b"txt1" if in_text => s.txt1.push_str(&t),
                        b"pron" if in_text => s.pron.push_str(&t),
                        b"txt2" if in_text => s.txt2.push_str(&t),
                        b"answer" => s.answers.last_mut().expect("pushed on start").push_str(&t),
                        b"correctAnswer" => s.correct.push_str(&t),
                        _ => {}
                    }
                }
            }
            Event::End(e) => match e.local_name().as_ref() {
                b"text" => in_text = false,
                b"schema" => {
                    let Some((s, line)) = current.take() else { continue };
                    out.push(schema_item(path, kind, s, line, out.len() + 1)?);
                }
                _ => field = None,
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

fn schema_item(path: &Path, kind: DatasetKind, s: Schema, line: usize, record: usize) -> Result<EvalItem> {
    let err = |m: String| Error::parse(path, line, format!("record {record}: {m}"));
    let pron = collapse(&s.pron);
    if pron.is_empty() {
        return Err(err("empty pronoun".into()));
    }
    let candidates: Vec<String> = s.answers.iter().map(|a| collapse(a)).collect();
    let letter = s.correct.trim().chars().next().ok_or_else(|| err("missing correctAnswer".into()))?;
    let gold = (letter.to_ascii_uppercase() as usize).wrapping_sub('A' as usize);
    if !letter.is_ascii_alphabetic() || gold >= candidates.len() {
        return Err(err(format!("correct answer {:?} does not name one of {} answers", s.correct.trim(), candidates.len())));
    }
    Ok(EvalItem {
        item_id: format!("{kind}-{record}"),
        kind,
        text: join_pieces(&[&s.txt1, &pron, &s.txt2]),
        masked_text: join_pieces(&[&s.txt1, wikicrem_core::MASK_TOKEN, &s.txt2]),
        candidates,
        gold: Gold::Index(gold),
        tags: Tags { gender: pronoun_gender(&pron), split: split_of(path), ..Tags::default() },
        conversion_failed: false,
    })
}

pub fn load_wnli<N: NounDetector + ?Sized>(path: &Path, nouns: &N) -> Result<Vec<EvalItem>> {
    let tsv = Tsv::read(path)?;
    let (idx, s1, s2) = (tsv.column(path, "index")?, tsv.column(path, "sentence1")?, tsv.column(path, "sentence2")?);
    let label = tsv.column(path, "label").ok();
    let split = split_of(path);
    let mut out = Vec::new();
    for (line, row) in &tsv.rows {
        let f = |col| field(path, *line, row, col);
        let gold = match label {
            None => None,
            Some(col) => Some(parse_bool(f(col)?).ok_or_else(|| Error::parse(path, *line, "label must be 0 or 1"))?),
        };
        let mut item = wnli_item(format!("wnli-{}", f(idx)?.trim()), f(s1)?, f(s2)?, gold, nouns);
        item.tags.split = split;
        if item.conversion_failed {
            log::warn!("{}:{line}: no alignment, answering with the majority class", path.display());
        }
        out.push(item);
    }
    Ok(out)
}

/// Char span of `the <noun>` (or just `<noun>`), case-insensitive.
fn find_phrase(text: &str, noun: &str) -> Option<(usize, usize)> {
    for det in ["the ", "a ", "an ", ""] {
        if let Some(s) = word_spans(text, &format!("{det}{noun}")).first() {
            return Some(*s);
        }
    }
    None
}

fn load_winogender(path: &Path) -> Result<Vec<EvalItem>> {
    let tsv = Tsv::read(path)?;
    let (id_col, text_col) = (tsv.column(path, "sentid")?, tsv.column(path, "sentence")?);
    let mut out = Vec::new();
    for (line, row) in &tsv.rows {
        let err = |m: String| Error::parse(path, *line, m);
        let sentid = field(path, *line, row, id_col)?.trim();
        let text = field(path, *line, row, text_col)?.trim();
        let parts: Vec<&str> = sentid.split('.').collect();
        if parts.len() < 4 {
            return Err(err(format!("sentid {sentid:?} is not occupation.participant.answer.gender")));
        }
        let (occupation, participant) = (parts[0].replace('_', " "), parts[1].replace('_', " "));
        let answer: usize = parts[2].parse().ok().filter(|&a| a <= 1).ok_or_else(|| err(format!("answer {:?}", parts[2])))?;
        let gender = match parts[3] {
            "male" => PronounGender::Masculine,
            "female" => PronounGender::Feminine,
            "neutral" => PronounGender::Neutral,
            g => return Err(err(format!("gender {g:?}"))),
        };
        let surface = |noun: &str| find_phrase(text, noun).map(|(s, e)| slice_chars(text, s, e).to_string()).unwrap_or_else(|| noun.to_string());
        let (ps, pe) = PRONOUNS
            .iter()
            .filter_map(|p| word_spans(text, p).first().copied())
            .min()
            .ok_or_else(|| err("no pronoun in sentence".into()))?;
        out.push(EvalItem {
            item_id: sentid.to_string(),
            kind: DatasetKind::WinoGender,
            text: text.to_string(),
            masked_text: mask_span(text, ps, pe - ps),
            candidates: vec![surface(&occupation), surface(&participant)],
            gold: Gold::Index(answer),
            tags: Tags { gender: Some(gender), split: split_of(path), ..Tags::default() },
            conversion_failed: false,
        });
    }
    Ok(out)
}

fn winobias_tags(path: &Path) -> Tags {
    let name = path.file_name().map(|n| n.to_string_lossy().to_lowercase()).unwrap_or_default();
    Tags {
        winobias_type: if name.contains("type1") {
            Some(1)
        } else if name.contains("type2") {
            Some(2)
        } else {
            None
        },
        stereotype: if name.contains("anti") {
            Some(Stereotype::Anti)
        } else if name.contains("pro") {
            Some(Stereotype::Pro)
        } else {
            None
        },
        split: split_of(path),
        gender: None,
    }
}

fn load_winobias(path: &Path) -> Result<Vec<EvalItem>> {
    let src = read_text(path)?;
    let base_tags = winobias_tags(path);
    let occupations: Vec<&str> = OCCUPATIONS.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with("//")).collect();
    let nouns = HeuristicNounDetector::default();
    let mut out = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let err = |m: &str| Error::parse(path, line, m.to_string());
        let body = raw.trim_start_matches(|c: char| c.is_ascii_digit()).trim_start();
        // strip brackets, remembering the bracketed spans in the clean text
        let mut text = String::new();
        let mut spans = Vec::new();
        let mut open = None;
        for c in body.chars() {
            match c {
                '[' if open.is_none() => open = Some(char_len(&text)),
                ']' if open.is_some() => spans.push((open.take().unwrap(), char_len(&text))),
                _ => text.push(c),
            }
        }
        if spans.len() != 2 || open.is_some() {
            return Err(err("expected exactly two bracketed spans"));
        }
        let is_pron = |&(s, e): &(usize, usize)| PRONOUNS.contains(&slice_chars(&text, s, e).to_lowercase().as_str());
        let pi = spans.iter().position(is_pron).ok_or_else(|| err("no bracketed pronoun"))?;
        let (pron, referent) = (spans[pi], spans[1 - pi]);
        let overlaps = |a: (usize, usize), b: (usize, usize)| a.0 < b.1 && b.0 < a.1;
        let other = occupations
            .iter()
            .filter_map(|o| {
                word_spans(&text, &format!("the {o}"))
                    .into_iter()
                    .chain(word_spans(&text, &format!("a {o}")))
                    .chain(word_spans(&text, &format!("an {o}")))
                    .find(|s| !overlaps(*s, referent) && !overlaps(*s, pron))
            })
            .min()
            .or_else(|| nouns.noun_phrases(&text).into_iter().find(|s| !overlaps(*s, referent) && !overlaps(*s, pron)))
            .ok_or_else(|| err("no second candidate"))?;
        let mut cands = [(referent, true), (other, false)];
        cands.sort();
        let pron_text = slice_chars(&text, pron.0, pron.1).to_string();
        out.push(EvalItem {
            item_id: format!("winobias-{}", out.len() + 1),
            kind: DatasetKind::WinoBias,
            masked_text: mask_span(&text, pron.0, pron.1 - pron.0),
            candidates: cands.iter().map(|((s, e), _)| slice_chars(&text, *s, *e).to_string()).collect(),
            gold: Gold::Index(cands.iter().position(|(_, g)| *g).unwrap()),
            tags: Tags { gender: pronoun_gender(&pron_text), ..base_tags },
            text,
            conversion_failed: false,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(name: &str, body: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        (dir, p)
    }

    #[test]
    fn gap_rows() {
        let (_d, p) = file(
            "gap-test.tsv",
            "ID\tText\tPronoun\tPronoun-offset\tA\tA-offset\tA-coref\tB\tB-offset\tB-coref\tURL\n\
             test-1\tZoë met Cheryl Cassidy before she left.\tshe\t30\tZoë\t0\tFALSE\tCheryl Cassidy\t8\tTRUE\thttp://x\n",
        );
        let items = load_dataset(DatasetKind::Gap, &p).unwrap();
        assert_eq!(items[0].masked_text, "Zoë met Cheryl Cassidy before [MASK] left.");
        assert_eq!(items[0].tags.gender, Some(PronounGender::Feminine));
        assert_eq!(items[0].tags.split, Some(Split::Test));
        assert!(matches!(&items[0].gold, Gold::Gap { a_coref: false, b_coref: true, .. }));

        let (_d, p) = file("gap.tsv", "ID\tText\tPronoun\tPronoun-offset\tA\tA-coref\tB\tB-coref\nx\tHe ran.\the\t3\tA\tTRUE\tB\tFALSE\n");
        assert!(matches!(load_dataset(DatasetKind::Gap, &p), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn dpr_blocks() {
        let (_d, p) = file(
            "test.c.txt",
            "The bee landed on the flower because it had pollen.\nit\nbee,flower\nflower\n\n\
             John hit Bill because he was angry.\nhe\nJohn, Bill\nJohn\n",
        );
        let items = load_dataset(DatasetKind::Dpr, &p).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].masked_text, "The bee landed on the flower because [MASK] had pollen.");
        assert_eq!(items[0].gold, Gold::Index(1));
        assert_eq!(items[1].candidates, ["John", "Bill"]);

        let (_d, p) = file("train.c.txt", "A sentence.\nit\nx,y\nz\n");
        assert!(matches!(load_dataset(DatasetKind::Dpr, &p), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn schema_xml() {
        let (_d, p) = file(
            "WSCollection.xml",
            "<collection>\n<schema>\n<text>\n<txt1>The city councilmen refused the demonstrators a permit because</txt1>\n\
             <pron>they</pron>\n<txt2>feared violence.</txt2>\n</text>\n<quote><quote1>x</quote1></quote>\n\
             <answers>\n<answer>The city councilmen</answer>\n<answer>The demonstrators</answer>\n</answers>\n\
             <correctAnswer>A</correctAnswer>\n<source>(Winograd 1972)</source>\n</schema>\n</collection>\n",
        );
        let items = load_dataset(DatasetKind::Wsc273, &p).unwrap();
        assert_eq!(items[0].masked_text, "The city councilmen refused the demonstrators a permit because [MASK] feared violence.");
        assert_eq!(items[0].candidates, ["The city councilmen", "The demonstrators"]);
        assert_eq!(items[0].gold, Gold::Index(0));
    }

    #[test]
    fn wnli_rows() {
        let (_d, p) = file(
            "dev.tsv",
            "index\tsentence1\tsentence2\tlabel\n\
             0\tThe city councilmen refused the demonstrators a permit because they feared violence.\tThe demonstrators feared violence.\t0\n",
        );
        let items = load_dataset(DatasetKind::Wnli, &p).unwrap();
        assert_eq!(items[0].gold, Gold::Entailment(Some(false)));
        assert_eq!(items[0].candidates[0], "The demonstrators");
        let (_d, p) = file("test.tsv", "index\tsentence1\tsentence2\n0\tCats purr.\tDogs bark!\n");
        let items = load_dataset(DatasetKind::Wnli, &p).unwrap();
        assert!(items[0].conversion_failed);
        assert_eq!(items[0].gold, Gold::Entailment(None));
    }

    #[test]
    fn winogender_rows() {
        let (_d, p) = file(
            "all_sentences.tsv",
            "sentid\tsentence\ntechnician.customer.1.female.txt\tThe technician told the customer that she could pay with cash.\n",
        );
        let items = load_dataset(DatasetKind::WinoGender, &p).unwrap();
        assert_eq!(items[0].candidates, ["The technician", "the customer"]);
        assert_eq!(items[0].gold, Gold::Index(1));
        assert_eq!(items[0].masked_text, "The technician told the customer that [MASK] could pay with cash.");
    }

    #[test]
    fn winobias_lines() {
        let (_d, p) = file(
            "anti_stereotyped_type1.txt.test",
            "1 The developer argued with [the designer] because [she] did not like the design.\n",
        );
        let items = load_dataset(DatasetKind::WinoBias, &p).unwrap();
        let it = &items[0];
        assert_eq!(it.candidates, ["The developer", "the designer"]);
        assert_eq!(it.gold, Gold::Index(1));
        assert_eq!(it.masked_text, "The developer argued with the designer because [MASK] did not like the design.");
        assert_eq!(it.tags.winobias_type, Some(1));
        assert_eq!(it.tags.stereotype, Some(Stereotype::Anti));
        assert_eq!(it.tags.split, Some(Split::Test));
    }
}
