//! Document streams over plain-text files and Wikipedia XML exports.
//!
//! A directory yields one document per regular file, in lexicographic path
//! order. A plain-text file yields one document per blank-line separated
//! block. Files named `*.xml`, `*.xml.gz` or `*.xml.bz2` are read as XML
//! exports: one document per main-namespace, non-redirect page, titled by
//! the page title, with markup stripped. Pages are streamed one at a time.

use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use quick_xml::events::Event;
use quick_xml::Reader;
use wikicrem_core::wikitext::strip_wikitext;
use wikicrem_core::window::{Document, SourceKind};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorpusCounters {
    pub documents: u64,
    /// Redirects, other namespaces and pages or files with no prose.
    pub skipped: u64,
    /// Pages that could not be read; each is also logged.
    pub malformed: u64,
}

fn is_dump(path: &Path) -> bool {
    let name = path.file_name().map(|n| n.to_string_lossy().to_lowercase()).unwrap_or_default();
    name.ends_with(".xml") || name.ends_with(".xml.gz") || name.ends_with(".xml.bz2")
}

fn decompressed(path: &Path) -> Result<Box<dyn BufRead + Send>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.to_string_lossy().to_lowercase();
    let raw: Box<dyn Read + Send> = if name.ends_with(".gz") {
        Box::new(flate2::read::MultiGzDecoder::new(file))
    } else if name.ends_with(".bz2") {
        Box::new(bzip2::read::MultiBzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::new(raw)))
}

/// Regular files under `dir`, recursively, sorted by path.
fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| Error::io(&d, e))? {
            let p = entry.map_err(|e| Error::io(&d, e))?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.is_file() {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

enum Source {
    /// Whole file as one document.
    WholeFile { path: PathBuf, doc_id: String },
    Blocks(BlockReader),
    Dump(DumpReader),
}

/// Sequential stream of documents over several inputs.
pub struct DocumentStream {
    pending: VecDeque<Source>,
    pub counters: CorpusCounters,
}

impl DocumentStream {
    pub fn open<P: AsRef<Path>>(inputs: &[P]) -> Result<Self> {
        let mut pending = VecDeque::new();
        for input in inputs {
            let input = input.as_ref();
            let meta = std::fs::metadata(input).map_err(|e| Error::io(input, e))?;
            if meta.is_dir() {
                for f in list_files(input)? {
                    let rel = f.strip_prefix(input).unwrap_or(&f);
                    let doc_id = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
                    if is_dump(&f) {
                        pending.push_back(Source::Dump(DumpReader::new(&f)?));
                    } else {
                        pending.push_back(Source::WholeFile { path: f, doc_id });
                    }
                }
            } else if is_dump(input) {
                pending.push_back(Source::Dump(DumpReader::new(input)?));
            } else {
                pending.push_back(Source::Blocks(BlockReader::new(input)?));
            }
        }
        Ok(Self { pending, counters: CorpusCounters::default() })
    }
}

impl Iterator for DocumentStream {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let source = self.pending.front_mut()?;
            let next = match source {
                Source::WholeFile { path, doc_id } => {
                    let r = std::fs::read_to_string(&*path)
                        .map_err(|e| Error::io(path, e))
                        .map(|t| Some(Document::new(doc_id.clone(), t, SourceKind::PlainText)));
                    self.pending.pop_front();
                    r
                }
                Source::Blocks(b) => match b.next_block() {
                    Ok(Some(d)) => Ok(Some(d)),
                    Ok(None) => {
                        self.pending.pop_front();
                        continue;
                    }
                    Err(e) => Err(e),
                },
                Source::Dump(d) => match d.next_page(&mut self.counters) {
                    Some(doc) => Ok(Some(doc)),
                    None => {
                        self.pending.pop_front();
                        continue;
                    }
                },
            };
            match next {
                Ok(Some(doc)) if doc.text.trim().is_empty() => self.counters.skipped += 1,
                Ok(Some(doc)) => {
                    self.counters.documents += 1;
                    return Some(Ok(doc));
                }
                Ok(None) => {}
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

/// Blank-line separated documents of one plain-text file, ids `name:1`, `name:2`, ...
struct BlockReader {
    path: PathBuf,
    name: String,
    lines: std::io::Lines<BufReader<File>>,
    count: usize,
}

impl BlockReader {
    fn new(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            name: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            lines: BufReader::new(f).lines(),
            count: 0,
        })
    }

    fn next_block(&mut self) -> Result<Option<Document>> {
        let mut text = String::new();
        for line in self.lines.by_ref() {
            let line = line.map_err(|e| Error::io(&self.path, e))?;
            if line.trim().is_empty() {
                if text.is_empty() {
                    continue;
                }
                break;
            }
            if !text.is_empty() {
                text.push('\n');
            }
            text.push_str(&line);
        }
        if text.is_empty() {
            return Ok(None);
        }
        self.count += 1;
        Ok(Some(Document::new(format!("{}:{}", self.name, self.count), text, SourceKind::PlainText)))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Title,
    Ns,
    Text,
}

#[derive(Default)]
struct Page {
    title: Option<String>,
    ns: Option<String>,
    text: Option<String>,
    redirect: bool,
}

struct DumpReader {
    path: PathBuf,
    reader: Reader<Box<dyn BufRead + Send>>,
    buf: Vec<u8>,
    done: bool,
}

impl DumpReader {
    fn new(path: &Path) -> Result<Self> {
        let mut reader = Reader::from_reader(decompressed(path)?);
        reader.config_mut().trim_text(false);
        Ok(Self { path: path.to_path_buf(), reader, buf: Vec::new(), done: false })
    }

    fn malformed(&self, counters: &mut CorpusCounters, why: &str) {
        counters.malformed += 1;
        log::warn!("{}: skipping malformed page: {why}", self.path.display());
    }

    /// Next usable page, counting skipped and malformed ones on the way.
    fn next_page(&mut self, counters: &mut CorpusCounters) -> Option<Document> {
        let mut page: Option<Page> = None;
        let mut field: Option<Field> = None;
        while !self.done {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(e) => e,
                Err(e) => {
                    // the reader cannot resynchronise after a syntax error
                    self.malformed(counters, &format!("XML error at byte {}: {e}", self.reader.buffer_position()));
                    self.done = true;
                    return None;
                }
            };
            match event {
                Event::Start(e) => match e.local_name().as_ref() {
                    b"page" => page = Some(Page::default()),
                    b"title" if page.is_some() => field = Some(Field::Title),
                    b"ns" if page.is_some() => field = Some(Field::Ns),
                    b"text" if page.is_some() => field = Some(Field::Text),
                    b"redirect" => {
                        if let Some(p) = page.as_mut() {
                            p.redirect = true;
                        }
                    }
                    _ => {}
                },
                Event::Empty(e) => match e.local_name().as_ref() {
                    b"redirect" => {
                        if let Some(p) = page.as_mut() {
                            p.redirect = true;
                        }
                    }
                    b"text" => {
                        if let Some(p) = page.as_mut() {
                            p.text.get_or_insert_with(String::new);
                        }
                    }
                    _ => {}
                },
                Event::Text(t) => {
                    if let (Some(f), Some(p)) = (field, page.as_mut()) {
                        match t.unescape() {
                            Ok(s) => append(p, f, &s),
                            Err(e) => {
                                self.malformed(counters, &format!("bad escape: {e}"));
                                page = None;
                                field = None;
                            }
                        }
                    }
                }
                Event::CData(t) => {
                    if let (Some(f), Some(p)) = (field, page.as_mut()) {
                        append(p, f, &String::from_utf8_lossy(&t));
                    }
                }
                Event::End(e) => match e.local_name().as_ref() {
                    b"title" | b"ns" | b"text" => field = None,
                    b"page" => {
                        let Some(p) = page.take() else { continue };
                        match p {
                            Page { title: Some(title), text: Some(text), ns, redirect } => {
                                let main = ns.as_deref().map_or(true, |n| n.trim() == "0");
                                if redirect || !main {
                                    counters.skipped += 1;
                                    continue;
                                }
                                let prose = strip_wikitext(&text);
                                if prose.trim().is_empty() {
                                    counters.skipped += 1;
                                    continue;
                                }
                                return Some(Document::new(title.trim(), prose, SourceKind::WikiDump));
                            }
                            _ => self.malformed(counters, "page without title or text"),
                        }
                    }
                    _ => {}
                },
                Event::Eof => {
                    if page.is_some() {
                        self.malformed(counters, "truncated page at end of file");
                    }
                    self.done = true;
                }
                _ => {}
            }
        }
        None
    }
}

fn append(p: &mut Page, f: Field, s: &str) {
    let slot = match f {
        Field::Title => &mut p.title,
        Field::Ns => &mut p.ns,
        Field::Text => &mut p.text,
    };
    slot.get_or_insert_with(String::new).push_str(s);
}
