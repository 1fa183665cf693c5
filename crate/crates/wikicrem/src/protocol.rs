//! Line-delimited JSON protocol spoken with scorer and detector processes.
//!
//! Every message is one JSON object on one line, tagged by `kind`. The
//! client opens with `hello` naming its role, then sends one request at a
//! time and reads exactly one reply. Offsets in `mentions` are char offsets.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use wikicrem_core::names::{DetectError, NameDetector, NameMention};
use wikicrem_core::scorer::{CandidateScores, ScoreError, ScoreQuery, Scorer, UnigramScorer};
use wikicrem_core::window::Passage;
use wikicrem_core::MASK_TOKEN;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Message {
    Hello {
        protocol: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        role: Option<String>,
    },
    Score {
        query_id: String,
        masked_text: String,
        mask_token: String,
        candidates: Vec<String>,
    },
    Scores {
        query_id: String,
        logprobs: Vec<f64>,
    },
    Detect {
        query_id: String,
        text: String,
    },
    Mentions {
        query_id: String,
        spans: Vec<(usize, usize)>,
    },
    /// Per-token log-probabilities of one candidate, for the averaging check.
    DebugTokenLogprobs {
        query_id: String,
        masked_text: String,
        mask_token: String,
        candidate: String,
    },
    TokenLogprobs {
        query_id: String,
        logprobs: Vec<f64>,
    },
    Error {
        #[serde(default)]
        query_id: Option<String>,
        message: String,
    },
}

impl Message {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages serialise")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("cannot start `{command}`: {message}")]
    Spawn { command: String, message: String },
    #[error("connection to `{command}` failed: {message}")]
    Transport { command: String, message: String },
    #[error("`{command}` broke protocol: {message}")]
    Violation { command: String, message: String },
}

/// One child process and its pipes.
pub struct Connection {
    command: String,
    child: Child,
    stdin: BufWriter<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

impl Connection {
    /// Run `command` through `sh -c` and complete the handshake for `role`.
    pub fn open(command: &str, role: &str) -> Result<Self, ProtocolError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ProtocolError::Spawn { command: command.into(), message: e.to_string() })?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut conn = Self { command: command.into(), child, stdin, stdout };
        let reply = conn
            .request(&Message::Hello { protocol: PROTOCOL_VERSION, role: Some(role.into()) })
            .map_err(|e| match e {
                ProtocolError::Transport { command, message } => ProtocolError::Spawn { command, message },
                other => other,
            })?;
        match reply {
            Message::Hello { protocol: PROTOCOL_VERSION, .. } => Ok(conn),
            Message::Hello { protocol, .. } => Err(conn.violation(format!("speaks protocol {protocol}"))),
            other => Err(conn.violation(format!("answered hello with {}", other.to_line()))),
        }
    }

    fn violation(&self, message: String) -> ProtocolError {
        ProtocolError::Violation { command: self.command.clone(), message }
    }

    fn transport(&self, message: String) -> ProtocolError {
        ProtocolError::Transport { command: self.command.clone(), message }
    }

    /// Send a raw line and read one reply line.
    pub fn exchange_raw(&mut self, line: &str) -> Result<String, ProtocolError> {
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| self.transport(e.to_string()))?;
        let mut reply = String::new();
        let n = self.stdout.read_line(&mut reply).map_err(|e| self.transport(e.to_string()))?;
        if n == 0 {
            return Err(self.transport("process closed its output".into()));
        }
        Ok(reply)
    }

    pub fn request(&mut self, msg: &Message) -> Result<Message, ProtocolError> {
        let reply = self.exchange_raw(&msg.to_line())?;
        serde_json::from_str(reply.trim_end()).map_err(|e| self.violation(format!("unreadable reply {:?}: {e}", reply.trim_end())))
    }

    pub fn command(&self) -> &str {
        &self.command
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Scorer backed by a child process. A transport failure drops the
/// connection; the next call starts a fresh process.
pub struct ExternalScorer {
    command: String,
    conn: Mutex<Option<Connection>>,
}

impl ExternalScorer {
    pub fn spawn(command: &str) -> Result<Self, ProtocolError> {
        let conn = Connection::open(command, "scorer")?;
        Ok(Self { command: command.into(), conn: Mutex::new(Some(conn)) })
    }

    fn with_conn<T>(&self, f: impl FnOnce(&mut Connection) -> Result<T, ProtocolError>) -> Result<T, ProtocolError> {
        let mut guard = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        if guard.is_none() {
            *guard = Some(Connection::open(&self.command, "scorer")?);
        }
        let result = f(guard.as_mut().unwrap());
        if matches!(result, Err(ProtocolError::Transport { .. })) {
            *guard = None;
        }
        result
    }

    /// Per-token log-probabilities of one candidate, when the process supports it.
    pub fn token_logprobs(&self, masked_text: &str, candidate: &str) -> Result<Vec<f64>, ScoreError> {
        let msg = Message::DebugTokenLogprobs {
            query_id: "debug".into(),
            masked_text: masked_text.into(),
            mask_token: MASK_TOKEN.into(),
            candidate: candidate.into(),
        };
        match self.with_conn(|c| c.request(&msg)).map_err(to_score_error)? {
            Message::TokenLogprobs { logprobs, .. } => Ok(logprobs),
            Message::Error { query_id, message } => Err(ScoreError::Rejected { query_id: query_id.unwrap_or_default(), message }),
            other => Err(ScoreError::Protocol(format!("unexpected reply {}", other.to_line()))),
        }
    }
}

fn to_score_error(e: ProtocolError) -> ScoreError {
    match e {
        ProtocolError::Spawn { .. } | ProtocolError::Transport { .. } => ScoreError::Transport(e.to_string()),
        ProtocolError::Violation { .. } => ScoreError::Protocol(e.to_string()),
    }
}

impl Scorer for ExternalScorer {
    fn score(&self, query: &ScoreQuery) -> Result<CandidateScores, ScoreError> {
        let msg = Message::Score {
            query_id: query.query_id.clone(),
            masked_text: query.masked_text.clone(),
            mask_token: MASK_TOKEN.into(),
            candidates: query.candidates.clone(),
        };
        let mut last = None;
        // one retry on a fresh process after a transport failure
        for _ in 0..2 {
            match self.with_conn(|c| c.request(&msg)).map_err(to_score_error) {
                Ok(Message::Scores { query_id, logprobs }) => return Ok(CandidateScores { query_id, logprobs }),
                Ok(Message::Error { query_id, message }) => {
                    return Err(ScoreError::Rejected { query_id: query_id.unwrap_or_else(|| query.query_id.clone()), message })
                }
                Ok(other) => return Err(ScoreError::Protocol(format!("unexpected reply {}", other.to_line()))),
                Err(e) if e.is_retryable() => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("loop ran"))
    }

    fn describe(&self) -> String {
        format!("external:{}", self.command)
    }
}

/// Name detector backed by a child process.
pub struct ExternalDetector {
    command: String,
    conn: Mutex<Connection>,
}

impl ExternalDetector {
    pub fn spawn(command: &str) -> Result<Self, ProtocolError> {
        Ok(Self { command: command.into(), conn: Mutex::new(Connection::open(command, "detector")?) })
    }

    pub fn command(&self) -> &str {
        &self.command
    }
}

impl NameDetector for ExternalDetector {
    fn detect(&self, passage: &Passage) -> Result<Vec<NameMention>, DetectError> {
        let msg = Message::Detect { query_id: format!("{}#{}", passage.doc_id, passage.position), text: passage.text.clone() };
        let mut conn = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        match conn.request(&msg) {
            Ok(Message::Mentions { spans, .. }) => {
                let len = passage.text.chars().count();
                spans
                    .into_iter()
                    .map(|(s, e)| {
                        if s < e && e <= len {
                            Ok(NameMention::from_span(passage, s, e))
                        } else {
                            Err(DetectError::InvalidOutput(format!("span ({s}, {e}) outside passage of {len} chars")))
                        }
                    })
                    .collect()
            }
            Ok(Message::Error { message, .. }) => Err(DetectError::Detector(message)),
            Ok(other) => Err(DetectError::InvalidOutput(format!("unexpected reply {}", other.to_line()))),
            Err(e) => Err(DetectError::Detector(e.to_string())),
        }
    }
}

/// Server side of the protocol. Unsupported requests get an error reply.
pub trait Handler {
    fn score(&self, _query: &ScoreQuery) -> Option<Result<CandidateScores, ScoreError>> {
        None
    }

    fn token_logprobs(&self, _masked_text: &str, _candidate: &str) -> Option<Vec<f64>> {
        None
    }

    fn detect(&self, _passage: &Passage) -> Option<Result<Vec<NameMention>, DetectError>> {
        None
    }
}

/// Serves the reference unigram scorer.
pub struct ReferenceHandler(pub UnigramScorer);

impl Handler for ReferenceHandler {
    fn score(&self, query: &ScoreQuery) -> Option<Result<CandidateScores, ScoreError>> {
        Some(self.0.score(query))
    }

    fn token_logprobs(&self, _masked_text: &str, candidate: &str) -> Option<Vec<f64>> {
        Some(candidate.split_whitespace().map(|t| self.0.token_logprob(t)).collect())
    }
}

/// Serves any in-process name detector.
pub struct DetectorHandler<D>(pub D);

impl<D: NameDetector> Handler for DetectorHandler<D> {
    fn detect(&self, passage: &Passage) -> Option<Result<Vec<NameMention>, DetectError>> {
        Some(self.0.detect(passage))
    }
}

/// Answer requests on `input` until it closes, one reply line per request.
pub fn serve<R: BufRead, W: Write, H: Handler + ?Sized>(input: R, mut output: W, handler: &H) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<Message>(&line) {
            Err(e) => Message::Error { query_id: None, message: format!("unreadable request: {e}") },
            Ok(msg) => answer(msg, handler),
        };
        writeln!(output, "{}", reply.to_line())?;
        output.flush()?;
    }
    Ok(())
}

fn answer<H: Handler + ?Sized>(msg: Message, handler: &H) -> Message {
    let error = |query_id: String, message: String| Message::Error { query_id: Some(query_id), message };
    match msg {
        Message::Hello { .. } => Message::Hello { protocol: PROTOCOL_VERSION, role: None },
        Message::Score { query_id, masked_text, mask_token, candidates } => {
            let masked_text = masked_text.replace(&mask_token, MASK_TOKEN);
            let query = match ScoreQuery::new(query_id.clone(), masked_text, candidates) {
                Ok(q) => q,
                Err(e) => return error(query_id, e.to_string()),
            };
            match handler.score(&query) {
                None => error(query_id, "scoring not supported".into()),
                Some(Ok(s)) => Message::Scores { query_id, logprobs: s.logprobs },
                Some(Err(e)) => error(query_id, e.to_string()),
            }
        }
        Message::DebugTokenLogprobs { query_id, masked_text, mask_token, candidate } => {
            match handler.token_logprobs(&masked_text.replace(&mask_token, MASK_TOKEN), &candidate) {
                Some(logprobs) => Message::TokenLogprobs { query_id, logprobs },
                None => error(query_id, "token breakdown not supported".into()),
            }
        }
        Message::Detect { query_id, text } => match handler.detect(&Passage::single(query_id.clone(), text)) {
            None => error(query_id, "detection not supported".into()),
            Some(Ok(m)) => Message::Mentions { query_id, spans: m.into_iter().map(|m| (m.start, m.end)).collect() },
            Some(Err(e)) => error(query_id, e.to_string()),
        },
        other => Message::Error { query_id: None, message: format!("not a request: {}", other.to_line()) },
    }
}

/// One scorer process per worker thread. Rayon worker `i` uses process
/// `i % n`; each process serves one request at a time.
pub struct ScorerPool {
    workers: Vec<ExternalScorer>,
}

impl ScorerPool {
    pub fn spawn(command: &str, n: usize) -> Result<Self, ProtocolError> {
        let workers = (0..n.max(1)).map(|_| ExternalScorer::spawn(command)).collect::<Result<_, _>>()?;
        Ok(Self { workers })
    }

    pub fn len(&self) -> usize {
        self.workers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.workers.is_empty()
    }
}

impl Scorer for ScorerPool {
    fn score(&self, query: &ScoreQuery) -> Result<CandidateScores, ScoreError> {
        let i = rayon::current_thread_index().unwrap_or(0) % self.workers.len();
        self.workers[i].score(query)
    }

    fn describe(&self) -> String {
        format!("{} x{}", self.workers[0].describe(), self.workers.len())
    }
}

/// Detector processes shared the same way as [`ScorerPool`].
pub struct DetectorPool {
    workers: Vec<ExternalDetector>,
}

impl DetectorPool {
    pub fn spawn(command: &str, n: usize) -> Result<Self, ProtocolError> {
        let workers = (0..n.max(1)).map(|_| ExternalDetector::spawn(command)).collect::<Result<_, _>>()?;
        Ok(Self { workers })
    }
}

impl NameDetector for DetectorPool {
    fn detect(&self, passage: &Passage) -> Result<Vec<NameMention>, DetectError> {
        let i = rayon::current_thread_index().unwrap_or(0) % self.workers.len();
        self.workers[i].detect(passage)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use wikicrem_core::names::GazetteerDetector;

    fn reference() -> ReferenceHandler {
        let counts: BTreeMap<String, u64> = [("Gina", 3u64), ("Denise", 1), ("Mary", 4), ("Ann", 2)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        ReferenceHandler(UnigramScorer::new(counts, 0.5).unwrap())
    }

    fn run<H: Handler>(h: &H, lines: &[&str]) -> Vec<Message> {
        let input = lines.join("\n");
        let mut out = Vec::new();
        serve(input.as_bytes(), &mut out, h).unwrap();
        String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
    }

    #[test]
    fn wire_shapes() {
        assert_eq!(
            Message::Hello { protocol: 1, role: Some("scorer".into()) }.to_line(),
            r#"{"kind":"hello","protocol":1,"role":"scorer"}"#
        );
        assert_eq!(
            Message::Scores { query_id: "q".into(), logprobs: vec![-1.5] }.to_line(),
            r#"{"kind":"scores","query_id":"q","logprobs":[-1.5]}"#
        );
        let m: Message = serde_json::from_str(r#"{"kind":"error","query_id":"q","message":"x"}"#).unwrap();
        assert_eq!(m, Message::Error { query_id: Some("q".into()), message: "x".into() });
    }

    #[test]
    fn serve_answers_in_order_and_survives_garbage() {
        let replies = run(
            &reference(),
            &[
                r#"{"kind":"hello","protocol":1,"role":"scorer"}"#,
                "not json",
                r#"{"kind":"score","query_id":"a","masked_text":"<M> was","mask_token":"<M>","candidates":["Gina","Denise"]}"#,
                r#"{"kind":"score","query_id":"b","masked_text":"none","mask_token":"[MASK]","candidates":["Gina"]}"#,
                r#"{"kind":"debug_token_logprobs","query_id":"c","masked_text":"[MASK]","mask_token":"[MASK]","candidate":"Mary Ann"}"#,
                r#"{"kind":"detect","query_id":"d","text":"x"}"#,
            ],
        );
        assert_eq!(replies[0], Message::Hello { protocol: 1, role: None });
        assert!(matches!(replies[1], Message::Error { query_id: None, .. }));
        match &replies[2] {
            Message::Scores { query_id, logprobs } => {
                assert_eq!(query_id, "a");
                assert!(logprobs[0] > logprobs[1]);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(&replies[3], Message::Error { query_id: Some(q), .. } if q == "b"));
        assert!(matches!(&replies[4], Message::TokenLogprobs { logprobs, .. } if logprobs.len() == 2));
        assert!(matches!(&replies[5], Message::Error { .. }));
    }

    #[test]
    fn detector_handler_reports_char_spans() {
        let replies = run(
            &DetectorHandler(GazetteerDetector::default()),
            &[r#"{"kind":"detect","query_id":"d","text":"Zoë said Adams left."}"#],
        );
        match &replies[0] {
            Message::Mentions { spans, .. } => assert_eq!(spans.last(), Some(&(9, 14))),
            other => panic!("{other:?}"),
        }
    }
}
