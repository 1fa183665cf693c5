//! Checks an external scorer process against the protocol contract.

use wikicrem_core::scorer::{mean_logprob, score_candidates, ScoreQuery, Scorer};
use wikicrem_core::MASK_TOKEN;

use crate::protocol::{Connection, ExternalScorer, Message};

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail(String),
    /// The process declined an optional request.
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
}

impl Check {
    fn new(name: &'static str, r: Result<(), String>) -> Self {
        Self { name, outcome: r.map_or_else(Outcome::Fail, |_| Outcome::Pass) }
    }
}

const TOLERANCE: f64 = 1e-9;
const TEXT: &str = "Gina asked Denise to help, as [MASK] was meant to be the parent.";

fn query(id: &str, candidates: &[&str]) -> ScoreQuery {
    ScoreQuery::new(id, TEXT, candidates.iter().map(|c| c.to_string()).collect()).expect("valid query")
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Run every check against fresh processes started from `command`.
pub fn run(command: &str) -> Vec<Check> {
    let scorer = match ExternalScorer::spawn(command) {
        Ok(s) => s,
        Err(e) => return vec![Check::new("handshake", Err(e.to_string()))],
    };
    let mut checks = vec![Check::new("handshake", Ok(()))];

    let forward = score_candidates(&query("c1", &["Gina", "Denise", "Mary Ann"]), &scorer);
    checks.push(Check::new("arity, id echo and finiteness", forward.as_ref().map(|_| ()).map_err(|e| e.to_string())));
    let order = forward.as_ref().map_err(|e| e.to_string()).and_then(|f| {
        let back = score_candidates(&query("c2", &["Mary Ann", "Denise", "Gina"]), &scorer).map_err(|e| e.to_string())?;
        let mut rev = back.logprobs.clone();
        rev.reverse();
        if f.logprobs.iter().zip(&rev).all(|(a, b)| close(*a, *b)) {
            Ok(())
        } else {
            Err(format!("scores {:?} do not follow reordered candidates {:?}", f.logprobs, back.logprobs))
        }
    });
    checks.push(Check::new("candidate order preserved", order));

    checks.push(Check::new("malformed request answered with error", malformed(command)));

    for (name, candidate) in [("single-token identity", "Gina"), ("multi-token mean", "Mary Ann")] {
        let outcome = match scorer.token_logprobs(TEXT, candidate) {
            Err(e) => Outcome::Skipped(e.to_string()),
            Ok(tokens) => match (mean_logprob(&tokens), scorer.score(&query("c3", &[candidate]))) {
                (Some(m), Ok(s)) if close(m, s.logprobs[0]) => Outcome::Pass,
                (m, s) => Outcome::Fail(format!("token mean {m:?} vs score {s:?}")),
            },
        };
        checks.push(Check { name, outcome });
    }
    checks
}

fn malformed(command: &str) -> Result<(), String> {
    let mut conn = Connection::open(command, "scorer").map_err(|e| e.to_string())?;
    let reply = conn.exchange_raw("{\"kind\":").map_err(|e| e.to_string())?;
    match serde_json::from_str::<Message>(reply.trim_end()) {
        Ok(Message::Error { .. }) => {}
        other => return Err(format!("garbage answered with {other:?}")),
    }
    let bad = Message::Score {
        query_id: "two-masks".into(),
        masked_text: format!("{MASK_TOKEN} and {MASK_TOKEN}"),
        mask_token: MASK_TOKEN.into(),
        candidates: vec!["Gina".into()],
    };
    match conn.request(&bad).map_err(|e| e.to_string())? {
        Message::Error { .. } => {}
        other => return Err(format!("two-mask query answered with {}", other.to_line())),
    }
    let good = Message::Score {
        query_id: "after".into(),
        masked_text: TEXT.into(),
        mask_token: MASK_TOKEN.into(),
        candidates: vec!["Gina".into()],
    };
    match conn.request(&good).map_err(|e| e.to_string())? {
        Message::Scores { query_id, logprobs } if query_id == "after" && logprobs.len() == 1 => Ok(()),
        other => Err(format!("connection unusable after errors: {}", other.to_line())),
    }
}
