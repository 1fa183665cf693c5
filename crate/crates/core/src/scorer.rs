//! Candidate scoring contract, argmax selection, the ranking loss and a
//! deterministic reference scorer.
//!
//! A scorer maps a text with one mask token and a list of candidates to one
//! finite log-score per candidate. Multi-token candidates score as the mean
//! of their per-token log-probabilities. Scores need not be normalised; only
//! their order and differences are used.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::cremgen::MASK_TOKEN;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("query {0} has no candidates")]
    NoCandidates(String),
    #[error("query {id} must contain exactly one mask token, found {found}")]
    MaskCount { id: String, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreQuery {
    pub query_id: String,
    pub masked_text: String,
    pub candidates: Vec<String>,
}

impl ScoreQuery {
    pub fn new(
        query_id: impl Into<String>,
        masked_text: impl Into<String>,
        candidates: Vec<String>,
    ) -> Result<Self, QueryError> {
        let q = Self {
            query_id: query_id.into(),
            masked_text: masked_text.into(),
            candidates,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        if self.candidates.is_empty() {
            return Err(QueryError::NoCandidates(self.query_id.clone()));
        }
        let found = self.masked_text.matches(MASK_TOKEN).count();
        if found != 1 {
            return Err(QueryError::MaskCount { id: self.query_id.clone(), found });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScores {
    pub query_id: String,
    pub logprobs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error(transparent)]
    Query(#[from] QueryError),
    /// The scorer could not be reached; the request may be retried.
    #[error("scorer transport failure: {0}")]
    Transport(String),
    /// The scorer answered, but not according to the contract.
    #[error("scorer protocol error: {0}")]
    Protocol(String),
    /// The scorer reported a failure for this query.
    #[error("scorer rejected query {query_id}: {message}")]
    Rejected { query_id: String, message: String },
}

impl ScoreError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ScoreError::Transport(_))
    }
}

pub trait Scorer {
    fn score(&self, query: &ScoreQuery) -> Result<CandidateScores, ScoreError>;

    /// Short label for reports.
    fn describe(&self) -> String {
        String::from("scorer")
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score(&self, query: &ScoreQuery) -> Result<CandidateScores, ScoreError> {
        (**self).score(query)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn score(&self, query: &ScoreQuery) -> Result<CandidateScores, ScoreError> {
        (**self).score(query)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Score `query` and check the answer: same id, one finite score per candidate.
pub fn score_candidates<S: Scorer + ?Sized>(query: &ScoreQuery, scorer: &S) -> Result<CandidateScores, ScoreError> {
    query.validate()?;
    let scores = scorer.score(query)?;
    if scores.query_id != query.query_id {
        return Err(ScoreError::Protocol(format!(
            "answer for query {:?} carries id {:?}",
            query.query_id, scores.query_id
        )));
    }
    if scores.logprobs.len() != query.candidates.len() {
        return Err(ScoreError::Protocol(format!(
            "query {:?}: {} candidates but {} scores",
            query.query_id,
            query.candidates.len(),
            scores.logprobs.len()
        )));
    }
    if let Some(i) = scores.logprobs.iter().position(|x| !x.is_finite()) {
        return Err(ScoreError::Protocol(format!(
            "query {:?}: score {i} is not finite",
            query.query_id
        )));
    }
    Ok(scores)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("cannot select from an empty score list")]
pub struct EmptyScores;

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> Result<usize, EmptyScores> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some((_, b)) if !(s > b) => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i).ok_or(EmptyScores)
}

pub fn select_candidate(scores: &CandidateScores) -> Result<usize, EmptyScores> {
    argmax(&scores.logprobs)
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("loss parameters must be finite and non-negative (alpha = {alpha}, beta = {beta})")]
pub struct InvalidLossParams {
    pub alpha: f64,
    pub beta: f64,
}

/// Weight and margin of the hinge term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    alpha: f64,
    beta: f64,
}

impl LossParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, InvalidLossParams> {
        if alpha.is_finite() && beta.is_finite() && alpha >= 0.0 && beta >= 0.0 {
            Ok(Self { alpha, beta })
        } else {
            Err(InvalidLossParams { alpha, beta })
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for LossParams {
    /// alpha = 10, beta = 0.2
    fn default() -> Self {
        Self { alpha: 10.0, beta: 0.2 }
    }
}

/// Negative log-likelihood of the correct candidate plus a weighted hinge on
/// the margin to the incorrect one:
/// `-logp_a + alpha * max(0, logp_b - logp_a + beta)`.
pub fn loss(logp_a: f64, logp_b: f64, params: LossParams) -> f64 {
    let hinge = logp_b - logp_a + params.beta;
    -logp_a + params.alpha * if hinge > 0.0 { hinge } else { 0.0 }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("frequency table has no counts")]
    Empty,
    #[error("floor count must be positive and finite, got {0}")]
    Floor(f64),
    #[error("line {line}: expected `token<TAB>count`")]
    Line { line: usize },
}

/// Score of a multi-token candidate: the mean of its token log-probabilities.
pub fn mean_logprob(token_logprobs: &[f64]) -> Option<f64> {
    (!token_logprobs.is_empty()).then(|| token_logprobs.iter().sum::<f64>() / token_logprobs.len() as f64)
}

/// Context-free unigram scorer over a token frequency table.
///
/// `log P(token) = ln(count / total)`, with unseen tokens given `floor`
/// counts. Candidates split on whitespace and score as the token mean.
#[derive(Debug, Clone)]
pub struct UnigramScorer {
    counts: BTreeMap<String, u64>,
    total: u64,
    floor: f64,
}

impl UnigramScorer {
    pub fn new(counts: BTreeMap<String, u64>, floor: f64) -> Result<Self, TableError> {
        if !(floor.is_finite() && floor > 0.0) {
            return Err(TableError::Floor(floor));
        }
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(TableError::Empty);
        }
        Ok(Self { counts, total, floor })
    }

    /// Parse `token<TAB>count` lines; blank and `//` lines are skipped.
    pub fn parse_table(src: &str) -> Result<BTreeMap<String, u64>, TableError> {
        let mut counts = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with("//") {
                continue;
            }
            let (tok, n) = line.split_once('\t').ok_or(TableError::Line { line: i + 1 })?;
            let n: u64 = n.trim().parse().map_err(|_| TableError::Line { line: i + 1 })?;
            *counts.entry(tok.to_string()).or_insert(0) += n;
        }
        Ok(counts)
    }

    pub fn token_logprob(&self, token: &str) -> f64 {
        let c = self.counts.get(token).map_or(self.floor, |&c| c as f64);
        libm::log(c / self.total as f64)
    }

    pub fn candidate_logprob(&self, candidate: &str) -> f64 {
        let tokens: Vec<f64> = candidate.split_whitespace().map(|t| self.token_logprob(t)).collect();
        mean_logprob(&tokens).unwrap_or_else(|| libm::log(self.floor / self.total as f64))
    }
}

impl Scorer for UnigramScorer {
    fn score(&self, query: &ScoreQuery) -> Result<CandidateScores, ScoreError> {
        Ok(CandidateScores {
            query_id: query.query_id.clone(),
            logprobs: query.candidates.iter().map(|c| self.candidate_logprob(c)).collect(),
        })
    }

    fn describe(&self) -> String {
        format!("unigram(total={}, floor={})", self.total, self.floor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn multi_token_mean() {
        // "Mary Ann" with per-token log-frequencies -1 and -3
        assert_eq!(mean_logprob(&[-1.0, -3.0]), Some(-2.0));
        assert_eq!(mean_logprob(&[-0.7]), Some(-0.7));
        assert_eq!(mean_logprob(&[]), None);
    }

    fn table(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
        pairs.iter().map(|(t, c)| (t.to_string(), *c)).collect()
    }

    fn q(cands: &[&str]) -> ScoreQuery {
        ScoreQuery::new("q", "x [MASK] y", cands.iter().map(|c| c.to_string()).collect()).unwrap()
    }

    #[test]
    fn query_validation() {
        assert!(ScoreQuery::new("a", "no mask", vec!["x".into()]).is_err());
        assert!(ScoreQuery::new("a", "[MASK] [MASK]", vec!["x".into()]).is_err());
        assert!(ScoreQuery::new("a", "[MASK]", vec![]).is_err());
    }

    #[test]
    fn argmax_and_ties() {
        assert_eq!(argmax(&[-2.0, -1.0]), Ok(1));
        assert_eq!(argmax(&[-1.5, -1.5]), Ok(0));
        assert_eq!(argmax(&[]), Err(EmptyScores));
    }

    #[test]
    fn worked_losses() {
        let p = LossParams::new(10.0, 0.2).unwrap();
        assert!((loss(-1.0, -2.0, p) - 1.0).abs() < 1e-12);
        assert!((loss(-2.0, -1.0, p) - 14.0).abs() < 1e-12);
        let no_margin = LossParams::new(0.0, 0.2).unwrap();
        assert_eq!(loss(-3.0, 5.0, no_margin), 3.0);
        assert!(LossParams::new(-1.0, 0.0).is_err());
        assert!(LossParams::new(1.0, f64::NAN).is_err());
        assert_eq!(LossParams::default(), LossParams::new(10.0, 0.2).unwrap());
    }

    #[test]
    fn unigram_arithmetic() {
        let s = UnigramScorer::new(table(&[("a", 1), ("b", 1)]), 1.0).unwrap();
        let got = score_candidates(&q(&["a"]), &s).unwrap();
        assert!((got.logprobs[0] - libm::log(0.5)).abs() < 1e-12);

        // uniform table: tie goes to the first candidate
        let got = score_candidates(&q(&["a", "b"]), &s).unwrap();
        assert_eq!(select_candidate(&got), Ok(0));

        // one seen, one unseen token: mean of log(1/2) and log(1/2) with floor 1
        let s = UnigramScorer::new(table(&[("a", 3), ("b", 1)]), 1.0).unwrap();
        let got = s.candidate_logprob("a zzz");
        let want = (libm::log(0.75) + libm::log(0.25)) / 2.0;
        assert!((got - want).abs() < 1e-12);

        assert_eq!(UnigramScorer::new(BTreeMap::new(), 1.0).unwrap_err(), TableError::Empty);
        assert!(UnigramScorer::new(table(&[("a", 1)]), 0.0).is_err());
    }

    #[test]
    fn table_parsing() {
        let t = UnigramScorer::parse_table("// c\nMary\t3\nAnn\t1\n\nMary\t1\n").unwrap();
        assert_eq!(t["Mary"], 4);
        assert_eq!(UnigramScorer::parse_table("x 1").unwrap_err(), TableError::Line { line: 1 });
    }

    #[test]
    fn contract_violations_are_protocol_errors() {
        struct Short;
        impl Scorer for Short {
            fn score(&self, q: &ScoreQuery) -> Result<CandidateScores, ScoreError> {
                Ok(CandidateScores { query_id: q.query_id.clone(), logprobs: vec![0.0] })
            }
        }
        struct Nan;
        impl Scorer for Nan {
            fn score(&self, q: &ScoreQuery) -> Result<CandidateScores, ScoreError> {
                Ok(CandidateScores { query_id: q.query_id.clone(), logprobs: vec![f64::NAN, 0.0] })
            }
        }
        assert!(matches!(score_candidates(&q(&["a", "b"]), &Short), Err(ScoreError::Protocol(_))));
        assert!(matches!(score_candidates(&q(&["a", "b"]), &Nan), Err(ScoreError::Protocol(_))));
        assert!(ScoreError::Transport("x".into()).is_retryable());
    }
}
