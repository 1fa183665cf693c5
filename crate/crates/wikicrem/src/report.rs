//! Summary records (one JSON object per line, tagged by `kind`) and the
//! plain-text tables printed next to them.

use serde_json::{json, Value};
use wikicrem_core::eval::{DatasetKind, GapPreparation, LossSummary, Metrics};
use wikicrem_core::stats::{AnnotationReport, GenderClass, GenderReport};

use crate::pipeline::MineSummary;

pub fn mine_record(s: &MineSummary) -> Value {
    let g = &s.tally.generation;
    json!({
        "kind": "mine_summary",
        "documents": s.corpus.documents,
        "documents_skipped": s.corpus.skipped,
        "documents_malformed": s.corpus.malformed + s.unreadable,
        "passages": g.passages,
        "passages_without_repeat": g.passages_without_repeat,
        "rejected_order": g.rejected_order,
        "rejected_same_sentence": g.rejected_same_sentence,
        "duplicates_suppressed": s.tally.duplicates_suppressed,
        "detector_failures": s.tally.detector_failures,
        "examples": s.tally.examples,
    })
}

pub fn split_record(train: usize, validation: usize, seed: u64) -> Value {
    json!({ "kind": "split_summary", "train": train, "validation": validation, "seed": seed })
}

pub fn gender_record(r: &GenderReport) -> Value {
    let counts: serde_json::Map<String, Value> =
        GenderClass::ALL.iter().map(|c| (c.as_str().to_string(), json!(r.count(*c)))).collect();
    json!({
        "kind": "gender_report",
        "total": r.total,
        "counts": counts,
        "female": r.female(),
        "male": r.male(),
        "ratio": r.ratio(),
    })
}

pub fn annotation_record(r: &AnnotationReport) -> Value {
    json!({
        "kind": "annotation_report",
        "total": r.total,
        "unsolvable": r.unsolvable,
        "solvable": r.solvable,
        "annotator_correct": r.annotator_correct,
        "annotator_accuracy": r.annotator_accuracy,
        "natural_fraction": r.natural_fraction,
    })
}

pub fn metrics_record(kind: DatasetKind, scorer: &str, m: &Metrics) -> Value {
    let subsets: serde_json::Map<String, Value> = m
        .subsets
        .iter()
        .map(|(k, v)| (k.clone(), json!({ "correct": v.correct, "total": v.total, "accuracy": v.accuracy() })))
        .collect();
    json!({
        "kind": "metrics",
        "dataset": kind.as_str(),
        "scorer": scorer,
        "items": m.items,
        "labeled": m.labeled,
        "correct": m.correct,
        "unlabeled": m.unlabeled,
        "accuracy": m.accuracy,
        "f1": m.f1_overall,
        "f1_feminine": m.f1_feminine,
        "f1_masculine": m.f1_masculine,
        "bias": m.bias_ratio,
        "tp": m.confusion.tp,
        "fp": m.confusion.fp,
        "fn": m.confusion.fn_,
        "tn": m.confusion.tn,
        "scorer_failures": m.scorer_failures,
        "conversion_fallbacks": m.conversion_fallbacks,
        "subsets": subsets,
    })
}

pub fn loss_record(s: &LossSummary, alpha: f64, beta: f64) -> Value {
    json!({ "kind": "loss_summary", "alpha": alpha, "beta": beta, "items": s.items, "mean_loss": s.mean })
}

pub fn gap_record(p: &GapPreparation, cap: Option<f64>) -> Value {
    json!({
        "kind": "gap_extraction",
        "items": p.items.len(),
        "failed_items": p.failed_items,
        "failed_slots": p.failed_slots,
        "detector_failures": p.detector_failures,
        "failure_rate": p.failure_rate(),
        "f1_cap": cap,
    })
}

pub fn dedup_record(removed: usize, kept: usize) -> Value {
    json!({ "kind": "dedup", "removed": removed, "kept": kept })
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{:.3}", v))
}

/// The table columns follow the usual GAP report: F1, F1 on feminine and
/// masculine pronouns, their ratio, then accuracy.
pub fn metrics_table(kind: DatasetKind, m: &Metrics) -> String {
    let mut s = format!("{:<12} {:>7} {:>7} {:>7} {:>7} {:>9}\n", "dataset", "F1", "F1F", "F1M", "bias", "accuracy");
    s += &format!(
        "{:<12} {:>7} {:>7} {:>7} {:>7} {:>9}\n",
        kind.as_str(),
        cell(m.f1_overall),
        cell(m.f1_feminine),
        cell(m.f1_masculine),
        cell(m.bias_ratio),
        cell(m.accuracy)
    );
    for (k, v) in &m.subsets {
        s += &format!("  {:<26} {:>6}/{:<6} {:>9}\n", k, v.correct, v.total, cell(v.accuracy()));
    }
    if m.scorer_failures > 0 {
        s += &format!("  scorer failures: {}\n", m.scorer_failures);
    }
    if m.conversion_fallbacks > 0 {
        s += &format!("  conversion fallbacks: {}\n", m.conversion_fallbacks);
    }
    s
}

/// `key  value` lines for a flat record.
pub fn record_table(v: &Value) -> String {
    let mut s = String::new();
    if let Value::Object(map) = v {
        if let Some(kind) = map.get("kind").and_then(Value::as_str) {
            s += &format!("[{kind}]\n");
        }
        for (k, val) in map.iter().filter(|(k, _)| *k != "kind") {
            let shown = match val {
                Value::Null => "-".to_string(),
                Value::Number(n) if n.is_f64() => format!("{:.4}", n.as_f64().unwrap()),
                other => other.to_string(),
            };
            s += &format!("  {k:<26} {shown}\n");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_marks_undefined_cells() {
        let m = Metrics {
            items: 1,
            labeled: 1,
            correct: 1,
            unlabeled: 0,
            accuracy: Some(1.0),
            f1_overall: None,
            f1_feminine: None,
            f1_masculine: None,
            bias_ratio: None,
            confusion: Default::default(),
            subsets: Default::default(),
            scorer_failures: 0,
            conversion_fallbacks: 0,
        };
        let t = metrics_table(DatasetKind::Wsc273, &m);
        assert!(t.lines().nth(1).unwrap().contains("-"));
        assert!(t.contains("1.000"));
        assert_eq!(metrics_record(DatasetKind::Wsc273, "s", &m)["f1"], Value::Null);
    }
}
