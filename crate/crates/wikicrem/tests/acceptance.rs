//! One line per acceptance criterion; exits non-zero if any fails.
//!
//! Criteria that need the public benchmark files read them from
//! `$WIKICREM_DATA_DIR` (default `<workspace>/data/external`):
//! `gap/gap-test.tsv`, `dpr/train.c.txt`, `dpr/test.c.txt` and
//! `wsc/WSCollection.xml`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wikicrem::corpus::DocumentStream;
use wikicrem::datasets::load_dataset;
use wikicrem::pipeline::{fold, load_unigram, score_all, worker_pool};
use wikicrem::records::read_fixtures;
use wikicrem_core::cremgen::{generate, MiningTally};
use wikicrem_core::eval::{
    dedupe_dpr, f1_cap, gap_slots, prepare_gap_items, simulate_extraction_failures, Accumulator, DatasetKind, Gold,
    ItemOutcome,
};
use wikicrem_core::names::{detect_names, GazetteerDetector};
use wikicrem_core::oracle::{brute_force_generate, synthetic_case};
use wikicrem_core::scorer::{loss, select_candidate, CandidateScores, LossParams};
use wikicrem_core::segment::Segmenter;
use wikicrem_core::stats::annotation_report;
use wikicrem_core::window::{windows, Document, SourceKind};
use wikicrem_core::{mine_document, MASK_TOKEN};

const SYNTHETIC_CASES: u64 = 10_000;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const LOSS_TOL: f64 = 1e-9;
const GRID_POINTS: usize = 10_000;
const ARGMAX_VECTORS: usize = 10_000;
const CAP_TARGET: f64 = 0.911;
const CAP_TOL: f64 = 0.001;
/// Forced false negatives and true negatives out of 4000 answers.
const CAP_FORCED: (usize, usize) = (290, 450);
const CAP_SEED: u64 = 2019;
const ANNOTATOR_ACC: (f64, f64) = (0.951, 0.001);
const NATURAL: (f64, f64) = (0.63, 0.005);
const MICRO_F1: (f64, f64) = (0.667, 0.001);
/// F1 on feminine items over F1 on masculine items, counted by hand from
/// the fixture: 1.0 / 0.4.
const MICRO_BIAS: f64 = 2.5;
/// Reference unigram scorer on the 20-item WSC fixture, frozen.
const WSC20_GOLDEN: f64 = 0.5;
const DPR_EXPECTED: (usize, usize, usize) = (6, 1316, 564);

type Verdict = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn data_dir() -> PathBuf {
    std::env::var_os("WIKICREM_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/external"))
}

fn data_file(rel: &str) -> Result<PathBuf, String> {
    let p = data_dir().join(rel);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("benchmark file {} not found", p.display()))
    }
}

fn check(cond: bool, ok: String, fail: String) -> Verdict {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn oracle_equivalence() -> Verdict {
    let started = Instant::now();
    let mut mismatches = 0;
    let mut emitted = 0;
    for seed in 0..SYNTHETIC_CASES {
        let (p, m) = synthetic_case(seed);
        let got = generate(&p, &m);
        emitted += got.len();
        mismatches += (got != brute_force_generate(&p, &m)) as usize;
    }
    let detector = GazetteerDetector::default();
    let segmenter = Segmenter::default();
    let mut passages = 0;
    for doc in DocumentStream::open(&[fixture("corpus")]).map_err(|e| e.to_string())? {
        let doc = doc.map_err(|e| e.to_string())?;
        let sentences = segmenter.segment(&doc.text);
        for p in windows(&doc, &sentences) {
            let m = detect_names(&p, &detector).map_err(|e| e.to_string())?;
            mismatches += (generate(&p, &m) != brute_force_generate(&p, &m)) as usize;
            passages += 1;
        }
    }
    let took = started.elapsed();
    check(
        mismatches == 0 && took < ORACLE_BUDGET && emitted > 0,
        format!("{SYNTHETIC_CASES} synthetic + {passages} corpus passages, 0 mismatches, {emitted} examples, {took:.2?}"),
        format!("{mismatches} mismatches in {took:.2?} ({emitted} examples)"),
    )
}

fn mine_text(text: &str) -> Vec<wikicrem_core::MaskedExample> {
    let doc = Document::new("illustration", text, SourceKind::PlainText);
    mine_document(&doc, &Segmenter::default(), &GazetteerDetector::default(), &mut MiningTally::default())
}

fn adams_powell() -> Verdict {
    let text = "When asked about Adams' report, Powell found many of the statements to be inaccurate, \
                including a claim that Adams first surveyed an area that was surveyed in 1857 by Joseph C. Ives.";
    let want = "When asked about Adams' report, Powell found many of the statements to be inaccurate, \
                including a claim that [MASK] first surveyed an area that was surveyed in 1857 by Joseph C. Ives.";
    let got = mine_text(text);
    match got.as_slice() {
        [e] if e.correct == "Adams" && e.incorrect == "Powell" && e.masked_text == want => {
            Ok("one example, second Adams masked, incorrect Powell".into())
        }
        _ => Err(format!("got {got:?}")),
    }
}

fn gina_denise() -> Verdict {
    let text = "Gina arrives and she is furious with Denise for not protecting Jody from Kingsley, \
                as Denise was meant to be the parent.";
    let got = mine_text(text);
    let hit = got.iter().any(|e| {
        e.correct == "Denise" && e.incorrect == "Gina" && e.masked_text.ends_with(&format!("as {MASK_TOKEN} was meant to be the parent."))
    });
    check(hit, format!("Denise over Gina among {} examples", got.len()), format!("got {got:?}"))
}

fn loss_table() -> Verdict {
    let p = |a, b| LossParams::new(a, b).unwrap();
    // (logp_a, logp_b, alpha, beta, hand value)
    let table = [
        (-1.0, -2.0, 10.0, 0.2, 1.0),
        (-2.0, -1.0, 10.0, 0.2, 14.0),
        (-3.5, -0.1, 0.0, 0.2, 3.5),
        (-0.5, -0.5, 10.0, 0.2, 2.5),
        (-1.3, -1.4, 5.0, 0.4, 2.8),
    ];
    for (a, b, al, be, want) in table {
        let got = loss(a, b, p(al, be));
        if (got - want).abs() > LOSS_TOL {
            return Err(format!("loss({a}, {b}, {al}, {be}) = {got}, expected {want}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..GRID_POINTS {
        let (a, b) = (-rng.random_range(0.0..30.0), -rng.random_range(0.0..30.0));
        let params = p(rng.random_range(0.0..50.0), rng.random_range(0.0..2.0));
        if loss(a, b, params) < -a {
            return Err(format!("loss below -logp_a at ({a}, {b}, {params:?})"));
        }
    }
    Ok(format!("{} values within {LOSS_TOL:e}; lower bound on {GRID_POINTS} grid points", table.len()))
}

fn argmax_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ties = 0;
    for i in 0..ARGMAX_VECTORS {
        // eighths keep every sum exact, and the small range forces ties
        let n = rng.random_range(1..=6);
        let v: Vec<f64> = (0..n).map(|_| -(rng.random_range(0..24) as f64) / 8.0).collect();
        let shift = rng.random_range(-800..800) as f64 / 8.0;
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let first = v.iter().position(|&x| x == max).unwrap();
        ties += (v.iter().filter(|&&x| x == max).count() > 1) as usize;
        let s = |lp: Vec<f64>| select_candidate(&CandidateScores { query_id: i.to_string(), logprobs: lp }).unwrap();
        let (plain, shifted) = (s(v.clone()), s(v.iter().map(|x| x + shift).collect()));
        if plain != first || shifted != first {
            return Err(format!("{v:?} shifted by {shift}: {plain} / {shifted}, lowest maximum at {first}"));
        }
    }
    Ok(format!("{ARGMAX_VECTORS} vectors, {ties} with tied maxima, lowest index every time"))
}

fn gap_test_labels() -> Result<Vec<bool>, String> {
    let path = data_file("gap/gap-test.tsv")?;
    let items = load_dataset(DatasetKind::Gap, &path).map_err(|e| e.to_string())?;
    Ok(gap_slots(&items).into_iter().map(|s| s.positive).collect())
}

fn cap_with_failures() -> Verdict {
    let labels = gap_test_labels()?;
    let (fn_, tn) = CAP_FORCED;
    let slots = simulate_extraction_failures(&labels, fn_, tn, CAP_SEED).map_err(|e| e.to_string())?;
    let cap = f1_cap(slots).map_err(|e| e.to_string())?;
    check(
        (cap - CAP_TARGET).abs() <= CAP_TOL,
        format!("cap {cap:.4} over {} answers ({fn_} forced FN, {tn} forced TN)", labels.len()),
        format!("cap {cap:.4}, expected {CAP_TARGET} ± {CAP_TOL}"),
    )
}

fn cap_without_failures() -> Verdict {
    let micro = load_dataset(DatasetKind::Gap, &fixture("gap-micro-test.tsv")).map_err(|e| e.to_string())?;
    let mut sets = vec![("micro-set", gap_slots(&micro).into_iter().map(|s| s.positive).collect::<Vec<_>>())];
    if let Ok(labels) = gap_test_labels() {
        sets.push(("GAP test", labels));
    }
    for (name, labels) in &sets {
        let slots = simulate_extraction_failures(labels, 0, 0, CAP_SEED).map_err(|e| e.to_string())?;
        let cap = f1_cap(slots).map_err(|e| e.to_string())?;
        if cap != 1.0 {
            return Err(format!("{name}: cap {cap} with nothing missed"));
        }
    }
    Ok(format!("cap exactly 1.0 on {}", sets.iter().map(|s| s.0).collect::<Vec<_>>().join(", ")))
}

fn dpr_dedup() -> Verdict {
    let train = load_dataset(DatasetKind::Dpr, &data_file("dpr/train.c.txt")?).map_err(|e| e.to_string())?;
    let test = load_dataset(DatasetKind::Dpr, &data_file("dpr/test.c.txt")?).map_err(|e| e.to_string())?;
    let wsc = load_dataset(DatasetKind::Wsc273, &data_file("wsc/WSCollection.xml")?).map_err(|e| e.to_string())?;
    let (kept, removed) = dedupe_dpr(train, &wsc);
    let got = (removed, kept.len(), test.len());
    check(
        got == DPR_EXPECTED,
        format!("removed {removed}, kept {}, test {}", kept.len(), test.len()),
        format!("(removed, kept, test) = {got:?}, expected {DPR_EXPECTED:?} (normalised exact-text match)"),
    )
}

fn annotations() -> Verdict {
    let r = annotation_report(&read_fixtures(&fixture("annotations.jsonl")).map_err(|e| e.to_string())?);
    let acc = r.annotator_accuracy.unwrap_or(f64::NAN);
    let nat = r.natural_fraction.unwrap_or(f64::NAN);
    check(
        r.total == 100 && r.unsolvable == 18 && (acc - ANNOTATOR_ACC.0).abs() <= ANNOTATOR_ACC.1 && (nat - NATURAL.0).abs() <= NATURAL.1,
        format!("total {}, unsolvable {}, accuracy {acc:.4}, natural {nat:.2}", r.total, r.unsolvable),
        format!("{r:?}"),
    )
}

fn gap_micro_metrics() -> Verdict {
    let items = load_dataset(DatasetKind::Gap, &fixture("gap-micro-test.tsv")).map_err(|e| e.to_string())?;
    let items = prepare_gap_items(items, &GazetteerDetector::default()).items;
    let scorer = load_unigram(&fixture("gap-micro-unigram.tsv"), 0.5).map_err(|e| e.to_string())?;
    let outcomes = score_all(&items, &scorer, &worker_pool(2).map_err(|e| e.to_string())?);
    let m = fold(&items, &outcomes);
    let (f1, bias) = (m.f1_overall.unwrap_or(f64::NAN), m.bias_ratio.unwrap_or(f64::NAN));
    if (f1 - MICRO_F1.0).abs() > MICRO_F1.1 || (bias - MICRO_BIAS).abs() > 1e-12 {
        return Err(format!("F1 {f1}, bias {bias}, confusion {:?}", m.confusion));
    }

    // answer every item correctly: the coreferent name, or a third name when neither is
    let mut acc = Accumulator::default();
    for item in &items {
        let Gold::Gap { a, b, a_coref, b_coref } = &item.gold else { unreachable!() };
        let pick = item.candidates.iter().position(|c| match (a_coref, b_coref) {
            (true, _) => c == a,
            (_, true) => c == b,
            _ => c != a && c != b,
        });
        acc.add(item, &ItemOutcome { logprobs: None, selected: pick, error: None });
    }
    let perfect = acc.finish();
    check(
        perfect.f1_overall == Some(1.0) && perfect.bias_ratio == Some(1.0),
        format!("F1 {f1:.4}, bias {bias}; all-correct F1 1.0, bias 1.0"),
        format!("all-correct gave F1 {:?}, bias {:?}", perfect.f1_overall, perfect.bias_ratio),
    )
}

fn run(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_wikicrem")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(out.stdout)
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = fixture("corpus");
    let mut files = Vec::new();
    for w in ["1", "8"] {
        let out = dir.path().join(format!("w{w}.jsonl"));
        run(&["mine", "--input", corpus.to_str().unwrap(), "--output", out.to_str().unwrap(), "--workers", w, "--deterministic"])?;
        files.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    check(
        files[0] == files[1] && !files[0].is_empty(),
        format!("workers 1 and 8 byte-identical ({} bytes)", files[0].len()),
        "outputs differ".into(),
    )
}

fn reference_golden() -> Verdict {
    let table = format!("unigram:{}", fixture("unigram.tsv").display());
    let wsc = fixture("wsc20.xml");
    let args = ["eval", "--input", wsc.to_str().unwrap(), "--dataset-kind", "wsc273", "--scorer", &table];
    let (first, second) = (run(&args)?, run(&args)?);
    let metrics: serde_json::Value = String::from_utf8_lossy(&first)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .find(|r| r["kind"] == "metrics")
        .ok_or("no metrics record")?;
    let acc = metrics["accuracy"].as_f64().unwrap_or(f64::NAN);
    check(
        acc == WSC20_GOLDEN && first == second,
        format!("accuracy {acc} on {} items, identical reruns", metrics["items"]),
        format!("accuracy {acc}, golden {WSC20_GOLDEN}, reruns identical: {}", first == second),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("rule-oracle equivalence", oracle_equivalence),
        ("Adams/Powell illustration", adams_powell),
        ("Gina/Denise illustration", gina_denise),
        ("loss table and lower bound", loss_table),
        ("argmax shift invariance and tie-break", argmax_invariance),
        ("F1 cap with simulated failures (GAP test)", cap_with_failures),
        ("F1 cap with zero failures", cap_without_failures),
        ("DPR dedup against WSC273", dpr_dedup),
        ("annotation report", annotations),
        ("GAP micro-set metrics", gap_micro_metrics),
        ("mining determinism", determinism),
        ("reference-scorer golden accuracy", reference_golden),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
