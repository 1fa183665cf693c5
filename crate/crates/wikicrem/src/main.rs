use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use wikicrem_core::eval::{
    dedupe_dpr, f1_cap, gap_discard_unanswerable, gap_slots, loss_summary, prepare_gap_items, DatasetKind,
};
use wikicrem_core::names::{Gazetteer, GazetteerDetector, StopWords};
use wikicrem_core::scorer::LossParams;
use wikicrem_core::stats::{annotation_report, gender_ratio, GenderGazetteer};
use wikicrem_core::holdout_split;

use wikicrem::config::ConfigFile;
use wikicrem::datasets::load_dataset;
use wikicrem::pipeline::{self, DetectorSpec, ScorerSpec, DEFAULT_FLOOR};
use wikicrem::protocol::{serve, DetectorHandler, ReferenceHandler};
use wikicrem::records::{create, read_dataset, read_fixtures, read_text, write_dataset, DatasetRecord};
use wikicrem::{conformance, report, Error, Result};

const DEFAULT_HOLDOUT: usize = 10_000;

#[derive(Parser)]
#[command(name = "wikicrem", version, about = "Mine masked-name examples and evaluate pronoun resolvers")]
struct Cli {
    /// Run configuration (`key = value` lines); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More logging on stderr (repeat for more).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine a dataset from text files, directories or XML exports.
    Mine(MineArgs),
    /// Hold out a validation set from a mined dataset.
    Split(SplitArgs),
    /// Gender statistics of a dataset and/or the annotation report.
    Stats(StatsArgs),
    /// Score a benchmark and report accuracy and F1.
    Eval(EvalArgs),
    /// Serve a unigram table over the scorer protocol on stdin/stdout.
    #[command(hide = true)]
    ServeReference {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        floor: Option<f64>,
    },
    /// Serve the built-in name detector over the protocol on stdin/stdout.
    #[command(hide = true)]
    ServeDetector {
        #[arg(long)]
        gazetteer: Option<PathBuf>,
    },
    /// Check an external scorer command against the protocol.
    #[command(hide = true)]
    Conformance {
        #[arg(long)]
        scorer: String,
    },
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Dataset file to write, `-` for stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// `builtin` or `external:<command>`.
    #[arg(long)]
    detector: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Write examples sorted by document id.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Directory for `train.jsonl` and `validation.jsonl`.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    holdout_n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct StatsArgs {
    /// Mined dataset for the gender report.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Annotation fixture file for the annotation report.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Replacement `name<TAB>class` table.
    #[arg(long)]
    genders: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GapCandidates {
    /// The two names given by the dataset.
    Given,
    /// Every name the detector finds in the text.
    Extracted,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    dataset_kind: Option<String>,
    /// `unigram:<table>` or `external:<command>`.
    #[arg(long)]
    scorer: Option<String>,
    /// Used for GAP candidate extraction.
    #[arg(long)]
    detector: Option<String>,
    #[arg(long, value_enum)]
    gap_candidates: Option<GapCandidates>,
    /// Drop items whose text also appears in this WSC file (DPR).
    #[arg(long)]
    dedupe_against: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Count given to unseen tokens by a unigram scorer.
    #[arg(long)]
    floor: Option<f64>,
    /// Also write per-item scores here.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Mine(a) => mine(a, &cfg),
        Command::Split(a) => split(a, &cfg),
        Command::Stats(a) => stats(a, &cfg),
        Command::Eval(a) => eval(a, &cfg),
        Command::ServeReference { table, floor } => {
            let scorer = pipeline::load_unigram(&table, floor.unwrap_or(DEFAULT_FLOOR))?;
            serve(io::stdin().lock(), io::stdout().lock(), &ReferenceHandler(scorer)).map_err(|e| Error::io(Path::new("<stdio>"), e))
        }
        Command::ServeDetector { gazetteer } => {
            let detector = match gazetteer {
                Some(p) => GazetteerDetector::new(Gazetteer::parse(&read_text(&p)?), StopWords::shipped()),
                None => GazetteerDetector::default(),
            };
            serve(io::stdin().lock(), io::stdout().lock(), &DetectorHandler(detector)).map_err(|e| Error::io(Path::new("<stdio>"), e))
        }
        Command::Conformance { scorer } => {
            let cmd = scorer.strip_prefix("external:").unwrap_or(&scorer);
            let mut failed = 0;
            for check in conformance::run(cmd) {
                let (tag, detail) = match &check.outcome {
                    conformance::Outcome::Pass => ("PASS", String::new()),
                    conformance::Outcome::Fail(m) => {
                        failed += 1;
                        ("FAIL", format!(": {m}"))
                    }
                    conformance::Outcome::Skipped(m) => ("SKIP", format!(": {m}")),
                };
                println!("{tag} {}{detail}", check.name);
            }
            if failed > 0 {
                return Err(Error::Protocol(format!("{failed} conformance check(s) failed")));
            }
            Ok(())
        }
    }
}

fn emit(v: &Value, table: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{v}").map_err(|e| Error::io(Path::new("<stdout>"), e))?;
    eprint!("{table}");
    Ok(())
}

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Usage(format!("--{name} is required (or set `{name}` in the config file)")))
}

fn workers(flag: Option<usize>, cfg: &ConfigFile) -> Result<usize> {
    let n = match flag.or(cfg.get("workers")?) {
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if n == 0 {
        return Err(Error::Usage("--workers must be at least 1".into()));
    }
    Ok(n)
}

fn path_or(flag: Option<PathBuf>, cfg: &ConfigFile, key: &str) -> Option<PathBuf> {
    flag.or_else(|| cfg.string(key).map(PathBuf::from))
}

fn mine(a: MineArgs, cfg: &ConfigFile) -> Result<()> {
    let inputs: Vec<PathBuf> = if a.input.is_empty() { cfg.all("input").into_iter().map(PathBuf::from).collect() } else { a.input };
    if inputs.is_empty() {
        return Err(Error::Usage("--input is required".into()));
    }
    let output = required(path_or(a.output, cfg, "output"), "output")?;
    let detector: DetectorSpec = a.detector.or_else(|| cfg.string("detector")).unwrap_or_else(|| "builtin".into()).parse()?;
    let workers = workers(a.workers, cfg)?;
    let deterministic = a.deterministic || cfg.flag("deterministic")?.unwrap_or(false);
    let detector = pipeline::build_detector(&detector, workers)?;
    let summary = if output == Path::new("-") {
        let mut w = BufWriter::new(io::stdout().lock());
        pipeline::mine(&inputs, &*detector, workers, deterministic, &mut w)?
    } else {
        let mut w = create(&output)?;
        pipeline::mine(&inputs, &*detector, workers, deterministic, &mut w)?
    };
    let rec = report::mine_record(&summary);
    if output == Path::new("-") {
        eprintln!("{rec}");
        eprint!("{}", report::record_table(&rec));
        Ok(())
    } else {
        emit(&rec, &report::record_table(&rec))
    }
}

fn split(a: SplitArgs, cfg: &ConfigFile) -> Result<()> {
    let input = required(path_or(a.input, cfg, "input"), "input")?;
    let dir = required(path_or(a.output, cfg, "output"), "output")?;
    let n = a.holdout_n.or(cfg.get("holdout-n")?).unwrap_or(DEFAULT_HOLDOUT);
    let seed = a.seed.or(cfg.get("seed")?).unwrap_or(0);
    let records = read_dataset(&input)?;
    let (train, validation) = holdout_split(records, n, seed).map_err(|e| Error::Input(format!("{}: {e}", input.display())))?;
    write_dataset(&dir.join("train.jsonl"), &train)?;
    write_dataset(&dir.join("validation.jsonl"), &validation)?;
    let rec = report::split_record(train.len(), validation.len(), seed);
    emit(&rec, &report::record_table(&rec))
}

fn stats(a: StatsArgs, cfg: &ConfigFile) -> Result<()> {
    let input = path_or(a.input, cfg, "input");
    let annotations = path_or(a.annotations, cfg, "annotations");
    if input.is_none() && annotations.is_none() {
        return Err(Error::Usage("stats needs --input and/or --annotations".into()));
    }
    if let Some(p) = input {
        let genders = match path_or(a.genders, cfg, "genders") {
            Some(g) => GenderGazetteer::parse(&read_text(&g)?).map_err(|e| Error::Input(format!("{}: {e}", g.display())))?,
            None => GenderGazetteer::shipped(),
        };
        let examples: Vec<_> = read_dataset(&p)?.into_iter().map(DatasetRecord::into_example).collect();
        let rec = report::gender_record(&gender_ratio(&examples, &genders));
        emit(&rec, &report::record_table(&rec))?;
    }
    if let Some(p) = annotations {
        let rec = report::annotation_record(&annotation_report(&read_fixtures(&p)?));
        emit(&rec, &report::record_table(&rec))?;
    }
    Ok(())
}

fn eval(a: EvalArgs, cfg: &ConfigFile) -> Result<()> {
    let input = required(path_or(a.input, cfg, "input"), "input")?;
    let kind: DatasetKind = required(a.dataset_kind.or_else(|| cfg.string("dataset-kind")), "dataset-kind")?
        .parse()
        .map_err(|e| Error::Usage(format!("{e}")))?;
    let scorer_spec: ScorerSpec = required(a.scorer.or_else(|| cfg.string("scorer")), "scorer")?.parse()?;
    let alpha = a.alpha.or(cfg.get("alpha")?).unwrap_or(LossParams::default().alpha());
    let beta = a.beta.or(cfg.get("beta")?).unwrap_or(LossParams::default().beta());
    let params = LossParams::new(alpha, beta).map_err(|e| Error::Usage(e.to_string()))?;
    let floor = a.floor.or(cfg.get("floor")?).unwrap_or(DEFAULT_FLOOR);
    let workers = workers(a.workers, cfg)?;
    let gap_mode = match a.gap_candidates {
        Some(m) => m,
        None => match cfg.string("gap-candidates").as_deref() {
            None | Some("extracted") => GapCandidates::Extracted,
            Some("given") => GapCandidates::Given,
            Some(o) => return Err(Error::Usage(format!("gap-candidates must be given or extracted, got {o:?}"))),
        },
    };

    let mut items = load_dataset(kind, &input)?;
    if let Some(wsc) = path_or(a.dedupe_against, cfg, "dedupe-against") {
        let wsc = load_dataset(DatasetKind::Wsc273, &wsc)?;
        let (kept, removed) = dedupe_dpr(items, &wsc);
        items = kept;
        let rec = report::dedup_record(removed, items.len());
        emit(&rec, &report::record_table(&rec))?;
    }
    if kind == DatasetKind::Gap {
        items = gap_discard_unanswerable(items);
        if gap_mode == GapCandidates::Extracted {
            let spec: DetectorSpec = a.detector.or_else(|| cfg.string("detector")).unwrap_or_else(|| "builtin".into()).parse()?;
            let detector = pipeline::build_detector(&spec, 1)?;
            let prep = prepare_gap_items(items, &*detector);
            let rec = report::gap_record(&prep, f1_cap(gap_slots(&prep.items)).ok());
            emit(&rec, &report::record_table(&rec))?;
            items = prep.items;
        }
    }

    let scorer = pipeline::build_scorer(&scorer_spec, workers, floor)?;
    let pool = pipeline::worker_pool(workers)?;
    let outcomes = pipeline::score_all(&items, &*scorer, &pool);
    let metrics = pipeline::fold(&items, &outcomes);
    if let Some(out) = path_or(a.output, cfg, "output") {
        let mut w = create(&out)?;
        for (item, o) in items.iter().zip(&outcomes) {
            let line = serde_json::json!({
                "item_id": item.item_id,
                "candidates": item.candidates,
                "logprobs": o.logprobs,
                "selected": o.selected,
                "error": o.error,
            });
            writeln!(w, "{line}").map_err(|e| Error::io(&out, e))?;
        }
        w.flush().map_err(|e| Error::io(&out, e))?;
    }
    let rec = report::metrics_record(kind, &scorer.describe(), &metrics);
    emit(&rec, &report::metrics_table(kind, &metrics))?;
    let loss = loss_summary(&items, &outcomes, params);
    let rec = report::loss_record(&loss, alpha, beta);
    emit(&rec, &report::record_table(&rec))
}
