use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vardef::augmentor::{augment, plan_preview};
use vardef::config::RunConfig;
use vardef::corpus::{corpus_stats, harvest_pairs, load_corpus, save_corpus, CorpusStats};
use vardef::decoder::ScoreRecord;
use vardef::error::{Error, Result};
use vardef::evaluator::{diff_failures, evaluate, reports_csv, score, EvalRecord, Prediction};
use vardef::experiment::run_experiment;
use vardef::jsonl::{read_jsonl, write_json_pretty, write_jsonl};
use vardef::similarity::{similarity_matrix, StopWords};
use vardef::splitter::{
    leave_one_process_out, parse_ratio, split_process_corpus, split_ratio, split_units, Granularity,
    ProcessSplitConfig,
};
use vardef::templates::{def_token_histogram, load_templates, parse_histogram, subset_templates};

// Stdout write errors (a closed pipe, mostly) are ignored.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "vardef", version, about = "Corpus toolkit for variable-definition extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Document, variable and definition counts per process.
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate a template corpus from the pairs of an annotated corpus.
    Augment {
        #[arg(long)]
        pairs_from: PathBuf,
        #[arg(long)]
        templates: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, required_unless_present = "plan")]
        out: Option<PathBuf>,
        /// Print the consumption schedule instead of generating.
        #[arg(long)]
        plan: bool,
    },
    /// Definition-slot histogram of a template file.
    TemplateStats { templates: PathBuf },
    /// Seeded subset of a template file with a given definition-slot histogram.
    SubsetTemplates {
        #[arg(long)]
        templates: PathBuf,
        /// Seven comma-separated counts for 0..6 definition slots.
        #[arg(long)]
        histogram: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a split manifest.
    Split {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum)]
        protocol: Protocol,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Stored in the manifest; the effective seed is `seed + experiment_id`.
        #[arg(long, default_value_t = 0)]
        experiment_id: u64,
        #[arg(long, default_value = "3:1")]
        ratio: String,
        #[arg(long, default_value = "paper")]
        granularity: String,
        /// Per-process test count, e.g. `STHE=2`. Repeatable.
        #[arg(long = "test-count", value_name = "TAG=N")]
        test_counts: Vec<String>,
        #[arg(long, default_value_t = 3)]
        default_test_count: usize,
        #[arg(long, default_value_t = 1)]
        validation: usize,
    },
    /// Split a corpus into everything except one process, and that process.
    LeaveOut {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        process: String,
        #[arg(long)]
        rest_out: PathBuf,
        #[arg(long)]
        excluded_out: PathBuf,
    },
    /// Decode a score file into predictions.
    Decode {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against a gold corpus.
    Score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-target judgements as JSONL.
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Baseline predictions to diff failures against.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Pairwise definition-vocabulary similarity between corpora.
    Similarity {
        #[arg(long, num_args = 2.., value_name = "NAME=PATH", required = true)]
        corpora: Vec<String>,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the repeated split / augmentation / scoring workflow.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        repeats: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Print the file formats the toolkit reads and writes.
    Schema,
}

#[derive(Clone, Copy, ValueEnum)]
enum Protocol {
    Process,
    Ratio,
}

const SCHEMA: &str = r#"corpus JSONL (one document per line; offsets are Unicode scalar indices, half-open):
  {"doc_id": str, "process_tag": str, "sentences": [{"text": str, "variables": [
    {"var_id": str, "start": int, "end": int, "definition": {"start": int, "end": int} | null, "is_target": bool}]}]}
template file: one template per line, [VAR_i] / [DEF_i] placeholders, '#' comment lines ignored
score JSONL (one record per extraction target; offset_map in original sentence characters):
  {"doc_id": str, "var_id": str, "tokens": [str], "s_start": [float], "s_end": [float], "offset_map": [[int,int] | null]}
predictions JSONL:
  {"doc_id": str, "var_id": str, "predicted": {"start": int, "end": int} | null}
split manifest JSON:
  {"experiment_id": int, "seed": int, "protocol": str, "assignments": {key: "train"|"validation"|"test"}}
  keys are doc ids, or "<doc_id>#<sentence index>" at sentence granularity
"#;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            eprintln!("\nfile formats:\n{SCHEMA}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() }
            });
            eprintln!("{payload}");
            if matches!(e, Error::Usage(_)) {
                eprintln!("\nfile formats:\n{SCHEMA}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Stats { corpus, json } => {
            let stats = corpus_stats(&load_corpus(&corpus)?);
            if json {
                outln!("{}", serde_json::to_string_pretty(&stats).expect("stats serialize"));
            } else {
                out!("{}", stats_table(&stats));
            }
        }
        Command::Augment {
            pairs_from,
            templates,
            seed,
            out,
            plan,
        } => {
            let pairs = harvest_pairs(&load_corpus(&pairs_from)?);
            let set = load_templates(&templates)?;
            if plan {
                for step in plan_preview(pairs.len(), &set) {
                    outln!("{}\t{}", step.template, step.consumed);
                }
                return Ok(());
            }
            let docs = augment(&pairs, &set, seed)?;
            let out = out.expect("clap enforces --out without --plan");
            save_corpus(&out, &docs)?;
            eprintln!("{} pairs -> {} sentences", pairs.len(), docs.len());
        }
        Command::TemplateStats { templates } => {
            let set = load_templates(&templates)?;
            let hist = def_token_histogram(&set);
            outln!("templates: {}", set.len());
            outln!(
                "def_slots: {}",
                hist.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            );
        }
        Command::SubsetTemplates {
            templates,
            histogram,
            seed,
            out,
        } => {
            let set = load_templates(&templates)?;
            let hist = parse_histogram(&histogram)?;
            let subset = subset_templates(&set, hist.iter().sum(), &hist, seed)?;
            std::fs::write(&out, subset.to_text()).map_err(|e| Error::Io { path: out.clone(), source: e })?;
        }
        Command::Split {
            corpus,
            protocol,
            seed,
            out,
            experiment_id,
            ratio,
            granularity,
            test_counts,
            default_test_count,
            validation,
        } => {
            let docs = load_corpus(&corpus)?;
            let effective = seed.wrapping_add(experiment_id);
            let manifest = match protocol {
                Protocol::Process => {
                    let mut config = ProcessSplitConfig {
                        default_test_count,
                        validation_per_process: validation,
                        ..Default::default()
                    };
                    for tc in &test_counts {
                        let (tag, n) = tc
                            .split_once('=')
                            .and_then(|(t, n)| Some((t.to_string(), n.parse().ok()?)))
                            .ok_or_else(|| Error::Usage(format!("bad --test-count {tc:?}")))?;
                        config.test_counts.insert(tag, n);
                    }
                    split_process_corpus(&docs, &config, effective)?
                }
                Protocol::Ratio => {
                    let g: Granularity = granularity.parse()?;
                    split_ratio(&split_units(&docs, g), effective, parse_ratio(&ratio)?)?
                }
            };
            write_json_pretty(&out, &manifest.with_experiment(experiment_id))?;
        }
        Command::LeaveOut {
            corpus,
            process,
            rest_out,
            excluded_out,
        } => {
            let (rest, excluded) = leave_one_process_out(&load_corpus(&corpus)?, &process)?;
            save_corpus(&rest_out, &rest)?;
            save_corpus(&excluded_out, &excluded)?;
        }
        Command::Decode { scores, out } => {
            let records: Vec<ScoreRecord> = read_jsonl(&scores)?;
            let predictions = records
                .iter()
                .map(ScoreRecord::predict)
                .collect::<Result<Vec<_>>>()?;
            write_jsonl(&out, &predictions)?;
        }
        Command::Score {
            gold,
            pred,
            out,
            records,
            csv,
            baseline,
        } => {
            let gold = load_corpus(&gold)?;
            let ours = evaluate(&gold, &read_jsonl::<Prediction>(&pred)?)?;
            let report = score(&ours);
            let mut value = serde_json::to_value(report).expect("report serializes");
            if let Some(b) = baseline {
                let base: Vec<EvalRecord> = evaluate(&gold, &read_jsonl::<Prediction>(&b)?)?;
                let diff = diff_failures(&ours, &base)?;
                value["baseline_diff"] = serde_json::to_value(diff).expect("diff serializes");
            }
            if let Some(path) = records {
                write_jsonl(&path, &ours)?;
            }
            if let Some(path) = csv {
                std::fs::write(&path, reports_csv(&[(1, report)])).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            }
            emit_json(out.as_deref(), &value)?;
        }
        Command::Similarity {
            corpora,
            stopwords,
            out,
        } => {
            let stopwords = match stopwords {
                Some(p) => StopWords::load(&p)?,
                None => StopWords::default(),
            };
            let named = corpora
                .iter()
                .map(|spec| {
                    let (name, path) = spec
                        .split_once('=')
                        .ok_or_else(|| Error::Usage(format!("expected NAME=PATH, got {spec:?}")))?;
                    Ok((name.to_string(), load_corpus(Path::new(path))?))
                })
                .collect::<Result<Vec<_>>>()?;
            let matrix = similarity_matrix(&named, &stopwords)?;
            emit_json(out.as_deref(), &matrix.to_percent())?;
        }
        Command::Experiment {
            config,
            seed,
            repeats,
            jobs,
            out,
            scores,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(r) = repeats {
                cfg.repeats = r;
            }
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            if let Some(s) = scores {
                cfg.scores_dir = Some(s);
            }
            let summary = run_experiment(&cfg)?;
            for o in &summary.outcomes {
                let acc = o
                    .report
                    .and_then(|r| r.accuracy)
                    .map(|a| format!("{:.1}%", a * 100.0))
                    .unwrap_or_else(|| "-".into());
                eprintln!("repeat {:>2}: {:?} acc={acc}", o.experiment_id, o.status);
            }
            eprintln!("wrote {}", cfg.out_dir.join("summary.json").display());
        }
        Command::Schema => out!("{SCHEMA}"),
    }
    Ok(())
}

fn emit_json<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(path) => write_json_pretty(path, value),
        None => {
            outln!("{}", serde_json::to_string_pretty(value).expect("value serializes"));
            Ok(())
        }
    }
}

fn stats_table(stats: &CorpusStats) -> String {
    let mut out = format!("{:<10} {:>7} {:>10} {:>16}\n", "process", "papers", "variables", "with_definition");
    for (tag, s) in &stats.per_process {
        out += &format!("{:<10} {:>7} {:>10} {:>16}\n", tag, s.num_docs, s.num_variables, s.num_with_definition);
    }
    let t = &stats.totals;
    out += &format!("{:<10} {:>7} {:>10} {:>16}\n", "total", t.num_docs, t.num_variables, t.num_with_definition);
    out
}
