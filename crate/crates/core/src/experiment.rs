//! Repeated-split experiment runner.
//!
//! For every repeat `i` in `1..=R` (seed `base_seed + i`) the runner
//!
//! 1. splits the process corpus per process into train/validation/test,
//! 2. harvests pairs from the process training papers and generates a
//!    template corpus from them, split 3:1,
//! 3. splits the optional general-domain corpus 3:1,
//! 4. writes the three staged training corpora in training order, and
//! 5. when a score file `repeat-XX.jsonl` exists, decodes it and scores the
//!    test papers.
//!
//! Each repeat writes only inside its own `repeat-XX/` directory. Model
//! training happens outside the toolkit between steps 4 and 5.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::augmentor::augment;
use crate::config::RunConfig;
use crate::corpus::{harvest_pairs, load_corpus, save_corpus, AnnotatedDocument};
use crate::decoder::ScoreRecord;
use crate::error::{Error, Result};
use crate::evaluator::{aggregate, evaluate, reports_csv, score, AggregateReport, MetricReport};
use crate::jsonl::{read_jsonl, write_json_pretty, write_jsonl};
use crate::similarity::{similarity_matrix, StopWords};
use crate::splitter::{
    repeat_seed, select, split_process_corpus, split_ratio, split_units, Granularity, Role,
};
use crate::templates::{load_templates, TemplateSet};

pub const STAGE1_DIR: &str = "stage1-symlink";
pub const STAGE2_DIR: &str = "stage2-template";
pub const STAGE3_DIR: &str = "stage3-process";

pub fn repeat_dir_name(experiment_id: u64) -> String {
    format!("repeat-{experiment_id:02}")
}

pub fn score_file_name(experiment_id: u64) -> String {
    format!("{}.jsonl", repeat_dir_name(experiment_id))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RepeatStatus {
    Scored,
    NoScores,
    MissingScores,
    ScoreError,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSizes {
    pub symlink_train: Option<usize>,
    pub symlink_validation: Option<usize>,
    pub template_train: usize,
    pub template_validation: usize,
    pub process_train: usize,
    pub process_validation: usize,
    pub process_test: usize,
    pub harvested_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatOutcome {
    pub experiment_id: u64,
    pub seed: u64,
    pub status: RepeatStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub stages: StageSizes,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<MetricReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub base_seed: u64,
    pub repeats: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leave_out: Option<String>,
    pub outcomes: Vec<RepeatOutcome>,
    pub aggregate: Option<AggregateReport>,
}

struct Inputs {
    process: Vec<AnnotatedDocument>,
    symlink: Option<Vec<AnnotatedDocument>>,
    templates: TemplateSet,
}

pub fn run_experiment(config: &RunConfig) -> Result<ExperimentSummary> {
    config.check()?;
    config.check_paths()?;
    let inputs = Inputs {
        process: load_corpus(&config.process_corpus)?,
        symlink: config.symlink_corpus.as_deref().map(load_corpus).transpose()?,
        templates: load_templates(&config.templates)?,
    };
    if let Some(tag) = &config.leave_out {
        if !inputs.process.iter().any(|d| &d.process_tag == tag) {
            return Err(Error::UnknownProcess(tag.clone()));
        }
    }
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<RepeatOutcome> = pool.install(|| {
        (1..=config.repeats)
            .into_par_iter()
            .map(|id| run_repeat(config, &inputs, id))
            .collect::<Result<Vec<_>>>()
    })?;

    let scored: Vec<(u64, MetricReport)> = outcomes
        .iter()
        .filter_map(|o| o.report.map(|r| (o.experiment_id, r)))
        .collect();
    let aggregate = (!scored.is_empty()).then(|| {
        let reports: Vec<MetricReport> = scored.iter().map(|(_, r)| *r).collect();
        aggregate(&reports)
    });
    if let Some(agg) = &aggregate {
        write_json_pretty(&config.out_dir.join("aggregate.json"), agg)?;
        let csv_path = config.out_dir.join("metrics.csv");
        std::fs::write(&csv_path, reports_csv(&scored)).map_err(|e| Error::io(&csv_path, e))?;
    }
    if let Some(sw_path) = &config.stopwords {
        write_process_similarity(&inputs.process, &StopWords::load(sw_path)?, &config.out_dir)?;
    }

    let summary = ExperimentSummary {
        base_seed: config.base_seed,
        repeats: config.repeats,
        leave_out: config.leave_out.clone(),
        outcomes,
        aggregate,
    };
    write_json_pretty(&config.out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn write_process_similarity(docs: &[AnnotatedDocument], stopwords: &StopWords, out: &Path) -> Result<()> {
    let mut tags: Vec<&str> = docs.iter().map(|d| d.process_tag.as_str()).collect();
    tags.sort_unstable();
    tags.dedup();
    if tags.len() < 2 {
        return Ok(());
    }
    let corpora: Vec<(String, Vec<AnnotatedDocument>)> = tags
        .iter()
        .map(|t| {
            let subset = docs.iter().filter(|d| d.process_tag == *t).cloned().collect();
            (t.to_string(), subset)
        })
        .collect();
    let matrix = similarity_matrix(&corpora, stopwords)?;
    write_json_pretty(&out.join("similarity.json"), &matrix.to_percent())
}

fn write_split(dir: &Path, role: Role, docs: &[AnnotatedDocument]) -> Result<()> {
    save_corpus(&dir.join(format!("{}.jsonl", role.as_str())), docs)
}

fn run_repeat(config: &RunConfig, inputs: &Inputs, experiment_id: u64) -> Result<RepeatOutcome> {
    let seed = repeat_seed(config.base_seed, experiment_id);
    let dir = config.out_dir.join(repeat_dir_name(experiment_id));

    // Process corpus: paper-level split per process.
    let manifest = split_process_corpus(&inputs.process, &config.split, seed)?.with_experiment(experiment_id);
    write_json_pretty(&dir.join("manifest-process.json"), &manifest)?;
    let keep = |docs: Vec<AnnotatedDocument>, want_left_out: bool| -> Vec<AnnotatedDocument> {
        match &config.leave_out {
            Some(tag) => docs
                .into_iter()
                .filter(|d| (&d.process_tag == tag) == want_left_out)
                .collect(),
            None => docs,
        }
    };
    let process_train = keep(select(&inputs.process, &manifest, Granularity::Paper, Role::Train), false);
    let process_val = keep(select(&inputs.process, &manifest, Granularity::Paper, Role::Validation), false);
    let process_test = keep(select(&inputs.process, &manifest, Granularity::Paper, Role::Test), true);
    let stage3 = dir.join(STAGE3_DIR);
    write_split(&stage3, Role::Train, &process_train)?;
    write_split(&stage3, Role::Validation, &process_val)?;
    write_split(&stage3, Role::Test, &process_test)?;

    // Template corpus from the training pairs; each generated document is a
    // single sentence, so paper granularity is sentence granularity here.
    let pairs = harvest_pairs(&process_train);
    let generated = augment(&pairs, &inputs.templates, seed)?;
    let (template_train, template_val) = if generated.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let m = split_ratio(&split_units(&generated, Granularity::Paper), seed, config.split_ratio)?
            .with_experiment(experiment_id);
        write_json_pretty(&dir.join("manifest-template.json"), &m)?;
        (
            select(&generated, &m, Granularity::Paper, Role::Train),
            select(&generated, &m, Granularity::Paper, Role::Validation),
        )
    };
    let stage2 = dir.join(STAGE2_DIR);
    write_split(&stage2, Role::Train, &template_train)?;
    write_split(&stage2, Role::Validation, &template_val)?;

    let mut symlink_sizes = (None, None);
    if let Some(symlink) = &inputs.symlink {
        let g = config.symlink_granularity;
        let m = split_ratio(&split_units(symlink, g), seed, config.split_ratio)?.with_experiment(experiment_id);
        write_json_pretty(&dir.join("manifest-symlink.json"), &m)?;
        let train = select(symlink, &m, g, Role::Train);
        let val = select(symlink, &m, g, Role::Validation);
        let stage1 = dir.join(STAGE1_DIR);
        write_split(&stage1, Role::Train, &train)?;
        write_split(&stage1, Role::Validation, &val)?;
        symlink_sizes = (Some(train.len()), Some(val.len()));
    }

    let stages = StageSizes {
        symlink_train: symlink_sizes.0,
        symlink_validation: symlink_sizes.1,
        template_train: template_train.len(),
        template_validation: template_val.len(),
        process_train: process_train.len(),
        process_validation: process_val.len(),
        process_test: process_test.len(),
        harvested_pairs: pairs.len(),
    };
    let mut outcome = RepeatOutcome {
        experiment_id,
        seed,
        status: RepeatStatus::NoScores,
        message: None,
        stages,
        report: None,
    };

    if let Some(scores_dir) = &config.scores_dir {
        let path = scores_dir.join(score_file_name(experiment_id));
        if !path.exists() {
            outcome.status = RepeatStatus::MissingScores;
            outcome.message = Some(format!("missing score file {}", score_file_name(experiment_id)));
        } else {
            match score_test_set(&path, &process_test, &dir) {
                Ok(report) => {
                    outcome.status = RepeatStatus::Scored;
                    outcome.report = Some(report);
                }
                Err(e) => {
                    outcome.status = RepeatStatus::ScoreError;
                    outcome.message = Some(e.to_string());
                }
            }
        }
    }
    Ok(outcome)
}

/// Decodes the score records that belong to test-set targets and scores them.
fn score_test_set(path: &Path, test: &[AnnotatedDocument], dir: &Path) -> Result<MetricReport> {
    let records: Vec<ScoreRecord> = read_jsonl(path)?;
    let wanted: std::collections::HashSet<(&str, &str)> = test
        .iter()
        .flat_map(|d| d.targets().map(move |(_, v)| (d.doc_id.as_str(), v.var_id.as_str())))
        .collect();
    let predictions = records
        .iter()
        .filter(|r| wanted.contains(&(r.doc_id.as_str(), r.var_id.as_str())))
        .map(ScoreRecord::predict)
        .collect::<Result<Vec<_>>>()?;
    let eval = evaluate(test, &predictions)?;
    write_jsonl(&dir.join("predictions.jsonl"), &predictions)?;
    write_jsonl(&dir.join("records.jsonl"), &eval)?;
    let report = score(&eval);
    write_json_pretty(&dir.join("report.json"), &report)?;
    Ok(report)
}
