//! Experiment configuration, read from a TOML file.
//!
//! Relative paths resolve against the directory holding the config file.
//! Command-line flags override file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::splitter::{parse_ratio, Granularity, ProcessSplitConfig};

pub const DEFAULT_REPEATS: u64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub base_seed: u64,
    pub repeats: u64,
    pub jobs: usize,
    pub process_corpus: PathBuf,
    pub symlink_corpus: Option<PathBuf>,
    pub templates: PathBuf,
    pub scores_dir: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub split: ProcessSplitConfig,
    pub split_ratio: (usize, usize),
    pub symlink_granularity: Granularity,
    pub leave_out: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    base_seed: u64,
    #[serde(default = "default_repeats")]
    repeats: u64,
    #[serde(default = "default_jobs")]
    jobs: usize,
    process_corpus: PathBuf,
    symlink_corpus: Option<PathBuf>,
    templates: PathBuf,
    scores_dir: Option<PathBuf>,
    stopwords: Option<PathBuf>,
    #[serde(default = "default_out")]
    out_dir: PathBuf,
    #[serde(default)]
    test_counts: Option<BTreeMap<String, usize>>,
    #[serde(default = "default_test_count")]
    default_test_count: usize,
    #[serde(default = "default_validation")]
    validation_per_process: usize,
    #[serde(default = "default_ratio")]
    split_ratio: String,
    #[serde(default)]
    symlink_granularity: Option<String>,
    leave_out: Option<String>,
}

fn default_repeats() -> u64 {
    DEFAULT_REPEATS
}
fn default_jobs() -> usize {
    1
}
fn default_out() -> PathBuf {
    PathBuf::from("runs")
}
fn default_test_count() -> usize {
    3
}
fn default_validation() -> usize {
    1
}
fn default_ratio() -> String {
    "3:1".into()
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let split = ProcessSplitConfig {
            test_counts: raw
                .test_counts
                .unwrap_or_else(|| ProcessSplitConfig::default().test_counts),
            default_test_count: raw.default_test_count,
            validation_per_process: raw.validation_per_process,
        };
        let cfg = RunConfig {
            base_seed: raw.base_seed,
            repeats: raw.repeats,
            jobs: raw.jobs,
            process_corpus: resolve(raw.process_corpus),
            symlink_corpus: raw.symlink_corpus.map(resolve),
            templates: resolve(raw.templates),
            scores_dir: raw.scores_dir.map(resolve),
            stopwords: raw.stopwords.map(resolve),
            out_dir: resolve(raw.out_dir),
            split,
            split_ratio: parse_ratio(&raw.split_ratio).map_err(|e| Error::Config(e.to_string()))?,
            symlink_granularity: raw
                .symlink_granularity
                .as_deref()
                .map(str::parse)
                .transpose()
                .map_err(|e: Error| Error::Config(e.to_string()))?
                .unwrap_or_default(),
            leave_out: raw.leave_out,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        RunConfig::parse(&text, base)
    }

    pub fn check(&self) -> Result<()> {
        if self.repeats < 1 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.jobs < 1 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }

    /// Fails when an input path named by the config does not exist.
    pub fn check_paths(&self) -> Result<()> {
        let mut inputs = vec![&self.process_corpus, &self.templates];
        inputs.extend(self.symlink_corpus.iter());
        inputs.extend(self.stopwords.iter());
        inputs.extend(self.scores_dir.iter());
        for p in inputs {
            if !p.exists() {
                return Err(Error::Config(format!("path does not exist: {}", p.display())));
            }
        }
        Ok(())
    }
}
