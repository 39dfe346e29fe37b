//! Reproducible train/validation/test split protocols.
//!
//! Two protocols exist. The per-process protocol draws a fixed number of
//! test papers and validation papers from each process and trains on the
//! rest. The ratio protocol partitions items `train:validation` with the
//! train share rounded down. All randomness comes from a ChaCha8 stream
//! seeded with the manifest seed; repeat `i` of an experiment uses
//! `base_seed + i`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedDocument, CorpusStats};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Validation,
    Test,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Validation => "validation",
            Role::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub experiment_id: u64,
    pub seed: u64,
    pub protocol: String,
    pub assignments: BTreeMap<String, Role>,
}

impl SplitManifest {
    pub fn with_experiment(mut self, experiment_id: u64) -> Self {
        self.experiment_id = experiment_id;
        self
    }

    pub fn count(&self, role: Role) -> usize {
        self.assignments.values().filter(|&&r| r == role).count()
    }

    pub fn keys_with(&self, role: Role) -> impl Iterator<Item = &str> {
        self.assignments
            .iter()
            .filter(move |(_, &r)| r == role)
            .map(|(k, _)| k.as_str())
    }
}

/// Seed for repeat `experiment_id` of an experiment.
pub fn repeat_seed(base_seed: u64, experiment_id: u64) -> u64 {
    base_seed.wrapping_add(experiment_id)
}

/// Unit at which the ratio protocol assigns items.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    #[default]
    Paper,
    Sentence,
}

impl std::str::FromStr for Granularity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Granularity::Paper),
            "sentence" => Ok(Granularity::Sentence),
            other => Err(Error::Usage(format!(
                "granularity must be paper or sentence, got {other:?}"
            ))),
        }
    }
}

/// Split keys for `docs`: doc ids at paper granularity, `<doc_id>#<index>`
/// (0-based sentence index) at sentence granularity.
pub fn split_units(docs: &[AnnotatedDocument], granularity: Granularity) -> Vec<String> {
    match granularity {
        Granularity::Paper => docs.iter().map(|d| d.doc_id.clone()).collect(),
        Granularity::Sentence => docs
            .iter()
            .flat_map(|d| (0..d.sentences.len()).map(move |i| sentence_key(&d.doc_id, i)))
            .collect(),
    }
}

pub fn sentence_key(doc_id: &str, index: usize) -> String {
    format!("{doc_id}#{index}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessSplitConfig {
    /// Per-process test-paper counts; processes not listed use the default.
    pub test_counts: BTreeMap<String, usize>,
    pub default_test_count: usize,
    pub validation_per_process: usize,
}

impl Default for ProcessSplitConfig {
    fn default() -> Self {
        ProcessSplitConfig {
            test_counts: BTreeMap::from([("STHE".to_string(), 2)]),
            default_test_count: 3,
            validation_per_process: 1,
        }
    }
}

impl ProcessSplitConfig {
    pub fn test_count(&self, process: &str) -> usize {
        self.test_counts
            .get(process)
            .copied()
            .unwrap_or(self.default_test_count)
    }

    fn descriptor(&self, processes: &BTreeSet<&str>) -> String {
        let tests: Vec<String> = processes
            .iter()
            .map(|p| format!("{p}:{}", self.test_count(p)))
            .collect();
        format!(
            "process(test={};validation={})",
            tests.join(","),
            self.validation_per_process
        )
    }
}

/// Per-process paper-level split. Processes are visited in sorted tag order
/// and each process's papers are shuffled with the shared seeded stream.
pub fn split_process_corpus(
    docs: &[AnnotatedDocument],
    config: &ProcessSplitConfig,
    seed: u64,
) -> Result<SplitManifest> {
    let mut by_process: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for d in docs {
        by_process
            .entry(d.process_tag.as_str())
            .or_default()
            .push(d.doc_id.as_str());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = BTreeMap::new();
    for (process, ids) in &by_process {
        let test = config.test_count(process);
        let val = config.validation_per_process;
        let required = test + val + 1;
        if ids.len() < required {
            return Err(Error::InsufficientPapers {
                process: process.to_string(),
                available: ids.len(),
                required,
            });
        }
        let mut shuffled = ids.clone();
        shuffled.shuffle(&mut rng);
        for (i, id) in shuffled.into_iter().enumerate() {
            let role = if i < test {
                Role::Test
            } else if i < test + val {
                Role::Validation
            } else {
                Role::Train
            };
            assignments.insert(id.to_string(), role);
        }
    }
    let processes: BTreeSet<&str> = by_process.keys().copied().collect();
    Ok(SplitManifest {
        experiment_id: 1,
        seed,
        protocol: config.descriptor(&processes),
        assignments,
    })
}

/// Train/validation split of `items` by `ratio`, train size rounded down.
pub fn split_ratio(items: &[String], seed: u64, ratio: (usize, usize)) -> Result<SplitManifest> {
    if items.is_empty() {
        return Err(Error::EmptyInput("nothing to split".into()));
    }
    let (train_w, val_w) = ratio;
    if train_w + val_w == 0 {
        return Err(Error::Usage("split ratio must have a positive total".into()));
    }
    let mut unique = HashSet::new();
    if let Some(dup) = items.iter().find(|i| !unique.insert(i.as_str())) {
        return Err(Error::KeyMismatch(format!("split item {dup:?} listed twice")));
    }
    let train_n = train_w * items.len() / (train_w + val_w);
    let mut shuffled: Vec<&String> = items.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let assignments = shuffled
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            let role = if i < train_n { Role::Train } else { Role::Validation };
            (id.clone(), role)
        })
        .collect();
    Ok(SplitManifest {
        experiment_id: 1,
        seed,
        protocol: format!("ratio({train_w}:{val_w})"),
        assignments,
    })
}

pub fn parse_ratio(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Usage(format!("ratio must look like 3:1, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Checks that `manifest` assigns every unit of `docs` exactly once.
pub fn check_partition(
    docs: &[AnnotatedDocument],
    manifest: &SplitManifest,
    granularity: Granularity,
) -> Result<()> {
    let units = split_units(docs, granularity);
    let unit_set: BTreeSet<&str> = units.iter().map(String::as_str).collect();
    if let Some(missing) = unit_set.iter().find(|u| !manifest.assignments.contains_key(**u)) {
        return Err(Error::KeyMismatch(format!("{missing:?} has no split assignment")));
    }
    if let Some(extra) = manifest.assignments.keys().find(|k| !unit_set.contains(k.as_str())) {
        return Err(Error::KeyMismatch(format!("manifest assigns unknown unit {extra:?}")));
    }
    Ok(())
}

/// Documents (or, at sentence granularity, their sentence subsets) that the
/// manifest assigns to `role`, in corpus order.
pub fn select(
    docs: &[AnnotatedDocument],
    manifest: &SplitManifest,
    granularity: Granularity,
    role: Role,
) -> Vec<AnnotatedDocument> {
    match granularity {
        Granularity::Paper => docs
            .iter()
            .filter(|d| manifest.assignments.get(&d.doc_id) == Some(&role))
            .cloned()
            .collect(),
        Granularity::Sentence => docs
            .iter()
            .filter_map(|d| {
                let sentences: Vec<_> = d
                    .sentences
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| {
                        manifest.assignments.get(&sentence_key(&d.doc_id, *i)) == Some(&role)
                    })
                    .map(|(_, s)| s.clone())
                    .collect();
                (!sentences.is_empty()).then(|| AnnotatedDocument {
                    doc_id: d.doc_id.clone(),
                    process_tag: d.process_tag.clone(),
                    sentences,
                })
            })
            .collect(),
    }
}

/// Splits a corpus into (everything except `excluded`, only `excluded`).
pub fn leave_one_process_out(
    docs: &[AnnotatedDocument],
    excluded: &str,
) -> Result<(Vec<AnnotatedDocument>, Vec<AnnotatedDocument>)> {
    if !docs.iter().any(|d| d.process_tag == excluded) {
        return Err(Error::UnknownProcess(excluded.to_string()));
    }
    Ok(docs.iter().cloned().partition(|d| d.process_tag != excluded))
}

/// `stats(rest) + stats(excluded)`; equals the stats of the full corpus.
pub fn combined_stats(a: &CorpusStats, b: &CorpusStats) -> CorpusStats {
    let mut out = a.clone();
    out += b;
    out
}
