//! Toolkit for variable-definition extraction corpora.
//!
//! - [`corpus`]: annotated documents, the corpus JSONL format, pair harvesting and statistics
//! - [`templates`]: `[VAR_i]`/`[DEF_i]` template sets, histograms and seeded subsetting
//! - [`augmentor`]: template-filling data generation
//! - [`splitter`]: per-process and ratio split protocols, leave-one-process-out
//! - [`decoder`]: start/end span decoding, target marking, offset projection
//! - [`evaluator`]: output classes, metrics, aggregation and baseline diffs
//! - [`similarity`]: Simpson coefficient over definition vocabularies
//! - [`experiment`]: repeated-split experiment runner driven by [`config::RunConfig`]

pub mod augmentor;
pub mod config;
pub mod corpus;
pub mod decoder;
pub mod error;
pub mod evaluator;
pub mod experiment;
pub mod jsonl;
pub mod similarity;
pub mod splitter;
pub mod templates;

pub use error::{Error, Result};
