//! Annotated documents, harvested variable-definition pairs and the corpus
//! JSONL format.
//!
//! All offsets are Unicode scalar-value indices into a sentence's text and
//! every interval is half-open. A definition always lives in the same
//! sentence as the variable it defines.

use std::collections::{BTreeMap, HashSet};
use std::ops::AddAssign;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

/// Half-open character interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// `self` fully covers `other`.
    pub fn contains(&self, other: &CharSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &CharSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableMention {
    pub var_id: String,
    pub span: CharSpan,
    /// Text at `span`; derived from the sentence on load.
    pub surface: String,
    pub definition: Option<CharSpan>,
    /// Whether the mention is an extraction target. Carried as annotation.
    pub is_target: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub variables: Vec<VariableMention>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub process_tag: String,
    pub sentences: Vec<Sentence>,
}

/// A (variable, definition) pair harvested from annotated training data.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarDefPair {
    pub variable: String,
    pub definition: String,
    pub origin: PairOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairOrigin {
    pub doc_id: String,
    pub var_id: String,
}

/// Number of Unicode scalar values in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Substring by scalar-value offsets. Out-of-range positions are clamped.
pub fn char_slice(text: &str, span: CharSpan) -> String {
    text.chars()
        .skip(span.start)
        .take(span.len())
        .collect()
}

impl Sentence {
    pub fn char_len(&self) -> usize {
        char_len(&self.text)
    }

    pub fn slice(&self, span: CharSpan) -> String {
        char_slice(&self.text, span)
    }

    pub fn variable(&self, var_id: &str) -> Option<&VariableMention> {
        self.variables.iter().find(|v| v.var_id == var_id)
    }

    pub fn definition_text(&self, mention: &VariableMention) -> Option<String> {
        mention.definition.map(|d| self.slice(d))
    }

    fn validate(&self, doc_id: &str) -> Result<()> {
        let len = self.char_len();
        for v in &self.variables {
            if v.span.is_empty() || v.span.end > len {
                return Err(Error::invariant(
                    doc_id,
                    &v.var_id,
                    format!(
                        "variable span [{}, {}) outside sentence of length {len}",
                        v.span.start, v.span.end
                    ),
                ));
            }
            if self.slice(v.span) != v.surface {
                return Err(Error::invariant(
                    doc_id,
                    &v.var_id,
                    "surface does not match the text at its span",
                ));
            }
            if let Some(d) = v.definition {
                if d.is_empty() || d.end > len {
                    return Err(Error::invariant(
                        doc_id,
                        &v.var_id,
                        format!(
                            "definition [{}, {}) empty or outside sentence of length {len}",
                            d.start, d.end
                        ),
                    ));
                }
                if d.overlaps(&v.span) {
                    return Err(Error::invariant(
                        doc_id,
                        &v.var_id,
                        "definition overlaps the variable span",
                    ));
                }
            }
        }
        let mut spans: Vec<(&CharSpan, &str)> =
            self.variables.iter().map(|v| (&v.span, v.var_id.as_str())).collect();
        spans.sort();
        for pair in spans.windows(2) {
            if pair[0].0.overlaps(pair[1].0) {
                return Err(Error::invariant(
                    doc_id,
                    pair[1].1,
                    format!("variable span overlaps variable {:?}", pair[0].1),
                ));
            }
        }
        Ok(())
    }
}

impl AnnotatedDocument {
    /// Checks every type invariant. var_ids must be unique within a document
    /// because predictions are keyed by `(doc_id, var_id)`.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for s in &self.sentences {
            s.validate(&self.doc_id)?;
            for v in &s.variables {
                if !seen.insert(v.var_id.as_str()) {
                    return Err(Error::invariant(
                        &self.doc_id,
                        &v.var_id,
                        "var_id repeated within document",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn mentions(&self) -> impl Iterator<Item = (&Sentence, &VariableMention)> {
        self.sentences
            .iter()
            .flat_map(|s| s.variables.iter().map(move |v| (s, v)))
    }

    pub fn targets(&self) -> impl Iterator<Item = (&Sentence, &VariableMention)> {
        self.mentions().filter(|(_, v)| v.is_target)
    }
}

/// Validates a whole corpus: per-document invariants plus doc_id uniqueness.
pub fn validate_corpus(docs: &[AnnotatedDocument]) -> Result<()> {
    let mut ids = HashSet::new();
    for d in docs {
        if !ids.insert(d.doc_id.as_str()) {
            return Err(Error::DuplicateDocId(d.doc_id.clone()));
        }
        d.validate()?;
    }
    Ok(())
}

// Wire format. Field order here is the on-disk key order.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRecord {
    doc_id: String,
    process_tag: String,
    sentences: Vec<SentenceRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SentenceRecord {
    text: String,
    variables: Vec<VariableRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableRecord {
    var_id: String,
    start: usize,
    end: usize,
    definition: Option<CharSpan>,
    is_target: bool,
}

impl From<&AnnotatedDocument> for DocumentRecord {
    fn from(d: &AnnotatedDocument) -> Self {
        DocumentRecord {
            doc_id: d.doc_id.clone(),
            process_tag: d.process_tag.clone(),
            sentences: d
                .sentences
                .iter()
                .map(|s| SentenceRecord {
                    text: s.text.clone(),
                    variables: s
                        .variables
                        .iter()
                        .map(|v| VariableRecord {
                            var_id: v.var_id.clone(),
                            start: v.span.start,
                            end: v.span.end,
                            definition: v.definition,
                            is_target: v.is_target,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl From<DocumentRecord> for AnnotatedDocument {
    fn from(r: DocumentRecord) -> Self {
        AnnotatedDocument {
            doc_id: r.doc_id,
            process_tag: r.process_tag,
            sentences: r
                .sentences
                .into_iter()
                .map(|s| {
                    let variables = s
                        .variables
                        .into_iter()
                        .map(|v| {
                            let span = CharSpan::new(v.start, v.end);
                            VariableMention {
                                surface: char_slice(&s.text, span),
                                var_id: v.var_id,
                                span,
                                definition: v.definition,
                                is_target: v.is_target,
                            }
                        })
                        .collect();
                    Sentence {
                        text: s.text,
                        variables,
                    }
                })
                .collect(),
        }
    }
}

/// Serializes one document as a single JSONL line (no trailing newline).
pub fn document_to_json(doc: &AnnotatedDocument) -> String {
    serde_json::to_string(&DocumentRecord::from(doc)).expect("corpus records always serialize")
}

/// Parses and validates a corpus from JSONL text. `origin` is only used in
/// error messages.
pub fn parse_corpus(text: &str, origin: &Path) -> Result<Vec<AnnotatedDocument>> {
    let mut docs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        docs.push(AnnotatedDocument::from(record));
    }
    validate_corpus(&docs)?;
    Ok(docs)
}

pub fn load_corpus(path: &Path) -> Result<Vec<AnnotatedDocument>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, path)
}

pub fn save_corpus(path: &Path, docs: &[AnnotatedDocument]) -> Result<()> {
    let records: Vec<DocumentRecord> = docs.iter().map(DocumentRecord::from).collect();
    jsonl::write_jsonl(path, &records)
}

/// One pair per mention with a definition, in document then mention order.
pub fn harvest_pairs(docs: &[AnnotatedDocument]) -> Vec<VarDefPair> {
    docs.iter()
        .flat_map(|d| {
            d.mentions().filter_map(move |(s, v)| {
                s.definition_text(v).map(|definition| VarDefPair {
                    variable: v.surface.clone(),
                    definition,
                    origin: PairOrigin {
                        doc_id: d.doc_id.clone(),
                        var_id: v.var_id.clone(),
                    },
                })
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessStats {
    pub num_docs: usize,
    pub num_variables: usize,
    pub num_with_definition: usize,
}

impl AddAssign for ProcessStats {
    fn add_assign(&mut self, rhs: Self) {
        self.num_docs += rhs.num_docs;
        self.num_variables += rhs.num_variables;
        self.num_with_definition += rhs.num_with_definition;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    #[serde(flatten)]
    pub totals: ProcessStats,
    pub per_process: BTreeMap<String, ProcessStats>,
}

impl CorpusStats {
    pub fn num_docs(&self) -> usize {
        self.totals.num_docs
    }
    pub fn num_variables(&self) -> usize {
        self.totals.num_variables
    }
    pub fn num_with_definition(&self) -> usize {
        self.totals.num_with_definition
    }
}

impl AddAssign<&CorpusStats> for CorpusStats {
    fn add_assign(&mut self, rhs: &CorpusStats) {
        self.totals += rhs.totals;
        for (tag, s) in &rhs.per_process {
            *self.per_process.entry(tag.clone()).or_default() += *s;
        }
    }
}

/// Counts documents, variable mentions and mentions with a definition.
pub fn corpus_stats(docs: &[AnnotatedDocument]) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for d in docs {
        let mut row = ProcessStats {
            num_docs: 1,
            ..Default::default()
        };
        for (_, v) in d.mentions() {
            row.num_variables += 1;
            if v.definition.is_some() {
                row.num_with_definition += 1;
            }
        }
        stats.totals += row;
        *stats.per_process.entry(d.process_tag.clone()).or_default() += row;
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<AnnotatedDocument>> {
        parse_corpus(text, Path::new("<mem>"))
    }

    const ONE: &str = r#"{"doc_id":"d1","process_tag":"CSTR","sentences":[{"text":"C is the concentration.","variables":[{"var_id":"v1","start":0,"end":1,"definition":{"start":9,"end":22},"is_target":true}]}]}"#;

    #[test]
    fn single_document_round_trips() {
        let docs = parse(ONE).unwrap();
        assert_eq!(docs.len(), 1);
        let s = &docs[0].sentences[0];
        assert_eq!(s.variables.len(), 1);
        assert_eq!(s.variables[0].surface, "C");
        assert_eq!(s.definition_text(&s.variables[0]).unwrap(), "concentration");
        assert_eq!(document_to_json(&docs[0]), ONE);
    }

    #[test]
    fn harvest_single_pair() {
        let docs = parse(ONE).unwrap();
        let pairs = harvest_pairs(&docs);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].variable, "C");
        assert_eq!(pairs[0].definition, "concentration");
        assert_eq!(pairs[0].origin.doc_id, "d1");
    }

    #[test]
    fn harvest_without_definitions_is_empty() {
        let text = ONE.replace(r#"{"start":9,"end":22}"#, "null");
        let docs = parse(&text).unwrap();
        assert!(harvest_pairs(&docs).is_empty());
        let st = corpus_stats(&docs);
        assert_eq!((st.num_docs(), st.num_variables(), st.num_with_definition()), (1, 1, 0));
    }

    #[test]
    fn definition_overlapping_variable_is_rejected() {
        let text = ONE.replace(r#"{"start":9,"end":22}"#, r#"{"start":0,"end":4}"#);
        match parse(&text) {
            Err(Error::Invariant { doc_id, var_id, .. }) => {
                assert_eq!(doc_id, "d1");
                assert_eq!(var_id, "v1");
            }
            other => panic!("expected invariant error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_bounds_and_empty_spans_are_rejected() {
        let oob = ONE.replace(r#""end":22}"#, r#""end":99}"#);
        assert!(matches!(parse(&oob), Err(Error::Invariant { .. })));
        let empty = ONE.replace(r#""start":0,"end":1"#, r#""start":1,"end":1"#);
        assert!(matches!(parse(&empty), Err(Error::Invariant { .. })));
    }

    #[test]
    fn overlapping_variables_are_rejected() {
        let text = r#"{"doc_id":"d","process_tag":"X","sentences":[{"text":"ab cd","variables":[{"var_id":"a","start":0,"end":2,"definition":null,"is_target":true},{"var_id":"b","start":1,"end":3,"definition":null,"is_target":true}]}]}"#;
        assert!(matches!(parse(text), Err(Error::Invariant { .. })));
    }

    #[test]
    fn duplicate_doc_id_is_rejected() {
        let text = format!("{ONE}\n{ONE}\n");
        assert!(matches!(parse(&text), Err(Error::DuplicateDocId(id)) if id == "d1"));
    }

    #[test]
    fn parse_error_reports_line_number() {
        let text = format!("{ONE}\n{{not json\n");
        match parse(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = ONE.replace(r#""doc_id":"d1","#, r#""doc_id":"d1","extra":1,"#);
        assert!(matches!(parse(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn offsets_are_scalar_values() {
        let text = r#"{"doc_id":"d","process_tag":"X","sentences":[{"text":"θ is the température.","variables":[{"var_id":"v","start":0,"end":1,"definition":{"start":9,"end":20},"is_target":true}]}]}"#;
        let docs = parse(text).unwrap();
        let s = &docs[0].sentences[0];
        assert_eq!(s.variables[0].surface, "θ");
        assert_eq!(s.definition_text(&s.variables[0]).unwrap(), "température");
    }

    #[test]
    fn empty_corpus_stats() {
        let st = corpus_stats(&[]);
        assert_eq!(st, CorpusStats::default());
        assert!(st.per_process.is_empty());
    }
}
