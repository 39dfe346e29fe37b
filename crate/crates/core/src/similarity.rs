//! Simpson (overlap) coefficient between the definition vocabularies of
//! two corpora: `|A ∩ B| / min(|A|, |B|)`.
//!
//! Vocabulary words come from gold definitions only. Text is lowercased,
//! punctuation becomes whitespace, and the result is split on whitespace
//! before stop words are dropped. Reported percentages depend on the
//! stop-word list in use.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::AnnotatedDocument;
use crate::error::{Error, Result};

pub const DEFAULT_STOPWORDS: [&str; 12] = [
    "of", "and", "the", "a", "an", "in", "for", "to", "at", "on", "by", "with",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords(BTreeSet<String>);

impl Default for StopWords {
    fn default() -> Self {
        StopWords(DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect())
    }
}

impl StopWords {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopWords(
            words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        StopWords::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(StopWords::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinitionVocabulary {
    words: BTreeSet<String>,
}

impl DefinitionVocabulary {
    pub fn from_definitions<'a, I>(definitions: I, stopwords: &StopWords) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut words = BTreeSet::new();
        for def in definitions {
            let cleaned: String = def
                .to_lowercase()
                .chars()
                .map(|c| if is_punctuation(c) { ' ' } else { c })
                .collect();
            words.extend(
                cleaned
                    .split_whitespace()
                    .filter(|w| !stopwords.contains(w))
                    .map(str::to_string),
            );
        }
        DefinitionVocabulary { words }
    }

    pub fn words(&self) -> &BTreeSet<String> {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '‘' | '’' | '“' | '”' | '–' | '—' | '…' | '·' | '«' | '»' | '′' | '″'
        )
}

/// Vocabulary over every gold definition in `docs`.
pub fn build_vocabulary(docs: &[AnnotatedDocument], stopwords: &StopWords) -> DefinitionVocabulary {
    let definitions: Vec<String> = docs
        .iter()
        .flat_map(|d| d.mentions().filter_map(|(s, v)| s.definition_text(v)))
        .collect();
    DefinitionVocabulary::from_definitions(definitions.iter().map(String::as_str), stopwords)
}

/// `None` when either vocabulary is empty.
pub fn simpson(a: &DefinitionVocabulary, b: &DefinitionVocabulary) -> Option<f64> {
    let smaller = a.len().min(b.len());
    if smaller == 0 {
        return None;
    }
    let shared = a.words.intersection(&b.words).count();
    Some(shared as f64 / smaller as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub names: Vec<String>,
    /// Row-major ratios in `[0, 1]`; `None` where a vocabulary is empty.
    pub values: Vec<Vec<Option<f64>>>,
}

impl SimilarityMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.values[i][j]
    }

    /// Off-diagonal cell with the largest value, as `(row, col, value)` with
    /// `row < col`.
    pub fn max_off_diagonal(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.names.len() {
            for j in i + 1..self.names.len() {
                if let Some(v) = self.values[i][j] {
                    if best.is_none_or(|(_, _, b)| v > b) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        best
    }

    /// Same matrix in percent with one decimal, for display.
    pub fn to_percent(&self) -> PercentMatrix {
        PercentMatrix {
            names: self.names.clone(),
            percent: self
                .values
                .iter()
                .map(|row| row.iter().map(|v| v.map(|x| (x * 1000.0).round() / 10.0)).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentMatrix {
    pub names: Vec<String>,
    pub percent: Vec<Vec<Option<f64>>>,
}

/// Pairwise Simpson coefficients. The diagonal is 1 for non-empty
/// vocabularies.
pub fn similarity_matrix(
    corpora: &[(String, Vec<AnnotatedDocument>)],
    stopwords: &StopWords,
) -> Result<SimilarityMatrix> {
    if corpora.len() < 2 {
        return Err(Error::Usage("similarity needs at least two corpora".into()));
    }
    let vocabs: Vec<DefinitionVocabulary> = corpora
        .iter()
        .map(|(_, docs)| build_vocabulary(docs, stopwords))
        .collect();
    let values = vocabs
        .iter()
        .map(|a| vocabs.iter().map(|b| simpson(a, b)).collect())
        .collect();
    Ok(SimilarityMatrix {
        names: corpora.iter().map(|(n, _)| n.clone()).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(defs: &[&str]) -> DefinitionVocabulary {
        DefinitionVocabulary::from_definitions(defs.iter().copied(), &StopWords::default())
    }

    fn set(words: &[&str]) -> DefinitionVocabulary {
        DefinitionVocabulary::from_definitions(words.iter().copied(), &StopWords::new::<_, &str>([]))
    }

    #[test]
    fn worked_vocabulary() {
        let v = vocab(&["velocity of air", "temperature of reactor"]);
        let expect: BTreeSet<String> =
            ["velocity", "air", "temperature", "reactor"].iter().map(|s| s.to_string()).collect();
        assert_eq!(v.words(), &expect);
    }

    #[test]
    fn stop_words_and_punctuation() {
        assert!(vocab(&["of and"]).is_empty());
        assert!(vocab(&[]).is_empty());
        let v = vocab(&["Heat-transfer (overall), of the Wall."]);
        let words: Vec<&str> = v.words().iter().map(String::as_str).collect();
        assert_eq!(words, ["heat", "overall", "transfer", "wall"]);
    }

    #[test]
    fn simpson_examples() {
        let a = set(&["a", "b", "c"]);
        let b = set(&["b", "c", "d", "e"]);
        assert_eq!(simpson(&a, &a), Some(1.0));
        assert_eq!(simpson(&a, &set(&["x", "y"])), Some(0.0));
        assert_eq!(simpson(&a, &b), Some(2.0 / 3.0));
        assert_eq!(simpson(&a, &b), simpson(&b, &a));
        assert_eq!(simpson(&a, &DefinitionVocabulary::default()), None);
    }

    #[test]
    fn stopword_file_parsing() {
        let sw = StopWords::parse("# list\nOf\n\n and \n");
        assert!(sw.contains("of") && sw.contains("and") && !sw.contains("the"));
    }

    #[test]
    fn matrix_needs_two_corpora() {
        assert!(similarity_matrix(&[("a".into(), vec![])], &StopWords::default()).is_err());
    }

    #[test]
    fn percent_rounding() {
        let m = SimilarityMatrix {
            names: vec!["a".into(), "b".into()],
            values: vec![vec![Some(1.0), Some(0.42149)], vec![Some(0.42149), None]],
        };
        let p = m.to_percent();
        assert_eq!(p.percent[0], vec![Some(100.0), Some(42.1)]);
        assert_eq!(p.percent[1][1], None);
        assert_eq!(m.max_off_diagonal(), Some((0, 1, 0.42149)));
    }
}
