//! Span decoding from per-token start/end scores.
//!
//! Token position 1 is the classifier token. The decoder picks the pair
//! `(k, l)` maximising `s_start[k] + s_end[l]` over `2 <= k <= l`, or the
//! pair `(1, 1)`, which means "no definition". Ties prefer `(1, 1)`, then
//! the smaller `k`, then the smaller `l`. Scores are compared as raw sums
//! without any renormalisation.

use serde::{Deserialize, Serialize};

use crate::corpus::{char_len, CharSpan, Sentence};
use crate::error::{Error, Result};
use crate::evaluator::Prediction;

pub const TARGET_TOKEN: &str = "[target]";

#[derive(Debug, Clone, PartialEq)]
pub struct SpanScores {
    tokens: Vec<String>,
    s_start: Vec<f64>,
    s_end: Vec<f64>,
}

impl SpanScores {
    pub fn new(tokens: Vec<String>, s_start: Vec<f64>, s_end: Vec<f64>) -> Result<Self> {
        check_vectors(&s_start, &s_end)?;
        if tokens.len() != s_start.len() {
            return Err(Error::LengthMismatch(format!(
                "{} tokens but {} scores",
                tokens.len(),
                s_start.len()
            )));
        }
        Ok(SpanScores { tokens, s_start, s_end })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn s_start(&self) -> &[f64] {
        &self.s_start
    }

    pub fn s_end(&self) -> &[f64] {
        &self.s_end
    }

    pub fn len(&self) -> usize {
        self.s_start.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_start.is_empty()
    }
}

fn check_vectors(s_start: &[f64], s_end: &[f64]) -> Result<()> {
    if s_start.len() != s_end.len() {
        return Err(Error::LengthMismatch(format!(
            "s_start has {} entries, s_end has {}",
            s_start.len(),
            s_end.len()
        )));
    }
    if s_start.is_empty() {
        return Err(Error::InvalidScores("score vectors are empty".into()));
    }
    if let Some(i) = s_start.iter().chain(s_end).position(|x| !x.is_finite()) {
        return Err(Error::InvalidScores(format!("non-finite score at flat index {i}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpanKind {
    NoDefinition,
    /// Inclusive 1-based token positions with `2 <= start <= end`.
    Span { start: usize, end: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodedSpan {
    pub kind: SpanKind,
    pub score: f64,
}

impl DecodedSpan {
    /// Bitwise equality, including the score's bit pattern.
    pub fn same_bits(&self, other: &DecodedSpan) -> bool {
        self.kind == other.kind && self.score.to_bits() == other.score.to_bits()
    }
}

/// Linear-time decode.
pub fn decode(scores: &SpanScores) -> DecodedSpan {
    decode_unchecked(&scores.s_start, &scores.s_end)
}

/// Decode directly from two score vectors, validating them first.
pub fn decode_vectors(s_start: &[f64], s_end: &[f64]) -> Result<DecodedSpan> {
    check_vectors(s_start, s_end)?;
    Ok(decode_unchecked(s_start, s_end))
}

fn decode_unchecked(start: &[f64], end: &[f64]) -> DecodedSpan {
    let n = start.len();
    let cls = start[0] + end[0];
    let no_def = DecodedSpan {
        kind: SpanKind::NoDefinition,
        score: cls,
    };
    if n == 1 {
        return no_def;
    }

    // Best span sum: for each end position, the best start is the prefix max.
    let mut prefix_max = f64::NEG_INFINITY;
    let mut best = f64::NEG_INFINITY;
    for l in 1..n {
        if start[l] > prefix_max {
            prefix_max = start[l];
        }
        let cand = prefix_max + end[l];
        if cand > best {
            best = cand;
        }
    }
    if cls >= best {
        return no_def;
    }

    // Recover the tie-broken pair. Rounding is monotone, so the best sum
    // reachable from start k is start[k] + max(end[k..]); taking the first k
    // that reaches `best` and then the first l matches exhaustive search even
    // when distinct pairs round to the same sum.
    let mut suffix_max = vec![f64::NEG_INFINITY; n + 1];
    for i in (1..n).rev() {
        suffix_max[i] = if end[i] > suffix_max[i + 1] {
            end[i]
        } else {
            suffix_max[i + 1]
        };
    }
    let k = (1..n)
        .find(|&k| start[k] + suffix_max[k] == best)
        .expect("best is attained by some start");
    let l = (k..n)
        .find(|&l| start[k] + end[l] == best)
        .expect("best is attained by some end");
    DecodedSpan {
        kind: SpanKind::Span {
            start: k + 1,
            end: l + 1,
        },
        score: start[k] + end[l],
    }
}

/// Exhaustive O(d²) decode used as a test oracle.
#[allow(clippy::needless_range_loop)]
pub fn decode_bruteforce(scores: &SpanScores) -> DecodedSpan {
    let (start, end) = (&scores.s_start, &scores.s_end);
    let n = start.len();
    let mut best = DecodedSpan {
        kind: SpanKind::NoDefinition,
        score: start[0] + end[0],
    };
    for k in 1..n {
        for l in k..n {
            let s = start[k] + end[l];
            if s > best.score {
                best = DecodedSpan {
                    kind: SpanKind::Span { start: k + 1, end: l + 1 },
                    score: s,
                };
            }
        }
    }
    best
}

/// A sentence with its target variable replaced by [`TARGET_TOKEN`], plus
/// the mapping between marked-text and original character offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetMarking {
    pub text: String,
    /// Target span in the original sentence.
    pub original: CharSpan,
    /// Target token span in the marked text.
    pub marked: CharSpan,
}

pub fn mark_target(sentence: &Sentence, var_id: &str) -> Result<TargetMarking> {
    let v = sentence.variable(var_id).ok_or_else(|| Error::UnknownVariable {
        var_id: var_id.to_string(),
    })?;
    let chars: Vec<char> = sentence.text.chars().collect();
    let mut text: String = chars[..v.span.start].iter().collect();
    text.push_str(TARGET_TOKEN);
    text.extend(&chars[v.span.end..]);
    let marked_len = char_len(TARGET_TOKEN);
    Ok(TargetMarking {
        text,
        original: v.span,
        marked: CharSpan::new(v.span.start, v.span.start + marked_len),
    })
}

impl TargetMarking {
    /// Maps an interval of the marked text back to the original sentence.
    /// Any part touching the target token maps onto the variable text.
    pub fn to_original(&self, span: CharSpan) -> CharSpan {
        let map_start = |p: usize| {
            if p < self.marked.start {
                p
            } else if p < self.marked.end {
                self.original.start
            } else {
                p - self.marked.end + self.original.end
            }
        };
        let map_end = |p: usize| {
            if p <= self.marked.start {
                p
            } else if p <= self.marked.end {
                self.original.end
            } else {
                p - self.marked.end + self.original.end
            }
        };
        CharSpan::new(map_start(span.start), map_end(span.end))
    }

    /// Maps an interval of the original sentence into the marked text.
    pub fn to_marked(&self, span: CharSpan) -> CharSpan {
        let map_start = |p: usize| {
            if p < self.original.start {
                p
            } else if p < self.original.end {
                self.marked.start
            } else {
                p - self.original.end + self.marked.end
            }
        };
        let map_end = |p: usize| {
            if p <= self.original.start {
                p
            } else if p <= self.original.end {
                self.marked.end
            } else {
                p - self.original.end + self.marked.end
            }
        };
        CharSpan::new(map_start(span.start), map_end(span.end))
    }
}

/// Character interval of every token in the original sentence; `None` for
/// special tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OffsetMap(pub Vec<Option<CharSpan>>);

impl OffsetMap {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Character interval covered by the decoded tokens. Special tokens inside
/// the span are skipped; a span made only of special tokens projects to
/// nothing, like an explicit no-definition answer.
pub fn project_span(decoded: &DecodedSpan, offsets: &OffsetMap) -> Result<Option<CharSpan>> {
    let SpanKind::Span { start, end } = decoded.kind else {
        return Ok(None);
    };
    if end > offsets.len() {
        return Err(Error::LengthMismatch(format!(
            "stale offset map: span ends at token {end}, map has {} entries",
            offsets.len()
        )));
    }
    let covered: Vec<CharSpan> = offsets.0[start - 1..end].iter().flatten().copied().collect();
    Ok(match (covered.first(), covered.last()) {
        (Some(first), Some(last)) => Some(CharSpan::new(first.start, last.end.max(first.start))),
        _ => None,
    })
}

/// One line of a score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRecord {
    pub doc_id: String,
    pub var_id: String,
    pub tokens: Vec<String>,
    pub s_start: Vec<f64>,
    pub s_end: Vec<f64>,
    pub offset_map: Vec<Option<[usize; 2]>>,
}

impl ScoreRecord {
    pub fn scores(&self) -> Result<SpanScores> {
        SpanScores::new(self.tokens.clone(), self.s_start.clone(), self.s_end.clone())
    }

    pub fn offsets(&self) -> Result<OffsetMap> {
        if self.offset_map.len() != self.tokens.len() {
            return Err(Error::LengthMismatch(format!(
                "stale offset map: {} entries for {} tokens",
                self.offset_map.len(),
                self.tokens.len()
            )));
        }
        self.offset_map
            .iter()
            .map(|o| match o {
                None => Ok(None),
                Some([s, e]) if s <= e => Ok(Some(CharSpan::new(*s, *e))),
                Some([s, e]) => Err(Error::MalformedInterval { start: *s, end: *e }),
            })
            .collect::<Result<Vec<_>>>()
            .map(OffsetMap)
    }

    /// Decodes and projects this record into a prediction.
    pub fn predict(&self) -> Result<Prediction> {
        let with_key = |e: Error| Error::InvalidScores(format!("{}/{}: {e}", self.doc_id, self.var_id));
        let scores = self.scores().map_err(with_key)?;
        let offsets = self.offsets().map_err(with_key)?;
        let decoded = decode(&scores);
        Ok(Prediction {
            doc_id: self.doc_id.clone(),
            var_id: self.var_id.clone(),
            predicted: project_span(&decoded, &offsets).map_err(with_key)?,
        })
    }
}
