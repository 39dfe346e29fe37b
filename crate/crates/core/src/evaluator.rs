//! Judging predictions against gold annotation.
//!
//! Each extraction target falls into exactly one of seven classes. A
//! prediction is correct when its character interval equals the gold
//! interval after both are trimmed of surrounding whitespace. Wrong spans
//! where a definition exists are split by containment: wider than gold,
//! narrower than gold, or anything else.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedDocument, CharSpan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutputClass {
    #[serde(rename = "TP")]
    TruePositive,
    #[serde(rename = "FP1_wide")]
    Fp1Wide,
    #[serde(rename = "FP1_narrow")]
    Fp1Narrow,
    #[serde(rename = "FP1_other")]
    Fp1Other,
    #[serde(rename = "FP2")]
    Fp2,
    #[serde(rename = "FN")]
    FalseNegative,
    #[serde(rename = "TN")]
    TrueNegative,
}

impl OutputClass {
    pub const ALL: [OutputClass; 7] = [
        OutputClass::TruePositive,
        OutputClass::Fp1Wide,
        OutputClass::Fp1Narrow,
        OutputClass::Fp1Other,
        OutputClass::Fp2,
        OutputClass::FalseNegative,
        OutputClass::TrueNegative,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            OutputClass::TruePositive => "TP",
            OutputClass::Fp1Wide => "FP1_wide",
            OutputClass::Fp1Narrow => "FP1_narrow",
            OutputClass::Fp1Other => "FP1_other",
            OutputClass::Fp2 => "FP2",
            OutputClass::FalseNegative => "FN",
            OutputClass::TrueNegative => "TN",
        }
    }

    pub fn is_correct(&self) -> bool {
        matches!(self, OutputClass::TruePositive | OutputClass::TrueNegative)
    }
}

fn check_interval(span: Option<CharSpan>) -> Result<()> {
    match span {
        Some(s) if s.is_empty() => Err(Error::MalformedInterval {
            start: s.start,
            end: s.end,
        }),
        _ => Ok(()),
    }
}

pub fn classify(gold: Option<CharSpan>, predicted: Option<CharSpan>) -> Result<OutputClass> {
    check_interval(gold)?;
    check_interval(predicted)?;
    Ok(match (gold, predicted) {
        (Some(g), Some(p)) if p == g => OutputClass::TruePositive,
        (Some(g), Some(p)) if p.contains(&g) => OutputClass::Fp1Wide,
        (Some(g), Some(p)) if g.contains(&p) => OutputClass::Fp1Narrow,
        (Some(_), Some(_)) => OutputClass::Fp1Other,
        (None, Some(_)) => OutputClass::Fp2,
        (Some(_), None) => OutputClass::FalseNegative,
        (None, None) => OutputClass::TrueNegative,
    })
}

/// Shrinks `span` past leading and trailing whitespace of `text`. A span
/// holding only whitespace is returned unchanged.
pub fn trim_span(text: &str, span: CharSpan) -> CharSpan {
    let chars: Vec<char> = text.chars().collect();
    let end_limit = span.end.min(chars.len());
    let mut start = span.start.min(end_limit);
    let mut end = end_limit;
    while start < end && chars[start].is_whitespace() {
        start += 1;
    }
    while end > start && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    if start == end {
        span
    } else {
        CharSpan::new(start, end)
    }
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub doc_id: String,
    pub var_id: String,
    pub predicted: Option<CharSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub doc_id: String,
    pub var_id: String,
    pub gold: Option<CharSpan>,
    pub predicted: Option<CharSpan>,
    pub klass: OutputClass,
}

impl EvalRecord {
    pub fn new(
        doc_id: impl Into<String>,
        var_id: impl Into<String>,
        gold: Option<CharSpan>,
        predicted: Option<CharSpan>,
    ) -> Result<Self> {
        Ok(EvalRecord {
            doc_id: doc_id.into(),
            var_id: var_id.into(),
            klass: classify(gold, predicted)?,
            gold,
            predicted,
        })
    }
}

/// Joins predictions with every extraction target in `gold`. Each target
/// needs exactly one prediction and every prediction must name a target.
pub fn evaluate(gold: &[AnnotatedDocument], predictions: &[Prediction]) -> Result<Vec<EvalRecord>> {
    let mut by_key: HashMap<(&str, &str), &Prediction> = HashMap::new();
    for p in predictions {
        if by_key.insert((&p.doc_id, &p.var_id), p).is_some() {
            return Err(Error::KeyMismatch(format!(
                "duplicate prediction for {}/{}",
                p.doc_id, p.var_id
            )));
        }
    }
    let mut records = Vec::new();
    for d in gold {
        for (s, v) in d.targets() {
            let p = by_key.remove(&(d.doc_id.as_str(), v.var_id.as_str())).ok_or_else(|| {
                Error::KeyMismatch(format!("no prediction for {}/{}", d.doc_id, v.var_id))
            })?;
            let len = s.char_len();
            if let Some(ps) = p.predicted {
                if ps.is_empty() || ps.end > len {
                    return Err(Error::invariant(
                        &d.doc_id,
                        &v.var_id,
                        format!("predicted [{}, {}) outside sentence of length {len}", ps.start, ps.end),
                    ));
                }
            }
            let gold_span = v.definition.map(|g| trim_span(&s.text, g));
            let pred_span = p.predicted.map(|ps| trim_span(&s.text, ps));
            records.push(EvalRecord::new(&d.doc_id, &v.var_id, gold_span, pred_span)?);
        }
    }
    if let Some(((doc, var), _)) = by_key.into_iter().min_by_key(|(k, _)| *k) {
        return Err(Error::KeyMismatch(format!(
            "prediction for {doc}/{var}, which is not an extraction target"
        )));
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    #[serde(rename = "TP")]
    pub tp: u64,
    #[serde(rename = "FP1_wide")]
    pub fp1_wide: u64,
    #[serde(rename = "FP1_narrow")]
    pub fp1_narrow: u64,
    #[serde(rename = "FP1_other")]
    pub fp1_other: u64,
    #[serde(rename = "FP2")]
    pub fp2: u64,
    #[serde(rename = "FN")]
    pub fn_: u64,
    #[serde(rename = "TN")]
    pub tn: u64,
}

impl ClassCounts {
    pub fn from_records(records: &[EvalRecord]) -> Self {
        let mut c = ClassCounts::default();
        for r in records {
            *c.get_mut(r.klass) += 1;
        }
        c
    }

    pub fn get(&self, class: OutputClass) -> u64 {
        match class {
            OutputClass::TruePositive => self.tp,
            OutputClass::Fp1Wide => self.fp1_wide,
            OutputClass::Fp1Narrow => self.fp1_narrow,
            OutputClass::Fp1Other => self.fp1_other,
            OutputClass::Fp2 => self.fp2,
            OutputClass::FalseNegative => self.fn_,
            OutputClass::TrueNegative => self.tn,
        }
    }

    pub fn get_mut(&mut self, class: OutputClass) -> &mut u64 {
        match class {
            OutputClass::TruePositive => &mut self.tp,
            OutputClass::Fp1Wide => &mut self.fp1_wide,
            OutputClass::Fp1Narrow => &mut self.fp1_narrow,
            OutputClass::Fp1Other => &mut self.fp1_other,
            OutputClass::Fp2 => &mut self.fp2,
            OutputClass::FalseNegative => &mut self.fn_,
            OutputClass::TrueNegative => &mut self.tn,
        }
    }

    pub fn fp1(&self) -> u64 {
        self.fp1_wide + self.fp1_narrow + self.fp1_other
    }

    pub fn total(&self) -> u64 {
        OutputClass::ALL.iter().map(|&c| self.get(c)).sum()
    }

    /// Everything except TP and TN.
    pub fn failures(&self) -> u64 {
        self.total() - self.tp - self.tn
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Counts plus the four ratios. A ratio with a zero denominator is `None`
/// and serializes as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub counts: ClassCounts,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl MetricReport {
    pub fn from_counts(counts: ClassCounts) -> Self {
        let extracted = counts.tp + counts.fp1() + counts.fp2;
        let with_definition = counts.tp + counts.fp1() + counts.fn_;
        let f1 = (extracted > 0 && with_definition > 0)
            .then(|| 2.0 * counts.tp as f64 / (extracted + with_definition) as f64);
        MetricReport {
            counts,
            accuracy: ratio(counts.tp + counts.tn, counts.total()),
            precision: ratio(counts.tp, extracted),
            recall: ratio(counts.tp, with_definition),
            f1,
        }
    }

    pub fn metric(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Accuracy => self.accuracy,
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::F1 => self.f1,
        }
    }
}

pub fn score(records: &[EvalRecord]) -> MetricReport {
    MetricReport::from_counts(ClassCounts::from_records(records))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Accuracy,
    Precision,
    Recall,
    F1,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Accuracy, Metric::Precision, Metric::Recall, Metric::F1];
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub median: Option<f64>,
    /// Reports whose value was undefined and therefore left out.
    pub undefined: usize,
}

impl MetricSummary {
    fn from_values(values: &[Option<f64>]) -> Self {
        let mut defined: Vec<f64> = values.iter().flatten().copied().collect();
        let undefined = values.len() - defined.len();
        if defined.is_empty() {
            return MetricSummary {
                undefined,
                ..Default::default()
            };
        }
        defined.sort_by(f64::total_cmp);
        let n = defined.len();
        let median = if n % 2 == 1 {
            defined[n / 2]
        } else {
            (defined[n / 2 - 1] + defined[n / 2]) / 2.0
        };
        MetricSummary {
            mean: Some(defined.iter().sum::<f64>() / n as f64),
            min: Some(defined[0]),
            max: Some(defined[n - 1]),
            median: Some(median),
            undefined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub experiments: usize,
    pub accuracy: MetricSummary,
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub f1: MetricSummary,
}

impl AggregateReport {
    pub fn metric(&self, m: Metric) -> &MetricSummary {
        match m {
            Metric::Accuracy => &self.accuracy,
            Metric::Precision => &self.precision,
            Metric::Recall => &self.recall,
            Metric::F1 => &self.f1,
        }
    }
}

/// Mean, min, max and median of each metric across repeated experiments.
pub fn aggregate(reports: &[MetricReport]) -> AggregateReport {
    let summary = |m: Metric| {
        let values: Vec<Option<f64>> = reports.iter().map(|r| r.metric(m)).collect();
        MetricSummary::from_values(&values)
    };
    AggregateReport {
        experiments: reports.len(),
        accuracy: summary(Metric::Accuracy),
        precision: summary(Metric::Precision),
        recall: summary(Metric::Recall),
        f1: summary(Metric::F1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionCase {
    /// Baseline wrong, ours correct.
    Improved,
    /// Baseline correct, ours wrong.
    Regressed,
    /// Both wrong, in different classes.
    Changed,
    /// Both correct, in different classes (cannot happen on shared gold).
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub doc_id: String,
    pub var_id: String,
    pub baseline: OutputClass,
    pub ours: OutputClass,
    pub case: TransitionCase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureDiff {
    /// `ours - baseline` per class label.
    pub deltas: BTreeMap<String, i64>,
    /// `ours - baseline` over all failure classes.
    pub total_failures: i64,
    pub ours: ClassCounts,
    pub baseline: ClassCounts,
    /// Targets where both runs fail, whatever the classes.
    pub both_failed: usize,
    /// Targets whose class differs, in `ours` order.
    pub transitions: Vec<Transition>,
}

impl FailureDiff {
    pub fn delta(&self, class: OutputClass) -> i64 {
        self.deltas[class.label()]
    }
}

/// Per-class deltas between two evaluations of the same targets.
pub fn diff_failures(ours: &[EvalRecord], baseline: &[EvalRecord]) -> Result<FailureDiff> {
    let mut base: HashMap<(&str, &str), &EvalRecord> = HashMap::new();
    for r in baseline {
        if base.insert((&r.doc_id, &r.var_id), r).is_some() {
            return Err(Error::KeyMismatch(format!("baseline repeats {}/{}", r.doc_id, r.var_id)));
        }
    }
    if ours.len() != base.len() {
        return Err(Error::KeyMismatch(format!(
            "{} records vs {} baseline records",
            ours.len(),
            base.len()
        )));
    }
    let mut transitions = Vec::new();
    let mut both_failed = 0;
    for r in ours {
        let b = base.remove(&(r.doc_id.as_str(), r.var_id.as_str())).ok_or_else(|| {
            Error::KeyMismatch(format!("{}/{} missing from baseline", r.doc_id, r.var_id))
        })?;
        if !r.klass.is_correct() && !b.klass.is_correct() {
            both_failed += 1;
        }
        if r.klass != b.klass {
            let case = match (b.klass.is_correct(), r.klass.is_correct()) {
                (false, true) => TransitionCase::Improved,
                (true, false) => TransitionCase::Regressed,
                (false, false) => TransitionCase::Changed,
                (true, true) => TransitionCase::Other,
            };
            transitions.push(Transition {
                doc_id: r.doc_id.clone(),
                var_id: r.var_id.clone(),
                baseline: b.klass,
                ours: r.klass,
                case,
            });
        }
    }
    if !base.is_empty() {
        return Err(Error::KeyMismatch("ours repeats a target".into()));
    }
    let ours_counts = ClassCounts::from_records(ours);
    let base_counts = ClassCounts::from_records(baseline);
    let deltas = OutputClass::ALL
        .iter()
        .map(|&c| (c.label().to_string(), ours_counts.get(c) as i64 - base_counts.get(c) as i64))
        .collect();
    Ok(FailureDiff {
        deltas,
        total_failures: ours_counts.failures() as i64 - base_counts.failures() as i64,
        ours: ours_counts,
        baseline: base_counts,
        both_failed,
        transitions,
    })
}

/// One row per experiment: id, four metrics, seven counts. Undefined ratios
/// are left empty.
pub fn reports_csv(rows: &[(u64, MetricReport)]) -> String {
    let mut out = String::from("experiment,accuracy,precision,recall,f1");
    for c in OutputClass::ALL {
        out.push(',');
        out.push_str(c.label());
    }
    out.push('\n');
    for (id, r) in rows {
        let _ = write!(out, "{id}");
        for m in Metric::ALL {
            out.push(',');
            if let Some(v) = r.metric(m) {
                let _ = write!(out, "{v}");
            }
        }
        for c in OutputClass::ALL {
            let _ = write!(out, ",{}", r.counts.get(c));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(s: usize, e: usize) -> Option<CharSpan> {
        Some(CharSpan::new(s, e))
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(sp(10, 25), sp(10, 25)).unwrap(), OutputClass::TruePositive);
        assert_eq!(classify(sp(10, 25), sp(5, 30)).unwrap(), OutputClass::Fp1Wide);
        assert_eq!(classify(None, None).unwrap(), OutputClass::TrueNegative);
        assert_eq!(classify(sp(10, 25), sp(12, 20)).unwrap(), OutputClass::Fp1Narrow);
        assert_eq!(classify(sp(10, 25), sp(20, 40)).unwrap(), OutputClass::Fp1Other);
        assert_eq!(classify(sp(10, 25), sp(30, 40)).unwrap(), OutputClass::Fp1Other);
        assert_eq!(classify(None, sp(1, 2)).unwrap(), OutputClass::Fp2);
        assert_eq!(classify(sp(1, 2), None).unwrap(), OutputClass::FalseNegative);
        // Shared boundary still counts as containment.
        assert_eq!(classify(sp(10, 25), sp(10, 30)).unwrap(), OutputClass::Fp1Wide);
        assert_eq!(classify(sp(10, 25), sp(10, 20)).unwrap(), OutputClass::Fp1Narrow);
    }

    #[test]
    fn malformed_intervals() {
        assert!(matches!(classify(sp(5, 5), None), Err(Error::MalformedInterval { .. })));
        assert!(matches!(classify(None, sp(9, 3)), Err(Error::MalformedInterval { .. })));
    }

    #[test]
    fn trimming() {
        let text = "x is  the rate .";
        assert_eq!(trim_span(text, CharSpan::new(4, 14)), CharSpan::new(6, 14));
        assert_eq!(trim_span(text, CharSpan::new(4, 6)), CharSpan::new(4, 6));
    }

    fn counts(tp: u64, fp1: u64, fp2: u64, fn_: u64, tn: u64) -> ClassCounts {
        ClassCounts {
            tp,
            fp1_wide: fp1,
            fp2,
            fn_,
            tn,
            ..Default::default()
        }
    }

    #[test]
    fn hand_evaluated_metrics() {
        let r = MetricReport::from_counts(counts(5, 1, 1, 1, 2));
        assert_eq!(r.accuracy, Some(0.7));
        assert!((r.precision.unwrap() - 5.0 / 7.0).abs() < 1e-12);
        assert!((r.recall.unwrap() - 5.0 / 7.0).abs() < 1e-12);
        assert!((r.f1.unwrap() - 5.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn all_tp_and_all_tn() {
        let r = MetricReport::from_counts(counts(4, 0, 0, 0, 0));
        assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (Some(1.0), Some(1.0), Some(1.0), Some(1.0)));
        let r = MetricReport::from_counts(counts(0, 0, 0, 0, 3));
        assert_eq!(r.accuracy, Some(1.0));
        assert_eq!((r.precision, r.recall, r.f1), (None, None, None));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains(r#""precision":null"#));
    }

    #[test]
    fn empty_records_are_undefined() {
        let r = score(&[]);
        assert_eq!(r.counts.total(), 0);
        assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (None, None, None, None));
    }

    #[test]
    fn f1_zero_without_true_positives() {
        let r = MetricReport::from_counts(counts(0, 2, 1, 1, 0));
        assert_eq!(r.f1, Some(0.0));
    }

    #[test]
    fn aggregate_examples() {
        let one = MetricReport::from_counts(counts(5, 1, 1, 1, 2));
        let a = aggregate(&[one]);
        let acc = a.accuracy;
        assert_eq!((acc.mean, acc.min, acc.max, acc.median), (Some(0.7), Some(0.7), Some(0.7), Some(0.7)));

        let r8 = MetricReport::from_counts(counts(8, 0, 0, 2, 0));
        let r9 = MetricReport::from_counts(counts(9, 0, 0, 1, 0));
        let a = aggregate(&[r8, r9]);
        assert!((a.accuracy.mean.unwrap() - 0.85).abs() < 1e-12);
        assert!((a.accuracy.median.unwrap() - 0.85).abs() < 1e-12);
        assert_eq!(a.accuracy.undefined, 0);
    }

    #[test]
    fn aggregate_skips_undefined() {
        let tn_only = MetricReport::from_counts(counts(0, 0, 0, 0, 3));
        let normal = MetricReport::from_counts(counts(1, 0, 0, 1, 0));
        let a = aggregate(&[tn_only, normal]);
        assert_eq!(a.precision.undefined, 1);
        assert_eq!(a.precision.mean, Some(1.0));
        assert_eq!(a.accuracy.mean, Some(0.75));
    }

    fn rec(id: &str, gold: Option<CharSpan>, pred: Option<CharSpan>) -> EvalRecord {
        EvalRecord::new("d", id, gold, pred).unwrap()
    }

    #[test]
    fn diff_identical_and_single_transition() {
        let ours = vec![rec("a", sp(0, 3), sp(0, 3)), rec("b", None, None)];
        let d = diff_failures(&ours, &ours).unwrap();
        assert!(d.deltas.values().all(|&v| v == 0));
        assert!(d.transitions.is_empty());

        let baseline = vec![rec("a", sp(0, 3), sp(0, 3)), rec("b", None, sp(4, 6))];
        let d = diff_failures(&ours, &baseline).unwrap();
        assert_eq!(d.delta(OutputClass::Fp2), -1);
        assert_eq!(d.delta(OutputClass::TrueNegative), 1);
        assert_eq!(d.total_failures, -1);
        assert_eq!(d.transitions.len(), 1);
        assert_eq!(d.transitions[0].case, TransitionCase::Improved);
    }

    #[test]
    fn diff_key_mismatch() {
        let ours = vec![rec("a", None, None)];
        let baseline = vec![rec("b", None, None)];
        assert!(matches!(diff_failures(&ours, &baseline), Err(Error::KeyMismatch(_))));
        assert!(matches!(diff_failures(&ours, &[]), Err(Error::KeyMismatch(_))));
    }

    #[test]
    fn csv_rows() {
        let r = MetricReport::from_counts(counts(0, 0, 0, 0, 3));
        let csv = reports_csv(&[(1, r)]);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "experiment,accuracy,precision,recall,f1,TP,FP1_wide,FP1_narrow,FP1_other,FP2,FN,TN"
        );
        assert_eq!(lines.next().unwrap(), "1,1,,,,0,0,0,0,0,0,3");
    }
}
