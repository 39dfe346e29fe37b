use vardef::corpus::CharSpan;
use vardef::evaluator::{aggregate, diff_failures, EvalRecord, Metric, MetricReport, OutputClass, TransitionCase};

// Failure counts per experiment (FN, wide, narrow, other, FP2) and the
// differences to the baseline method, from a reference failure breakdown.
const OURS: [[i64; 5]; 10] = [
    [34, 4, 6, 1, 9],
    [19, 7, 3, 1, 12],
    [38, 4, 5, 1, 11],
    [22, 4, 1, 2, 2],
    [13, 2, 2, 4, 17],
    [19, 3, 4, 1, 15],
    [12, 1, 2, 1, 13],
    [7, 3, 4, 1, 18],
    [20, 3, 6, 1, 14],
    [24, 3, 3, 1, 7],
];
const DELTAS: [[i64; 5]; 10] = [
    [25, -2, -4, 0, -30],
    [-2, -2, -1, -3, -5],
    [16, -5, 0, -2, -21],
    [9, 2, -5, 1, -21],
    [-15, -1, -1, 3, -7],
    [-5, -5, 0, -1, -13],
    [-2, -2, -1, 1, -2],
    [-10, 0, 1, 0, -2],
    [-6, 1, 1, 0, 4],
    [-3, -3, -2, 0, 1],
];
const TOTALS: [i64; 10] = [54, 42, 59, 32, 38, 42, 29, 33, 44, 38];
const TOTAL_DELTAS: [i64; 10] = [-11, -13, -12, -14, -21, -24, -6, -11, 0, -7];

const GOLD: CharSpan = CharSpan { start: 10, end: 20 };

fn predicted_for(class: OutputClass) -> Option<CharSpan> {
    match class {
        OutputClass::TruePositive => Some(GOLD),
        OutputClass::Fp1Wide => Some(CharSpan::new(5, 25)),
        OutputClass::Fp1Narrow => Some(CharSpan::new(12, 18)),
        OutputClass::Fp1Other => Some(CharSpan::new(15, 30)),
        OutputClass::Fp2 => Some(CharSpan::new(0, 3)),
        OutputClass::FalseNegative | OutputClass::TrueNegative => None,
    }
}

/// Records with `failures` = (FN, wide, narrow, other, FP2) over `with_gold`
/// targets that have a definition and `without` targets that do not.
fn records(failures: [i64; 5], with_gold: usize, without: usize) -> Vec<EvalRecord> {
    let gold_classes = [
        (OutputClass::FalseNegative, failures[0]),
        (OutputClass::Fp1Wide, failures[1]),
        (OutputClass::Fp1Narrow, failures[2]),
        (OutputClass::Fp1Other, failures[3]),
    ];
    let mut classes: Vec<OutputClass> = gold_classes
        .iter()
        .flat_map(|&(c, n)| std::iter::repeat_n(c, n as usize))
        .collect();
    classes.resize(with_gold, OutputClass::TruePositive);
    let mut out: Vec<EvalRecord> = classes
        .into_iter()
        .enumerate()
        .map(|(i, c)| EvalRecord::new("doc", format!("g{i}"), Some(GOLD), predicted_for(c)).unwrap())
        .collect();
    for i in 0..without {
        let c = if (i as i64) < failures[4] { OutputClass::Fp2 } else { OutputClass::TrueNegative };
        out.push(EvalRecord::new("doc", format!("n{i}"), None, predicted_for(c)).unwrap());
    }
    out
}

#[test]
fn reference_breakdown_reproduces() {
    for e in 0..10 {
        let ours = OURS[e];
        let base: [i64; 5] = std::array::from_fn(|k| ours[k] - DELTAS[e][k]);
        // The reference total for experiment 4 is 32; its classes sum to 31.
        let expected = if e == 3 { TOTALS[e] - 1 } else { TOTALS[e] };
        assert_eq!(ours.iter().sum::<i64>(), expected, "experiment {}", e + 1);
        let (with_gold, without) = (100, 60);
        let diff = diff_failures(&records(ours, with_gold, without), &records(base, with_gold, without)).unwrap();
        let classes = [
            OutputClass::FalseNegative,
            OutputClass::Fp1Wide,
            OutputClass::Fp1Narrow,
            OutputClass::Fp1Other,
            OutputClass::Fp2,
        ];
        for (k, c) in classes.into_iter().enumerate() {
            assert_eq!(diff.delta(c), DELTAS[e][k], "experiment {} {}", e + 1, c.label());
        }
        assert_eq!(diff.total_failures, TOTAL_DELTAS[e], "experiment {}", e + 1);
        assert_eq!(diff.ours.failures() as i64, expected);
    }
}

#[test]
fn first_experiment_totals() {
    let ours = records([34, 4, 6, 1, 9], 80, 50);
    let base = records([9, 6, 10, 1, 39], 80, 50);
    let diff = diff_failures(&ours, &base).unwrap();
    assert_eq!((diff.ours.failures(), diff.baseline.failures()), (54, 65));
    assert_eq!(diff.total_failures, -11);
    // Gold targets g0.. fail in both runs up to the smaller failure count;
    // likewise the first 9 no-definition targets.
    assert_eq!(diff.both_failed, 26 + 9);
    let mut improved = 0;
    let mut regressed = 0;
    for t in &diff.transitions {
        match t.case {
            TransitionCase::Improved => improved += 1,
            TransitionCase::Regressed => regressed += 1,
            TransitionCase::Changed | TransitionCase::Other => {}
        }
    }
    assert_eq!(improved, 30);
    assert_eq!(regressed, 45 - 26);
}

#[test]
fn diff_rejects_mismatched_targets() {
    let ours = records([1, 0, 0, 0, 0], 3, 1);
    let fewer = records([1, 0, 0, 0, 0], 2, 1);
    assert!(diff_failures(&ours, &fewer).is_err());
}

#[test]
fn aggregate_skips_undefined_values() {
    let full = MetricReport::from_counts(serde_json::from_str(
        r#"{"TP":5,"FP1_wide":1,"FP1_narrow":0,"FP1_other":0,"FP2":1,"FN":1,"TN":2}"#,
    ).unwrap());
    let no_extractions = MetricReport::from_counts(serde_json::from_str(
        r#"{"TP":0,"FP1_wide":0,"FP1_narrow":0,"FP1_other":0,"FP2":0,"FN":3,"TN":1}"#,
    ).unwrap());
    let agg = aggregate(&[full, no_extractions]);
    assert_eq!(agg.experiments, 2);
    let precision = agg.metric(Metric::Precision);
    assert_eq!(precision.undefined, 1);
    assert!((precision.mean.unwrap() - 5.0 / 7.0).abs() < 1e-12);
    let accuracy = agg.metric(Metric::Accuracy);
    assert_eq!(accuracy.undefined, 0);
    assert!((accuracy.mean.unwrap() - (0.7 + 0.25) / 2.0).abs() < 1e-12);
    assert_eq!(accuracy.min, Some(0.25));
    assert_eq!(accuracy.max, Some(0.7));
}
