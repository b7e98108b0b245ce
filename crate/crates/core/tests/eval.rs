mod common;

use common::*;
use mcc_core::eval::*;
use mcc_core::recognition::{CheckerHypothesis, DetectionResult};
use mcc_core::render::{CheckerTruth, GroundTruth};
use mcc_core::Error;
use proptest::prelude::*;
use std::sync::OnceLock;

/// (TP, FP, FN, Total) and the published Acc, Prec, Rec, F.
const TABLES: [((usize, usize, usize, usize), [f64; 4]); 12] = [
    // synthetic, one chart per image
    ((334, 142, 524, 1000), [0.33, 0.70, 0.39, 0.50]),
    ((29, 199, 772, 1000), [0.03, 0.13, 0.04, 0.06]),
    ((536, 3, 461, 1000), [0.54, 0.99, 0.54, 0.70]),
    ((855, 29, 116, 1000), [0.85, 0.97, 0.88, 0.92]),
    // synthetic, several charts per image
    ((1287, 11, 1154, 2452), [0.52, 0.99, 0.53, 0.69]),
    ((2039, 122, 291, 2452), [0.83, 0.94, 0.88, 0.91]),
    // real photographs
    ((440, 110, 19, 569), [0.770, 0.800, 0.960, 0.870]),
    ((306, 241, 22, 569), [0.540, 0.560, 0.930, 0.700]),
    ((430, 36, 103, 569), [0.760, 0.920, 0.810, 0.860]),
    ((41, 180, 348, 569), [0.070, 0.190, 0.110, 0.130]),
    ((523, 3, 43, 569), [0.920, 0.990, 0.920, 0.960]),
    ((553, 3, 13, 569), [0.972, 0.995, 0.977, 0.986]),
];

#[test]
fn published_tables_reproduce() {
    for ((tp, fp, fn_, total), published) in TABLES {
        let m = Metrics::from_counts(tp, fp, fn_, total);
        let ours = [m.accuracy, m.precision, m.recall, m.f_measure];
        for (o, p) in ours.iter().zip(published) {
            // the tables round to two decimals, one row truncates 0.855
            assert!((o - p).abs() <= 0.005 + 1e-9, "{tp}/{fp}/{fn_}/{total}: {ours:?} vs {published:?}");
        }
    }
}

#[test]
fn exact_rates_for_two_rows() {
    let round3 = |v: f64| (v * 1000.0).round() / 1000.0;
    let m = Metrics::from_counts(855, 29, 116, 1000);
    assert_eq!((m.accuracy, m.precision, m.recall), (0.855, 855.0 / 884.0, 855.0 / 971.0));
    let f = 2.0 * 855.0 / (2.0 * 855.0 + 29.0 + 116.0);
    assert!((m.f_measure - f).abs() < 1e-15);
    for (o, quoted) in [m.accuracy, m.precision, m.recall, m.f_measure].iter().zip([0.855, 0.967, 0.880, 0.921]) {
        assert!((o - quoted).abs() < 1e-3);
    }
    let m = Metrics::from_counts(553, 3, 13, 569);
    assert_eq!((m.precision * 1e4).round() / 1e4, 0.9946);
    assert_eq!([m.recall, m.f_measure].map(round3), [0.977, 0.986]);
}

fn two_chart_truth() -> GroundTruth {
    static GT: OnceLock<GroundTruth> = OnceLock::new();
    GT.get_or_init(render_truth).clone()
}

fn render_truth() -> GroundTruth {
    let poses = [pose([0.1, 0.2, 0.0], [-6.0, 0.0, -28.0]), pose([-0.2, 0.1, 0.3], [6.0, 0.5, -28.0])];
    let (_, mut gt) = render_on_gray(&poses, 0.5, &clean());
    gt.image_id = "img".into();
    gt
}

fn hypothesis_from(c: &CheckerTruth) -> CheckerHypothesis {
    CheckerHypothesis {
        corners: c.corners,
        homography: c.homography,
        theta: 0,
        delta: 1,
        patch_quads: c.patch_quads.clone(),
        mu: c.mu.clone(),
        sigma: vec![[0.0; 3]; 24],
        cost: 0.1,
        roi: None,
    }
}

fn result(id: &str, hypotheses: Vec<CheckerHypothesis>) -> DetectionResult {
    DetectionResult { image_id: id.into(), width: 1024, height: 640, hypotheses, rois: Vec::new(), elapsed_seconds: 0.0 }
}

#[test]
fn identical_prediction_scores_one() {
    let gt = two_chart_truth();
    let pred = result("img", gt.checkers.iter().map(hypothesis_from).collect());
    let r = match_and_score(&[pred], &[gt], 0.5).unwrap();
    assert_eq!((r.metrics.tp, r.metrics.fp, r.metrics.fn_, r.metrics.total), (2, 0, 0, 2));
    for p in &r.images[0].true_positives {
        assert!((p.a0 - 1.0).abs() < 1e-12 && (p.a1 - 1.0).abs() < 1e-9 && (p.a2 - 1.0).abs() < 1e-12, "{p:?}");
        assert_eq!(p.truth, Some(p.prediction));
    }
}

#[test]
fn displaced_and_stray_predictions() {
    let gt = two_chart_truth();
    let mut shifted = hypothesis_from(&gt.checkers[0]);
    let b = gt.checkers[0].bbox;
    let t = mcc_core::geometry::Homography::translation(-b.width() * 0.6, 0.0);
    shifted = shifted.transformed(&t).unwrap();
    let stray = boxed_hypothesis(0.0, 0.0, 20.0, 20.0, 0.5);
    let pred = result("img", vec![stray, hypothesis_from(&gt.checkers[1]), shifted]);
    let r = match_and_score(&[pred], &[gt], 0.5).unwrap();
    let img = &r.images[0];
    assert_eq!(img.true_positives.len(), 1);
    assert_eq!(img.true_positives[0].truth, Some(1));
    assert_eq!(img.missed, vec![0]);
    let fps: Vec<Option<usize>> = img.false_positives.iter().map(|p| p.truth).collect();
    assert_eq!(fps, vec![None, Some(0)]);
    assert_eq!((r.metrics.tp, r.metrics.fp, r.metrics.fn_), (1, 2, 1));
}

#[test]
fn missing_prediction_counts_every_chart_missed() {
    let gt = two_chart_truth();
    let r = match_and_score(&[], &[gt], 0.5).unwrap();
    assert_eq!((r.metrics.tp, r.metrics.fp, r.metrics.fn_, r.metrics.total), (0, 0, 2, 2));
    assert_eq!(r.metrics.recall, 0.0);
}

#[test]
fn mismatched_ids_are_scoring_errors() {
    let gt = two_chart_truth();
    let pred = result("other", Vec::new());
    assert!(matches!(match_image(Some(&pred), &gt, 0.5), Err(Error::Scoring(_))));
    assert!(matches!(match_and_score(&[pred], &[gt.clone()], 0.5), Err(Error::Scoring(_))));
    let dup = result("img", Vec::new());
    assert!(matches!(match_and_score(&[dup.clone(), dup], &[gt], 0.5), Err(Error::Scoring(_))));
}

#[test]
fn matching_ignores_prediction_order() {
    let gt = two_chart_truth();
    let mut hyps: Vec<CheckerHypothesis> = gt.checkers.iter().map(hypothesis_from).collect();
    hyps.push(boxed_hypothesis(300.0, 200.0, 300.0, 200.0, 0.4));
    hyps.push(boxed_hypothesis(5.0, 5.0, 30.0, 30.0, 0.9));
    let key = |r: &MatchReport| {
        let i = &r.images[0];
        let mut tps: Vec<(Option<usize>, u64)> = i.true_positives.iter().map(|p| (p.truth, p.a0.to_bits())).collect();
        let mut fps: Vec<(Option<usize>, u64)> = i.false_positives.iter().map(|p| (p.truth, p.a0.to_bits())).collect();
        tps.sort();
        fps.sort();
        (r.metrics, tps, fps, i.missed.clone())
    };
    let base = key(&match_and_score(&[result("img", hyps.clone())], &[gt.clone()], 0.5).unwrap());
    let mut perm = hyps.clone();
    for _ in 0..6 {
        perm.rotate_left(1);
        perm.swap(0, 2);
        let r = match_and_score(&[result("img", perm.clone())], &[gt.clone()], 0.5).unwrap();
        assert_eq!(key(&r), base);
    }
}

fn report_with(values: &[f64]) -> MatchReport {
    let scores = values
        .iter()
        .enumerate()
        .map(|(i, &v)| PairScore { prediction: i, truth: Some(i), a0: v, a1: v / 2.0, a2: 1.0 - v / 4.0 })
        .collect();
    let img = ImageReport { image_id: "x".into(), true_positives: scores, false_positives: Vec::new(), missed: Vec::new() };
    summarize(vec![img], 0.5)
}

#[test]
fn curve_examples() {
    let perfect = report_with(&[1.0, 1.0, 1.0]);
    assert!(accuracy_curve(&perfect, QualityMetric::A0).iter().all(|&(_, f)| f == 1.0));

    let single = report_with(&[0.6]);
    for (tau, f) in accuracy_curve(&single, QualityMetric::A0) {
        assert_eq!(f, if tau <= 0.6 { 1.0 } else { 0.0 }, "tau {tau}");
    }
    assert!(accuracy_curve(&report_with(&[]), QualityMetric::A0).is_empty());

    let csv = curve_csv(QualityMetric::A1, &accuracy_curve(&single, QualityMetric::A1));
    assert!(csv.starts_with("tau,fraction_a1\n0.00,1.000000\n"));
    assert_eq!(csv.lines().count(), 102);
}

#[test]
fn curve_matches_enumeration() {
    let values = [0.05, 0.31, 0.5, 0.5, 0.62, 0.77, 0.8, 0.93, 0.99, 1.0];
    let report = report_with(&values);
    for metric in QualityMetric::ALL {
        let vals = detection_values(&report, metric);
        let curve = accuracy_curve(&report, metric);
        assert_eq!(curve.len(), 101);
        for (i, (tau, f)) in curve.into_iter().enumerate() {
            assert_eq!(tau, i as f64 / 100.0);
            let mut n = 0;
            for v in &vals {
                if *v >= tau {
                    n += 1;
                }
            }
            assert_eq!(f, n as f64 / 10.0);
        }
    }
}

proptest! {
    #[test]
    fn a2_is_bounded_and_scale_free(
        colors in prop::collection::vec(prop::array::uniform3(0.01f64..1.0), 24),
        other in prop::collection::vec(prop::array::uniform3(0.0f64..1.0), 24),
        scales in prop::collection::vec(0.1f64..5.0, 24),
    ) {
        let gt = &two_chart_truth().checkers[0];
        let mut truth = gt.clone();
        truth.mu = colors.clone();
        let mut h = hypothesis_from(gt);
        h.mu = other;
        let (_, _, a2) = pair_quality(&h, &truth);
        prop_assert!((0.0..=1.0).contains(&a2));
        h.mu = colors.iter().zip(&scales).map(|(c, s)| c.map(|v| v * s)).collect();
        let (_, _, a2) = pair_quality(&h, &truth);
        prop_assert!((a2 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn results_survive_a_json_round_trip() {
    let gt = two_chart_truth();
    let pred = result("img", vec![hypothesis_from(&gt.checkers[0]), boxed_hypothesis(1.0, 2.0, 3.0, 4.0, 0.7)]);
    let direct = match_and_score(&[pred.clone()], &[gt.clone()], 0.5).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let (pp, gp, rp) = (dir.path().join("img.json"), dir.path().join("img.gt.json"), dir.path().join("report.json"));
    mcc_core::io::write_json(&pp, &pred).unwrap();
    mcc_core::io::write_json(&gp, &gt).unwrap();
    let pred2: DetectionResult = mcc_core::io::read_json(&pp).unwrap();
    let gt2: GroundTruth = mcc_core::io::read_json(&gp).unwrap();
    assert_eq!(pred2, pred);
    assert_eq!(gt2, gt);
    let again = match_and_score(&[pred2], &[gt2], 0.5).unwrap();
    assert_eq!(again, direct);

    mcc_core::io::write_json(&rp, &direct).unwrap();
    let back: MatchReport = mcc_core::io::read_json(&rp).unwrap();
    assert_eq!(back, direct);
    assert_eq!(back.metrics.f_measure.to_bits(), direct.metrics.f_measure.to_bits());
}
