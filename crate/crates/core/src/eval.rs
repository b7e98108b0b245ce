//! Detection scoring: greedy IOU matching against ground truth, confusion
//! counts, and the a0/a1/a2 quality measures.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{iou_box, iou_polygon};
use crate::recognition::{CheckerHypothesis, DetectionResult};
use crate::render::{CheckerTruth, GroundTruth};

/// Confusion counts and the rates derived from them. A rate with a zero
/// denominator is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub total: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, total: usize) -> Metrics {
        let t = tp as f64;
        let precision = ratio(t, (tp + fp) as f64);
        let recall = ratio(t, (tp + fn_) as f64);
        Metrics {
            tp,
            fp,
            fn_,
            total,
            accuracy: ratio(t, total as f64),
            precision,
            recall,
            f_measure: ratio(2.0 * precision * recall, precision + recall),
        }
    }
}

/// Quality of one prediction against one ground-truth chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub prediction: usize,
    /// `None` for a false positive that overlaps no chart.
    pub truth: Option<usize>,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageReport {
    pub image_id: String,
    pub true_positives: Vec<PairScore>,
    /// Scored against the ground-truth chart they overlap most, if any.
    pub false_positives: Vec<PairScore>,
    /// Ground-truth charts left unmatched.
    pub missed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub tp_threshold: f64,
    pub metrics: Metrics,
    pub images: Vec<ImageReport>,
}

fn cosine(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    ((0..3).map(|k| a[k] * b[k]).sum::<f64>() / (na * nb)).clamp(-1.0, 1.0)
}

/// a0, a1 and a2 of a prediction against a ground-truth chart. Patches
/// correspond by their row-major index.
pub fn pair_quality(pred: &CheckerHypothesis, gt: &CheckerTruth) -> (f64, f64, f64) {
    let a0 = iou_box(&pred.bbox(), &gt.bbox);
    let n = pred.patch_quads.len().min(gt.patch_quads.len());
    let a1 = if n == 0 {
        0.0
    } else {
        (0..n).map(|k| iou_polygon(&pred.patch_quads[k], &gt.patch_quads[k])).sum::<f64>() / n as f64
    };
    let m = pred.mu.len().min(gt.mu.len());
    let a2 = if m == 0 {
        0.0
    } else {
        (0..m).map(|k| cosine(&pred.mu[k], &gt.mu[k])).sum::<f64>() / m as f64
    };
    (a0, a1, a2)
}

/// Matches one image's predictions to its ground truth. Pairs are taken
/// greedily by descending a0 (ties by prediction then truth index); a pair
/// is a true positive when a0 reaches `tp_threshold`. A missing prediction
/// file counts every chart as missed.
pub fn match_image(pred: Option<&DetectionResult>, gt: &GroundTruth, tp_threshold: f64) -> Result<ImageReport> {
    let empty = Vec::new();
    let hyps = match pred {
        Some(p) if p.image_id != gt.image_id => {
            return Err(Error::Scoring(format!(
                "prediction for `{}` scored against ground truth `{}`",
                p.image_id, gt.image_id
            )))
        }
        Some(p) => &p.hypotheses,
        None => &empty,
    };
    let mut pairs = Vec::new();
    for (i, h) in hyps.iter().enumerate() {
        for (j, g) in gt.checkers.iter().enumerate() {
            pairs.push((iou_box(&h.bbox(), &g.bbox), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut pred_used = vec![false; hyps.len()];
    let mut gt_used = vec![false; gt.checkers.len()];
    let mut true_positives = Vec::new();
    for &(a0, i, j) in &pairs {
        if a0 < tp_threshold || pred_used[i] || gt_used[j] {
            continue;
        }
        pred_used[i] = true;
        gt_used[j] = true;
        let (a0, a1, a2) = pair_quality(&hyps[i], &gt.checkers[j]);
        true_positives.push(PairScore { prediction: i, truth: Some(j), a0, a1, a2 });
    }
    true_positives.sort_by_key(|p| p.prediction);
    let false_positives = (0..hyps.len())
        .filter(|&i| !pred_used[i])
        .map(|i| {
            let best = (0..gt.checkers.len())
                .map(|j| (iou_box(&hyps[i].bbox(), &gt.checkers[j].bbox), j))
                .filter(|(v, _)| *v > 0.0)
                .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
            match best {
                Some((_, j)) => {
                    let (a0, a1, a2) = pair_quality(&hyps[i], &gt.checkers[j]);
                    PairScore { prediction: i, truth: Some(j), a0, a1, a2 }
                }
                None => PairScore { prediction: i, truth: None, a0: 0.0, a1: 0.0, a2: 0.0 },
            }
        })
        .collect();
    let missed = (0..gt.checkers.len()).filter(|&j| !gt_used[j]).collect();
    Ok(ImageReport {
        image_id: gt.image_id.clone(),
        true_positives,
        false_positives,
        missed,
    })
}

/// Scores a set of predictions against ground truth keyed by image id.
/// Every prediction must have ground truth; ground truth without a
/// prediction counts as fully missed. Total is the number of ground-truth
/// charts.
pub fn match_and_score(preds: &[DetectionResult], gts: &[GroundTruth], tp_threshold: f64) -> Result<MatchReport> {
    let mut by_id: BTreeMap<&str, &DetectionResult> = BTreeMap::new();
    for p in preds {
        if by_id.insert(p.image_id.as_str(), p).is_some() {
            return Err(Error::Scoring(format!("duplicate prediction for `{}`", p.image_id)));
        }
    }
    let mut seen = BTreeMap::new();
    for g in gts {
        if seen.insert(g.image_id.as_str(), ()).is_some() {
            return Err(Error::Scoring(format!("duplicate ground truth for `{}`", g.image_id)));
        }
    }
    if let Some(orphan) = by_id.keys().find(|id| !seen.contains_key(*id)) {
        return Err(Error::Scoring(format!("no ground truth for prediction `{orphan}`")));
    }
    let images = gts
        .iter()
        .map(|g| match_image(by_id.get(g.image_id.as_str()).copied(), g, tp_threshold))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(images, tp_threshold))
}

pub fn summarize(images: Vec<ImageReport>, tp_threshold: f64) -> MatchReport {
    let tp: usize = images.iter().map(|r| r.true_positives.len()).sum();
    let fp: usize = images.iter().map(|r| r.false_positives.len()).sum();
    let fn_: usize = images.iter().map(|r| r.missed.len()).sum();
    MatchReport {
        tp_threshold,
        metrics: Metrics::from_counts(tp, fp, fn_, tp + fn_),
        images,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualityMetric {
    A0,
    A1,
    A2,
}

impl QualityMetric {
    pub const ALL: [QualityMetric; 3] = [QualityMetric::A0, QualityMetric::A1, QualityMetric::A2];

    pub fn name(self) -> &'static str {
        match self {
            QualityMetric::A0 => "a0",
            QualityMetric::A1 => "a1",
            QualityMetric::A2 => "a2",
        }
    }

    fn of(self, p: &PairScore) -> f64 {
        match self {
            QualityMetric::A0 => p.a0,
            QualityMetric::A1 => p.a1,
            QualityMetric::A2 => p.a2,
        }
    }
}

/// Metric values of every detection, true and false positives alike.
pub fn detection_values(report: &MatchReport, metric: QualityMetric) -> Vec<f64> {
    report
        .images
        .iter()
        .flat_map(|r| r.true_positives.iter().chain(&r.false_positives))
        .map(|p| metric.of(p))
        .collect()
}

/// Fraction of detections whose metric is at least `tau`, for `tau` in
/// steps of 0.01 over `[0, 1]`. Empty when there are no detections.
pub fn accuracy_curve(report: &MatchReport, metric: QualityMetric) -> Vec<(f64, f64)> {
    let values = detection_values(report, metric);
    if values.is_empty() {
        return Vec::new();
    }
    (0..=100)
        .map(|i| {
            let tau = i as f64 / 100.0;
            let n = values.iter().filter(|&&v| v >= tau).count();
            (tau, n as f64 / values.len() as f64)
        })
        .collect()
}

pub fn curve_csv(metric: QualityMetric, curve: &[(f64, f64)]) -> String {
    let mut out = format!("tau,fraction_{}\n", metric.name());
    for (t, f) in curve {
        out.push_str(&format!("{t:.2},{f:.6}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_denominators_give_zero() {
        let m = Metrics::from_counts(0, 0, 0, 0);
        assert_eq!((m.accuracy, m.precision, m.recall, m.f_measure), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn table_counts() {
        let m = Metrics::from_counts(855, 29, 116, 1000);
        assert!((m.accuracy - 0.855).abs() < 1e-12);
        assert!((m.precision - 855.0 / 884.0).abs() < 1e-12);
        assert!((m.recall - 855.0 / 971.0).abs() < 1e-12);
    }
}
