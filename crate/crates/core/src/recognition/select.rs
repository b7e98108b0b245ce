use crate::geometry::iou_box;

use super::CheckerHypothesis;

/// Greedy non-maximum suppression by ascending cost, then either the
/// `n_expected` cheapest survivors or those cheaper than `cost_threshold`.
pub fn select_hypotheses(
    mut candidates: Vec<CheckerHypothesis>,
    n_expected: Option<usize>,
    cost_threshold: f64,
    nms_iou: f64,
) -> Vec<CheckerHypothesis> {
    candidates.retain(|h| h.cost.is_finite());
    candidates.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    let mut accepted: Vec<CheckerHypothesis> = Vec::new();
    for h in candidates {
        let b = h.bbox();
        if accepted.iter().all(|a| iou_box(&a.bbox(), &b) < nms_iou) {
            accepted.push(h);
        }
    }
    match n_expected {
        Some(n) => accepted.truncate(n),
        None => accepted.retain(|h| h.cost < cost_threshold),
    }
    accepted
}
