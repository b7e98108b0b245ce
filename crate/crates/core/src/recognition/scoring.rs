use crate::error::{Error, Result};
use crate::geometry::Quadrilateral;
use crate::imgproc::ImageBuffer;
use crate::model::{ColorCheckerModel, PATCHES};

use super::{sample_quad, CheckerHypothesis};

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisScore {
    pub mu: Vec<[f64; 3]>,
    pub sigma: Vec<[f64; 3]>,
    pub cost: f64,
}

fn cosine(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    ((0..3).map(|k| a[k] * b[k]).sum::<f64>() / (na * nb)).clamp(-1.0, 1.0)
}

/// Validation cost of 24 projected patches: the summed angular mismatch
/// `1 - cos(mu_k, r_k)` plus the summed squared colour deviation. Patches
/// with no pixel in the image count as a maximal mismatch of 2.
pub fn score_quads(
    quads: &[Quadrilateral],
    img: &ImageBuffer,
    model: &ColorCheckerModel,
    shrink: f64,
) -> Result<HypothesisScore> {
    if quads.len() != PATCHES {
        return Err(Error::InvalidHypothesis(format!("{} patch quads, need {PATCHES}", quads.len())));
    }
    let mut mu = Vec::with_capacity(PATCHES);
    let mut sigma = Vec::with_capacity(PATCHES);
    let mut cost = 0.0;
    let mut seen = 0;
    for (k, q) in quads.iter().enumerate() {
        match sample_quad(img, &q.shrink(shrink)) {
            Some(s) => {
                seen += 1;
                cost += 1.0 - cosine(&s.mean, &model.reference_colors[k]);
                cost += s.std.iter().map(|v| v * v).sum::<f64>();
                mu.push(s.mean);
                sigma.push(s.std);
            }
            None => {
                cost += 2.0;
                mu.push([0.0; 3]);
                sigma.push([0.0; 3]);
            }
        }
    }
    if seen == 0 {
        return Err(Error::InvalidHypothesis("every patch lies outside the image".into()));
    }
    Ok(HypothesisScore { mu, sigma, cost })
}

/// Scores `h` against `img`, filling in its colours and cost.
pub fn score_hypothesis(
    h: &mut CheckerHypothesis,
    img: &ImageBuffer,
    model: &ColorCheckerModel,
    shrink: f64,
) -> Result<f64> {
    let s = score_quads(&h.patch_quads, img, model, shrink)?;
    h.mu = s.mu;
    h.sigma = s.sigma;
    h.cost = s.cost;
    Ok(h.cost)
}
