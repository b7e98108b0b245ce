//! From labelled regions to scored chart hypotheses: patch filtering,
//! clustering, grid completion, orientation fitting, scoring and selection.

mod cluster;
mod detect;
mod filter;
mod grid;
mod orientation;
mod patches;
mod scoring;
mod select;

use serde::{Deserialize, Serialize};

pub use cluster::cluster_patches;
pub use detect::{detect, recognize};
pub use filter::{filter_regions, passes_filter};
pub use grid::{complete_grid, GridAssignment, GridCell};
pub use orientation::{
    build_hypothesis, fit_orientation, index_transform, placements, rank_orientations,
    rotate_index, Orientation, SubGrid, THETAS,
};
pub use patches::{extract_patches, sample_quad, PatchStats};
pub use scoring::{score_hypothesis, score_quads, HypothesisScore};
pub use select::select_hypotheses;

use crate::error::{Error, Result};
use crate::geometry::{BBox, Homography, Point2, Quadrilateral};
use crate::model::PATCHES;

/// A quadrilateral colour-patch candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchCandidate {
    /// Minimum bounding parallelogram of the region contour.
    pub quad: Quadrilateral,
    /// The four contour vertices kept by polygon simplification. Unlike the
    /// parallelogram it follows perspective foreshortening.
    pub corners: Quadrilateral,
    pub center: Point2,
    pub area: f64,
    pub axis_max: f64,
    /// Mean colour over the shrunk quad, in `[0, 1]`.
    pub mean_color: [f64; 3],
}

/// A full chart pose with its validation cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckerHypothesis {
    /// Chart outline, clockwise from the corner next to patch 1.
    pub corners: Quadrilateral,
    /// Model plane to image.
    pub homography: Homography,
    pub theta: u32,
    pub delta: usize,
    pub patch_quads: Vec<Quadrilateral>,
    pub mu: Vec<[f64; 3]>,
    pub sigma: Vec<[f64; 3]>,
    pub cost: f64,
    /// Index of the ROI this hypothesis came from, if ROIs were supplied.
    #[serde(default)]
    pub roi: Option<usize>,
}

impl CheckerHypothesis {
    pub fn bbox(&self) -> BBox {
        self.corners.bbox()
    }

    /// Re-expresses the hypothesis after an image-plane map `t`.
    pub fn transformed(&self, t: &Homography) -> Result<CheckerHypothesis> {
        let patch_quads = self
            .patch_quads
            .iter()
            .map(|q| q.map(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(CheckerHypothesis {
            corners: self.corners.map(t)?,
            homography: t.after(&self.homography)?,
            patch_quads,
            ..self.clone()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidHypothesis(m));
        if !THETAS.contains(&self.theta) {
            return fail(format!("theta {} not a multiple of 90 in [0, 270]", self.theta));
        }
        if self.delta == 0 {
            return fail("delta is 1-based".into());
        }
        if self.patch_quads.len() != PATCHES {
            return fail(format!("{} patch quads", self.patch_quads.len()));
        }
        if !self.mu.is_empty() && (self.mu.len() != PATCHES || self.sigma.len() != PATCHES) {
            return fail("mu/sigma need 24 entries".into());
        }
        if !(self.cost >= 0.0) {
            return fail(format!("cost {} is negative or NaN", self.cost));
        }
        Ok(())
    }
}

/// Output of [`detect`] for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionResult {
    pub image_id: String,
    pub width: usize,
    pub height: usize,
    pub hypotheses: Vec<CheckerHypothesis>,
    /// ROIs the recognition ran on; empty in whole-image mode.
    #[serde(default)]
    pub rois: Vec<BBox>,
    pub elapsed_seconds: f64,
}

impl DetectionResult {
    pub fn validate(&self) -> Result<()> {
        for (i, h) in self.hypotheses.iter().enumerate() {
            h.validate()
                .map_err(|e| Error::InvalidHypothesis(format!("hypothesis {i}: {e}")))?;
            if let Some(r) = h.roi {
                if r >= self.rois.len() {
                    return Err(Error::InvalidHypothesis(format!(
                        "hypothesis {i} refers to missing roi {r}"
                    )));
                }
            }
        }
        Ok(())
    }
}
