//! Synthetic scenes: charts under random rigid motions, projected through a
//! pinhole camera onto a background, with exact ground truth.

mod background;
mod dataset;
mod raster;
mod sample;

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

pub use background::{load_backgrounds, procedural_background};
pub use dataset::{generate_dataset, image_seed, render_batch, Manifest, ManifestEntry};
pub use raster::{render_scene, RenderOptions};
pub use sample::sample_scene;

use crate::config::{BackgroundSource, CameraConfig};
use crate::error::{Error, Result};
use crate::geometry::{BBox, Homography, Point2, Quadrilateral};
use crate::model::ChartLayout;

/// Pinhole camera looking down `-z`, image y pointing down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub focal: f64,
    pub principal: Point2,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    pub fn new(focal: f64, width: usize, height: usize, principal: Option<Point2>) -> Result<Camera> {
        let principal = principal.unwrap_or(Point2::new(width as f64 / 2.0, height as f64 / 2.0));
        if !(focal > 0.0 && focal.is_finite()) {
            return Err(Error::InvalidParameter(format!("focal length {focal} must be positive")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("camera resolution must be non-zero".into()));
        }
        if !(principal.x >= 0.0 && principal.x <= width as f64 && principal.y >= 0.0 && principal.y <= height as f64) {
            return Err(Error::InvalidParameter("principal point outside the image".into()));
        }
        Ok(Camera { focal, principal, width, height })
    }

    pub fn from_config(c: &CameraConfig) -> Result<Camera> {
        Camera::new(c.focal, c.width, c.height, c.principal.map(|[x, y]| Point2::new(x, y)))
    }

    /// Projects a camera-frame point; `None` if it is not in front.
    pub fn project(&self, p: [f64; 3]) -> Option<Point2> {
        let depth = -p[2];
        if depth <= 0.0 {
            return None;
        }
        Some(Point2::new(
            self.principal.x + self.focal * p[0] / depth,
            self.principal.y - self.focal * p[1] / depth,
        ))
    }

    pub fn bounds(&self) -> BBox {
        BBox::new(0.0, 0.0, self.width as f64, self.height as f64)
    }
}

/// Rigid placement of one chart: rotation angles about x, y, z (applied in
/// that order) and a translation, plus the model variant drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckerPose {
    pub rotation: [f64; 3],
    pub translation: [f64; 3],
    pub identity: usize,
}

impl CheckerPose {
    /// `Rz * Ry * Rx`.
    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let [a, b, c] = self.rotation;
        let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, a.cos(), -a.sin(), 0.0, a.sin(), a.cos());
        let ry = Matrix3::new(b.cos(), 0.0, b.sin(), 0.0, 1.0, 0.0, -b.sin(), 0.0, b.cos());
        let rz = Matrix3::new(c.cos(), -c.sin(), 0.0, c.sin(), c.cos(), 0.0, 0.0, 0.0, 1.0);
        rz * ry * rx
    }

    /// Camera-frame position of a model-plane point. The chart is centred
    /// on its own origin with y pointing up.
    pub fn model_to_camera(&self, layout: &ChartLayout, p: Point2) -> [f64; 3] {
        let local = Vector3::new(p.x - layout.width / 2.0, layout.height / 2.0 - p.y, 0.0);
        let w = self.rotation_matrix() * local + Vector3::from(self.translation);
        [w.x, w.y, w.z]
    }

    /// The plane-induced model-to-image homography.
    pub fn homography(&self, layout: &ChartLayout, camera: &Camera) -> Result<Homography> {
        let r = self.rotation_matrix();
        let t = self.translation;
        let rt = Matrix3::new(
            r[(0, 0)], r[(0, 1)], t[0],
            r[(1, 0)], r[(1, 1)], t[1],
            r[(2, 0)], r[(2, 1)], t[2],
        );
        let k = Matrix3::new(
            camera.focal, 0.0, -camera.principal.x,
            0.0, -camera.focal, -camera.principal.y,
            0.0, 0.0, -1.0,
        );
        let n = Matrix3::new(
            1.0, 0.0, -layout.width / 2.0,
            0.0, -1.0, layout.height / 2.0,
            0.0, 0.0, 1.0,
        );
        Homography::from_matrix(k * rt * n)
    }
}

/// Everything needed to render one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub checkers: Vec<CheckerPose>,
    pub background: BackgroundSource,
    /// Seeds the pixel noise.
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.checkers.len();
        if !(1..=5).contains(&n) {
            return Err(Error::RejectedScene(format!("{n} charts, need 1 to 5")));
        }
        for (i, c) in self.checkers.iter().enumerate() {
            if c.rotation.iter().any(|r| !(r.abs() <= FRAC_PI_2 + 1e-12)) {
                return Err(Error::RejectedScene(format!("chart {i}: rotation outside [-pi/2, pi/2]")));
            }
            if c.translation.iter().any(|t| !t.is_finite()) || !(-30.0..=-10.0).contains(&c.translation[2]) {
                return Err(Error::RejectedScene(format!("chart {i}: t_z outside [-30, -10]")));
            }
        }
        Ok(())
    }
}

/// Ground truth for one rendered chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckerTruth {
    /// Outline, clockwise from the corner next to patch 1.
    pub corners: Quadrilateral,
    pub homography: Homography,
    pub patch_quads: Vec<Quadrilateral>,
    /// Mean colour of each patch measured on the final image.
    pub mu: Vec<[f64; 3]>,
    /// Patch colours after luminance adjustment, before noise.
    pub adjusted_colors: Vec<[f64; 3]>,
    pub bbox: BBox,
    /// Partly outside the image or partly hidden by a later chart.
    pub truncated: bool,
    pub patch_truncated: Vec<bool>,
    pub pose: CheckerPose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub image_id: String,
    pub width: usize,
    pub height: usize,
    pub checkers: Vec<CheckerTruth>,
}

impl GroundTruth {
    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.checkers.iter().enumerate() {
            let n = crate::model::PATCHES;
            if c.patch_quads.len() != n || c.mu.len() != n || c.patch_truncated.len() != n {
                return Err(Error::InvalidHypothesis(format!("ground truth chart {i} needs 24 patches")));
            }
        }
        Ok(())
    }
}

/// Projects a model point by explicit 3-D transformation; used to check
/// the homography route.
pub fn project_model_point(pose: &CheckerPose, layout: &ChartLayout, camera: &Camera, p: Point2) -> Option<Point2> {
    camera.project(pose.model_to_camera(layout, p))
}
