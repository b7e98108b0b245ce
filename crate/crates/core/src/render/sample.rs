use rand::Rng;

use crate::config::RenderConfig;
use crate::error::{Error, Result};
use crate::geometry::{clip_convex, polygon_area, Quadrilateral};
use crate::model::ChartLayout;

use super::{Camera, CheckerPose, SceneSpec};

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Projected outlines, or `None` if some chart degenerates or misses the
/// image entirely.
fn outlines(poses: &[CheckerPose], layout: &ChartLayout, camera: &Camera) -> Option<Vec<Quadrilateral>> {
    let frame = camera.bounds();
    poses
        .iter()
        .map(|p| {
            if layout.chart_corners().iter().any(|&c| p.model_to_camera(layout, c)[2] >= 0.0) {
                return None;
            }
            let h = p.homography(layout, camera).ok()?;
            let q = layout.chart_quad().map(&h).ok()?;
            (q.area() >= 1.0 && q.bbox().intersection(&frame).is_valid()).then_some(q)
        })
        .collect()
}

fn acceptable(cfg: &RenderConfig, qs: &[Quadrilateral], camera: &Camera) -> bool {
    let frame = camera.bounds();
    for (i, q) in qs.iter().enumerate() {
        if cfg.require_inside
            && !q.corners().iter().all(|p| p.x >= 0.0 && p.y >= 0.0 && p.x <= frame.x1 && p.y <= frame.y1)
        {
            return false;
        }
        if q.bbox().intersection(&frame).area() < cfg.min_bbox_fraction * frame.area() {
            return false;
        }
        if cfg.forbid_overlap && qs[..i].iter().any(|o| polygon_area(&clip_convex(q.corners(), o.corners())) > 0.0) {
            return false;
        }
    }
    true
}

/// Draws a scene: chart count, poses, identities and background uniformly
/// from the configured intervals, redrawing until the placement rules hold.
pub fn sample_scene<R: Rng + ?Sized>(cfg: &RenderConfig, rng: &mut R) -> Result<SceneSpec> {
    if cfg.backgrounds.is_empty() {
        return Err(Error::config("render.backgrounds", "background pool is empty"));
    }
    let camera = Camera::from_config(&cfg.camera)?;
    let layout = ChartLayout::default();
    for _ in 0..cfg.max_attempts.max(1) {
        let n = rng.random_range(cfg.checkers[0]..=cfg.checkers[1]);
        let checkers: Vec<CheckerPose> = (0..n)
            .map(|_| CheckerPose {
                rotation: cfg.rotation.map(|iv| uniform(rng, iv)),
                translation: cfg.translation.map(|iv| uniform(rng, iv)),
                identity: rng.random_range(0..cfg.identities.max(1)),
            })
            .collect();
        let background = cfg.backgrounds[rng.random_range(0..cfg.backgrounds.len())].clone();
        let seed = rng.random();
        let Some(qs) = outlines(&checkers, &layout, &camera) else {
            continue;
        };
        if acceptable(cfg, &qs, &camera) {
            return Ok(SceneSpec { checkers, background, seed });
        }
    }
    Err(Error::RejectedScene(format!(
        "no acceptable scene within {} attempts",
        cfg.max_attempts
    )))
}
