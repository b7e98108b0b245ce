use std::time::Instant;

use crate::config::DetectConfig;
use crate::error::{Error, Result};
use crate::geometry::{BBox, Homography, Point2};
use crate::imgproc::{adaptive_threshold, canonize, connected_components, morph_cleanup, ImageBuffer, MIN_INPUT_SIDE};
use crate::model::ColorCheckerModel;

use super::orientation::SubGrid;
use super::{
    build_hypothesis, cluster_patches, complete_grid, extract_patches, filter_regions, rank_orientations,
    score_hypothesis, select_hypotheses, CheckerHypothesis, DetectionResult, PatchCandidate,
};

/// Runs the recognition chain on an already canonical image and returns
/// every scored hypothesis, unfiltered. Coordinates are those of `canon`.
pub fn recognize(canon: &ImageBuffer, model: &ColorCheckerModel, cfg: &DetectConfig) -> Vec<CheckerHypothesis> {
    let Ok(dark) = adaptive_threshold(canon, cfg.threshold.window, cfg.threshold.offset) else {
        return Vec::new();
    };
    // Patches are the bright cells enclosed by the dark chart body.
    let cells = morph_cleanup(&dark.complement());
    let Ok(regions) = connected_components(&cells, canon) else {
        return Vec::new();
    };
    let kept = filter_regions(&regions, &cfg.regions);
    let patches = extract_patches(&kept, canon, cfg);
    let mut out = Vec::new();
    for group in cluster_patches(&patches, cfg.b0_factor, cfg.min_group_size) {
        let mut members = group;
        let mut found = false;
        for _ in 0..=cfg.max_pruning {
            if members.len() < cfg.min_group_size {
                break;
            }
            let hyps = group_hypotheses(canon, model, cfg, &patches, &members);
            let stop = found;
            found |= !hyps.is_empty();
            out.extend(hyps);
            if stop {
                break;
            }
            drop_most_remote(&patches, &mut members);
        }
    }
    out
}

fn group_hypotheses(
    canon: &ImageBuffer,
    model: &ColorCheckerModel,
    cfg: &DetectConfig,
    patches: &[PatchCandidate],
    members: &[usize],
) -> Vec<CheckerHypothesis> {
    let Ok(grid) = complete_grid(patches, members, &model.layout) else {
        return Vec::new();
    };
    let colors = SubGrid::from_assignment(&grid, patches);
    let Ok(ranked) = rank_orientations(&colors, model) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for o in ranked.iter().take(cfg.hypotheses_per_group) {
        let Ok(mut h) = build_hypothesis(&grid, o, model) else {
            continue;
        };
        if score_hypothesis(&mut h, canon, model, cfg.sample_shrink).is_ok() {
            out.push(h);
        }
    }
    out
}

/// Removes the member farthest from the coordinate-wise median centre.
fn drop_most_remote(patches: &[PatchCandidate], members: &mut Vec<usize>) {
    let median = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let mx = median(members.iter().map(|&i| patches[i].center.x).collect());
    let my = median(members.iter().map(|&i| patches[i].center.y).collect());
    let m = Point2::new(mx, my);
    if let Some(pos) = (0..members.len()).max_by(|&a, &b| {
        patches[members[a]]
            .center
            .distance(m)
            .total_cmp(&patches[members[b]].center.distance(m))
    }) {
        members.remove(pos);
    }
}

fn roi_pixels(roi: &BBox, w: usize, h: usize) -> Result<Option<(usize, usize, usize, usize)>> {
    if ![roi.x0, roi.y0, roi.x1, roi.y1].iter().all(|v| v.is_finite()) || roi.x1 <= roi.x0 || roi.y1 <= roi.y0 {
        return Err(Error::RejectedInput(format!(
            "roi [{}, {}, {}, {}] is empty or not finite",
            roi.x0, roi.y0, roi.x1, roi.y1
        )));
    }
    let x0 = roi.x0.max(0.0).floor() as usize;
    let y0 = roi.y0.max(0.0).floor() as usize;
    let x1 = (roi.x1.ceil().max(0.0) as usize).min(w);
    let y1 = (roi.y1.ceil().max(0.0) as usize).min(h);
    if x1 < x0 + MIN_INPUT_SIDE || y1 < y0 + MIN_INPUT_SIDE {
        return Ok(None);
    }
    Ok(Some((x0, y0, x1 - x0, y1 - y0)))
}

/// Finds charts in `img`. With `rois`, recognition runs on each crop and
/// results are mapped back to image coordinates; a crop that yields
/// nothing contributes nothing. Hypotheses are re-scored on the original
/// pixels before selection.
pub fn detect(
    img: &ImageBuffer,
    model: &ColorCheckerModel,
    rois: Option<&[BBox]>,
    n_expected: Option<usize>,
    cfg: &DetectConfig,
) -> Result<DetectionResult> {
    let start = Instant::now();
    if img.channels() != 3 {
        return Err(Error::RejectedInput("detection needs an RGB image".into()));
    }
    let (w, h) = (img.width(), img.height());
    let full = [BBox::new(0.0, 0.0, w as f64, h as f64)];
    let regions = rois.unwrap_or(&full);
    let mut candidates = Vec::new();
    for (ri, roi) in regions.iter().enumerate() {
        let Some((x0, y0, cw, ch)) = roi_pixels(roi, w, h)? else {
            continue;
        };
        let crop = if (x0, y0, cw, ch) == (0, 0, w, h) {
            img.clone()
        } else {
            img.crop(x0, y0, cw, ch)?
        };
        let Ok(canon) = canonize(&crop) else {
            continue;
        };
        let back = Homography::translation(x0 as f64, y0 as f64).after(&Homography::scaling(
            cw as f64 / canon.width() as f64,
            ch as f64 / canon.height() as f64,
        ))?;
        for hyp in recognize(&canon, model, cfg) {
            let Ok(mut g) = hyp.transformed(&back) else {
                continue;
            };
            g.roi = rois.map(|_| ri);
            if score_hypothesis(&mut g, img, model, cfg.sample_shrink).is_ok() {
                candidates.push(g);
            }
        }
    }
    let hypotheses = select_hypotheses(candidates, n_expected, cfg.cost_threshold, cfg.nms_iou);
    Ok(DetectionResult {
        image_id: String::new(),
        width: w,
        height: h,
        hypotheses,
        rois: rois.map(<[BBox]>::to_vec).unwrap_or_default(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}
