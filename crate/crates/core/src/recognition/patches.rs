use crate::config::DetectConfig;
use crate::geometry::{min_bounding_parallelogram, rdp_simplify, Line2, Point2, Quadrilateral};
use crate::imgproc::{ImageBuffer, Region};

use super::PatchCandidate;

/// Colour statistics of the pixels whose centres fall inside a quad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchStats {
    /// Mean RGB in `[0, 1]`.
    pub mean: [f64; 3],
    /// Per-channel population standard deviation in `[0, 1]`.
    pub std: [f64; 3],
    pub count: usize,
}

/// Samples the pixels whose centres lie inside `quad`. `None` when no pixel
/// centre of the image does.
pub fn sample_quad(img: &ImageBuffer, quad: &Quadrilateral) -> Option<PatchStats> {
    let b = quad.bbox();
    let (w, h) = (img.width() as f64, img.height() as f64);
    if b.x1 < 0.0 || b.y1 < 0.0 || b.x0 > w || b.y0 > h {
        return None;
    }
    let x0 = (b.x0 - 0.5).floor().max(0.0) as usize;
    let y0 = (b.y0 - 0.5).floor().max(0.0) as usize;
    let x1 = ((b.x1 - 0.5).ceil().max(0.0) as usize).min(img.width() - 1);
    let y1 = ((b.y1 - 0.5).ceil().max(0.0) as usize).min(img.height() - 1);
    let mut sum = [0.0f64; 3];
    let mut sq = [0.0f64; 3];
    let mut n = 0usize;
    for y in y0..=y1 {
        for x in x0..=x1 {
            if quad.contains(Point2::new(x as f64 + 0.5, y as f64 + 0.5), 0.0) {
                let px = img.rgb(x, y);
                for k in 0..3 {
                    let v = px[k] as f64 / 255.0;
                    sum[k] += v;
                    sq[k] += v * v;
                }
                n += 1;
            }
        }
    }
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    let mean = sum.map(|s| s / nf);
    let std = [0, 1, 2].map(|k| (sq[k] / nf - mean[k] * mean[k]).max(0.0).sqrt());
    Some(PatchStats { mean, std, count: n })
}

fn patch_from_region(r: &Region, img: &ImageBuffer, cfg: &DetectConfig) -> Option<PatchCandidate> {
    if r.pixel_count < cfg.min_patch_pixels {
        return None;
    }
    let poly = rdp_simplify(&r.contour, cfg.rdp_epsilon_factor * r.perimeter);
    if poly.len() != 4 {
        return None;
    }
    let corners = Quadrilateral::ordered_from_top_left([poly[0], poly[1], poly[2], poly[3]])
        .or_else(|_| Quadrilateral::new([poly[0], poly[1], poly[2], poly[3]]))
        .ok()?;
    let quad = min_bounding_parallelogram(&r.contour).ok()?;
    // The diagonals of the vertex quad meet at the projected patch centre.
    let c = corners.corners();
    let center = Line2::through(c[0], c[2])
        .zip(Line2::through(c[1], c[3]))
        .and_then(|(a, b)| a.intersect(&b))
        .filter(|p| quad.contains(*p, 0.0))
        .unwrap_or_else(|| quad.centroid());
    let mean_color = sample_quad(img, &quad.shrink(cfg.sample_shrink))
        .or_else(|| sample_quad(img, &quad))
        .map(|s| s.mean)?;
    Some(PatchCandidate {
        area: quad.area(),
        axis_max: r.axis_major,
        quad,
        corners,
        center,
        mean_color,
    })
}

/// Turns filtered regions into patch candidates: contours that simplify to
/// four vertices get a minimum bounding parallelogram and a mean colour.
pub fn extract_patches(regions: &[Region], img: &ImageBuffer, cfg: &DetectConfig) -> Vec<PatchCandidate> {
    regions
        .iter()
        .filter_map(|r| patch_from_region(r, img, cfg))
        .collect()
}
