//! Overlay rendering of detection results for visual inspection.

use crate::geometry::{Point2, Quadrilateral};
use crate::imgproc::ImageBuffer;
use crate::recognition::DetectionResult;

const OUTLINE: [u8; 3] = [0, 255, 0];
const GRID: [u8; 3] = [255, 255, 0];

/// Copy of `img` with every hypothesis outline and its patch grid drawn on
/// top. Parts falling outside the image are clipped.
pub fn draw_overlay(img: &ImageBuffer, result: &DetectionResult) -> ImageBuffer {
    let mut out = img.to_rgb();
    for h in &result.hypotheses {
        for q in &h.patch_quads {
            draw_quad(&mut out, q, GRID, 1);
        }
        draw_quad(&mut out, &h.corners, OUTLINE, 2);
    }
    out
}

pub fn draw_quad(img: &mut ImageBuffer, quad: &Quadrilateral, color: [u8; 3], thickness: usize) {
    let c = quad.corners();
    for i in 0..4 {
        draw_line(img, c[i], c[(i + 1) % 4], color, thickness);
    }
}

/// Stamps a `thickness`-wide square brush at unit steps along the segment.
pub fn draw_line(img: &mut ImageBuffer, a: Point2, b: Point2, color: [u8; 3], thickness: usize) {
    if !a.is_finite() || !b.is_finite() {
        return;
    }
    let (w, h) = (img.width() as f64, img.height() as f64);
    let limit = 4.0 * (w + h);
    if a.x.abs().max(a.y.abs()).max(b.x.abs()).max(b.y.abs()) > limit {
        return;
    }
    let steps = (b.x - a.x).abs().max((b.y - a.y).abs()).ceil().max(1.0) as usize;
    let t = thickness.max(1) as i64;
    for s in 0..=steps {
        let f = s as f64 / steps as f64;
        let x = (a.x + (b.x - a.x) * f).floor() as i64;
        let y = (a.y + (b.y - a.y) * f).floor() as i64;
        for dy in 0..t {
            for dx in 0..t {
                let (px, py) = (x + dx - t / 2, y + dy - t / 2);
                if px >= 0 && py >= 0 && (px as f64) < w && (py as f64) < h {
                    img.set_rgb(px as usize, py as usize, color);
                }
            }
        }
    }
}
