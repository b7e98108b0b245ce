use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{clip_convex, polygon_area, Homography, Point2, Quadrilateral};
use crate::imgproc::{luma_unit, ImageBuffer};
use crate::model::{ChartLayout, ColorCheckerModel, PATCHES};
use crate::recognition::sample_quad;

use super::{Camera, CheckerTruth, GroundTruth, SceneSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Std-dev of additive Gaussian noise on `[0, 1]` intensities.
    pub noise_sigma: f64,
    pub luminance_adjust: bool,
    /// Shrink factor of the patch quads used to measure ground-truth colours.
    pub sample_shrink: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            noise_sigma: 2.0 / 255.0,
            luminance_adjust: true,
            sample_shrink: 0.7,
        }
    }
}

const OUTSIDE: u8 = u8::MAX;
const FRAME: u8 = u8::MAX - 1;
const SUB: usize = 4;

struct ChartRaster<'a> {
    layout: &'a ChartLayout,
    inverse: Homography,
    front_sign: f64,
    colors: Vec<[f64; 3]>,
    frame: [f64; 3],
}

impl ChartRaster<'_> {
    fn class(&self, p: Point2) -> u8 {
        if self.inverse.w_of(p) * self.front_sign <= 0.0 {
            return OUTSIDE;
        }
        let m = self.inverse.apply(p);
        if !self.layout.contains(m) {
            return OUTSIDE;
        }
        match self.layout.patch_at(m) {
            Some(k) => k as u8,
            None => FRAME,
        }
    }

    fn color(&self, class: u8) -> [f64; 3] {
        if class == FRAME {
            self.frame
        } else {
            self.colors[class as usize]
        }
    }
}

/// Area-weighted luma of the chart surface.
fn chart_luma(model: &ColorCheckerModel) -> f64 {
    let l = &model.layout;
    let patch_area = l.patch_size * l.patch_size;
    let total = l.width * l.height;
    let patches: f64 = model.reference_colors.iter().map(|c| luma_unit(*c) * patch_area).sum();
    let frame = luma_unit(l.frame_color) * (total - PATCHES as f64 * patch_area);
    (patches + frame) / total
}

/// Mean luma of background pixels whose centres fall inside `outline`.
fn covered_luma(bg: &ImageBuffer, outline: &Quadrilateral) -> Option<f64> {
    let b = outline.bbox();
    let (w, h) = (bg.width(), bg.height());
    let x0 = b.x0.floor().max(0.0) as usize;
    let y0 = b.y0.floor().max(0.0) as usize;
    let x1 = (b.x1.ceil().max(0.0) as usize).min(w);
    let y1 = (b.y1.ceil().max(0.0) as usize).min(h);
    let (mut sum, mut n) = (0.0, 0usize);
    for y in y0..y1 {
        for x in x0..x1 {
            if outline.contains(Point2::new(x as f64 + 0.5, y as f64 + 0.5), 0.0) {
                sum += luma_unit(bg.rgb(x, y).map(|v| v as f64 / 255.0));
                n += 1;
            }
        }
    }
    (n > 0).then(|| sum / n as f64)
}

fn inside_image(q: &Quadrilateral, w: usize, h: usize) -> bool {
    q.corners()
        .iter()
        .all(|p| p.x >= 0.0 && p.y >= 0.0 && p.x <= w as f64 && p.y <= h as f64)
}

fn overlaps(a: &Quadrilateral, b: &Quadrilateral) -> bool {
    polygon_area(&clip_convex(a.corners(), b.corners())) > 1e-9
}

/// Draws the scene's charts in order over `background` and measures the
/// ground truth on the result. `models[pose.identity % models.len()]` picks
/// each chart's colours.
pub fn render_scene(
    spec: &SceneSpec,
    models: &[ColorCheckerModel],
    camera: &Camera,
    background: &ImageBuffer,
    opts: &RenderOptions,
) -> Result<(ImageBuffer, GroundTruth)> {
    spec.validate()?;
    if models.is_empty() {
        return Err(Error::InvalidParameter("no chart model to render".into()));
    }
    let (w, h) = (camera.width, camera.height);
    if background.width() != w || background.height() != h || background.channels() != 3 {
        return Err(Error::InvalidParameter(format!(
            "background is {}x{}, camera wants {w}x{h} RGB",
            background.width(),
            background.height()
        )));
    }
    let mut canvas: Vec<[f64; 3]> = (0..w * h)
        .map(|i| background.rgb(i % w, i / w).map(|v| v as f64 / 255.0))
        .collect();

    struct Placed {
        homography: Homography,
        outline: Quadrilateral,
        patch_quads: Vec<Quadrilateral>,
        adjusted: Vec<[f64; 3]>,
    }
    let mut placed = Vec::new();
    for (ci, pose) in spec.checkers.iter().enumerate() {
        let model = &models[pose.identity % models.len()];
        let layout = &model.layout;
        for p in layout.chart_corners() {
            if pose.model_to_camera(layout, p)[2] >= 0.0 {
                return Err(Error::RejectedScene(format!("chart {ci} is not in front of the camera")));
            }
        }
        let homography = pose.homography(layout, camera)?;
        let outline = layout
            .chart_quad()
            .map(&homography)
            .map_err(|e| Error::RejectedScene(format!("chart {ci}: {e}")))?;
        let patch_quads = (0..PATCHES)
            .map(|k| layout.patch_quad(k).map(&homography))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::RejectedScene(format!("chart {ci}: {e}")))?;
        let factor = if opts.luminance_adjust {
            covered_luma(background, &outline).map_or(1.0, |ir| ir / chart_luma(model))
        } else {
            1.0
        };
        let scale = |c: [f64; 3]| c.map(|v| (v * factor).clamp(0.0, 1.0));
        let inverse = homography.inverse()?;
        let raster = ChartRaster {
            layout,
            front_sign: inverse.w_of(outline.centroid()).signum(),
            inverse,
            colors: model.reference_colors.iter().map(|&c| scale(c)).collect(),
            frame: scale(layout.frame_color),
        };
        draw_chart(&raster, &outline, &mut canvas, w, h);
        placed.push(Placed {
            homography,
            outline,
            patch_quads,
            adjusted: raster.colors.clone(),
        });
    }

    if opts.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, opts.noise_sigma)
            .map_err(|e| Error::InvalidParameter(format!("noise sigma: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for px in &mut canvas {
            for v in px.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
    }
    let image = ImageBuffer::from_fn(w, h, |x, y| {
        canvas[y * w + x].map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
    });

    let mut checkers = Vec::with_capacity(placed.len());
    for (i, p) in placed.iter().enumerate() {
        let later: Vec<&Quadrilateral> = placed[i + 1..].iter().map(|q| &q.outline).collect();
        let patch_truncated: Vec<bool> = p
            .patch_quads
            .iter()
            .map(|q| !inside_image(q, w, h) || later.iter().any(|o| overlaps(q, o)))
            .collect();
        let truncated = !inside_image(&p.outline, w, h) || later.iter().any(|o| overlaps(&p.outline, o));
        let mu = p
            .patch_quads
            .iter()
            .map(|q| sample_quad(&image, &q.shrink(opts.sample_shrink)).map_or([0.0; 3], |s| s.mean))
            .collect();
        checkers.push(CheckerTruth {
            corners: p.outline,
            homography: p.homography,
            patch_quads: p.patch_quads.clone(),
            mu,
            adjusted_colors: p.adjusted.clone(),
            bbox: p.outline.bbox(),
            truncated,
            patch_truncated,
            pose: spec.checkers[i],
        });
    }
    Ok((
        image,
        GroundTruth {
            image_id: String::new(),
            width: w,
            height: h,
            checkers,
        },
    ))
}

/// Pixels whose four corners fall in the same cell take that cell's colour;
/// the rest are box-filtered from a 4x4 grid of sub-samples.
fn draw_chart(r: &ChartRaster, outline: &Quadrilateral, canvas: &mut [[f64; 3]], w: usize, h: usize) {
    let b = outline.bbox();
    let x0 = b.x0.floor().max(0.0) as usize;
    let y0 = b.y0.floor().max(0.0) as usize;
    let x1 = (b.x1.ceil().max(0.0) as usize).min(w);
    let y1 = (b.y1.ceil().max(0.0) as usize).min(h);
    if x0 >= x1 || y0 >= y1 {
        return;
    }
    let corner_row = |y: usize| -> Vec<u8> {
        (x0..=x1).map(|x| r.class(Point2::new(x as f64, y as f64))).collect()
    };
    let mut top = corner_row(y0);
    for y in y0..y1 {
        let bottom = corner_row(y + 1);
        for x in x0..x1 {
            let i = x - x0;
            let c = top[i];
            if c == top[i + 1] && c == bottom[i] && c == bottom[i + 1] {
                if c != OUTSIDE {
                    canvas[y * w + x] = r.color(c);
                }
                continue;
            }
            let under = canvas[y * w + x];
            let mut acc = [0.0; 3];
            for sy in 0..SUB {
                for sx in 0..SUB {
                    let p = Point2::new(
                        x as f64 + (sx as f64 + 0.5) / SUB as f64,
                        y as f64 + (sy as f64 + 0.5) / SUB as f64,
                    );
                    let cls = r.class(p);
                    let col = if cls == OUTSIDE { under } else { r.color(cls) };
                    for k in 0..3 {
                        acc[k] += col[k];
                    }
                }
            }
            canvas[y * w + x] = acc.map(|v| v / (SUB * SUB) as f64);
        }
        top = bottom;
    }
}
