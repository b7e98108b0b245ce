use image::imageops::{self, FilterType};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::BackgroundSource;
use crate::error::Result;
use crate::imgproc::ImageBuffer;
use crate::io::read_image;

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn random_color(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; 3] {
    [0, 1, 2].map(|_| rng.random_range(lo..hi))
}

fn gradient(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Vec<[f64; 3]> {
    let a = random_color(rng, 0.25, 0.75);
    let b = random_color(rng, 0.25, 0.75);
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (dx, dy) = (angle.cos(), angle.sin());
    let span = (w as f64).abs() * dx.abs() + (h as f64) * dy.abs();
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let mut px = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let t = (((x as f64 - cx) * dx + (y as f64 - cy) * dy) / span + 0.5).clamp(0.0, 1.0);
            px.push([0, 1, 2].map(|k| a[k] + (b[k] - a[k]) * t));
        }
    }
    px
}

/// Scatters rectangles, ellipses and strokes over a gradient, then adds a
/// fine texture.
fn clutter(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Vec<[f64; 3]> {
    let mut px = gradient(rng, w, h);
    let scale = w.min(h) as f64;
    for _ in 0..60 {
        let color = random_color(rng, 0.05, 0.95);
        let cx = rng.random_range(0.0..w as f64);
        let cy = rng.random_range(0.0..h as f64);
        let a = rng.random_range(0.01..0.2) * scale;
        let b = rng.random_range(0.01..0.2) * scale;
        let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let (cs, sn) = (angle.cos(), angle.sin());
        let kind = rng.random_range(0..3);
        let reach = a.max(b) * 1.5;
        let x0 = (cx - reach).max(0.0) as usize;
        let x1 = ((cx + reach).ceil() as usize).min(w);
        let y0 = (cy - reach).max(0.0) as usize;
        let y1 = ((cy + reach).ceil() as usize).min(h);
        for y in y0..y1 {
            for x in x0..x1 {
                let (rx, ry) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                let (u, v) = (cs * rx + sn * ry, -sn * rx + cs * ry);
                let inside = match kind {
                    0 => u.abs() <= a && v.abs() <= b,
                    1 => (u / a).powi(2) + (v / b).powi(2) <= 1.0,
                    _ => u.abs() <= a && v.abs() <= 2.0,
                };
                if inside {
                    px[y * w + x] = color;
                }
            }
        }
    }
    for p in &mut px {
        let n: f64 = rng.random_range(-0.04..0.04);
        *p = p.map(|v| v + n);
    }
    px
}

/// Renders a procedural background, or loads and resizes a file.
pub fn procedural_background(src: &BackgroundSource, w: usize, h: usize) -> Result<ImageBuffer> {
    let px = match src {
        BackgroundSource::File(path) => {
            let img = read_image(path)?;
            if img.width() == w && img.height() == h {
                return Ok(img);
            }
            let out = imageops::resize(&img.to_rgb_image(), w as u32, h as u32, FilterType::Triangle);
            return Ok(ImageBuffer::from_rgb_image(out));
        }
        BackgroundSource::Flat { gray } => vec![[*gray; 3]; w * h],
        BackgroundSource::Gradient { seed } => gradient(&mut ChaCha8Rng::seed_from_u64(*seed), w, h),
        BackgroundSource::Clutter { seed } => clutter(&mut ChaCha8Rng::seed_from_u64(*seed), w, h),
    };
    Ok(ImageBuffer::from_fn(w, h, |x, y| px[y * w + x].map(to_u8)))
}

pub fn load_backgrounds(sources: &[BackgroundSource], w: usize, h: usize) -> Result<Vec<ImageBuffer>> {
    sources.iter().map(|s| procedural_background(s, w, h)).collect()
}
