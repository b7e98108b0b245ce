//! Pixel-level stages: canonical rescaling and denoising, adaptive
//! thresholding, morphological cleanup and connected-region analysis.

mod regions;

pub use regions::{connected_components, Region};

use std::collections::VecDeque;

use image::imageops::{self, FilterType};

use crate::error::{Error, Result};

/// Minimum side of the canonical image.
pub const CANONICAL_MIN_SIDE: u32 = 400;
/// Smallest input side accepted by [`canonize`].
pub const MIN_INPUT_SIDE: usize = 24;
const WIENER_WINDOW: usize = 5;

/// Row-major 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::RejectedInput(format!("empty image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::RejectedInput(format!("unsupported channel count {channels}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::RejectedInput(format!(
                "buffer holds {} samples, expected {}",
                data.len(),
                width * height * channels
            )));
        }
        Ok(ImageBuffer {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        ImageBuffer {
            width: width.max(1),
            height: height.max(1),
            channels: 3,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        ImageBuffer {
            width,
            height,
            channels: 3,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    /// RGB triple at `(x, y)`; gray images replicate their sample.
    #[inline]
    pub fn rgb(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * self.channels;
        if self.channels == 3 {
            [self.data[i], self.data[i + 1], self.data[i + 2]]
        } else {
            let v = self.data[i];
            [v, v, v]
        }
    }

    #[inline]
    pub fn set_rgb(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * self.channels;
        if self.channels == 3 {
            self.data[i..i + 3].copy_from_slice(&rgb);
        } else {
            self.data[i] = luma_u8(rgb);
        }
    }

    pub fn to_rgb(&self) -> ImageBuffer {
        if self.channels == 3 {
            return self.clone();
        }
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: 3,
            data: self.data.iter().flat_map(|&v| [v, v, v]).collect(),
        }
    }

    /// Luma scaled by 1000 (exact integer arithmetic).
    #[inline]
    pub fn luma1000(&self, x: usize, y: usize) -> i64 {
        let [r, g, b] = self.rgb(x, y);
        luma1000([r, g, b])
    }

    /// Copy of the window `[x0, x0+w) x [y0, y0+h)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<ImageBuffer> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::RejectedInput(format!(
                "crop {w}x{h}+{x0}+{y0} outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h * self.channels);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * self.channels;
            data.extend_from_slice(&self.data[start..start + w * self.channels]);
        }
        ImageBuffer::new(w, h, self.channels, data)
    }

    pub(crate) fn to_rgb_image(&self) -> image::RgbImage {
        let rgb = self.to_rgb();
        image::RgbImage::from_raw(rgb.width as u32, rgb.height as u32, rgb.data)
            .expect("dimensions match buffer length")
    }

    pub(crate) fn from_rgb_image(img: image::RgbImage) -> ImageBuffer {
        let (w, h) = img.dimensions();
        ImageBuffer {
            width: w as usize,
            height: h as usize,
            channels: 3,
            data: img.into_raw(),
        }
    }
}

/// `1000 * (0.299 R + 0.587 G + 0.114 B)`.
#[inline]
pub fn luma1000(rgb: [u8; 3]) -> i64 {
    299 * rgb[0] as i64 + 587 * rgb[1] as i64 + 114 * rgb[2] as i64
}

#[inline]
pub fn luma_u8(rgb: [u8; 3]) -> u8 {
    ((luma1000(rgb) + 500) / 1000) as u8
}

/// Luma in `[0, 1]` of an RGB triple in `[0, 1]`.
#[inline]
pub fn luma_unit(rgb: [f64; 3]) -> f64 {
    0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]
}

/// One boolean per pixel, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = BinaryMask::new(width, height);
        for y in 0..height {
            for x in 0..width {
                m.bits[y * width + x] = f(x, y);
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Rescales so the smaller side is 400 px, applies a 5x5 adaptive Wiener
/// filter and stretches each channel to full range.
pub fn canonize(img: &ImageBuffer) -> Result<ImageBuffer> {
    if img.channels() != 3 {
        return Err(Error::RejectedInput("canonize expects an RGB image".into()));
    }
    if img.width() < MIN_INPUT_SIDE || img.height() < MIN_INPUT_SIDE {
        return Err(Error::RejectedInput(format!(
            "image {}x{} is smaller than {MIN_INPUT_SIDE} px on a side",
            img.width(),
            img.height()
        )));
    }
    let (w, h) = canonical_size(img.width(), img.height());
    let resized = if (w, h) == (img.width(), img.height()) {
        img.clone()
    } else {
        let out = imageops::resize(&img.to_rgb_image(), w as u32, h as u32, FilterType::Triangle);
        ImageBuffer::from_rgb_image(out)
    };
    let mut filtered = wiener_filter(&resized);
    normalize_channels(&mut filtered);
    Ok(filtered)
}

/// Output dimensions of [`canonize`].
pub fn canonical_size(width: usize, height: usize) -> (usize, usize) {
    let min = width.min(height) as f64;
    let s = CANONICAL_MIN_SIDE as f64 / min;
    if width <= height {
        (CANONICAL_MIN_SIDE as usize, ((height as f64 * s).round() as usize).max(1))
    } else {
        (((width as f64 * s).round() as usize).max(1), CANONICAL_MIN_SIDE as usize)
    }
}

/// Summed-area table with one extra leading row and column.
struct Integral {
    width: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Integral {
    fn new(width: usize, height: usize, sample: impl Fn(usize, usize) -> f64) -> Self {
        let stride = width + 1;
        let mut sum = vec![0.0; stride * (height + 1)];
        let mut sum_sq = vec![0.0; stride * (height + 1)];
        for y in 0..height {
            let (mut row, mut row_sq) = (0.0, 0.0);
            for x in 0..width {
                let v = sample(x, y);
                row += v;
                row_sq += v * v;
                let i = (y + 1) * stride + x + 1;
                sum[i] = sum[i - stride] + row;
                sum_sq[i] = sum_sq[i - stride] + row_sq;
            }
        }
        Integral { width, sum, sum_sq }
    }

    /// (count, sum, sum of squares) over `[x0, x1) x [y0, y1)`.
    fn window(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> (f64, f64, f64) {
        let s = self.width + 1;
        let at = |t: &Vec<f64>| t[y1 * s + x1] - t[y0 * s + x1] - t[y1 * s + x0] + t[y0 * s + x0];
        (((x1 - x0) * (y1 - y0)) as f64, at(&self.sum), at(&self.sum_sq))
    }
}

/// Locally adaptive Wiener filter over a 5x5 window (clipped at the border).
/// The noise power is the mean of all local variances, per channel.
pub fn wiener_filter(img: &ImageBuffer) -> ImageBuffer {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let r = WIENER_WINDOW / 2;
    let mut out = img.clone();
    for c in 0..ch {
        let table = Integral::new(w, h, |x, y| img.data[(y * w + x) * ch + c] as f64);
        let mut means = vec![0.0; w * h];
        let mut vars = vec![0.0; w * h];
        for y in 0..h {
            let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
            for x in 0..w {
                let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
                let (n, s, sq) = table.window(x0, y0, x1, y1);
                let mean = s / n;
                means[y * w + x] = mean;
                vars[y * w + x] = (sq / n - mean * mean).max(0.0);
            }
        }
        let noise = vars.iter().sum::<f64>() / vars.len() as f64;
        for i in 0..w * h {
            let v = img.data[i * ch + c] as f64;
            let (mean, var) = (means[i], vars[i]);
            let denom = var.max(noise);
            let f = if denom > 0.0 {
                mean + (var - noise).max(0.0) / denom * (v - mean)
            } else {
                mean
            };
            out.data[i * ch + c] = f.round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

/// Multiplies every channel by `255 / max(channel)`.
pub fn normalize_channels(img: &mut ImageBuffer) {
    let ch = img.channels();
    for c in 0..ch {
        let max = img.data.iter().skip(c).step_by(ch).copied().max().unwrap_or(0);
        if max == 0 || max == 255 {
            continue;
        }
        let gain = 255.0 / max as f64;
        for v in img.data.iter_mut().skip(c).step_by(ch) {
            *v = (*v as f64 * gain).round().min(255.0) as u8;
        }
    }
}

/// Marks pixels darker than their local luma mean by more than `offset`
/// gray levels. The window is clipped at the image border.
pub fn adaptive_threshold(img: &ImageBuffer, window: usize, offset: f64) -> Result<BinaryMask> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "threshold window must be odd and >= 3, got {window}"
        )));
    }
    if !offset.is_finite() {
        return Err(Error::InvalidParameter("threshold offset must be finite".into()));
    }
    let (w, h) = (img.width(), img.height());
    if window > w || window > h {
        return Err(Error::InvalidParameter(format!(
            "threshold window {window} exceeds {w}x{h} image"
        )));
    }
    // Exact integer summed-area table of luma * 1000.
    let stride = w + 1;
    let mut table = vec![0i64; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0i64;
        for x in 0..w {
            row += img.luma1000(x, y);
            table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
        }
    }
    let off = (offset * 1000.0).round() as i64;
    let r = window / 2;
    let mut mask = BinaryMask::new(w, h);
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
            let count = ((x1 - x0) * (y1 - y0)) as i64;
            let sum = table[y1 * stride + x1] - table[y0 * stride + x1] - table[y1 * stride + x0]
                + table[y0 * stride + x0];
            mask.bits[y * w + x] = img.luma1000(x, y) * count < sum - off * count;
        }
    }
    Ok(mask)
}

fn erode3(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width, mask.height);
    BinaryMask::from_fn(w, h, |x, y| {
        if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
            return false;
        }
        (y - 1..=y + 1).all(|yy| (x - 1..=x + 1).all(|xx| mask.get(xx, yy)))
    })
}

fn dilate3(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width, mask.height);
    BinaryMask::from_fn(w, h, |x, y| {
        let (x0, x1) = (x.saturating_sub(1), (x + 1).min(w - 1));
        let (y0, y1) = (y.saturating_sub(1), (y + 1).min(h - 1));
        (y0..=y1).any(|yy| (x0..=x1).any(|xx| mask.get(xx, yy)))
    })
}

/// Removes every 8-connected foreground component that touches the border.
pub fn clear_border(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width, mask.height);
    let mut out = mask.clone();
    let mut queue = VecDeque::new();
    let seed = |x: usize, y: usize, out: &mut BinaryMask, q: &mut VecDeque<(usize, usize)>| {
        if out.get(x, y) {
            out.set(x, y, false);
            q.push_back((x, y));
        }
    };
    for x in 0..w {
        seed(x, 0, &mut out, &mut queue);
        seed(x, h - 1, &mut out, &mut queue);
    }
    for y in 0..h {
        seed(0, y, &mut out, &mut queue);
        seed(w - 1, y, &mut out, &mut queue);
    }
    while let Some((x, y)) = queue.pop_front() {
        for yy in y.saturating_sub(1)..=(y + 1).min(h - 1) {
            for xx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                seed(xx, yy, &mut out, &mut queue);
            }
        }
    }
    out
}

/// 3x3 opening followed by border clearing.
pub fn morph_cleanup(mask: &BinaryMask) -> BinaryMask {
    clear_border(&dilate3(&erode3(mask)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_buffer_validates_length() {
        assert!(ImageBuffer::new(2, 2, 3, vec![0; 12]).is_ok());
        assert!(ImageBuffer::new(2, 2, 3, vec![0; 11]).is_err());
        assert!(ImageBuffer::new(0, 2, 1, vec![]).is_err());
        assert!(ImageBuffer::new(2, 2, 2, vec![0; 8]).is_err());
    }

    #[test]
    fn canonize_sizes() {
        let img = ImageBuffer::filled(800, 1200, [10, 20, 30]);
        let c = canonize(&img).unwrap();
        assert_eq!((c.width(), c.height()), (400, 600));
        let img = ImageBuffer::filled(1024, 640, [10, 20, 30]);
        let c = canonize(&img).unwrap();
        assert_eq!((c.width(), c.height()), (640, 400));
        let again = canonize(&c).unwrap();
        assert_eq!((again.width(), again.height()), (640, 400));
    }

    #[test]
    fn canonize_rejects_tiny_images() {
        let img = ImageBuffer::filled(23, 100, [1, 2, 3]);
        assert!(matches!(canonize(&img), Err(Error::RejectedInput(_))));
    }

    #[test]
    fn wiener_keeps_uniform_gray() {
        let img = ImageBuffer::filled(400, 400, [128, 128, 128]);
        assert_eq!(wiener_filter(&img), img);
        let c = canonize(&img).unwrap();
        let first = c.rgb(0, 0);
        assert!(c.data().chunks(3).all(|p| p == first));
    }

    #[test]
    fn uniform_image_has_no_foreground() {
        let img = ImageBuffer::filled(64, 48, [90, 90, 90]);
        let m = adaptive_threshold(&img, 31, 5.0).unwrap();
        assert_eq!(m.count(), 0);
    }

    #[test]
    fn threshold_window_errors() {
        let img = ImageBuffer::filled(20, 40, [0, 0, 0]);
        assert!(adaptive_threshold(&img, 31, 5.0).is_err());
        assert!(adaptive_threshold(&img, 4, 5.0).is_err());
        assert!(adaptive_threshold(&img, 1, 5.0).is_err());
    }

    #[test]
    fn isolated_pixel_is_removed() {
        let mut m = BinaryMask::new(20, 20);
        m.set(10, 10, true);
        assert_eq!(morph_cleanup(&m).count(), 0);
    }

    #[test]
    fn central_block_survives_and_border_block_is_removed() {
        let block = BinaryMask::from_fn(20, 20, |x, y| (8..13).contains(&x) && (8..13).contains(&y));
        assert_eq!(morph_cleanup(&block), block);
        let top = BinaryMask::from_fn(20, 20, |x, y| (8..13).contains(&x) && y < 5);
        assert_eq!(morph_cleanup(&top).count(), 0);
    }
}
