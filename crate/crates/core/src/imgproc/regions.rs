use super::{luma_u8, BinaryMask, ImageBuffer};
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, Point2};

/// Clockwise 8-neighbourhood in image coordinates, starting east.
const NEIGHBORS: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// One 8-connected foreground component with its shape and texture
/// features. Coordinates are pixel centres (`x + 0.5`, `y + 0.5`).
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub label: u32,
    pub pixel_count: usize,
    /// Length of the closed chain through the outer boundary pixel centres,
    /// diagonal steps weighing sqrt(2). A single pixel has perimeter 0.
    pub perimeter: f64,
    /// Pixels whose centres fall inside the convex hull of the region.
    pub convex_area: usize,
    /// Full axis lengths of the ellipse with the same normalized second
    /// central moments.
    pub axis_major: f64,
    pub axis_minor: f64,
    pub centroid: Point2,
    /// Outer boundary pixel centres, clockwise from the top-left-most pixel.
    pub contour: Vec<Point2>,
    /// Shannon entropy (bits) of the 256-bin gray histogram.
    pub entropy: f64,
    /// Inclusive pixel bounds `[x0, y0, x1, y1]`.
    pub bounds: [usize; 4],
}

impl Region {
    pub fn convexity(&self) -> f64 {
        self.pixel_count as f64 / self.convex_area.max(1) as f64
    }

    pub fn axis_ratio(&self) -> f64 {
        if self.axis_major > 0.0 {
            self.axis_minor / self.axis_major
        } else {
            0.0
        }
    }

    pub fn circularity(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.pixel_count as f64 / (self.perimeter * self.perimeter)
    }
}

/// Labels the 8-connected components of `mask` and measures each one,
/// taking gray levels from `img`. Regions come out in raster order of their
/// first pixel.
pub fn connected_components(mask: &BinaryMask, img: &ImageBuffer) -> Result<Vec<Region>> {
    let (w, h) = (mask.width(), mask.height());
    if img.width() != w || img.height() != h {
        return Err(Error::RejectedInput(format!(
            "mask {w}x{h} does not match image {}x{}",
            img.width(),
            img.height()
        )));
    }
    let mut labels = vec![0u32; w * h];
    let mut regions = Vec::new();
    let mut stack = Vec::new();
    let mut pixels: Vec<(usize, usize)> = Vec::new();
    let mut next = 1u32;

    for sy in 0..h {
        for sx in 0..w {
            if !mask.get(sx, sy) || labels[sy * w + sx] != 0 {
                continue;
            }
            let label = next;
            next += 1;
            pixels.clear();
            labels[sy * w + sx] = label;
            stack.push((sx, sy));
            while let Some((x, y)) = stack.pop() {
                pixels.push((x, y));
                for (dx, dy) in NEIGHBORS {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let i = ny as usize * w + nx as usize;
                    if labels[i] == 0 && mask.get(nx as usize, ny as usize) {
                        labels[i] = label;
                        stack.push((nx as usize, ny as usize));
                    }
                }
            }
            let contour_px = trace_boundary(&labels, w, h, label, (sx, sy));
            regions.push(measure(label, &pixels, contour_px, img));
        }
    }
    Ok(regions)
}

/// Moore-neighbour tracing with Jacob's stopping rule. `start` must be the
/// first pixel of the region in raster order, so its west neighbour is
/// outside.
fn trace_boundary(
    labels: &[u32],
    w: usize,
    h: usize,
    label: u32,
    start: (usize, usize),
) -> Vec<(usize, usize)> {
    let inside = |x: i64, y: i64| {
        x >= 0 && y >= 0 && x < w as i64 && y < h as i64 && labels[y as usize * w + x as usize] == label
    };
    // Finds the next boundary pixel clockwise around `cur`, starting just
    // after the background neighbour in direction `back`.
    let step = |cur: (i64, i64), back: usize| -> Option<((i64, i64), usize)> {
        for k in 1..=8 {
            let d = (back + k) % 8;
            let (nx, ny) = (cur.0 + NEIGHBORS[d].0, cur.1 + NEIGHBORS[d].1);
            if inside(nx, ny) {
                let prev = (back + k - 1) % 8;
                let bp = (cur.0 + NEIGHBORS[prev].0, cur.1 + NEIGHBORS[prev].1);
                // Direction from the new pixel back to that background cell.
                let back_dir = NEIGHBORS
                    .iter()
                    .position(|&(dx, dy)| (nx + dx, ny + dy) == bp)
                    .unwrap_or((d + 4) % 8);
                return Some(((nx, ny), back_dir));
            }
        }
        None
    };

    let s = (start.0 as i64, start.1 as i64);
    let mut contour = vec![start];
    let Some((second, mut back)) = step(s, 4) else {
        return contour;
    };
    let mut cur = second;
    let limit = 4 * w * h + 8;
    for _ in 0..limit {
        if cur == s {
            // Stop once the walk would repeat its first move from the start.
            match step(cur, back) {
                Some((n, _)) if n == second => break,
                _ => {}
            }
        }
        contour.push((cur.0 as usize, cur.1 as usize));
        match step(cur, back) {
            Some((n, b)) => {
                cur = n;
                back = b;
            }
            None => break,
        }
    }
    contour
}

fn measure(label: u32, pixels: &[(usize, usize)], contour_px: Vec<(usize, usize)>, img: &ImageBuffer) -> Region {
    let n = pixels.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    let mut bounds = [usize::MAX, usize::MAX, 0, 0];
    let mut hist = [0usize; 256];
    for &(x, y) in pixels {
        sx += x as f64 + 0.5;
        sy += y as f64 + 0.5;
        bounds[0] = bounds[0].min(x);
        bounds[1] = bounds[1].min(y);
        bounds[2] = bounds[2].max(x);
        bounds[3] = bounds[3].max(y);
        hist[luma_u8(img.rgb(x, y)) as usize] += 1;
    }
    let centroid = Point2::new(sx / n, sy / n);

    let (mut uxx, mut uyy, mut uxy) = (0.0, 0.0, 0.0);
    for &(x, y) in pixels {
        let dx = x as f64 + 0.5 - centroid.x;
        let dy = y as f64 + 0.5 - centroid.y;
        uxx += dx * dx;
        uyy += dy * dy;
        uxy += dx * dy;
    }
    // The 1/12 term is the second moment of a unit pixel about its centre.
    uxx = uxx / n + 1.0 / 12.0;
    uyy = uyy / n + 1.0 / 12.0;
    uxy /= n;
    let common = ((uxx - uyy).powi(2) + 4.0 * uxy * uxy).sqrt();
    let axis_major = 2.0 * std::f64::consts::SQRT_2 * (uxx + uyy + common).sqrt();
    let axis_minor = 2.0 * std::f64::consts::SQRT_2 * (uxx + uyy - common).max(0.0).sqrt();

    let entropy = hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0);

    let contour: Vec<Point2> = contour_px
        .iter()
        .map(|&(x, y)| Point2::new(x as f64 + 0.5, y as f64 + 0.5))
        .collect();
    let chain: f64 = if contour_px.len() < 2 {
        0.0
    } else {
        (0..contour_px.len())
            .map(|i| {
                let (a, b) = (contour_px[i], contour_px[(i + 1) % contour_px.len()]);
                if a.0 != b.0 && a.1 != b.1 {
                    std::f64::consts::SQRT_2
                } else {
                    1.0
                }
            })
            .sum()
    };
    let perimeter = chain;
    let convex_area = hull_pixel_count(&contour, bounds).max(pixels.len());

    Region {
        label,
        pixel_count: pixels.len(),
        perimeter,
        convex_area,
        axis_major,
        axis_minor,
        centroid,
        contour,
        entropy,
        bounds,
    }
}

/// Number of pixel centres inside (or on) the convex hull of `contour`.
fn hull_pixel_count(contour: &[Point2], bounds: [usize; 4]) -> usize {
    let hull = convex_hull(contour);
    if hull.len() < 3 {
        return 0;
    }
    let eps = 1e-9;
    let mut count = 0usize;
    for y in bounds[1]..=bounds[3] {
        let yc = y as f64 + 0.5;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..hull.len() {
            let a = hull[i];
            let b = hull[(i + 1) % hull.len()];
            if (a.y - yc).abs() <= eps {
                lo = lo.min(a.x);
                hi = hi.max(a.x);
            }
            if (a.y < yc - eps && b.y > yc + eps) || (b.y < yc - eps && a.y > yc + eps) {
                let x = a.x + (yc - a.y) / (b.y - a.y) * (b.x - a.x);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        if lo > hi {
            continue;
        }
        let first = (lo - 0.5 - eps).ceil().max(bounds[0] as f64) as i64;
        let last = (hi - 0.5 + eps).floor().min(bounds[2] as f64) as i64;
        if last >= first {
            count += (last - first + 1) as usize;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, v: u8) -> ImageBuffer {
        ImageBuffer::filled(w, h, [v, v, v])
    }

    #[test]
    fn two_blocks_two_regions() {
        let m = BinaryMask::from_fn(30, 20, |x, y| {
            ((2..6).contains(&x) && (2..5).contains(&y)) || ((10..20).contains(&x) && (8..15).contains(&y))
        });
        let regions = connected_components(&m, &gray(30, 20, 50)).unwrap();
        assert_eq!(regions.len(), 2);
        assert_eq!(regions[0].pixel_count, 12);
        assert_eq!(regions[1].pixel_count, 70);
    }

    #[test]
    fn square_features() {
        let m = BinaryMask::from_fn(30, 30, |x, y| (10..20).contains(&x) && (10..20).contains(&y));
        let r = &connected_components(&m, &gray(30, 30, 77)).unwrap()[0];
        assert_eq!(r.pixel_count, 100);
        assert_eq!(r.convex_area, 100);
        assert!((r.axis_ratio() - 1.0).abs() < 1e-12);
        assert!((r.perimeter - 36.0).abs() < 1e-12);
        assert_eq!(r.contour.len(), 36);
        assert_eq!(r.entropy, 0.0);
        assert_eq!(r.contour[0], Point2::new(10.5, 10.5));
        assert_eq!(r.bounds, [10, 10, 19, 19]);
    }

    #[test]
    fn diagonal_pixels_join_under_8_connectivity() {
        let m = BinaryMask::from_fn(5, 5, |x, y| x == y);
        let regions = connected_components(&m, &gray(5, 5, 0)).unwrap();
        assert_eq!(regions.len(), 1);
        assert!(regions[0].perimeter > 0.0);
        let single = BinaryMask::from_fn(5, 5, |x, y| x == 2 && y == 2);
        let r = &connected_components(&single, &gray(5, 5, 0)).unwrap()[0];
        assert_eq!(r.pixel_count, 1);
        assert_eq!(r.perimeter, 0.0);
        assert!(r.axis_major > 0.0);
    }

    #[test]
    fn contour_walks_around_concavities() {
        // U shape: the contour must visit the inner notch.
        let m = BinaryMask::from_fn(12, 12, |x, y| {
            (2..10).contains(&x) && (2..10).contains(&y) && !((5..7).contains(&x) && y < 7)
        });
        let r = &connected_components(&m, &gray(12, 12, 0)).unwrap()[0];
        assert!(r.contour.contains(&Point2::new(4.5, 6.5)));
        assert!(r.contour.contains(&Point2::new(7.5, 2.5)));
        assert!(r.convex_area > r.pixel_count);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let m = BinaryMask::new(4, 4);
        assert!(connected_components(&m, &gray(5, 4, 0)).is_err());
    }
}
