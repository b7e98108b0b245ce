//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use mcc_core::config::BackgroundSource;
use mcc_core::geometry::{BBox, Homography, Point2, Quadrilateral};
use mcc_core::imgproc::ImageBuffer;
use mcc_core::model::{ChartLayout, ColorCheckerModel, COLS};
use mcc_core::recognition::{CheckerHypothesis, PatchCandidate, SubGrid};
use mcc_core::render::{
    procedural_background, render_scene, Camera, CheckerPose, GroundTruth, RenderOptions, SceneSpec,
};
use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use rand::Rng;

pub fn pt(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

pub fn rect(x: f64, y: f64, w: f64, h: f64) -> Quadrilateral {
    Quadrilateral::new([pt(x, y), pt(x + w, y), pt(x + w, y + h), pt(x, y + h)]).unwrap()
}

pub fn pose(rotation: [f64; 3], translation: [f64; 3]) -> CheckerPose {
    CheckerPose { rotation, translation, identity: 0 }
}

pub fn default_camera() -> Camera {
    Camera::new(1000.0, 1024, 640, None).unwrap()
}

/// Renders `poses` over a flat gray background.
pub fn render_on_gray(poses: &[CheckerPose], gray: f64, opts: &RenderOptions) -> (ImageBuffer, GroundTruth) {
    let model = ColorCheckerModel::synthetic();
    let camera = default_camera();
    let bg_src = BackgroundSource::Flat { gray };
    let bg = procedural_background(&bg_src, camera.width, camera.height).unwrap();
    let spec = SceneSpec { checkers: poses.to_vec(), background: bg_src, seed: 11 };
    render_scene(&spec, &[model], &camera, &bg, opts).unwrap()
}

pub fn frontal_scene() -> (ImageBuffer, GroundTruth) {
    render_on_gray(&[pose([0.0; 3], [0.0, 0.0, -20.0])], 0.5, &RenderOptions::default())
}

/// Noise-free rendering of the exact model colours.
pub fn clean() -> RenderOptions {
    RenderOptions { noise_sigma: 0.0, luminance_adjust: false, ..RenderOptions::default() }
}

/// Even-odd test for a point against a convex polygon, either orientation.
pub fn inside_convex(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    let mut sign = 0.0f64;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if c != 0.0 {
            if sign != 0.0 && c.signum() != sign {
                return false;
            }
            sign = c.signum();
        }
    }
    true
}

/// IOU of two convex polygons by counting the centres of an `n x n` grid
/// over their joint bounding box.
pub fn raster_iou(a: &[Point2], b: &[Point2], n: usize) -> f64 {
    let all: Vec<Point2> = a.iter().chain(b).copied().collect();
    let x0 = all.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let x1 = all.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let y0 = all.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let y1 = all.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let (mut inter, mut union) = (0usize, 0usize);
    for j in 0..n {
        let y = y0 + (y1 - y0) * (j as f64 + 0.5) / n as f64;
        for i in 0..n {
            let x = x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64;
            let (ia, ib) = (inside_convex(a, pt(x, y)), inside_convex(b, pt(x, y)));
            inter += (ia && ib) as usize;
            union += (ia || ib) as usize;
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn box_corners(b: &BBox) -> Vec<Point2> {
    vec![pt(b.x0, b.y0), pt(b.x1, b.y0), pt(b.x1, b.y1), pt(b.x0, b.y1)]
}

/// Homography through four exact correspondences, solved as the plain 8x8
/// linear system with `h33 = 1`.
pub fn homography_from_4(src: &[Point2; 4], dst: &[Point2; 4]) -> Matrix3<f64> {
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut b = SVector::<f64, 8>::zeros();
    for i in 0..4 {
        let (x, y, u, v) = (src[i].x, src[i].y, dst[i].x, dst[i].y);
        let r = 2 * i;
        a.set_row(r, &SMatrix::<f64, 1, 8>::from_row_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]));
        a.set_row(r + 1, &SMatrix::<f64, 1, 8>::from_row_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]));
        b[r] = u;
        b[r + 1] = v;
    }
    let h = a.lu().solve(&b).expect("non-degenerate correspondences");
    Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0)
}

pub fn apply(m: &Matrix3<f64>, p: Point2) -> Point2 {
    let v = m * Vector3::new(p.x, p.y, 1.0);
    pt(v.x / v.z, v.y / v.z)
}

/// Random projective warp taking `[0, w] x [0, h]` to a jittered, rotated
/// and shifted copy of itself (each corner moved by up to `jitter * side`).
pub fn random_warp<R: Rng>(rng: &mut R, w: f64, h: f64, jitter: f64) -> Matrix3<f64> {
    loop {
        let src = [pt(0.0, 0.0), pt(w, 0.0), pt(w, h), pt(0.0, h)];
        let (s, c) = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI).sin_cos();
        let scale = rng.random_range(0.5..2.0);
        let (tx, ty) = (rng.random_range(-300.0..300.0), rng.random_range(-300.0..300.0));
        let dst = src.map(|p| {
            let q = pt(
                p.x + rng.random_range(-jitter..jitter) * w,
                p.y + rng.random_range(-jitter..jitter) * h,
            );
            pt(scale * (c * q.x - s * q.y) + tx, scale * (s * q.x + c * q.y) + ty)
        });
        let convex = (0..4).all(|i| {
            let (a, b, e) = (dst[i], dst[(i + 1) % 4], dst[(i + 2) % 4]);
            let cross = (b.x - a.x) * (e.y - b.y) - (b.y - a.y) * (e.x - b.x);
            cross > 0.05 * scale * scale * w * h
        });
        if convex {
            return homography_from_4(&src, &dst);
        }
    }
}

pub fn patch(center: Point2, side: f64) -> PatchCandidate {
    let h = side / 2.0;
    let quad = rect(center.x - h, center.y - h, side, side);
    PatchCandidate {
        quad,
        corners: quad,
        center,
        area: side * side,
        axis_max: side,
        mean_color: [0.5; 3],
    }
}

/// A hypothesis whose outline is the given box; only `corners` and `cost`
/// matter to selection.
pub fn boxed_hypothesis(x: f64, y: f64, w: f64, h: f64, cost: f64) -> CheckerHypothesis {
    CheckerHypothesis {
        corners: rect(x, y, w, h),
        homography: Homography::identity(),
        theta: 0,
        delta: 1,
        patch_quads: Vec::new(),
        mu: Vec::new(),
        sigma: Vec::new(),
        cost,
        roi: None,
    }
}

/// Matches two vertex sets greedily and returns the largest distance.
pub fn vertex_set_distance(a: &[Point2], b: &[Point2]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for p in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, q)| (j, p.distance(*q)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    (v[(n - 1) / 2] + v[n / 2]) / 2.0
}

pub const PX: f64 = 40.0;

/// The 24 patch squares of the chart, in pixels.
pub fn patch_grid() -> Vec<Quadrilateral> {
    let layout = ChartLayout::default();
    (0..24)
        .map(|k| {
            let c = layout.patch_quad(k).corners().map(|p| pt(p.x * PX, p.y * PX));
            Quadrilateral::new(c).unwrap()
        })
        .collect()
}

pub fn grid_outer_rect(grid: &[Quadrilateral]) -> [Point2; 4] {
    let pts: Vec<Point2> = grid.iter().flat_map(|q| q.corners().to_vec()).collect();
    let b = BBox::of_points(&pts);
    [pt(b.x0, b.y0), pt(b.x1, b.y0), pt(b.x1, b.y1), pt(b.x0, b.y1)]
}

pub fn warp_quad(m: &Matrix3<f64>, q: &Quadrilateral) -> Quadrilateral {
    Quadrilateral::new(q.corners().map(|p| apply(m, p))).unwrap()
}

pub fn random_quad<R: Rng>(rng: &mut R) -> Quadrilateral {
    loop {
        let c = pt(rng.random_range(20.0..80.0), rng.random_range(20.0..80.0));
        let mut angles: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let pts: Vec<Point2> = angles
            .iter()
            .map(|t| c + pt(t.cos(), t.sin()) * rng.random_range(10.0..40.0))
            .collect();
        if let Ok(q) = Quadrilateral::new([pts[0], pts[1], pts[2], pts[3]]) {
            if q.area() > 50.0 {
                return q;
            }
        }
    }
}


/// Components of the patch graph by union-find over all ordered pairs.
pub fn union_find_groups(patches: &[PatchCandidate], factor: f64, min: usize) -> Vec<Vec<usize>> {
    let n = patches.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        if p[i] != i {
            let r = find(p, p[i]);
            p[i] = r;
        }
        p[i]
    }
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (&patches[i], &patches[j]);
            let w = (a.area - b.area).abs() / (a.area + b.area);
            let d = (1.0 + w) * ((a.center.x - b.center.x).powi(2) + (a.center.y - b.center.y).powi(2)).sqrt();
            if i != j && d < factor * a.axis_max {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| find(&mut parent, g[0]) == r) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups.retain(|g| g.len() >= min);
    groups
}

pub fn rotate_cw_once(g: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let (rows, cols) = (g.len(), g[0].len());
    (0..cols).map(|c| (0..rows).rev().map(|r| g[r][c]).collect()).collect()
}

/// The observed lattice whose clockwise rotation by `theta` is the chart
/// block `rows x cols` at `(dr, dc)`; cells hold chart patch indices.
pub fn observed_block(theta: u32, rows: usize, cols: usize, dr: usize, dc: usize) -> Vec<Vec<usize>> {
    let mut g: Vec<Vec<usize>> = (0..rows).map(|r| (0..cols).map(|c| (r + dr) * COLS + c + dc).collect()).collect();
    for _ in 0..(4 - theta / 90) % 4 {
        g = rotate_cw_once(&g);
    }
    g
}

pub fn subgrid(g: &[Vec<usize>], model: &ColorCheckerModel) -> SubGrid {
    SubGrid {
        rows: g.len(),
        cols: g[0].len(),
        colors: g.concat().into_iter().map(|k| Some(model.reference_colors[k])).collect(),
    }
}

