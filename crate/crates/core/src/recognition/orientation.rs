use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geometry::Homography;
use crate::model::{ColorCheckerModel, COLS, PATCHES, ROWS};

use super::{CheckerHypothesis, GridAssignment, PatchCandidate};

pub const THETAS: [u32; 4] = [0, 90, 180, 270];

/// Colours observed on a detected sub-lattice, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SubGrid {
    pub rows: usize,
    pub cols: usize,
    pub colors: Vec<Option<[f64; 3]>>,
}

impl SubGrid {
    pub fn from_assignment(a: &GridAssignment, patches: &[PatchCandidate]) -> SubGrid {
        let mut colors = vec![None; a.rows * a.cols];
        for c in &a.cells {
            colors[c.row * a.cols + c.col] = Some(patches[c.patch].mean_color);
        }
        SubGrid { rows: a.rows, cols: a.cols, colors }
    }
}

/// A rotation of the sub-lattice and its placement inside the 4x6 chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub theta: u32,
    /// 1-based row-major index of the placement among all placements of the
    /// rotated sub-lattice.
    pub delta: usize,
    pub row_offset: usize,
    pub col_offset: usize,
    /// Residual colour mismatch J after the best non-negative gain.
    pub cost: f64,
    pub gain: f64,
}

/// Cell `(r, c)` of a `rows x cols` lattice after a clockwise rotation by
/// `theta` degrees.
pub fn rotate_index(theta: u32, r: usize, c: usize, rows: usize, cols: usize) -> (usize, usize) {
    match theta {
        0 => (r, c),
        90 => (c, rows - 1 - r),
        180 => (rows - 1 - r, cols - 1 - c),
        270 => (cols - 1 - c, r),
        _ => panic!("theta must be one of 0, 90, 180, 270"),
    }
}

fn rotated_dims(theta: u32, rows: usize, cols: usize) -> (usize, usize) {
    if theta % 180 == 0 {
        (rows, cols)
    } else {
        (cols, rows)
    }
}

/// All `(delta, row_offset, col_offset)` placements of a `rows x cols`
/// block inside the chart, row-major from `delta = 1`.
pub fn placements(rows: usize, cols: usize) -> Vec<(usize, usize, usize)> {
    if rows > ROWS || cols > COLS || rows == 0 || cols == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for dr in 0..=ROWS - rows {
        for dc in 0..=COLS - cols {
            out.push((out.len() + 1, dr, dc));
        }
    }
    out
}

/// Evaluates every rotation and placement, best first. Order is by cost,
/// then smaller `delta`, then smaller `theta`.
pub fn rank_orientations(grid: &SubGrid, model: &ColorCheckerModel) -> Result<Vec<Orientation>> {
    if grid.colors.len() != grid.rows * grid.cols {
        return Err(Error::MalformedGroup("sub-grid colour count mismatch".into()));
    }
    let occupied: Vec<(usize, usize, [f64; 3])> = (0..grid.rows * grid.cols)
        .filter_map(|i| grid.colors[i].map(|x| (i / grid.cols, i % grid.cols, x)))
        .collect();
    if occupied.is_empty() {
        return Err(Error::MalformedGroup("sub-grid has no observed colours".into()));
    }
    let xx: f64 = occupied.iter().map(|o| o.2.iter().map(|v| v * v).sum::<f64>()).sum();
    let mut out = Vec::new();
    for theta in THETAS {
        let (h, w) = rotated_dims(theta, grid.rows, grid.cols);
        for (delta, dr, dc) in placements(h, w) {
            let mut rx = 0.0;
            let mut rr = 0.0;
            let refs: Vec<([f64; 3], [f64; 3])> = occupied
                .iter()
                .map(|&(r, c, x)| {
                    let (r2, c2) = rotate_index(theta, r, c, grid.rows, grid.cols);
                    let rk = model.reference_colors[(r2 + dr) * COLS + c2 + dc];
                    (rk, x)
                })
                .collect();
            for (rk, x) in &refs {
                rx += (0..3).map(|k| rk[k] * x[k]).sum::<f64>();
                rr += rk.iter().map(|v| v * v).sum::<f64>();
            }
            let gain = if xx > 0.0 { (rx / xx).max(0.0) } else { 0.0 };
            let cost = (rr - 2.0 * gain * rx + gain * gain * xx).max(0.0);
            out.push(Orientation { theta, delta, row_offset: dr, col_offset: dc, cost, gain });
        }
    }
    if out.is_empty() {
        return Err(Error::MalformedGroup(format!(
            "{}x{} sub-grid does not fit the chart",
            grid.rows, grid.cols
        )));
    }
    out.sort_by(|a, b| {
        a.cost
            .total_cmp(&b.cost)
            .then(a.delta.cmp(&b.delta))
            .then(a.theta.cmp(&b.theta))
    });
    Ok(out)
}

/// The minimiser of the colour mismatch over rotations and placements.
pub fn fit_orientation(grid: &SubGrid, model: &ColorCheckerModel) -> Result<Orientation> {
    Ok(rank_orientations(grid, model)?[0])
}

/// Affine map from sub-lattice index coordinates `(col, row, 1)` to chart
/// index coordinates under orientation `o`.
pub fn index_transform(o: &Orientation, rows: usize, cols: usize) -> Matrix3<f64> {
    let (rn, cn) = ((rows - 1) as f64, (cols - 1) as f64);
    let (dr, dc) = (o.row_offset as f64, o.col_offset as f64);
    match o.theta {
        0 => Matrix3::new(1.0, 0.0, dc, 0.0, 1.0, dr, 0.0, 0.0, 1.0),
        90 => Matrix3::new(0.0, -1.0, rn + dc, 1.0, 0.0, dr, 0.0, 0.0, 1.0),
        180 => Matrix3::new(-1.0, 0.0, cn + dc, 0.0, -1.0, rn + dr, 0.0, 0.0, 1.0),
        270 => Matrix3::new(0.0, 1.0, dc, -1.0, 0.0, cn + dr, 0.0, 0.0, 1.0),
        _ => panic!("theta must be one of 0, 90, 180, 270"),
    }
}

/// Assembles the model-to-image pose implied by a lattice and orientation.
/// Colour statistics and cost are left for scoring.
pub fn build_hypothesis(a: &GridAssignment, o: &Orientation, model: &ColorCheckerModel) -> Result<CheckerHypothesis> {
    let layout = &model.layout;
    let origin = layout.cell_center(0.0, 0.0);
    let pitch = layout.pitch();
    let chart_index_to_model =
        Matrix3::new(pitch, 0.0, origin.x, 0.0, pitch, origin.y, 0.0, 0.0, 1.0);
    let t = index_transform(o, a.rows, a.cols);
    let inv = (chart_index_to_model * t)
        .try_inverse()
        .ok_or_else(|| Error::DegenerateGeometry("index transform is singular".into()))?;
    let homography = Homography::from_matrix(a.index_to_image.matrix() * inv)?;
    let corners = layout.chart_quad().map(&homography)?;
    let patch_quads = (0..PATCHES)
        .map(|k| layout.patch_quad(k).map(&homography))
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckerHypothesis {
        corners,
        homography,
        theta: o.theta,
        delta: o.delta,
        patch_quads,
        mu: Vec::new(),
        sigma: Vec::new(),
        cost: f64::INFINITY,
        roi: None,
    })
}
