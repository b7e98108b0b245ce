use crate::error::{Error, Result};
use crate::geometry::{estimate_homography, min_enclosing_quadrilateral, Homography, Point2, Quadrilateral};
use crate::model::{ChartLayout, COLS, ROWS};

use super::PatchCandidate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
    /// Index into the patch slice given to [`complete_grid`].
    pub patch: usize,
}

/// Patches of one group arranged on a `rows x cols` sub-lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAssignment {
    pub rows: usize,
    pub cols: usize,
    /// Occupied cells, row-major.
    pub cells: Vec<GridCell>,
    /// Maps lattice index coordinates `(col, row)` to image centres.
    pub index_to_image: Homography,
    /// All `rows * cols` centre estimates in the image, row-major; observed
    /// cells keep their patch centre.
    pub centers: Vec<Point2>,
    /// Enclosing quadrilateral of the group.
    pub enclosing: Quadrilateral,
    /// Group members that lost a cell to a better-placed duplicate.
    pub dropped: Vec<usize>,
}

impl GridAssignment {
    pub fn cell(&self, row: usize, col: usize) -> Option<usize> {
        self.cells.iter().find(|c| c.row == row && c.col == col).map(|c| c.patch)
    }

    pub fn missing(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.cell(r, c).is_none() {
                    out.push((r, c));
                }
            }
        }
        out
    }
}

/// Splits sorted 1-D values wherever consecutive ones differ by more than
/// `gap`. Returns, per cluster, its mean and its member positions.
fn split_clusters(values: &[(f64, usize)], gap: f64) -> Vec<(f64, Vec<usize>)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (v, i) in sorted {
        if out.is_empty() || v - last > gap {
            out.push((0.0, Vec::new()));
        }
        let cl = out.last_mut().expect("just pushed");
        cl.0 += v;
        cl.1.push(i);
        last = v;
    }
    for cl in &mut out {
        cl.0 /= cl.1.len() as f64;
    }
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Arranges a patch group on a lattice. The group's enclosing quadrilateral
/// is rectified to the unit square, patch centres are projected on its two
/// axes and split into columns and rows, and missing cells get the centre
/// implied by their row and column.
pub fn complete_grid(patches: &[PatchCandidate], group: &[usize], layout: &ChartLayout) -> Result<GridAssignment> {
    if group.len() < 4 {
        return Err(Error::MalformedGroup(format!("{} patches, need at least 4", group.len())));
    }
    let quads: Vec<Quadrilateral> = group.iter().map(|&i| patches[i].corners).collect();
    let enclosing = min_enclosing_quadrilateral(&quads)
        .map_err(|e| Error::MalformedGroup(format!("enclosing quadrilateral: {e}")))?;
    let unit = [
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
    ];
    let to_unit = estimate_homography(enclosing.corners(), &unit)
        .map_err(|e| Error::MalformedGroup(format!("rectification: {e}")))?;
    let from_unit = to_unit.inverse()?;

    let mut us = Vec::new();
    let mut vs = Vec::new();
    let mut ext_u = Vec::new();
    let mut ext_v = Vec::new();
    for (k, &i) in group.iter().enumerate() {
        let c = to_unit.apply(patches[i].center);
        us.push((c.x, k));
        vs.push((c.y, k));
        let m = patches[i].corners.corners().map(|p| to_unit.apply(p));
        let (lo_u, hi_u) = m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.x), a.1.max(p.x)));
        let (lo_v, hi_v) = m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.y), a.1.max(p.y)));
        ext_u.push(hi_u - lo_u);
        ext_v.push(hi_v - lo_v);
    }
    let (med_u, med_v) = (median(ext_u), median(ext_v));
    let col_clusters = split_clusters(&us, 0.5 * med_u);
    let row_clusters = split_clusters(&vs, 0.5 * med_v);
    let (nr, nc) = (row_clusters.len(), col_clusters.len());
    if nr.max(nc) > COLS || nr.min(nc) > ROWS {
        return Err(Error::MalformedGroup(format!("{nr} rows x {nc} columns exceed the chart")));
    }

    let mut col_of = vec![0; group.len()];
    let mut row_of = vec![0; group.len()];
    for (c, cl) in col_clusters.iter().enumerate() {
        for &k in &cl.1 {
            col_of[k] = c;
        }
    }
    for (r, cl) in row_clusters.iter().enumerate() {
        for &k in &cl.1 {
            row_of[k] = r;
        }
    }
    let cx: Vec<f64> = col_clusters.iter().map(|c| c.0).collect();
    let ry: Vec<f64> = row_clusters.iter().map(|c| c.0).collect();

    // Resolve duplicates by distance to the cell's nominal position.
    let mut best: Vec<Option<(f64, usize)>> = vec![None; nr * nc];
    let mut dropped = Vec::new();
    for k in 0..group.len() {
        let (r, c) = (row_of[k], col_of[k]);
        let d = Point2::new(us[k].0, vs[k].0).distance(Point2::new(cx[c], ry[r]));
        match best[r * nc + c] {
            Some((bd, _)) if bd <= d => dropped.push(group[k]),
            Some((_, bk)) => {
                dropped.push(group[bk]);
                best[r * nc + c] = Some((d, k));
            }
            None => best[r * nc + c] = Some((d, k)),
        }
    }
    dropped.sort_unstable();
    let mut cells = Vec::new();
    let mut centers = Vec::with_capacity(nr * nc);
    for r in 0..nr {
        for c in 0..nc {
            match best[r * nc + c] {
                Some((_, k)) => {
                    cells.push(GridCell { row: r, col: c, patch: group[k] });
                    centers.push(patches[group[k]].center);
                }
                None => centers.push(from_unit.apply(Point2::new(cx[c], ry[r]))),
            }
        }
    }

    let index_to_image = lattice_homography(&cells, patches, nr, nc)
        .or_else(|_| {
            let ratio = layout.pitch() / layout.patch_size;
            let su = if nc > 1 { (cx[nc - 1] - cx[0]) / (nc - 1) as f64 } else { med_u * ratio };
            let sv = if nr > 1 { (ry[nr - 1] - ry[0]) / (nr - 1) as f64 } else { med_v * ratio };
            let affine = Homography::from_row_major(&[su, 0.0, cx[0], 0.0, sv, ry[0], 0.0, 0.0, 1.0])?;
            from_unit.after(&affine)
        })
        .map_err(|e| Error::MalformedGroup(format!("lattice map: {e}")))?;

    Ok(GridAssignment {
        rows: nr,
        cols: nc,
        cells,
        index_to_image,
        centers,
        enclosing,
        dropped,
    })
}

fn lattice_homography(cells: &[GridCell], patches: &[PatchCandidate], nr: usize, nc: usize) -> Result<Homography> {
    let rows_used = cells.iter().map(|c| c.row).collect::<std::collections::BTreeSet<_>>().len();
    let cols_used = cells.iter().map(|c| c.col).collect::<std::collections::BTreeSet<_>>().len();
    if cells.len() < 4 || rows_used < 2 || cols_used < 2 || nr < 2 || nc < 2 {
        return Err(Error::DegenerateGeometry("lattice cells are collinear".into()));
    }
    let src: Vec<Point2> = cells.iter().map(|c| Point2::new(c.col as f64, c.row as f64)).collect();
    let dst: Vec<Point2> = cells.iter().map(|c| patches[c.patch].center).collect();
    estimate_homography(&src, &dst)
}
