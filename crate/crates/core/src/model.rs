//! The 4x6 ColorChecker Classic model: patch reference colours and the
//! chart's planar layout.
//!
//! The model plane has its origin at the chart's top-left corner, x to the
//! right and y down, in inches. Patch 1 (row 0, column 0) sits top-left;
//! patches are numbered row-major.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Quadrilateral};

pub const ROWS: usize = 4;
pub const COLS: usize = 6;
pub const PATCHES: usize = ROWS * COLS;

/// Physical layout of the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartLayout {
    pub width: f64,
    pub height: f64,
    pub patch_size: f64,
    pub gap: f64,
    /// Colour of the chart body around and between patches, in `[0, 1]`.
    pub frame_color: [f64; 3],
}

impl Default for ChartLayout {
    fn default() -> Self {
        ChartLayout {
            width: 11.0,
            height: 8.25,
            patch_size: 1.5,
            gap: 0.25,
            frame_color: [0.06, 0.06, 0.06],
        }
    }
}

impl ChartLayout {
    pub fn pitch(&self) -> f64 {
        self.patch_size + self.gap
    }

    fn margin(&self) -> Point2 {
        let grid_w = COLS as f64 * self.patch_size + (COLS - 1) as f64 * self.gap;
        let grid_h = ROWS as f64 * self.patch_size + (ROWS - 1) as f64 * self.gap;
        Point2::new((self.width - grid_w) / 2.0, (self.height - grid_h) / 2.0)
    }

    /// Centre of cell `(row, col)`; indices outside the 4x6 grid extend the
    /// lattice.
    pub fn cell_center(&self, row: f64, col: f64) -> Point2 {
        let m = self.margin();
        let half = self.patch_size / 2.0;
        Point2::new(m.x + half + col * self.pitch(), m.y + half + row * self.pitch())
    }

    pub fn patch_quad(&self, index: usize) -> Quadrilateral {
        let (r, c) = (index / COLS, index % COLS);
        let ctr = self.cell_center(r as f64, c as f64);
        let h = self.patch_size / 2.0;
        Quadrilateral::new([
            Point2::new(ctr.x - h, ctr.y - h),
            Point2::new(ctr.x + h, ctr.y - h),
            Point2::new(ctr.x + h, ctr.y + h),
            Point2::new(ctr.x - h, ctr.y + h),
        ])
        .expect("layout patch is a square")
    }

    /// Chart outline, clockwise from the corner next to patch 1.
    pub fn chart_corners(&self) -> [Point2; 4] {
        [
            Point2::new(0.0, 0.0),
            Point2::new(self.width, 0.0),
            Point2::new(self.width, self.height),
            Point2::new(0.0, self.height),
        ]
    }

    pub fn chart_quad(&self) -> Quadrilateral {
        Quadrilateral::new(self.chart_corners()).expect("layout outline is a rectangle")
    }

    /// Which patch covers the model point, if any.
    pub fn patch_at(&self, p: Point2) -> Option<usize> {
        let m = self.margin();
        let (x, y) = (p.x - m.x, p.y - m.y);
        if x < 0.0 || y < 0.0 {
            return None;
        }
        let pitch = self.pitch();
        let (c, r) = ((x / pitch).floor(), (y / pitch).floor());
        if c >= COLS as f64 || r >= ROWS as f64 {
            return None;
        }
        let (fx, fy) = (x - c * pitch, y - r * pitch);
        (fx < self.patch_size && fy < self.patch_size).then(|| r as usize * COLS + c as usize)
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x < self.width && p.y < self.height
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorCheckerModel {
    pub names: Vec<String>,
    /// 24 reference colours in `[0, 1]`, row-major.
    pub reference_colors: Vec<[f64; 3]>,
    pub layout: ChartLayout,
}

impl ColorCheckerModel {
    pub fn new(names: Vec<String>, reference_colors: Vec<[f64; 3]>) -> Result<Self> {
        if reference_colors.len() != PATCHES || names.len() != PATCHES {
            return Err(Error::RejectedInput(format!(
                "colour model needs {PATCHES} patches, got {}",
                reference_colors.len()
            )));
        }
        for (i, c) in reference_colors.iter().enumerate() {
            if c.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::RejectedInput(format!("patch {} colour outside [0,1]", i + 1)));
            }
            if reference_colors[..i].contains(c) {
                return Err(Error::RejectedInput(format!("patch {} duplicates an earlier colour", i + 1)));
            }
        }
        Ok(ColorCheckerModel {
            names,
            reference_colors,
            layout: ChartLayout::default(),
        })
    }

    /// Parses `name,R,G,B` rows with 8-bit channel values. A header row and
    /// blank lines are skipped.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut names = Vec::new();
        let mut colors = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::RejectedInput(format!(
                    "line {}: expected name,R,G,B",
                    lineno + 1
                )));
            }
            if names.is_empty() && colors.is_empty() && fields[1].parse::<f64>().is_err() {
                continue;
            }
            let mut rgb = [0.0; 3];
            for (k, f) in fields[1..].iter().enumerate() {
                let v: f64 = f.parse().map_err(|_| {
                    Error::RejectedInput(format!("line {}: bad channel value `{f}`", lineno + 1))
                })?;
                if !(0.0..=255.0).contains(&v) {
                    return Err(Error::RejectedInput(format!(
                        "line {}: channel value {v} outside 0..255",
                        lineno + 1
                    )));
                }
                rgb[k] = v / 255.0;
            }
            names.push(fields[0].to_string());
            colors.push(rgb);
        }
        ColorCheckerModel::new(names, colors)
    }

    pub fn from_csv_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ColorCheckerModel::from_csv_str(&text).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("name,R,G,B\n");
        for (name, c) in self.names.iter().zip(&self.reference_colors) {
            let q = c.map(|v| (v * 255.0).round() as u8);
            out.push_str(&format!("{name},{},{},{}\n", q[0], q[1], q[2]));
        }
        out
    }

    /// A stand-in palette: 18 chromatic colours picked by farthest-point
    /// sampling on an RGB lattice (kept away from the gray axis by seeding
    /// with the grays), and a bottom row of six grays.
    pub fn synthetic() -> Self {
        let grays = [0.9, 0.75, 0.6, 0.45, 0.32, 0.2].map(|g| [g, g, g]);
        let levels: Vec<f64> = (0..8).map(|i| 0.15 + 0.75 * i as f64 / 7.0).collect();
        let mut pool = Vec::new();
        for &r in &levels {
            for &g in &levels {
                for &b in &levels {
                    pool.push([r, g, b]);
                }
            }
        }
        let dist2 = |a: &[f64; 3], b: &[f64; 3]| (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>();
        let mut chosen: Vec<[f64; 3]> = grays.to_vec();
        let mut chromatic = Vec::new();
        while chromatic.len() < PATCHES - ROWS - 2 {
            let best = pool
                .iter()
                .max_by(|a, b| {
                    let da = chosen.iter().map(|c| dist2(a, c)).fold(f64::INFINITY, f64::min);
                    let db = chosen.iter().map(|c| dist2(b, c)).fold(f64::INFINITY, f64::min);
                    da.total_cmp(&db)
                })
                .copied()
                .expect("pool is non-empty");
            chosen.push(best);
            chromatic.push(best);
        }
        let mut colors = chromatic;
        colors.extend_from_slice(&grays);
        let quantized: Vec<[f64; 3]> = colors
            .into_iter()
            .map(|c| c.map(|v| (v * 255.0).round() / 255.0))
            .collect();
        let names = (1..=PATCHES).map(|i| format!("patch{i:02}")).collect();
        ColorCheckerModel::new(names, quantized).expect("synthetic palette is valid")
    }

    pub fn is_grayscale_row(&self, index: usize) -> bool {
        index / COLS == ROWS - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_consistent() {
        let l = ChartLayout::default();
        let first = l.patch_quad(0);
        let last = l.patch_quad(PATCHES - 1);
        assert!(l.chart_quad().contains(first.corners()[0], 0.0));
        assert!(l.chart_quad().contains(last.corners()[2], 0.0));
        assert_eq!(l.patch_at(l.cell_center(2.0, 3.0)), Some(2 * COLS + 3));
        assert_eq!(l.patch_at(Point2::new(0.1, 0.1)), None);
        // gap between patch 1 and patch 2
        let c = l.cell_center(0.0, 0.0);
        assert_eq!(l.patch_at(Point2::new(c.x + 0.8, c.y)), None);
    }

    #[test]
    fn synthetic_palette_is_valid_and_round_trips() {
        let m = ColorCheckerModel::synthetic();
        assert_eq!(m.reference_colors.len(), 24);
        for k in 18..24 {
            let c = m.reference_colors[k];
            assert!(c[0] == c[1] && c[1] == c[2]);
        }
        let again = ColorCheckerModel::from_csv_str(&m.to_csv_string()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn csv_errors() {
        assert!(ColorCheckerModel::from_csv_str("name,R,G,B\na,1,2,3\n").is_err());
        let mut rows = String::new();
        for i in 0..24 {
            rows.push_str(&format!("p{i},{i},300,0\n"));
        }
        assert!(ColorCheckerModel::from_csv_str(&rows).is_err());
        let dup: String = (0..24).map(|i| format!("p{i},1,2,3\n")).collect();
        assert!(ColorCheckerModel::from_csv_str(&dup).is_err());
    }
}
