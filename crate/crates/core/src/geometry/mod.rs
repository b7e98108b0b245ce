//! Planar geometry used by the recognition chain: points, homogeneous lines,
//! quadrilaterals, axis-aligned boxes, homographies and the polygon routines
//! built on them.
//!
//! Image coordinates have x to the right and y down, with pixel `(i, j)`
//! covering `[i, i+1) x [j, j+1)`. A polygon is *clockwise* when its shoelace
//! sum is positive in these coordinates, which is clockwise on screen.

mod homography;
mod hull;
mod meq;
mod overlap;
mod simplify;

pub use homography::{estimate_homography, Homography};
pub use hull::{convex_hull, min_bounding_parallelogram};
pub use meq::min_enclosing_quadrilateral;
pub use overlap::{clip_convex, iou_box, iou_polygon, polygon_area, signed_area};
pub use simplify::{rdp_polyline, rdp_simplify};

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        self + (o - self) * t
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

pub fn centroid_of(points: &[Point2]) -> Point2 {
    let n = points.len().max(1) as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point2::new(sx / n, sy / n)
}

/// Homogeneous line `nx*x + ny*y + d = 0` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line2 {
    pub nx: f64,
    pub ny: f64,
    pub d: f64,
}

impl Line2 {
    pub fn new(nx: f64, ny: f64, d: f64) -> Option<Line2> {
        let n = nx.hypot(ny);
        if !(n > 0.0) || !d.is_finite() {
            return None;
        }
        Some(Line2 {
            nx: nx / n,
            ny: ny / n,
            d: d / n,
        })
    }

    /// Line through two distinct points, i.e. the cross product `a x b` of
    /// their homogeneous coordinates.
    pub fn through(a: Point2, b: Point2) -> Option<Line2> {
        Line2::new(a.y - b.y, b.x - a.x, a.x * b.y - a.y * b.x)
    }

    pub fn signed_distance(&self, p: Point2) -> f64 {
        self.nx * p.x + self.ny * p.y + self.d
    }

    pub fn flipped(&self) -> Line2 {
        Line2 {
            nx: -self.nx,
            ny: -self.ny,
            d: -self.d,
        }
    }

    pub fn normal(&self) -> Point2 {
        Point2::new(self.nx, self.ny)
    }

    pub fn intersect(&self, o: &Line2) -> Option<Point2> {
        let w = self.nx * o.ny - self.ny * o.nx;
        if w.abs() < 1e-12 {
            return None;
        }
        let x = (self.ny * o.d - self.d * o.ny) / w;
        let y = (self.d * o.nx - self.nx * o.d) / w;
        Some(Point2::new(x, y))
    }
}

/// Axis-aligned box `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl From<[f64; 4]> for BBox {
    fn from(v: [f64; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x0, b.y0, b.x1, b.y1]
    }
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        BBox { x0, y0, x1, y1 }
    }

    pub fn of_points(points: &[Point2]) -> BBox {
        let mut b = BBox::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            b.x0 = b.x0.min(p.x);
            b.y0 = b.y0.min(p.y);
            b.x1 = b.x1.max(p.x);
            b.y1 = b.y1.max(p.y);
        }
        b
    }

    pub fn width(&self) -> f64 {
        (self.x1 - self.x0).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y1 - self.y0).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn intersection(&self, o: &BBox) -> BBox {
        BBox::new(
            self.x0.max(o.x0),
            self.y0.max(o.y0),
            self.x1.min(o.x1),
            self.y1.min(o.y1),
        )
    }

    pub fn is_valid(&self) -> bool {
        [self.x0, self.y0, self.x1, self.y1]
            .iter()
            .all(|v| v.is_finite())
            && self.x1 > self.x0
            && self.y1 > self.y0
    }
}

/// Convex quadrilateral with corners in clockwise order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[Point2; 4]", into = "[Point2; 4]")]
pub struct Quadrilateral {
    corners: [Point2; 4],
}

impl TryFrom<[Point2; 4]> for Quadrilateral {
    type Error = Error;
    fn try_from(c: [Point2; 4]) -> Result<Self> {
        Quadrilateral::new(c)
    }
}

impl From<Quadrilateral> for [Point2; 4] {
    fn from(q: Quadrilateral) -> Self {
        q.corners
    }
}

impl Quadrilateral {
    /// Validates convexity and positive area. Counter-clockwise input is
    /// reversed in place, keeping the first corner first.
    pub fn new(corners: [Point2; 4]) -> Result<Quadrilateral> {
        if corners.iter().any(|p| !p.is_finite()) {
            return Err(Error::DegenerateGeometry("non-finite quadrilateral corner".into()));
        }
        let mut c = corners;
        let area = signed_area(&c);
        if area.abs() < 1e-12 {
            return Err(Error::DegenerateGeometry("zero-area quadrilateral".into()));
        }
        if area < 0.0 {
            c = [c[0], c[3], c[2], c[1]];
        }
        for i in 0..4 {
            let a = c[i];
            let b = c[(i + 1) % 4];
            let e = c[(i + 2) % 4];
            if (b - a).cross(e - b) < -1e-9 * (1.0 + area.abs()) {
                return Err(Error::DegenerateGeometry("non-convex quadrilateral".into()));
            }
        }
        Ok(Quadrilateral { corners: c })
    }

    /// Orders four points clockwise, starting from the top-left-most one
    /// (smallest `x + y`, ties to smaller `y`).
    pub fn ordered_from_top_left(points: [Point2; 4]) -> Result<Quadrilateral> {
        let c = centroid_of(&points);
        let mut pts = points;
        pts.sort_by(|a, b| {
            let ta = (a.y - c.y).atan2(a.x - c.x);
            let tb = (b.y - c.y).atan2(b.x - c.x);
            ta.total_cmp(&tb)
        });
        // atan2 in y-down coordinates increases clockwise on screen.
        let start = (0..4)
            .min_by(|&i, &j| {
                let (a, b) = (pts[i], pts[j]);
                (a.x + a.y)
                    .total_cmp(&(b.x + b.y))
                    .then(a.y.total_cmp(&b.y))
            })
            .unwrap_or(0);
        let rotated = [
            pts[start],
            pts[(start + 1) % 4],
            pts[(start + 2) % 4],
            pts[(start + 3) % 4],
        ];
        Quadrilateral::new(rotated)
    }

    pub fn corners(&self) -> &[Point2; 4] {
        &self.corners
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.corners).abs()
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point2 {
        let c = &self.corners;
        let mut a2 = 0.0;
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..4 {
            let p = c[i];
            let q = c[(i + 1) % 4];
            let w = p.cross(q);
            a2 += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        if a2.abs() < 1e-15 {
            return centroid_of(c);
        }
        Point2::new(cx / (3.0 * a2), cy / (3.0 * a2))
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(&self.corners)
    }

    /// True when `p` is inside or within `tol` of the boundary.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        (0..4).all(|i| {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % 4];
            let e = b - a;
            let len = e.norm();
            len == 0.0 || e.cross(p - a) / len >= -tol
        })
    }

    /// Scales the quad about its centroid.
    pub fn shrink(&self, factor: f64) -> Quadrilateral {
        let c = self.centroid();
        let corners = self.corners.map(|p| c + (p - c) * factor);
        Quadrilateral { corners }
    }

    pub fn rotated(&self, steps: usize) -> Quadrilateral {
        let c = self.corners;
        Quadrilateral {
            corners: [0, 1, 2, 3].map(|i| c[(i + steps) % 4]),
        }
    }

    pub fn interior_angles_deg(&self) -> [f64; 4] {
        let c = &self.corners;
        [0, 1, 2, 3].map(|i| {
            let prev = c[(i + 3) % 4] - c[i];
            let next = c[(i + 1) % 4] - c[i];
            let cosv = prev.dot(next) / (prev.norm() * next.norm());
            cosv.clamp(-1.0, 1.0).acos().to_degrees()
        })
    }

    /// Ratio of the longest to the shortest side.
    pub fn aspect_ratio(&self) -> f64 {
        let sides = [0, 1, 2, 3].map(|i| self.corners[i].distance(self.corners[(i + 1) % 4]));
        let max = sides.iter().cloned().fold(0.0, f64::max);
        let min = sides.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }

    pub fn map(&self, h: &Homography) -> Result<Quadrilateral> {
        Quadrilateral::new(self.corners.map(|p| h.apply(p)))
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Quadrilateral {
        Quadrilateral {
            corners: self.corners.map(|p| Point2::new(p.x + dx, p.y + dy)),
        }
    }
}
