use super::{signed_area, Line2, Point2, Quadrilateral};
use crate::error::{Error, Result};

/// Convex hull by Andrew's monotone chain. Output is clockwise (positive
/// shoelace in image coordinates) without repeated or collinear vertices.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.iter().copied().filter(|p| p.is_finite()).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Minimum-area parallelogram enclosing `points`.
///
/// Both side directions of an optimal parallelogram can be taken from hull
/// edges (for a fixed first direction the area is monotone between
/// consecutive edge directions), so every pair of hull edges is tried.
pub fn min_bounding_parallelogram(points: &[Point2]) -> Result<Quadrilateral> {
    let hull = convex_hull(points);
    let extent = hull
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs()])
        .fold(1.0, f64::max);
    if hull.len() < 3 || signed_area(&hull).abs() <= 1e-12 * extent * extent {
        return Err(Error::DegenerateGeometry(
            "points are collinear; no enclosing parallelogram".into(),
        ));
    }

    struct Slab {
        normal: Point2,
        lo: f64,
        hi: f64,
    }
    let slabs: Vec<Slab> = (0..hull.len())
        .filter_map(|i| {
            let e = hull[(i + 1) % hull.len()] - hull[i];
            let len = e.norm();
            if len <= 0.0 {
                return None;
            }
            let normal = Point2::new(-e.y / len, e.x / len);
            let (lo, hi) = hull.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let v = normal.dot(*p);
                (lo.min(v), hi.max(v))
            });
            Some(Slab { normal, lo, hi })
        })
        .collect();

    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..slabs.len() {
        for j in i + 1..slabs.len() {
            let sin = slabs[i].normal.cross(slabs[j].normal).abs();
            if sin < 1e-9 {
                continue;
            }
            let area = (slabs[i].hi - slabs[i].lo) * (slabs[j].hi - slabs[j].lo) / sin;
            if best.map_or(true, |(a, _, _)| area < a) {
                best = Some((area, i, j));
            }
        }
    }
    let (_, i, j) = best.ok_or_else(|| Error::DegenerateGeometry("no two independent hull directions".into()))?;
    let line = |s: &Slab, v: f64| Line2::new(s.normal.x, s.normal.y, -v);
    let (a, b) = (&slabs[i], &slabs[j]);
    let lines = [
        (line(a, a.lo), line(b, b.lo)),
        (line(a, a.lo), line(b, b.hi)),
        (line(a, a.hi), line(b, b.hi)),
        (line(a, a.hi), line(b, b.lo)),
    ];
    let mut corners = [Point2::default(); 4];
    for (k, (l1, l2)) in lines.iter().enumerate() {
        let (l1, l2) = l1.zip(*l2).ok_or_else(|| Error::DegenerateGeometry("bad slab".into()))?;
        corners[k] = l1
            .intersect(&l2)
            .ok_or_else(|| Error::DegenerateGeometry("parallel slab pair".into()))?;
    }
    Quadrilateral::ordered_from_top_left(corners)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_with_interior_points() {
        let mut pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ];
        pts.push(Point2::new(0.5, 1.5));
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert!(signed_area(&hull) > 0.0);
    }

    #[test]
    fn unit_square_is_its_own_parallelogram() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let q = min_bounding_parallelogram(&pts).unwrap();
        assert!((q.area() - 1.0).abs() < 1e-12);
        for p in pts {
            assert!(q.corners().iter().any(|c| c.distance(p) < 1e-9));
        }
    }

    #[test]
    fn collinear_points_fail() {
        let pts: Vec<Point2> = (0..5).map(|i| Point2::new(i as f64, 1.0 + i as f64)).collect();
        assert!(matches!(
            min_bounding_parallelogram(&pts),
            Err(Error::DegenerateGeometry(_))
        ));
    }
}
