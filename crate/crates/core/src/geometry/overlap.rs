use super::{BBox, Point2, Quadrilateral};

/// Shoelace sum; positive for clockwise polygons in image coordinates.
pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>() * 0.5
}

pub fn polygon_area(poly: &[Point2]) -> f64 {
    signed_area(poly).abs()
}

/// Sutherland-Hodgman clipping of `subject` against the convex polygon
/// `clip`. Either orientation is accepted for both.
pub fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let orient = if signed_area(clip) >= 0.0 { 1.0 } else { -1.0 };
    let mut output: Vec<Point2> = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let edge = b - a;
        let inside = |p: Point2| orient * edge.cross(p - a) >= 0.0;
        let input = std::mem::take(&mut output);
        let n = input.len();
        for k in 0..n {
            let cur = input[k];
            let prev = input[(k + n - 1) % n];
            let (cin, pin) = (inside(cur), inside(prev));
            if cin != pin {
                let d = cur - prev;
                let denom = edge.cross(d);
                if denom.abs() > 0.0 {
                    let t = edge.cross(a - prev) / denom;
                    output.push(prev + d * t.clamp(0.0, 1.0));
                }
            }
            if cin {
                output.push(cur);
            }
        }
    }
    output
}

/// Intersection over union of two axis-aligned boxes.
pub fn iou_box(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection(b).area();
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Intersection over union of two convex quadrilaterals.
pub fn iou_polygon(a: &Quadrilateral, b: &Quadrilateral) -> f64 {
    let inter = polygon_area(&clip_convex(a.corners(), b.corners()));
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x: f64, y: f64, s: f64) -> Quadrilateral {
        Quadrilateral::new([
            Point2::new(x, y),
            Point2::new(x + s, y),
            Point2::new(x + s, y + s),
            Point2::new(x, y + s),
        ])
        .unwrap()
    }

    #[test]
    fn box_examples() {
        let a = BBox::new(0.0, 0.0, 2.0, 1.0);
        assert_eq!(iou_box(&a, &a), 1.0);
        assert_eq!(iou_box(&a, &BBox::new(5.0, 5.0, 6.0, 6.0)), 0.0);
        let b = BBox::new(1.0, 0.0, 3.0, 1.0);
        assert!((iou_box(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_examples() {
        let a = square(0.0, 0.0, 1.0);
        assert!((iou_polygon(&a, &a) - 1.0).abs() < 1e-12);
        let shifted = square(0.5, 0.0, 1.0);
        assert!((iou_polygon(&a, &shifted) - 1.0 / 3.0).abs() < 1e-12);
        let inner = square(0.25, 0.25, 0.5);
        assert!((iou_polygon(&a, &inner) - 0.25).abs() < 1e-12);
        assert_eq!(iou_polygon(&a, &square(3.0, 3.0, 1.0)), 0.0);
    }
}
