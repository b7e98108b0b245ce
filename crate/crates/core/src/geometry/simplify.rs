use super::Point2;

fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Ramer-Douglas-Peucker simplification of an open polyline. Endpoints are
/// always kept; output is a subsequence of the input.
pub fn rdp_polyline(points: &[Point2], epsilon: f64) -> Vec<Point2> {
    rdp_keep(points, epsilon)
        .into_iter()
        .map(|i| points[i])
        .collect()
}

/// Indices kept by RDP, ascending.
fn rdp_keep(points: &[Point2], epsilon: f64) -> Vec<usize> {
    if points.len() < 3 {
        return (0..points.len()).collect();
    }
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;
    let mut stack = vec![(0usize, points.len() - 1)];
    while let Some((start, end)) = stack.pop() {
        if end <= start + 1 {
            continue;
        }
        let (mut worst, mut worst_d) = (start, -1.0);
        for i in start + 1..end {
            let d = segment_distance(points[i], points[start], points[end]);
            if d > worst_d {
                worst = i;
                worst_d = d;
            }
        }
        if worst_d > epsilon {
            keep[worst] = true;
            stack.push((start, worst));
            stack.push((worst, end));
        }
    }
    (0..points.len()).filter(|&i| keep[i]).collect()
}

/// RDP on a closed contour.
///
/// The contour is split at its point farthest from the centroid and the
/// point farthest from that one, and each half is simplified. A final pass
/// drops any kept vertex whose removal leaves every contour point of the
/// merged span within `epsilon` of the new chord (the split points are not
/// guaranteed to be corners).
pub fn rdp_simplify(contour: &[Point2], epsilon: f64) -> Vec<Point2> {
    let n = contour.len();
    if n < 3 {
        return contour.to_vec();
    }
    let c = super::centroid_of(contour);
    let far = |from: Point2| {
        (0..n)
            .max_by(|&i, &j| contour[i].distance(from).total_cmp(&contour[j].distance(from)))
            .unwrap_or(0)
    };
    let a = far(c);
    let b = far(contour[a]);
    let (i0, i1) = if a < b { (a, b) } else { (b, a) };
    if i0 == i1 {
        return vec![contour[i0]];
    }

    // Work on indices so the final pass can re-check the original points.
    let first: Vec<usize> = (i0..=i1).collect();
    let second: Vec<usize> = (i1..n).chain(0..=i0).collect();
    let mut kept = rdp_indices(contour, &first, epsilon);
    kept.pop();
    let mut tail = rdp_indices(contour, &second, epsilon);
    tail.pop();
    kept.extend(tail);

    let span_ok = |from: usize, to: usize| {
        let (pa, pb) = (contour[from], contour[to]);
        let mut k = (from + 1) % n;
        while k != to {
            if segment_distance(contour[k], pa, pb) > epsilon {
                return false;
            }
            k = (k + 1) % n;
        }
        true
    };
    loop {
        let m = kept.len();
        if m <= 3 {
            break;
        }
        let drop = (0..m).find(|&i| span_ok(kept[(i + m - 1) % m], kept[(i + 1) % m]));
        match drop {
            Some(i) => {
                kept.remove(i);
            }
            None => break,
        }
    }
    kept.into_iter().map(|i| contour[i]).collect()
}

fn rdp_indices(points: &[Point2], idx: &[usize], epsilon: f64) -> Vec<usize> {
    let sub: Vec<Point2> = idx.iter().map(|&i| points[i]).collect();
    rdp_keep(&sub, epsilon).into_iter().map(|k| idx[k]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_contour(side: usize) -> Vec<Point2> {
        let s = side as f64;
        let mut pts = Vec::new();
        for i in 0..side {
            pts.push(Point2::new(i as f64, 0.0));
        }
        for i in 0..side {
            pts.push(Point2::new(s, i as f64));
        }
        for i in 0..side {
            pts.push(Point2::new(s - i as f64, s));
        }
        for i in 0..side {
            pts.push(Point2::new(0.0, s - i as f64));
        }
        pts
    }

    #[test]
    fn square_reduces_to_four_corners() {
        let out = rdp_simplify(&square_contour(20), 2.0);
        assert_eq!(out.len(), 4, "{out:?}");
        for corner in [(0.0, 0.0), (20.0, 0.0), (20.0, 20.0), (0.0, 20.0)] {
            assert!(out.contains(&Point2::new(corner.0, corner.1)));
        }
    }

    #[test]
    fn triangle_keeps_three() {
        let mut tri = Vec::new();
        for i in 0..30 {
            tri.push(Point2::new(i as f64, 0.0));
        }
        for i in 0..30 {
            tri.push(Point2::new(30.0 - i as f64 * 0.5, i as f64));
        }
        for i in 0..30 {
            tri.push(Point2::new(15.0 - i as f64 * 0.5, 30.0 - i as f64));
        }
        assert_eq!(rdp_simplify(&tri, 1.0).len(), 3);
    }

    #[test]
    fn circle_keeps_more_than_four() {
        let circle: Vec<Point2> = (0..360)
            .map(|k| {
                let t = (k as f64).to_radians();
                Point2::new(50.0 * t.cos(), 50.0 * t.sin())
            })
            .collect();
        assert!(rdp_simplify(&circle, 1.0).len() > 4);
    }
}
