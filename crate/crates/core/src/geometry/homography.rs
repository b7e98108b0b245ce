use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::Point2;
use crate::error::{Error, Result};

/// Projective map `x' ~ H x` between two planes. Serialized as nine
/// row-major values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 9]", into = "[f64; 9]")]
pub struct Homography(Matrix3<f64>);

impl TryFrom<[f64; 9]> for Homography {
    type Error = Error;
    fn try_from(v: [f64; 9]) -> Result<Self> {
        Homography::from_row_major(&v)
    }
}

impl From<Homography> for [f64; 9] {
    fn from(h: Homography) -> Self {
        h.to_row_major()
    }
}

impl Homography {
    pub fn identity() -> Self {
        Homography(Matrix3::identity())
    }

    /// Wraps a matrix, rescaling so `h33 = 1` when possible (Frobenius norm
    /// 1 otherwise). Fails if the matrix is singular.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateGeometry("non-finite homography".into()));
        }
        let scale = if m[(2, 2)].abs() > 1e-12 {
            m[(2, 2)]
        } else {
            m.norm()
        };
        if scale == 0.0 {
            return Err(Error::DegenerateGeometry("zero homography".into()));
        }
        let m = m / scale;
        if m.determinant().abs() <= 1e-14 * m.norm().powi(3) {
            return Err(Error::DegenerateGeometry("singular homography".into()));
        }
        Ok(Homography(m))
    }

    pub fn from_row_major(v: &[f64; 9]) -> Result<Self> {
        Homography::from_matrix(Matrix3::from_row_slice(v))
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)], m[(0, 1)], m[(0, 2)],
            m[(1, 0)], m[(1, 1)], m[(1, 2)],
            m[(2, 0)], m[(2, 1)], m[(2, 2)],
        ]
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        let v = self.0 * Vector3::new(p.x, p.y, 1.0);
        Point2::new(v.x / v.z, v.y / v.z)
    }

    /// Homogeneous w of the image of `p`; its sign tells which side of the
    /// horizon `p` lands on.
    pub fn w_of(&self, p: Point2) -> f64 {
        let m = &self.0;
        m[(2, 0)] * p.x + m[(2, 1)] * p.y + m[(2, 2)]
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .0
            .try_inverse()
            .ok_or_else(|| Error::DegenerateGeometry("homography not invertible".into()))?;
        Homography::from_matrix(inv)
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &Homography) -> Result<Self> {
        Homography::from_matrix(self.0 * first.0)
    }

    pub fn scaling(sx: f64, sy: f64) -> Self {
        Homography(Matrix3::new(sx, 0.0, 0.0, 0.0, sy, 0.0, 0.0, 0.0, 1.0))
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Homography(Matrix3::new(1.0, 0.0, dx, 0.0, 1.0, dy, 0.0, 0.0, 1.0))
    }
}

/// Hartley normalization: zero mean, mean distance sqrt(2) from the origin.
fn normalizing_transform(points: &[Point2]) -> Option<Matrix3<f64>> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
    let mean_dist = points
        .iter()
        .map(|p| (p.x - cx).hypot(p.y - cy))
        .sum::<f64>()
        / n;
    if !(mean_dist > 1e-12) {
        return None;
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Some(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

fn has_collinear_triple(points: &[Point2]) -> bool {
    let n = points.len();
    let scale = points
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs()])
        .fold(1e-12, f64::max);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let a = points[j] - points[i];
                let b = points[k] - points[i];
                if a.cross(b).abs() <= 1e-10 * scale * scale {
                    return true;
                }
            }
        }
    }
    false
}

/// Least-squares homography mapping `src[i]` to `dst[i]` by the normalized
/// direct linear transform.
pub fn estimate_homography(src: &[Point2], dst: &[Point2]) -> Result<Homography> {
    let n = src.len();
    if n < 4 || dst.len() != n {
        return Err(Error::DegenerateGeometry(format!(
            "need at least 4 matched correspondences, got {} and {}",
            src.len(),
            dst.len()
        )));
    }
    if src.iter().chain(dst).any(|p| !p.is_finite()) {
        return Err(Error::DegenerateGeometry("non-finite correspondence".into()));
    }
    if n == 4 && (has_collinear_triple(src) || has_collinear_triple(dst)) {
        return Err(Error::DegenerateGeometry("three collinear points among four".into()));
    }
    let t_src = normalizing_transform(src)
        .ok_or_else(|| Error::DegenerateGeometry("coincident source points".into()))?;
    let t_dst = normalizing_transform(dst)
        .ok_or_else(|| Error::DegenerateGeometry("coincident target points".into()))?;

    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (s, d)) in src.iter().zip(dst).enumerate() {
        let sv = t_src * Vector3::new(s.x, s.y, 1.0);
        let dv = t_dst * Vector3::new(d.x, d.y, 1.0);
        let (x, y) = (sv.x, sv.y);
        let (u, v) = (dv.x, dv.y);
        let r0 = 2 * i;
        let r1 = r0 + 1;
        a[(r0, 0)] = -x;
        a[(r0, 1)] = -y;
        a[(r0, 2)] = -1.0;
        a[(r0, 6)] = u * x;
        a[(r0, 7)] = u * y;
        a[(r0, 8)] = u;
        a[(r1, 3)] = -x;
        a[(r1, 4)] = -y;
        a[(r1, 5)] = -1.0;
        a[(r1, 6)] = v * x;
        a[(r1, 7)] = v * y;
        a[(r1, 8)] = v;
    }

    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::DegenerateGeometry("SVD did not converge".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let smallest = order[0];
    let second = svd.singular_values[order[1]];
    let largest = svd.singular_values[order[order.len() - 1]];
    if second <= 1e-10 * largest {
        return Err(Error::DegenerateGeometry(
            "correspondences do not determine a unique homography".into(),
        ));
    }
    let h = v_t.row(smallest);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let t_dst_inv = t_dst
        .try_inverse()
        .ok_or_else(|| Error::DegenerateGeometry("normalization not invertible".into()))?;
    Homography::from_matrix(t_dst_inv * hn * t_src)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Vec<Point2> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn identity_from_unit_square() {
        let h = estimate_homography(&unit_square(), &unit_square()).unwrap();
        let m = h.matrix();
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((m[(r, c)] - want).abs() < 1e-9, "{m}");
            }
        }
    }

    #[test]
    fn scaled_square_is_diagonal() {
        let dst: Vec<Point2> = unit_square().iter().map(|p| *p * 2.0).collect();
        let h = estimate_homography(&unit_square(), &dst).unwrap();
        let r = h.to_row_major();
        let want = [2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn collinear_points_are_rejected() {
        let src = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        let err = estimate_homography(&src, &unit_square()).unwrap_err();
        assert!(matches!(err, Error::DegenerateGeometry(_)));
        let all_on_line: Vec<Point2> = (0..6).map(|i| Point2::new(i as f64, 2.0 * i as f64)).collect();
        assert!(estimate_homography(&all_on_line, &all_on_line).is_err());
    }

    #[test]
    fn four_points_map_exactly() {
        let src = unit_square();
        let dst = vec![
            Point2::new(10.0, 12.0),
            Point2::new(90.0, 20.0),
            Point2::new(110.0, 95.0),
            Point2::new(5.0, 70.0),
        ];
        let h = estimate_homography(&src, &dst).unwrap();
        for (s, d) in src.iter().zip(&dst) {
            assert!(h.apply(*s).distance(*d) < 1e-6);
        }
        let back = h.inverse().unwrap();
        for (s, d) in src.iter().zip(&dst) {
            assert!(back.apply(*d).distance(*s) < 1e-9);
        }
    }
}
