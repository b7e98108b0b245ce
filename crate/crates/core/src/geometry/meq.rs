//! Minimum enclosing quadrilateral of a set of charts (patch quads).
//!
//! Every chart edge becomes a candidate line, oriented with the chart
//! interior on its non-negative side. Lines are ranked by how many corners
//! of the whole set fall strictly outside them, then greedily taken while
//! each new line stays more than 30 degrees away from all lines already taken.
//! The four chosen lines are intersected in angular order.

use super::{centroid_of, Line2, Point2, Quadrilateral};
use crate::error::{Error, Result};

const MIN_LINE_ANGLE_DEG: f64 = 30.0;
const MIN_INTERIOR_ANGLE_DEG: f64 = 10.0;
const MAX_ASPECT_RATIO: f64 = 10.0;

struct RankedLine {
    line: Line2,
    outside: usize,
    distance: f64,
}

pub fn min_enclosing_quadrilateral(charts: &[Quadrilateral]) -> Result<Quadrilateral> {
    if charts.is_empty() {
        return Err(Error::FitFailure("no charts to enclose".into()));
    }
    let points: Vec<Point2> = charts.iter().flat_map(|c| c.corners().iter().copied()).collect();
    let center = centroid_of(&points);
    let extent = points
        .iter()
        .map(|p| p.distance(center))
        .fold(0.0, f64::max)
        .max(1e-9);
    let tol = 1e-9 * extent;

    let mut lines: Vec<RankedLine> = Vec::with_capacity(charts.len() * 4);
    for chart in charts {
        let c = chart.corners();
        let inner = chart.centroid();
        for i in 0..4 {
            let Some(mut line) = Line2::through(c[i], c[(i + 1) % 4]) else {
                continue;
            };
            if line.signed_distance(inner) < 0.0 {
                line = line.flipped();
            }
            let outside = points
                .iter()
                .filter(|p| line.signed_distance(**p) < -tol)
                .count();
            lines.push(RankedLine {
                line,
                outside,
                distance: line.signed_distance(center).abs(),
            });
        }
    }
    lines.sort_by(|a, b| {
        a.outside
            .cmp(&b.outside)
            .then(b.distance.total_cmp(&a.distance))
            .then(a.line.nx.total_cmp(&b.line.nx))
            .then(a.line.ny.total_cmp(&b.line.ny))
            .then(a.line.d.total_cmp(&b.line.d))
    });

    let cos_limit = MIN_LINE_ANGLE_DEG.to_radians().cos();
    let mut chosen: Vec<Line2> = Vec::with_capacity(4);
    for cand in &lines {
        if chosen.len() == 4 {
            break;
        }
        let separated = chosen
            .iter()
            .all(|l| cand.line.normal().dot(l.normal()) < cos_limit);
        if separated {
            chosen.push(cand.line);
        }
    }
    if chosen.len() < 4 {
        return Err(Error::FitFailure(format!(
            "only {} mutually separated lines available",
            chosen.len()
        )));
    }

    chosen.sort_by(|a, b| a.ny.atan2(a.nx).total_cmp(&b.ny.atan2(b.nx)));
    let mut corners = [Point2::default(); 4];
    for i in 0..4 {
        corners[i] = chosen[i]
            .intersect(&chosen[(i + 1) % 4])
            .ok_or_else(|| Error::FitFailure("parallel consecutive lines".into()))?;
    }
    let quad = Quadrilateral::ordered_from_top_left(corners)
        .map_err(|e| Error::FitFailure(format!("line intersections do not form a quad: {e}")))?;

    let min_angle = quad
        .interior_angles_deg()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_angle < MIN_INTERIOR_ANGLE_DEG {
        return Err(Error::FitFailure(format!(
            "degenerate quad, interior angle {min_angle:.1} deg"
        )));
    }
    if quad.aspect_ratio() > MAX_ASPECT_RATIO {
        return Err(Error::FitFailure(format!(
            "degenerate quad, aspect ratio {:.1}",
            quad.aspect_ratio()
        )));
    }
    Ok(quad)
}
