use std::collections::VecDeque;

use super::PatchCandidate;

/// Area-weighted centre distance: equal areas give the plain Euclidean
/// distance, dissimilar areas stretch it up to twice that.
pub(crate) fn weighted_distance(a: &PatchCandidate, b: &PatchCandidate) -> f64 {
    let w = (a.area - b.area).abs() / (a.area + b.area);
    (1.0 + w) * a.center.distance(b.center)
}

/// Groups patches into connected components of the neighbourhood graph
/// with an edge whenever the weighted distance is below `b0_factor *
/// axis_max` of either endpoint. Groups smaller than `min_size` are dropped.
/// Each group lists patch indices in ascending order; groups are ordered by
/// their first member.
pub fn cluster_patches(patches: &[PatchCandidate], b0_factor: f64, min_size: usize) -> Vec<Vec<usize>> {
    let n = patches.len();
    let radius: Vec<f64> = patches.iter().map(|p| b0_factor * p.axis_max).collect();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let d = weighted_distance(&patches[i], &patches[j]);
            if d < radius[i] || d < radius[j] {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut groups = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut members = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    members.push(j);
                    queue.push_back(j);
                }
            }
        }
        if members.len() >= min_size {
            members.sort_unstable();
            groups.push(members);
        }
    }
    groups
}
