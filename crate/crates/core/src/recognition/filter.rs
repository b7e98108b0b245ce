use crate::config::RegionFilterConfig;
use crate::imgproc::Region;

pub fn passes_filter(r: &Region, cfg: &RegionFilterConfig) -> bool {
    let cf = r.circularity();
    r.convexity() > cfg.min_convexity
        && r.axis_ratio() > cfg.min_axis_ratio
        && cf > cfg.circularity[0]
        && cf < cfg.circularity[1]
        && r.entropy < cfg.max_entropy
}

/// Keeps regions that look like a colour patch: convex, not elongated,
/// square-ish rather than round, and homogeneous.
pub fn filter_regions(regions: &[Region], cfg: &RegionFilterConfig) -> Vec<Region> {
    regions.iter().filter(|r| passes_filter(r, cfg)).cloned().collect()
}
