//! Run configuration. Every tunable of the pipeline lives here with its
//! default; loading rejects unknown keys and out-of-range values, naming the
//! offending key.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub detect: DetectConfig,
    pub render: RenderConfig,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdConfig {
    /// Side of the local-mean window, odd, in canonical pixels.
    pub window: usize,
    /// A pixel is dark when its luma is below the local mean minus this.
    pub offset: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig { window: 31, offset: 5.0 }
    }
}

/// Region feature thresholds (convexity, axis ratio, circularity, entropy).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionFilterConfig {
    /// Area / ConvexArea must exceed this.
    pub min_convexity: f64,
    /// AxisMin / AxisMax must exceed this.
    pub min_axis_ratio: f64,
    /// 4*pi*Area/Perimeter^2 must lie strictly inside this interval.
    pub circularity: [f64; 2],
    /// Gray-level entropy in bits must stay below this.
    pub max_entropy: f64,
}

impl Default for RegionFilterConfig {
    fn default() -> Self {
        RegionFilterConfig {
            min_convexity: 0.90,
            min_axis_ratio: 0.4,
            circularity: [0.65, 0.97],
            max_entropy: 4.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectConfig {
    pub threshold: ThresholdConfig,
    pub regions: RegionFilterConfig,
    /// Regions with fewer pixels are not considered as patches.
    pub min_patch_pixels: usize,
    /// RDP tolerance as a fraction of the contour perimeter.
    pub rdp_epsilon_factor: f64,
    /// Patch quads are shrunk toward their centroid by this before sampling.
    pub sample_shrink: f64,
    /// Neighbourhood radius as a multiple of AxisMax.
    pub b0_factor: f64,
    /// Groups with fewer patches are dropped.
    pub min_group_size: usize,
    /// Best orientation fits kept per group as separate hypotheses.
    pub hypotheses_per_group: usize,
    /// How many times a group may lose its most remote member while
    /// looking for a consistent lattice.
    pub max_pruning: usize,
    /// Bounding-box IOU at or above which the costlier hypothesis is suppressed.
    pub nms_iou: f64,
    /// Hypotheses at or above this cost are dropped when the chart count is unknown.
    pub cost_threshold: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            threshold: ThresholdConfig::default(),
            regions: RegionFilterConfig::default(),
            min_patch_pixels: 25,
            rdp_epsilon_factor: 0.02,
            sample_shrink: 0.7,
            b0_factor: 1.65,
            min_group_size: 4,
            hypotheses_per_group: 2,
            max_pruning: 3,
            nms_iou: 0.5,
            cost_threshold: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    pub focal: f64,
    pub width: usize,
    pub height: usize,
    /// Defaults to the image centre.
    pub principal: Option<[f64; 2]>,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            focal: 1000.0,
            width: 1024,
            height: 640,
            principal: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum BackgroundSource {
    File(PathBuf),
    Flat { gray: f64 },
    Gradient { seed: u64 },
    Clutter { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    pub camera: CameraConfig,
    /// Inclusive range of charts per scene.
    pub checkers: [usize; 2],
    /// Intervals for r_x, r_y, r_z in radians.
    pub rotation: [[f64; 2]; 3],
    /// Intervals for t_x, t_y, t_z in model units; t_z within [-30, -10].
    pub translation: [[f64; 2]; 3],
    /// Number of chart model variants to draw identities from.
    pub identities: usize,
    /// Std-dev of additive Gaussian noise on [0,1] intensities.
    pub noise_sigma: f64,
    /// Scale chart luma by background/chart mean luma.
    pub luminance_adjust: bool,
    pub backgrounds: Vec<BackgroundSource>,
    /// Redraw scenes until every chart projects fully inside the image.
    pub require_inside: bool,
    /// Redraw scenes until chart outlines are pairwise disjoint.
    pub forbid_overlap: bool,
    /// Minimum chart bounding-box area as a fraction of the image.
    pub min_bbox_fraction: f64,
    pub max_attempts: usize,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            camera: CameraConfig::default(),
            checkers: [1, 5],
            rotation: [[-FRAC_PI_2, FRAC_PI_2]; 3],
            translation: [[-4.0, 4.0], [-2.5, 2.5], [-30.0, -10.0]],
            identities: 1,
            noise_sigma: 2.0 / 255.0,
            luminance_adjust: true,
            backgrounds: vec![
                BackgroundSource::Clutter { seed: 1 },
                BackgroundSource::Clutter { seed: 2 },
                BackgroundSource::Gradient { seed: 3 },
                BackgroundSource::Flat { gray: 0.5 },
            ],
            require_inside: false,
            forbid_overlap: false,
            min_bbox_fraction: 0.0,
            max_attempts: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Minimum chart-box IOU for a true positive.
    pub tp_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { tp_threshold: 0.5 }
    }
}

fn ensure(ok: bool, key: &str, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(key, message()))
    }
}

fn in_range(key: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    ensure(v.is_finite() && v >= lo && v <= hi, key, || {
        format!("{v} is outside [{lo}, {hi}]")
    })
}

fn interval(key: &str, iv: [f64; 2], lo: f64, hi: f64) -> Result<()> {
    in_range(key, iv[0], lo, hi)?;
    in_range(key, iv[1], lo, hi)?;
    ensure(iv[0] <= iv[1], key, || format!("empty interval [{}, {}]", iv[0], iv[1]))
}

impl Config {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let key = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
                .unwrap_or("<root>")
                .to_string();
            Error::config(key, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.detect;
        let w = d.threshold.window;
        ensure(w >= 3 && w % 2 == 1 && w <= 399, "detect.threshold.window", || {
            format!("{w} must be odd and within [3, 399]")
        })?;
        in_range("detect.threshold.offset", d.threshold.offset, 0.0, 255.0)?;
        in_range("detect.regions.min_convexity", d.regions.min_convexity, 0.0, 1.0)?;
        in_range("detect.regions.min_axis_ratio", d.regions.min_axis_ratio, 0.0, 1.0)?;
        interval("detect.regions.circularity", d.regions.circularity, 0.0, 1.5)?;
        in_range("detect.regions.max_entropy", d.regions.max_entropy, 0.0, 8.0)?;
        ensure(d.min_patch_pixels <= 100_000, "detect.min_patch_pixels", || {
            format!("{} exceeds 100000", d.min_patch_pixels)
        })?;
        ensure(d.max_pruning <= 20, "detect.max_pruning", || format!("{} exceeds 20", d.max_pruning))?;
        in_range("detect.rdp_epsilon_factor", d.rdp_epsilon_factor, 1e-4, 0.25)?;
        in_range("detect.sample_shrink", d.sample_shrink, 0.05, 1.0)?;
        in_range("detect.b0_factor", d.b0_factor, 0.1, 10.0)?;
        ensure((2..=24).contains(&d.min_group_size), "detect.min_group_size", || {
            format!("{} is outside [2, 24]", d.min_group_size)
        })?;
        ensure(
            (1..=8).contains(&d.hypotheses_per_group),
            "detect.hypotheses_per_group",
            || format!("{} is outside [1, 8]", d.hypotheses_per_group),
        )?;
        in_range("detect.nms_iou", d.nms_iou, 1e-6, 1.0)?;
        in_range("detect.cost_threshold", d.cost_threshold, 0.0, 96.0)?;

        let r = &self.render;
        in_range("render.camera.focal", r.camera.focal, 1.0, 1e5)?;
        for (key, v) in [("render.camera.width", r.camera.width), ("render.camera.height", r.camera.height)] {
            ensure((24..=16384).contains(&v), key, || format!("{v} is outside [24, 16384]"))?;
        }
        if let Some([cx, cy]) = r.camera.principal {
            in_range("render.camera.principal", cx, 0.0, r.camera.width as f64)?;
            in_range("render.camera.principal", cy, 0.0, r.camera.height as f64)?;
        }
        let [lo, hi] = r.checkers;
        ensure(lo >= 1 && hi <= 5 && lo <= hi, "render.checkers", || {
            format!("[{lo}, {hi}] must satisfy 1 <= lo <= hi <= 5")
        })?;
        for (k, iv) in r.rotation.iter().enumerate() {
            interval(&format!("render.rotation[{k}]"), *iv, -FRAC_PI_2, FRAC_PI_2)?;
        }
        for (k, iv) in r.translation.iter().take(2).enumerate() {
            interval(&format!("render.translation[{k}]"), *iv, -1e3, 1e3)?;
        }
        interval("render.translation[2]", r.translation[2], -30.0, -10.0)?;
        ensure(r.identities >= 1, "render.identities", || "must be at least 1".into())?;
        in_range("render.noise_sigma", r.noise_sigma, 0.0, 0.5)?;
        ensure(!r.backgrounds.is_empty(), "render.backgrounds", || {
            "background pool is empty".into()
        })?;
        for (k, b) in r.backgrounds.iter().enumerate() {
            if let BackgroundSource::Flat { gray } = b {
                in_range(&format!("render.backgrounds[{k}].flat.gray"), *gray, 0.0, 1.0)?;
            }
        }
        in_range("render.min_bbox_fraction", r.min_bbox_fraction, 0.0, 0.9)?;
        ensure(r.max_attempts >= 1, "render.max_attempts", || "must be at least 1".into())?;

        in_range("eval.tp_threshold", self.eval.tp_threshold, 0.0, 1.0)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = Config::default();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(Config::from_json_str(&text).unwrap(), c);
        assert_eq!(Config::from_json_str("{}").unwrap(), c);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::from_json_str(r#"{"detect": {"bogus": 1}}"#).unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "bogus"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn out_of_range_value_is_named() {
        let err = Config::from_json_str(r#"{"detect": {"threshold": {"window": 30}}}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "detect.threshold.window"));
        let err = Config::from_json_str(r#"{"render": {"translation": [[0,0],[0,0],[-5,-1]]}}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "render.translation[2]"));
        let err = Config::from_json_str(r#"{"render": {"backgrounds": []}}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "render.backgrounds"));
    }

    #[test]
    fn background_sources_parse() {
        let c = Config::from_json_str(
            r#"{"render": {"backgrounds": [{"file": "a.png"}, {"flat": {"gray": 0.25}}, {"clutter": {"seed": 9}}]}}"#,
        )
        .unwrap();
        assert_eq!(c.render.backgrounds.len(), 3);
        assert_eq!(c.render.backgrounds[0], BackgroundSource::File("a.png".into()));
    }
}
