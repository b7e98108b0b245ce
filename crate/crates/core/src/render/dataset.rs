use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RenderConfig;
use crate::error::{Error, Result};
use crate::io::{write_json, write_png};
use crate::model::ColorCheckerModel;

use super::{load_backgrounds, render_scene, sample_scene, Camera, GroundTruth, RenderOptions};
use crate::imgproc::ImageBuffer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub image_id: String,
    pub image: String,
    pub ground_truth: String,
    pub seed: u64,
    pub checkers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub seed: u64,
    pub count: usize,
    pub config: RenderConfig,
    pub entries: Vec<ManifestEntry>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-image seed, so any subset of images can be regenerated in any order.
pub fn image_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ splitmix64(index as u64))
}

/// Renders scene `index` of the dataset defined by `(cfg, seed)`.
fn render_indexed(
    cfg: &RenderConfig,
    models: &[ColorCheckerModel],
    camera: &Camera,
    backgrounds: &[ImageBuffer],
    seed: u64,
    index: usize,
) -> Result<(ImageBuffer, GroundTruth, u64)> {
    let s = image_seed(seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(s);
    let spec = sample_scene(cfg, &mut rng)?;
    let bg = cfg
        .backgrounds
        .iter()
        .position(|b| *b == spec.background)
        .expect("background drawn from the pool");
    let opts = RenderOptions {
        noise_sigma: cfg.noise_sigma,
        luminance_adjust: cfg.luminance_adjust,
        ..RenderOptions::default()
    };
    let (img, mut gt) = render_scene(&spec, models, camera, &backgrounds[bg], &opts)?;
    gt.image_id = format!("scene_{index:05}");
    Ok((img, gt, s))
}

/// Renders `count` scenes in memory, in index order.
pub fn render_batch(
    cfg: &RenderConfig,
    models: &[ColorCheckerModel],
    count: usize,
    seed: u64,
) -> Result<Vec<(ImageBuffer, GroundTruth)>> {
    let camera = Camera::from_config(&cfg.camera)?;
    let backgrounds = load_backgrounds(&cfg.backgrounds, camera.width, camera.height)?;
    (0..count)
        .into_par_iter()
        .map(|i| render_indexed(cfg, models, &camera, &backgrounds, seed, i).map(|(img, gt, _)| (img, gt)))
        .collect()
}

/// Renders `count` scenes into `out_dir` as `<id>.png` plus `<id>.gt.json`
/// and writes `manifest.json`. Output depends only on the arguments.
pub fn generate_dataset(
    cfg: &RenderConfig,
    models: &[ColorCheckerModel],
    count: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<Manifest> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let camera = Camera::from_config(&cfg.camera)?;
    let backgrounds = load_backgrounds(&cfg.backgrounds, camera.width, camera.height)?;
    let entries = (0..count)
        .into_par_iter()
        .map(|i| {
            let (img, gt, s) = render_indexed(cfg, models, &camera, &backgrounds, seed, i)?;
            let image = format!("{}.png", gt.image_id);
            let ground_truth = format!("{}.gt.json", gt.image_id);
            write_png(&out_dir.join(&image), &img)?;
            write_json(&out_dir.join(&ground_truth), &gt)?;
            Ok(ManifestEntry {
                image_id: gt.image_id.clone(),
                image,
                ground_truth,
                seed: s,
                checkers: gt.checkers.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        seed,
        count,
        config: cfg.clone(),
        entries,
    };
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
