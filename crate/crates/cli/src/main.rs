//! `mcc`: detect ColorChecker charts, render synthetic scenes and score
//! detections against ground truth.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcc_core::config::Config;
use mcc_core::draw::draw_overlay;
use mcc_core::eval::{accuracy_curve, curve_csv, match_and_score, QualityMetric};
use mcc_core::geometry::BBox;
use mcc_core::io::{read_image, read_json, write_atomic, write_json, write_png};
use mcc_core::model::ColorCheckerModel;
use mcc_core::recognition::{detect, DetectionResult};
use mcc_core::render::{generate_dataset, GroundTruth};
use mcc_core::Error;
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "mcc", version, about = "ColorChecker detection, synthetic scenes and scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect charts in an image or a directory of images.
    Detect(DetectArgs),
    /// Render a synthetic dataset with ground truth.
    Render(RenderArgs),
    /// Score detection results against ground truth.
    Eval(EvalArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// Image file or directory of PNG/PNM images.
    #[arg(long)]
    input: PathBuf,
    /// Reference colours as CSV with columns name,R,G,B (0-255).
    #[arg(long)]
    model: PathBuf,
    /// JSON object mapping image id to a list of [x0, y0, x1, y1] boxes.
    #[arg(long)]
    rois: Option<PathBuf>,
    /// Expected number of charts per image.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    cost_threshold: Option<f64>,
    #[arg(long, env = "MCC_CONFIG")]
    config: Option<PathBuf>,
    /// Result file for a single image, otherwise a directory of `<id>.json`.
    #[arg(long)]
    out: PathBuf,
    /// Overlay PNG for a single image, otherwise a directory of `<id>.png`.
    #[arg(long)]
    overlay: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, env = "MCC_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Chart palettes to draw from; the synthetic palette when omitted.
    #[arg(long)]
    model: Vec<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of `<id>.json` detection results.
    #[arg(long)]
    pred: PathBuf,
    /// Directory of `<id>.gt.json` ground-truth files.
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    tp_threshold: Option<f64>,
    #[arg(long, env = "MCC_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Directory receiving a0.csv, a1.csv and a2.csv.
    #[arg(long)]
    curves: Option<PathBuf>,
}

/// A failure together with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. }
            | Error::Image { .. }
            | Error::Schema { .. }
            | Error::Config { .. }
            | Error::RejectedInput(_)
            | Error::InvalidParameter(_)
            | Error::RejectedScene(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Render(a) => cmd_render(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(path: Option<&Path>) -> CliResult<Config> {
    Ok(match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    })
}

fn pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    if jobs == Some(0) {
        return Err(usage("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| usage(format!("cannot start worker pool: {e}")))
}

fn image_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn list_dir(dir: &Path, keep: impl Fn(&str) -> bool) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::from(Error::Io { path: dir.into(), source: e }))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Failure::from(Error::Io { path: dir.into(), source: e }))?.path();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if path.is_file() && keep(&name) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn is_image_name(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    [".png", ".ppm", ".pgm", ".pnm"].iter().any(|ext| lower.ends_with(ext))
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn cmd_detect(a: DetectArgs) -> CliResult<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(c) = a.cost_threshold {
        cfg.detect.cost_threshold = c;
    }
    cfg.validate()?;
    if a.n == Some(0) {
        return Err(usage("--n must be at least 1"));
    }
    let model = ColorCheckerModel::from_csv_file(&a.model)?;
    let single = a.input.is_file();
    let inputs = if single {
        vec![a.input.clone()]
    } else if a.input.is_dir() {
        list_dir(&a.input, is_image_name)?
    } else {
        return Err(usage(format!("input {} does not exist", a.input.display())));
    };
    let rois: Option<BTreeMap<String, Vec<BBox>>> = a.rois.as_deref().map(read_json).transpose()?;

    let out_file = single && a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if !out_file {
        std::fs::create_dir_all(&a.out).map_err(|e| Failure::from(Error::Io { path: a.out.clone(), source: e }))?;
    }
    let overlay_file = single && a.overlay.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")));
    if let Some(dir) = a.overlay.as_ref().filter(|_| !overlay_file) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::from(Error::Io { path: dir.clone(), source: e }))?;
    }

    let run_one = |path: &PathBuf| -> CliResult<DetectionResult> {
        let id = image_id(path);
        let img = read_image(path)?;
        let boxes = match &rois {
            Some(map) => match map.get(&id) {
                Some(b) => Some(b.as_slice()),
                None => {
                    eprintln!("warning: no ROIs listed for `{id}`, searching the whole image");
                    None
                }
            },
            None => None,
        };
        let mut result = detect(&img, &model, boxes, a.n, &cfg.detect)?;
        result.image_id = id.clone();
        result.validate()?;
        let target = if out_file { a.out.clone() } else { a.out.join(format!("{id}.json")) };
        write_json(&target, &result)?;
        if let Some(o) = &a.overlay {
            let target = if overlay_file { o.clone() } else { o.join(format!("{id}.png")) };
            write_png(&target, &draw_overlay(&img, &result))?;
        }
        Ok(result)
    };
    let outcomes: Vec<(PathBuf, CliResult<DetectionResult>)> =
        pool(a.jobs)?.install(|| inputs.par_iter().map(|p| (p.clone(), run_one(p))).collect());

    let mut times = Vec::new();
    let mut charts = 0;
    let mut worst: Option<Failure> = None;
    let mut failed = 0;
    for (path, outcome) in outcomes {
        match outcome {
            Ok(r) => {
                times.push(r.elapsed_seconds);
                charts += r.hypotheses.len();
            }
            Err(f) => {
                eprintln!("{}: {}", path.display(), f.message);
                failed += 1;
                if worst.as_ref().is_none_or(|w| f.code > w.code) {
                    worst = Some(f);
                }
            }
        }
    }
    let (mean, std) = mean_std(&times);
    println!(
        "detected {charts} chart(s) in {} image(s); {mean:.3} ± {std:.3} s/image",
        times.len()
    );
    match worst {
        Some(f) => Err(Failure { code: f.code, message: format!("{failed} of {} image(s) failed", inputs.len()) }),
        None => Ok(()),
    }
}

fn cmd_render(a: RenderArgs) -> CliResult<()> {
    let cfg = load_config(a.config.as_deref())?;
    cfg.validate()?;
    let models = if a.model.is_empty() {
        vec![ColorCheckerModel::synthetic()]
    } else {
        a.model.iter().map(|p| ColorCheckerModel::from_csv_file(p)).collect::<mcc_core::Result<Vec<_>>>()?
    };
    let manifest = pool(a.jobs)?.install(|| generate_dataset(&cfg.render, &models, a.count, a.seed, &a.out))?;
    write_atomic(&a.out.join("model.csv"), models[0].to_csv_string().as_bytes())?;
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure { code: 2, message: e.to_string() })?;
    println!("{text}");
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> CliResult<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(t) = a.tp_threshold {
        cfg.eval.tp_threshold = t;
    }
    cfg.validate()?;

    let mut gts = Vec::new();
    for path in list_dir(&a.gt, |n| n.ends_with(".gt.json"))? {
        let gt: GroundTruth = read_json(&path)?;
        gt.validate().map_err(|e| usage(format!("{}: {e}", path.display())))?;
        gts.push(gt);
    }
    let known: std::collections::BTreeSet<String> = gts.iter().map(|g| g.image_id.clone()).collect();

    let mut preds = Vec::new();
    let mut orphans = Vec::new();
    let pred_files = list_dir(&a.pred, |n| n.ends_with(".json") && !n.ends_with(".gt.json") && n != "manifest.json")?;
    for path in &pred_files {
        let p: DetectionResult = read_json(path)?;
        p.validate().map_err(|e| usage(format!("{}: {e}", path.display())))?;
        if known.contains(&p.image_id) {
            preds.push(p);
        } else {
            orphans.push(p.image_id);
        }
    }
    for id in &orphans {
        eprintln!("warning: prediction `{id}` has no ground truth and is excluded");
    }
    if !orphans.is_empty() && preds.is_empty() {
        return Err(usage("no prediction matches any ground-truth image id"));
    }

    let report = match_and_score(&preds, &gts, cfg.eval.tp_threshold)?;
    write_json(&a.out, &report)?;
    if let Some(dir) = &a.curves {
        std::fs::create_dir_all(dir).map_err(|e| Failure::from(Error::Io { path: dir.clone(), source: e }))?;
        for m in QualityMetric::ALL {
            let csv = curve_csv(m, &accuracy_curve(&report, m));
            write_atomic(&dir.join(format!("{}.csv", m.name())), csv.as_bytes())?;
        }
    }
    let m = &report.metrics;
    println!(
        "TP {} FP {} FN {} total {}: accuracy {:.3} precision {:.3} recall {:.3} F {:.3}",
        m.tp, m.fp, m.fn_, m.total, m.accuracy, m.precision, m.recall, m.f_measure
    );
    Ok(())
}
