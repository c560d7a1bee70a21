//! The `evidfuse` command line.
//!
//! Every command writes into `--output-dir` and finishes by writing
//! `manifest.json` there. Failures print one JSON object on stderr,
//! `{"error": <kind>, "exit_code": <n>, "message": ...}`, and exit with the
//! code documented on [`Error::exit_code`]; argument errors exit with 2.
//! The log level comes from `EVIDFUSE_LOG` (default `warn`).

pub mod manifest;

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attention::{lsa_attention, mean_row_entropy, spt_raw_tokens, ImageTensor, LinearMap, LsaParams};
use crate::autodiff::Checkpoint;
use crate::data::{group_by_sample, read_features_csv, read_view_table, write_features_csv};
use crate::error::{Error, Result};
use crate::experiment::{self, ExperimentConfig};
use crate::fusion::combine_many;
use crate::metrics::{reliability_bins, summarize, MetricsSummary, PredictionRecord};
use crate::opinion::{evidence_to_opinion, expected_probabilities, Evidence, Opinion};
use crate::synth::{generate, SynthSpec};
use crate::views::{run_pipeline, write_pgm, PgmDepth, RasterImage, ViewGeometry};
pub use manifest::{RunManifest, MANIFEST_FILE};

pub const LOG_ENV: &str = "EVIDFUSE_LOG";

#[derive(Debug, Parser)]
#[command(name = "evidfuse", version, about = "Evidential multi-view fusion toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic multi-view feature table.
    GenData(GenDataArgs),
    /// Preprocess a PGM slice and cut it into local and global views.
    ExtractViews(ExtractViewsArgs),
    /// Train per-view evidential networks through the fusion rule.
    Train(TrainArgs),
    /// Fuse per-view opinions (JSON lines) or evidence (CSV) per sample.
    Fuse(FuseArgs),
    /// Accuracy, AUC and ECE of prediction records.
    Evaluate(EvaluateArgs),
    /// Dump a locality self-attention map over shifted-patch tokens.
    LsaDemo(LsaDemoArgs),
    /// Check a run manifest against the files on disk.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Synthetic data spec (JSON); defaults to the standard benchmark.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: PathBuf,
}

/// `otsu` or an intensity value in the input's units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Otsu,
    Value(f64),
}

impl FromStr for Threshold {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("otsu") {
            return Ok(Threshold::Otsu);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Threshold::Value(v)),
            _ => Err(format!("`{s}` is neither `otsu` nor a finite number")),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExtractViewsArgs {
    /// Binary PGM (8 or 16 bit); spacing from `<input>.spacing` if present.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 160)]
    pub roi: usize,
    #[arg(long, default_value_t = 96)]
    pub window: usize,
    #[arg(long, default_value_t = 32)]
    pub stride: usize,
    #[arg(long, default_value = "otsu")]
    pub threshold: Threshold,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Experiment configuration (JSON); defaults to the synthetic benchmark.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Feature table; when absent the data is generated from the config.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Class count of `--input`; inferred from the labels when omitted.
    #[arg(long)]
    pub classes: Option<usize>,
    /// Overrides every seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the ECE bin count.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// `.jsonl` opinions or `.csv` evidence.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Prediction records as JSON lines.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct LsaDemoArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Side of the random square test image.
    #[arg(long, default_value_t = 32)]
    pub size: usize,
    #[arg(long, default_value_t = 8)]
    pub patch: usize,
    /// Width of the projected tokens and of queries and keys.
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Softmax temperature; defaults to √dim.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Keep the diagonal (plain scaled dot-product attention).
    #[arg(long)]
    pub no_mask: bool,
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Path to a `manifest.json`.
    #[arg(long)]
    pub manifest: PathBuf,
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    // A second call (from tests) keeps the first logger.
    let _ = env_logger::Builder::from_env(env).try_init();
}

fn report(e: &Error) -> i32 {
    let code = e.exit_code();
    let body = serde_json::json!({
        "error": e.kind(),
        "exit_code": code,
        "message": e.to_string(),
    });
    eprintln!("{body}");
    code
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let body = serde_json::json!({
                "error": "usage",
                "exit_code": 2,
                "message": e.render().to_string().trim_end(),
            });
            eprintln!("{body}");
            return 2;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::GenData(a) => gen_data(a),
        Command::ExtractViews(a) => extract_views(a),
        Command::Train(a) => train(a),
        Command::Fuse(a) => fuse(a),
        Command::Evaluate(a) => evaluate(a),
        Command::LsaDemo(a) => lsa_demo(a),
        Command::Verify(a) => verify(a),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_jsonl<T: Serialize>(dir: &Path, name: &str, lines: &[T]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(dir.join(name))?);
    for l in lines {
        serde_json::to_writer(&mut w, l)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads non-blank JSON lines, naming the line on failure.
fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(fs::File::open(path).map_err(|e| Error::io_at(path, e))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| {
            Error::Malformed(format!("{} line {}: {e}", path.display(), i + 1))
        })?);
    }
    if out.is_empty() {
        return Err(Error::Empty("input records"));
    }
    Ok(out)
}

fn finish(manifest: &mut RunManifest, dir: &Path, outputs: &[String]) -> Result<()> {
    for name in outputs {
        manifest.add_output(dir, name)?;
    }
    let path = manifest.write(dir)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn gen_data(a: GenDataArgs) -> Result<()> {
    let mut spec = match &a.config {
        Some(p) => read_json::<SynthSpec>(p)?,
        None => SynthSpec::benchmark(0),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let ds = generate(&spec)?;
    fs::create_dir_all(&a.output_dir)?;
    write_features_csv(fs::File::create(a.output_dir.join("features.csv"))?, &ds)?;
    write_json(&a.output_dir, "spec.json", &spec)?;
    let mut m = RunManifest::new("gen-data", Some(spec.seed), serde_json::to_value(&spec)?)?;
    if let Some(p) = &a.config {
        m.add_input(p)?;
    }
    finish(&mut m, &a.output_dir, &["features.csv".into(), "spec.json".into()])
}

/// Geometry and preprocessing record written next to the view images.
#[derive(Debug, Serialize)]
struct ViewsManifest {
    input_height: usize,
    input_width: usize,
    input_spacing_mm: (f64, f64),
    spacing_mm: f64,
    size: usize,
    threshold: f64,
    threshold_method: &'static str,
    centroid: (usize, usize),
    roi_origin: (usize, usize),
    roi: usize,
    window: usize,
    stride: usize,
    /// Stored value `q` maps back to the normalized intensity `offset + q·scale`.
    intensity_offset: f64,
    intensity_scale: f64,
    views: Vec<ViewEntry>,
    global: ViewEntry,
}

#[derive(Debug, Serialize)]
struct ViewEntry {
    file: String,
    /// Top-left pixel in the preprocessed image.
    origin: (usize, usize),
    height: usize,
    width: usize,
}

fn extract_views(a: ExtractViewsArgs) -> Result<()> {
    let img = crate::views::read_pgm(&a.input)?;
    let geometry = ViewGeometry {
        roi: a.roi,
        window: a.window,
        stride: a.stride,
    };
    let threshold = match a.threshold {
        Threshold::Otsu => None,
        Threshold::Value(v) => Some(v),
    };
    let out = run_pipeline(&img, threshold, geometry)?;
    fs::create_dir_all(&a.output_dir)?;

    // One linear map to 16 bits over the whole preprocessed image keeps the
    // views comparable with each other.
    let pix = &out.preprocessed.image.pixels;
    let lo = pix.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pix.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = (hi - lo) / f64::from(u16::MAX);
    let quantize = |v: &RasterImage| {
        let pixels = v.pixels.iter().map(|p| ((p - lo) / scale).round()).collect();
        RasterImage::new(v.height, v.width, pixels, v.spacing)
    };

    let vs = &out.views;
    let mut files = Vec::new();
    let mut views = Vec::new();
    for (k, (view, &(r, c))) in vs.local.iter().zip(&vs.window_origins).enumerate() {
        let name = format!("view_{}.pgm", k + 1);
        write_pgm(fs::File::create(a.output_dir.join(&name))?, &quantize(view)?, PgmDepth::Sixteen)?;
        views.push(ViewEntry {
            file: name.clone(),
            origin: (vs.roi_origin.0 + r, vs.roi_origin.1 + c),
            height: view.height,
            width: view.width,
        });
        files.push(name);
    }
    write_pgm(
        fs::File::create(a.output_dir.join("global.pgm"))?,
        &quantize(&vs.global)?,
        PgmDepth::Sixteen,
    )?;
    files.push("global.pgm".into());
    let record = ViewsManifest {
        input_height: img.height,
        input_width: img.width,
        input_spacing_mm: img.spacing,
        spacing_mm: crate::views::TARGET_SPACING_MM,
        size: crate::views::TARGET_SIZE,
        threshold: out.preprocessed.raw_threshold,
        threshold_method: if threshold.is_some() { "fixed" } else { "otsu" },
        centroid: out.centroid,
        roi_origin: vs.roi_origin,
        roi: geometry.roi,
        window: geometry.window,
        stride: geometry.stride,
        intensity_offset: lo,
        intensity_scale: scale,
        views,
        global: ViewEntry {
            file: "global.pgm".into(),
            origin: vs.roi_origin,
            height: vs.global.height,
            width: vs.global.width,
        },
    };
    write_json(&a.output_dir, "geometry.json", &record)?;
    files.push("geometry.json".into());

    let config = serde_json::json!({
        "roi": a.roi,
        "window": a.window,
        "stride": a.stride,
        "threshold": threshold,
    });
    let mut m = RunManifest::new("extract-views", None, config)?;
    m.add_input(&a.input)?;
    let sidecar = PathBuf::from(format!("{}.spacing", a.input.display()));
    if sidecar.exists() {
        m.add_input(&sidecar)?;
    }
    finish(&mut m, &a.output_dir, &files)
}

#[derive(Debug, Serialize)]
struct PredictionLine<'a> {
    sample_id: &'a str,
    probs: &'a [f64],
    label: usize,
    uncertainty: f64,
    /// Uncertainty of every view network, locals then global.
    view_uncertainty: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct ViewMetrics {
    view: String,
    #[serde(flatten)]
    metrics: MetricsSummary,
}

#[derive(Debug, Serialize)]
struct TrainMetrics {
    #[serde(flatten)]
    combined: MetricsSummary,
    per_view: Vec<ViewMetrics>,
    bayes_combined: Option<f64>,
    final_loss: f64,
}

fn infer_classes(bytes: &[u8]) -> Result<usize> {
    let rows = read_view_table(bytes)?;
    let max = rows.iter().filter_map(|r| r.label).max().ok_or(Error::Empty("labels"))?;
    Ok((max + 1).max(2))
}

fn train(a: TrainArgs) -> Result<()> {
    let mut config = match &a.config {
        Some(p) => read_json::<ExperimentConfig>(p)?,
        None => ExperimentConfig::benchmark(0),
    };
    if let Some(seed) = a.seed {
        config = config.with_seed(seed);
    }
    if let Some(b) = a.bins {
        config.ece_bins = b;
    }
    let data = match &a.input {
        Some(p) => {
            let bytes = fs::read(p).map_err(|e| Error::io_at(p, e))?;
            let classes = match (a.classes, &config.synth) {
                (Some(c), _) => c,
                (None, Some(s)) => s.num_classes,
                (None, None) => infer_classes(&bytes)?,
            };
            // The table replaces generated data.
            config.synth = None;
            Some(read_features_csv(bytes.as_slice(), classes)?)
        }
        None => None,
    };
    let out = experiment::run(&config, data)?;
    fs::create_dir_all(&a.output_dir)?;
    let dir = &a.output_dir;

    write_json(dir, "model.json", &Checkpoint::new(out.model.clone()))?;
    fs::write(dir.join("history.csv"), out.report.history_csv(out.num_locals()))?;

    let lines: Vec<PredictionLine> = out
        .test
        .combined
        .iter()
        .enumerate()
        .map(|(i, r)| PredictionLine {
            sample_id: &out.test_ids[i],
            probs: r.probs().probs(),
            label: r.label(),
            uncertainty: r.uncertainty(),
            view_uncertainty: out.test.per_view.iter().map(|v| v[i].uncertainty()).collect(),
        })
        .collect();
    write_jsonl(dir, "predictions.jsonl", &lines)?;

    let names = view_names(out.num_locals(), out.per_view.len());
    let metrics = TrainMetrics {
        combined: out.combined.clone(),
        per_view: names
            .into_iter()
            .zip(out.per_view.iter().cloned())
            .map(|(view, metrics)| ViewMetrics { view, metrics })
            .collect(),
        bayes_combined: out.bayes_combined,
        final_loss: out.report.history.last().map_or(f64::NAN, |r| r.loss),
    };
    write_json(dir, "metrics.json", &metrics)?;
    println!("{}", serde_json::to_string(&metrics)?);

    let mut m = RunManifest::new("train", Some(config.train.seed), serde_json::to_value(&config)?)?;
    if let Some(p) = &a.config {
        m.add_input(p)?;
    }
    if let Some(p) = &a.input {
        m.add_input(p)?;
    }
    finish(
        &mut m,
        dir,
        &[
            "model.json".into(),
            "history.csv".into(),
            "predictions.jsonl".into(),
            "metrics.json".into(),
        ],
    )
}

fn view_names(num_locals: usize, total: usize) -> Vec<String> {
    (0..total)
        .map(|k| {
            if k < num_locals {
                format!("view_{}", k + 1)
            } else {
                crate::data::GLOBAL_VIEW_ID.to_string()
            }
        })
        .collect()
}

/// One line of opinion input to `fuse`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpinionLine {
    sample_id: String,
    view_id: String,
    beliefs: Vec<f64>,
    uncertainty: f64,
    #[serde(default)]
    label: Option<usize>,
}

/// One fused sample.
#[derive(Debug, Serialize)]
struct FusedLine {
    sample_id: String,
    beliefs: Vec<f64>,
    uncertainty: f64,
    probs: Vec<f64>,
    /// Normalization factor of each pairwise step.
    conflicts: Vec<f64>,
    /// View ids in fold order.
    order: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<usize>,
}

struct PendingSample {
    id: String,
    label: Option<usize>,
    views: Vec<(String, Opinion)>,
}

fn group_opinions(lines: Vec<OpinionLine>) -> Result<Vec<PendingSample>> {
    let mut out: Vec<PendingSample> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for l in lines {
        let op = Opinion::new(l.beliefs, l.uncertainty)
            .map_err(|e| Error::InvalidOpinion(format!("sample `{}` view `{}`: {e}", l.sample_id, l.view_id)))?;
        let slot = *index.entry(l.sample_id.clone()).or_insert_with(|| {
            out.push(PendingSample {
                id: l.sample_id.clone(),
                label: l.label,
                views: Vec::new(),
            });
            out.len() - 1
        });
        if out[slot].label != l.label {
            return Err(Error::Malformed(format!("sample `{}` has inconsistent labels", l.sample_id)));
        }
        out[slot].views.push((l.view_id, op));
    }
    Ok(out)
}

fn fuse(a: FuseArgs) -> Result<()> {
    let ext = a.input.extension().and_then(|e| e.to_str()).unwrap_or("");
    let samples = match ext {
        "csv" => group_by_sample(read_view_table(fs::File::open(&a.input).map_err(|e| Error::io_at(&a.input, e))?)?)?
            .into_iter()
            .map(|g| {
                let views = g
                    .rows
                    .into_iter()
                    .map(|r| Ok((r.view_id, evidence_to_opinion(&Evidence::new(r.values)?))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(PendingSample {
                    id: g.sample_id,
                    label: g.label,
                    views,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        "jsonl" | "json" | "ndjson" => group_opinions(read_jsonl(&a.input)?)?,
        other => {
            return Err(Error::Malformed(format!(
                "cannot tell the format of `{}` (extension `{other}`); use .jsonl or .csv",
                a.input.display()
            )))
        }
    };
    let mut lines = Vec::with_capacity(samples.len());
    for s in samples {
        let (ids, ops): (Vec<String>, Vec<Opinion>) = s.views.into_iter().unzip();
        let f = combine_many(&ops).map_err(|e| match e {
            Error::ClassMismatch { .. } | Error::TotalConflict(_) => {
                Error::Malformed(format!("sample `{}`: {e}", s.id))
            }
            e => e,
        })?;
        let probs = expected_probabilities(&f.combined.to_dirichlet());
        lines.push(FusedLine {
            sample_id: s.id,
            beliefs: f.combined.beliefs().to_vec(),
            uncertainty: f.combined.uncertainty(),
            probs: probs.probs().to_vec(),
            conflicts: f.conflicts,
            order: f.order.iter().map(|&i| ids[i].clone()).collect(),
            label: s.label,
        });
    }
    fs::create_dir_all(&a.output_dir)?;
    write_jsonl(&a.output_dir, "fused.jsonl", &lines)?;
    let mut m = RunManifest::new("fuse", None, serde_json::json!({ "format": ext }))?;
    m.add_input(&a.input)?;
    finish(&mut m, &a.output_dir, &["fused.jsonl".into()])
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let records: Vec<PredictionRecord> = read_jsonl(&a.input)?;
    let summary = summarize(&records, a.bins)?;
    fs::create_dir_all(&a.output_dir)?;
    write_json(&a.output_dir, "metrics.json", &summary)?;
    let mut csv = csv::Writer::from_path(a.output_dir.join("reliability.csv"))?;
    for b in reliability_bins(&records, a.bins)? {
        csv.serialize(b)?;
    }
    csv.flush()?;
    println!("{}", serde_json::to_string(&summary)?);
    let mut m = RunManifest::new("evaluate", None, serde_json::json!({ "bins": a.bins }))?;
    m.add_input(&a.input)?;
    finish(&mut m, &a.output_dir, &["metrics.json".into(), "reliability.csv".into()])
}

#[derive(Debug, Serialize)]
struct LsaSummary {
    tokens: usize,
    raw_dim: usize,
    dim: usize,
    temperature: f64,
    masked: bool,
    mean_row_entropy: f64,
    max_diagonal: f64,
}

fn lsa_demo(a: LsaDemoArgs) -> Result<()> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let pixels = (0..a.size * a.size).map(|_| rng.random_range(0.0..1.0)).collect();
    let img = ImageTensor::new(a.size, a.size, 1, pixels)?;
    let raw = spt_raw_tokens(&img, a.patch)?;
    let tokens = LinearMap::random(raw.dim, a.dim, &mut rng).apply(&raw)?;
    let mut params = LsaParams::random(a.dim, a.dim, a.dim, &mut rng);
    if let Some(t) = a.temperature {
        params = params.with_temperature(t);
    }
    params.mask_diagonal = !a.no_mask;
    let out = lsa_attention(&tokens, &params)?;
    let n = tokens.num_tokens;

    fs::create_dir_all(&a.output_dir)?;
    let mut w = csv::Writer::from_path(a.output_dir.join("attention.csv"))?;
    let mut header = vec!["query".to_string()];
    header.extend((0..n).map(|j| format!("key_{j}")));
    w.write_record(&header)?;
    for i in 0..n {
        let mut rec = vec![i.to_string()];
        rec.extend(out.attention[i * n..(i + 1) * n].iter().map(|p| p.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let summary = LsaSummary {
        tokens: n,
        raw_dim: raw.dim,
        dim: a.dim,
        temperature: params.temperature,
        masked: params.mask_diagonal,
        mean_row_entropy: mean_row_entropy(&out.attention, n),
        max_diagonal: (0..n).map(|i| out.attention[i * n + i]).fold(0.0, f64::max),
    };
    write_json(&a.output_dir, "summary.json", &summary)?;
    let config = serde_json::json!({
        "size": a.size,
        "patch": a.patch,
        "dim": a.dim,
        "temperature": params.temperature,
        "masked": params.mask_diagonal,
    });
    let mut m = RunManifest::new("lsa-demo", Some(a.seed), config)?;
    finish(&mut m, &a.output_dir, &["attention.csv".into(), "summary.json".into()])
}

fn verify(a: VerifyArgs) -> Result<()> {
    let m = RunManifest::read(&a.manifest)?;
    let dir = a.manifest.parent().unwrap_or(Path::new("."));
    let cwd = std::env::current_dir()?;
    m.verify_strict(dir, &cwd)?;
    println!(
        "{}",
        serde_json::json!({ "ok": true, "inputs": m.inputs.len(), "outputs": m.outputs.len() })
    );
    Ok(())
}
