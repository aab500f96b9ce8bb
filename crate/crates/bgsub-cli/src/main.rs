use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bgsub::bench::{time_apply, warmup, TimingReport};
use bgsub::io::{load_ground_truth, load_mask, write_mask, FilePattern, SequenceRef};
use bgsub::metrics::{accuracy, confusion, histogram, precision};
use bgsub::synth::{synth_frame, synth_sequence, SynthSpec};
use bgsub::{
    BackgroundSubtractor, Frame, Gmg, GmgParams, Mog, Mog2, Mog2Params, MogParams,
};

/// Environment variable capping internal pixel-parallel workers.
/// `bench` always forces a single worker so timings stay comparable.
const THREADS_ENV: &str = "BGSUB_THREADS";

#[derive(Parser)]
#[command(
    name = "bgsub",
    version,
    about = "Background subtraction pipeline: generate, segment, evaluate, benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic moving-rectangle sequence with exact ground truth
    Synth(SynthArgs),
    /// Run a subtractor over a sequence, keeping the masks of target frames
    Segment(SegmentArgs),
    /// Compare predicted masks against ground truth; emit metric and histogram CSVs
    Evaluate(EvaluateArgs),
    /// Time the apply call of each algorithm on a warmed-up model
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Gmg,
    Mog,
    Mog2,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Gmg => "gmg",
            Algorithm::Mog => "mog",
            Algorithm::Mog2 => "mog2",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for frame_*.pgm, gt_*.pgm and manifest.txt
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 320)]
    width: u32,
    #[arg(long, default_value_t = 240)]
    height: u32,
    #[arg(long, default_value_t = 300)]
    frames: u32,
    #[arg(long, default_value_t = 100)]
    bg_intensity: u8,
    #[arg(long, default_value_t = 200)]
    fg_intensity: u8,
    #[arg(long, default_value_t = 20)]
    rect_width: u32,
    #[arg(long, default_value_t = 20)]
    rect_height: u32,
    /// Horizontal rectangle speed in pixels per frame (wraps around)
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    velocity: i32,
    #[arg(long, default_value_t = 0)]
    start_x: u32,
    #[arg(long, default_value_t = 110)]
    start_y: u32,
    /// Gaussian background noise standard deviation (0 disables noise)
    #[arg(long, default_value_t = 3.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct AlgorithmArgs {
    /// Background model to run
    #[arg(long)]
    algo: Algorithm,
    /// Frames of model history (MOG, MOG2)
    #[arg(long, default_value_t = 200)]
    history: u32,
    /// Gaussian components per pixel (MOG)
    #[arg(long, default_value_t = 5)]
    nmixtures: usize,
    /// Cumulative-weight background threshold; defaults to 0.7 for MOG and
    /// 0.9 for MOG2
    #[arg(long)]
    background_ratio: Option<f64>,
    /// Accepted noise level (MOG); 0 selects the built-in default of 15
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Squared-Mahalanobis match threshold (MOG2)
    #[arg(long, default_value_t = 16.0)]
    var_threshold: f64,
    /// Label darkened background as shadow (MOG2)
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    detect_shadows: bool,
    /// Lower bound of the shadow intensity ratio (MOG2)
    #[arg(long, default_value_t = 0.5)]
    shadow_threshold: f64,
    /// Frames of the accumulation stage (GMG)
    #[arg(long, default_value_t = 120)]
    initialization_frames: u32,
    /// Posterior threshold for foreground (GMG)
    #[arg(long, default_value_t = 0.8)]
    decision_threshold: f64,
    /// Intensity quantization bins (GMG)
    #[arg(long, default_value_t = 16)]
    quantization_levels: u16,
    /// Histogram decay rate (GMG)
    #[arg(long, default_value_t = 0.025)]
    learning_rate: f64,
    /// Histogram entries per pixel before eviction (GMG)
    #[arg(long, default_value_t = 64)]
    max_features: usize,
    /// Median-filter radius; 0 disables the filter stage (GMG)
    #[arg(long, default_value_t = 7)]
    smoothing_radius: u32,
}

impl AlgorithmArgs {
    fn build(&self, width: u32, height: u32) -> Result<Box<dyn BackgroundSubtractor>> {
        let sub: Box<dyn BackgroundSubtractor> = match self.algo {
            Algorithm::Mog => Box::new(Mog::new(
                MogParams {
                    history: self.history,
                    nmixtures: self.nmixtures,
                    background_ratio: self.background_ratio.unwrap_or(0.7),
                    noise_sigma: self.noise_sigma,
                },
                width,
                height,
            )?),
            Algorithm::Mog2 => Box::new(Mog2::new(
                Mog2Params {
                    history: self.history,
                    var_threshold: self.var_threshold,
                    detect_shadows: self.detect_shadows,
                    background_ratio: self.background_ratio.unwrap_or(0.9),
                    shadow_threshold: self.shadow_threshold,
                },
                width,
                height,
            )?),
            Algorithm::Gmg => Box::new(Gmg::new(
                GmgParams {
                    initialization_frames: self.initialization_frames,
                    decision_threshold: self.decision_threshold,
                    quantization_levels: self.quantization_levels,
                    learning_rate: self.learning_rate,
                    max_features: self.max_features,
                    smoothing_radius: self.smoothing_radius,
                },
                width,
                height,
            )?),
        };
        Ok(sub)
    }

    fn manifest_lines(&self, out: &mut String) {
        let _ = writeln!(out, "algorithm={}", self.algo.name());
        match self.algo {
            Algorithm::Mog => {
                let _ = writeln!(out, "history={}", self.history);
                let _ = writeln!(out, "nmixtures={}", self.nmixtures);
                let _ = writeln!(
                    out,
                    "background_ratio={}",
                    self.background_ratio.unwrap_or(0.7)
                );
                let _ = writeln!(out, "noise_sigma={}", self.noise_sigma);
            }
            Algorithm::Mog2 => {
                let _ = writeln!(out, "history={}", self.history);
                let _ = writeln!(out, "var_threshold={}", self.var_threshold);
                let _ = writeln!(out, "detect_shadows={}", self.detect_shadows);
                let _ = writeln!(
                    out,
                    "background_ratio={}",
                    self.background_ratio.unwrap_or(0.9)
                );
                let _ = writeln!(out, "shadow_threshold={}", self.shadow_threshold);
            }
            Algorithm::Gmg => {
                let _ = writeln!(out, "initialization_frames={}", self.initialization_frames);
                let _ = writeln!(out, "decision_threshold={}", self.decision_threshold);
                let _ = writeln!(out, "quantization_levels={}", self.quantization_levels);
                let _ = writeln!(out, "learning_rate={}", self.learning_rate);
                let _ = writeln!(out, "max_features={}", self.max_features);
                let _ = writeln!(out, "smoothing_radius={}", self.smoothing_radius);
            }
        }
    }
}

#[derive(Args)]
struct SegmentArgs {
    #[command(flatten)]
    algorithm: AlgorithmArgs,
    /// Directory holding the input image sequence
    #[arg(long)]
    input: PathBuf,
    /// Input filename pattern with one zero-padded index field
    #[arg(long, default_value = "frame_%06d.pgm")]
    pattern: String,
    /// First sequence index
    #[arg(long, default_value_t = 0)]
    start: u32,
    /// Last sequence index (inclusive); scanned from disk when omitted
    #[arg(long)]
    end: Option<u32>,
    /// Frame indices whose masks are kept
    #[arg(long, required = true, value_delimiter = ',')]
    targets: Vec<u32>,
    /// Frames processed before each target to stabilise the model
    #[arg(long, default_value_t = 1000)]
    warmup_frames: u32,
    /// Clamp the lead-in to the sequence start instead of failing
    #[arg(long)]
    clamp: bool,
    /// Output directory for mask_*.EXT and run_manifest.txt
    #[arg(long)]
    out: PathBuf,
    /// Mask file format
    #[arg(long, default_value = "pgm")]
    format: MaskFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MaskFormat {
    Pgm,
    Png,
}

impl MaskFormat {
    fn extension(self) -> &'static str {
        match self {
            MaskFormat::Pgm => "pgm",
            MaskFormat::Png => "png",
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory of predicted masks
    #[arg(long)]
    pred: PathBuf,
    /// Directory of ground-truth masks
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value = "mask_%06d.pgm")]
    pred_pattern: String,
    #[arg(long, default_value = "gt_%06d.pgm")]
    gt_pattern: String,
    /// Histogram bin count over [0, 1]
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Output directory for the CSV reports; defaults to the prediction dir
    #[arg(long)]
    out: Option<PathBuf>,
    /// Value of the `video` CSV column; defaults to the prediction dir name
    #[arg(long)]
    label: Option<String>,
    /// Also write .json mirrors of every report
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Algorithms to time
    #[arg(long, value_delimiter = ',', default_values_t = vec![Algorithm::Gmg, Algorithm::Mog, Algorithm::Mog2])]
    algos: Vec<Algorithm>,
    /// Repetition counts; one timing row per algorithm and count
    #[arg(long, value_delimiter = ',', default_values_t = vec![100u32, 1000, 10000])]
    repetitions: Vec<u32>,
    /// Warm-up frames fed to each model before timing
    #[arg(long, default_value_t = 1000)]
    warmup: u32,
    /// Time a frame loaded from this file (warm-up cycles the same frame)
    #[arg(long, conflicts_with_all = ["input", "width", "height"])]
    frame: Option<PathBuf>,
    /// Cycle an image sequence for warm-up and time the frame that follows
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "frame_%06d.pgm")]
    pattern: String,
    #[arg(long, default_value_t = 0)]
    start: u32,
    #[arg(long)]
    end: Option<u32>,
    /// Width of the built-in synthetic source (used when no input is given)
    #[arg(long, default_value_t = 320)]
    width: u32,
    /// Height of the built-in synthetic source
    #[arg(long, default_value_t = 240)]
    height: u32,
    /// Output directory for timing.csv
    #[arg(long)]
    out: PathBuf,
    /// Also write timing.json
    #[arg(long)]
    json: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Synth(args) => cmd_synth(args),
        Command::Segment(args) => cmd_segment(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn workers_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .with_context(|| format!("{THREADS_ENV}={raw:?} is not a worker count"))?;
            Ok(n.max(1))
        }
        Err(_) => Ok(1),
    }
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        width: args.width,
        height: args.height,
        frames: args.frames,
        bg_intensity: args.bg_intensity,
        fg_intensity: args.fg_intensity,
        rect_width: args.rect_width,
        rect_height: args.rect_height,
        velocity: args.velocity,
        start_x: args.start_x,
        start_y: args.start_y,
        noise_sigma: args.noise_sigma,
        seed: args.seed,
    };
    let written = synth_sequence(&spec, &args.out)?;
    println!(
        "wrote {} frames and {} ground-truth masks to {}",
        written.frame_paths.len(),
        written.mask_paths.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_segment(args: SegmentArgs) -> Result<()> {
    let pattern = FilePattern::parse(&args.pattern)?;
    let sequence = match args.end {
        Some(end) => SequenceRef::open(&args.input, pattern, args.start, end)?,
        None => SequenceRef::scan(&args.input, pattern, args.start)?,
    };
    let workers = workers_from_env()?;

    let mut targets = args.targets.clone();
    targets.sort_unstable();
    targets.dedup();

    // Validate every target before touching the output directory.
    let mut plans = Vec::with_capacity(targets.len());
    for &target in &targets {
        if target < sequence.start() || target > sequence.end() {
            bail!(
                "target {target} is outside the sequence range {}..={}",
                sequence.start(),
                sequence.end()
            );
        }
        let wanted = i64::from(target) - i64::from(args.warmup_frames);
        let begin = if wanted < i64::from(sequence.start()) {
            if !args.clamp {
                bail!(
                    "insufficient lead-in for target {target}: warm-up would start at frame \
                     {wanted}, before the sequence start {} (pass --clamp to begin there)",
                    sequence.start()
                );
            }
            eprintln!(
                "warning: clamping warm-up for target {target} to sequence start {}",
                sequence.start()
            );
            sequence.start()
        } else {
            wanted as u32
        };
        plans.push((target, begin));
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mask_pattern = FilePattern::parse(&format!("mask_%06d.{}", args.format.extension()))?;

    let probe = sequence.load_frame(sequence.start())?;
    for &(target, begin) in &plans {
        let mut subtractor = args.algorithm.build(probe.width(), probe.height())?;
        subtractor.set_workers(workers);
        let mut kept = None;
        for index in begin..=target {
            let frame = sequence.load_frame(index)?;
            let mask = subtractor.apply(&frame)?;
            if index == target {
                kept = Some(mask);
            }
        }
        let mask = kept.expect("target within processed range");
        let path = args.out.join(mask_pattern.filename(target));
        write_mask(&mask, &path)?;
        println!(
            "target {target}: processed frames {begin}..={target}, wrote {}",
            path.display()
        );
    }

    let mut manifest = String::new();
    args.algorithm.manifest_lines(&mut manifest);
    let _ = writeln!(manifest, "input={}", args.input.display());
    let _ = writeln!(manifest, "pattern={}", sequence.pattern());
    let _ = writeln!(manifest, "sequence_start={}", sequence.start());
    let _ = writeln!(manifest, "sequence_end={}", sequence.end());
    let _ = writeln!(manifest, "warmup_frames={}", args.warmup_frames);
    let _ = writeln!(
        manifest,
        "targets={}",
        targets
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(manifest, "clamp={}", args.clamp);
    let _ = writeln!(manifest, "mask_pattern={mask_pattern}");
    let _ = writeln!(manifest, "workers={workers}");
    let manifest_path = args.out.join("run_manifest.txt");
    std::fs::write(&manifest_path, manifest)
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    Ok(())
}

/// `algorithm=` value from a segment run manifest, if one is present.
fn manifest_algorithm(dir: &Path) -> Option<String> {
    let text = std::fs::read_to_string(dir.join("run_manifest.txt")).ok()?;
    text.lines()
        .find_map(|line| line.strip_prefix("algorithm="))
        .map(str::to_string)
}

fn format_metric(value: f64) -> String {
    format!("{value}")
}

fn write_report(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn histogram_csv(values: &[f64], bins: usize) -> Result<String> {
    let report = histogram(values, bins)?;
    let mut csv = String::from("bin_start,bin_end,count,cumulative\n");
    for i in 0..report.counts.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            format_metric(report.bin_edges[i]),
            format_metric(report.bin_edges[i + 1]),
            report.counts[i],
            report.cumulative[i]
        );
    }
    Ok(csv)
}

fn histogram_json(values: &[f64], bins: usize) -> Result<serde_json::Value> {
    let report = histogram(values, bins)?;
    let rows: Vec<serde_json::Value> = (0..report.counts.len())
        .map(|i| {
            serde_json::json!({
                "bin_start": report.bin_edges[i],
                "bin_end": report.bin_edges[i + 1],
                "count": report.counts[i],
                "cumulative": report.cumulative[i],
            })
        })
        .collect();
    Ok(serde_json::Value::Array(rows))
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let pred_pattern = FilePattern::parse(&args.pred_pattern)?;
    let gt_pattern = FilePattern::parse(&args.gt_pattern)?;

    let mut indices: Vec<u32> = std::fs::read_dir(&args.pred)
        .with_context(|| format!("reading {}", args.pred.display()))?
        .filter_map(|entry| entry.ok())
        .filter_map(|entry| pred_pattern.index_of(&entry.file_name().to_string_lossy()))
        .collect();
    indices.sort_unstable();
    if indices.is_empty() {
        bail!(
            "no files matching {} found in {}",
            args.pred_pattern,
            args.pred.display()
        );
    }

    let label = args.label.clone().unwrap_or_else(|| {
        args.pred
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| args.pred.display().to_string())
    });
    let algorithm = manifest_algorithm(&args.pred).unwrap_or_else(|| "unknown".into());

    let mut csv = String::from("video,frame_index,algorithm,tp,fp,fn,tn,accuracy,precision\n");
    let mut json_rows = Vec::new();
    let mut accuracies = Vec::with_capacity(indices.len());
    let mut precisions = Vec::new();
    for &index in &indices {
        let pred = load_mask(args.pred.join(pred_pattern.filename(index)))?;
        let gt = load_ground_truth(args.gt.join(gt_pattern.filename(index)))?;
        let cm = confusion(&pred, &gt)?;
        let acc = accuracy(&cm)?;
        accuracies.push(acc);
        let prec = match precision(&cm) {
            Ok(p) => {
                precisions.push(p);
                Some(p)
            }
            Err(bgsub::Error::UndefinedPrecision) => None,
            Err(err) => return Err(err.into()),
        };
        let prec_text = prec.map_or_else(|| "undefined".to_string(), format_metric);
        let _ = writeln!(
            csv,
            "{label},{index},{algorithm},{},{},{},{},{},{prec_text}",
            cm.tp,
            cm.fp,
            cm.fn_,
            cm.tn,
            format_metric(acc)
        );
        json_rows.push(serde_json::json!({
            "video": label,
            "frame_index": index,
            "algorithm": algorithm,
            "tp": cm.tp,
            "fp": cm.fp,
            "fn": cm.fn_,
            "tn": cm.tn,
            "accuracy": acc,
            "precision": prec,
        }));
    }

    let out_dir = args.out.clone().unwrap_or_else(|| args.pred.clone());
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    write_report(&out_dir.join("metrics.csv"), &csv)?;
    write_report(
        &out_dir.join("accuracy_histogram.csv"),
        &histogram_csv(&accuracies, args.bins)?,
    )?;
    // Undefined precisions cannot be binned and are excluded from the report.
    write_report(
        &out_dir.join("precision_histogram.csv"),
        &histogram_csv(&precisions, args.bins)?,
    )?;
    if args.json {
        write_report(
            &out_dir.join("metrics.json"),
            &serde_json::to_string_pretty(&serde_json::Value::Array(json_rows))?,
        )?;
        write_report(
            &out_dir.join("accuracy_histogram.json"),
            &serde_json::to_string_pretty(&histogram_json(&accuracies, args.bins)?)?,
        )?;
        write_report(
            &out_dir.join("precision_histogram.json"),
            &serde_json::to_string_pretty(&histogram_json(&precisions, args.bins)?)?,
        )?;
    }
    println!(
        "evaluated {} mask pairs; reports in {}",
        indices.len(),
        out_dir.display()
    );
    Ok(())
}

fn default_bench_params(algo: Algorithm) -> AlgorithmArgs {
    AlgorithmArgs {
        algo,
        history: 200,
        nmixtures: 5,
        background_ratio: None,
        noise_sigma: 0.0,
        var_threshold: 16.0,
        detect_shadows: true,
        shadow_threshold: 0.5,
        initialization_frames: 120,
        decision_threshold: 0.8,
        quantization_levels: 16,
        learning_rate: 0.025,
        max_features: 64,
        smoothing_radius: 7,
    }
}

fn bench_source(args: &BenchArgs) -> Result<Vec<Frame>> {
    if let Some(path) = &args.frame {
        return Ok(vec![bgsub::io::load_frame(path)?]);
    }
    if let Some(dir) = &args.input {
        let pattern = FilePattern::parse(&args.pattern)?;
        let sequence = match args.end {
            Some(end) => SequenceRef::open(dir, pattern, args.start, end)?,
            None => SequenceRef::scan(dir, pattern, args.start)?,
        };
        return sequence
            .indices()
            .map(|i| sequence.load_frame(i).map_err(Into::into))
            .collect();
    }
    // Built-in synthetic source: noisy background with a moving rectangle.
    let spec = SynthSpec {
        width: args.width,
        height: args.height,
        start_y: args.height / 2,
        ..SynthSpec::default()
    };
    (0..spec.frames)
        .map(|t| synth_frame(&spec, t).map(|(frame, _)| frame).map_err(Into::into))
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let frames = bench_source(&args)?;
    let first = &frames[0];
    let timed_index = args.warmup as usize % frames.len();

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let mut reports: Vec<TimingReport> = Vec::new();
    for &algo in &args.algos {
        let mut subtractor =
            default_bench_params(algo).build(first.width(), first.height())?;
        // Timing compares per-op cost across algorithms; parallelism would
        // skew it, so a single worker is forced here.
        subtractor.set_workers(1);
        warmup(
            subtractor.as_mut(),
            &frames,
            args.warmup as usize,
            true,
        )?;
        for &repetitions in &args.repetitions {
            let report = time_apply(subtractor.as_mut(), &frames[timed_index], repetitions)?;
            println!(
                "{} x{}: mean {:.6} s/op, {:.1} fps",
                report.algorithm, report.repetitions, report.mean_seconds_per_op, report.fps
            );
            reports.push(report);
        }
    }

    let mut csv = String::from(
        "algorithm,width,height,warmup_frames,repetitions,total_seconds,mean_seconds_per_op,fps\n",
    );
    for r in &reports {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.algorithm,
            first.width(),
            first.height(),
            r.warmup_frames,
            r.repetitions,
            format_metric(r.total_seconds),
            format_metric(r.mean_seconds_per_op),
            format_metric(r.fps)
        );
    }
    write_report(&args.out.join("timing.csv"), &csv)?;
    if args.json {
        let rows: Vec<serde_json::Value> = reports
            .iter()
            .map(|r| {
                serde_json::json!({
                    "algorithm": r.algorithm,
                    "width": first.width(),
                    "height": first.height(),
                    "warmup_frames": r.warmup_frames,
                    "repetitions": r.repetitions,
                    "total_seconds": r.total_seconds,
                    "mean_seconds_per_op": r.mean_seconds_per_op,
                    "fps": r.fps,
                })
            })
            .collect();
        write_report(
            &args.out.join("timing.json"),
            &serde_json::to_string_pretty(&serde_json::Value::Array(rows))?,
        )?;
    }
    println!(
        "wrote {} timing rows to {}",
        reports.len(),
        args.out.join("timing.csv").display()
    );
    Ok(())
}
