//! Command-line experiments for single-ended HVdc fault location.
//!
//! Subcommands:
//!
//! * `generate` — synthesize current- and voltage-channel trace datasets.
//! * `run` — cross-validate one (pipeline config, model) pair on a dataset,
//!   emitting a metric report and a predicted-vs-actual scatter.
//! * `search` — sweep every valid preprocessing configuration and model over
//!   both channels and rank the results.
//! * `report` — regenerate summary tables from a stored rows CSV without
//!   re-evaluating anything.
//!
//! Every command writes a `manifest.json` alongside its outputs; re-running
//! the recorded invocation reproduces the outputs byte-for-byte.

mod manifest;
mod svg;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use faultloc::dataset::{
    generate_non_fault, generate_synthetic, read_csv, write_csv, Channel, SynthConfig,
    TraceDataset,
};
use faultloc::evaluate::{cross_validate_detailed, make_folds, PredictionRow};
use faultloc::preprocess::{FittedPipeline, PipelineConfig};
use faultloc::regress::{brr_fit, BrrHyper, RegressorParams};
use faultloc::search::{
    mae_by_model_csv, report_table, rows_from_csv, rows_to_csv, run_search, SearchRow, SearchSpace,
};
use manifest::RunManifest;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "faultloc",
    version,
    about = "Single-ended fault location experiments for multi-terminal HVdc networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic current- and voltage-channel datasets.
    Generate(GenerateArgs),
    /// Cross-validate one pipeline configuration and model on a dataset.
    Run(RunArgs),
    /// Exhaustively evaluate every valid (config, model, channel) triple.
    Search(SearchArgs),
    /// Regenerate tables and plot data from a stored rows CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Output directory for current.csv, voltage.csv, and manifest.json.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Distance between simulated fault positions, km.
    #[arg(long, default_value_t = 25.0)]
    distance_step: f64,
    #[arg(long, default_value_t = 1000.0)]
    line_length: f64,
    /// Fault resistance levels, ohms.
    #[arg(long, value_delimiter = ',', default_value = "0.01,50,200")]
    resistances: Vec<f64>,
    /// Current-limiting inductance levels, mH.
    #[arg(long, value_delimiter = ',', default_value = "1,200")]
    inductances: Vec<f64>,
    /// Additive Gaussian noise level; omit for noise-free traces.
    #[arg(long)]
    noise_snr_db: Option<f64>,
    #[arg(long, default_value_t = 0.02)]
    duration_s: f64,
    #[arg(long, default_value_t = 10_000.0)]
    sample_rate: f64,
    #[arg(long, default_value_t = 2.9e5)]
    wave_speed: f64,
    #[arg(long, default_value_t = 400.0)]
    surge_impedance: f64,
    #[arg(long, default_value_t = 640e3)]
    dc_voltage: f64,
    /// Line resistance, ohm/km.
    #[arg(long, default_value_t = 0.03206)]
    line_resistance: f64,
    /// Number of non-fault (load change) records to append per channel.
    #[arg(long, default_value_t = 0)]
    non_fault: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset CSV produced by `generate` (or following the same schema).
    #[arg(long)]
    data: PathBuf,
    /// Pipeline config file in flat key=value form; conflicts with the
    /// individual stage flags.
    #[arg(long, conflicts_with_all = ["lpf", "ds", "fft", "l2norm", "pca", "sqrt", "scaler"])]
    config: Option<PathBuf>,
    /// Low-pass cutoff, Hz.
    #[arg(long)]
    lpf: Option<f64>,
    /// Downsampling factor.
    #[arg(long, default_value_t = 1)]
    ds: usize,
    #[arg(long)]
    fft: bool,
    #[arg(long)]
    l2norm: bool,
    /// PCA component count.
    #[arg(long)]
    pca: Option<usize>,
    #[arg(long)]
    sqrt: bool,
    #[arg(long)]
    scaler: bool,
    /// Model: brr, knn, or dtree.
    #[arg(long, default_value = "brr")]
    model: String,
    #[arg(long, default_value_t = 4)]
    folds: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Confidence level for prediction intervals.
    #[arg(long, default_value_t = 0.9)]
    confidence: f64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Also render scatter.svg.
    #[arg(long)]
    svg: bool,
    /// Refit on the full dataset afterwards and save the model (brr only).
    #[arg(long)]
    save_model: Option<PathBuf>,
    /// Decision tree depth limit.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Decision tree minimum leaf size.
    #[arg(long)]
    min_leaf: Option<usize>,
    /// Neighbor count for knn.
    #[arg(long)]
    knn_k: Option<usize>,
}

#[derive(Args)]
struct SearchArgs {
    /// Current-channel dataset CSV.
    #[arg(long)]
    current: PathBuf,
    /// Voltage-channel dataset CSV.
    #[arg(long)]
    voltage: PathBuf,
    /// Search-space override file in flat key=value form.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Models to sweep (overrides the space file's list).
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    #[arg(long, default_value_t = 4)]
    folds: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Worker threads for the sweep; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// rows.csv produced by `search`.
    #[arg(long)]
    rows: PathBuf,
    /// Keep only rows of this channel (current or voltage).
    #[arg(long)]
    channel: Option<String>,
    /// Keep only rows of these models.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => cmd_generate(args),
        Command::Run(args) => cmd_run(args),
        Command::Search(args) => cmd_search(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let cfg = SynthConfig {
        line_length_km: args.line_length,
        distance_step_km: args.distance_step,
        dc_voltage_v: args.dc_voltage,
        line_resistance_ohm_per_km: args.line_resistance,
        wave_speed_km_per_s: args.wave_speed,
        surge_impedance_ohm: args.surge_impedance,
        noise_snr_db: args.noise_snr_db,
        trace_duration_s: args.duration_s,
        sample_rate_hz: args.sample_rate,
        random_seed: args.seed,
    };
    let mut grid = Vec::new();
    for &d in &cfg.distance_grid() {
        for &rf in &args.resistances {
            for &l in &args.inductances {
                grid.push((d, rf, l));
            }
        }
    }
    ensure_out_dir(&args.out_dir)?;
    for channel in [Channel::Current, Channel::Voltage] {
        let mut ds = generate_synthetic(&cfg, &grid, channel)?;
        if args.non_fault > 0 {
            let nf = generate_non_fault(&cfg, args.non_fault, channel)?;
            ds.records.extend(nf.records);
        }
        let path = args.out_dir.join(format!("{channel}.csv"));
        write_csv(&ds, &path)?;
        println!("wrote {} ({} records)", path.display(), ds.len());
    }
    RunManifest::new(
        "generate",
        Vec::new(),
        &args.out_dir,
        args.seed,
    )
    .write(&args.out_dir)?;
    Ok(())
}

fn load_config(args: &RunArgs) -> Result<PipelineConfig> {
    match &args.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(PipelineConfig::from_flat(&text)?)
        }
        None => Ok(PipelineConfig {
            lpf_cutoff_hz: args.lpf,
            ds_factor: args.ds,
            apply_fft: args.fft,
            apply_l2_norm: args.l2norm,
            pca_components: args.pca,
            apply_sqrt: args.sqrt,
            apply_std_scaler: args.scaler,
        }),
    }
}

fn scatter_csv(rows: &[PredictionRow]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("actual_km,predicted_km,lower_km,upper_km,fold\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.actual_km, r.predicted_km, r.lower_km, r.upper_km, r.fold
        );
    }
    out
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let ds = read_csv(&args.data)?;
    let faults = ds.faults_only();
    if faults.is_empty() {
        bail!("{}: no fault records to evaluate", args.data.display());
    }
    let config = load_config(&args)?;
    config
        .validate(faults.sample_rate_hz, faults.n_samples())
        .context("the requested pipeline configuration is invalid")?;
    let params = RegressorParams {
        knn_k: args.knn_k,
        tree_max_depth: args.max_depth,
        tree_min_leaf: args.min_leaf,
    };
    let plan = make_folds(faults.len(), args.folds, args.seed)?;
    let (report, predictions) = cross_validate_detailed(
        &faults,
        &config,
        &args.model,
        &params,
        &plan,
        args.confidence,
    )?;

    ensure_out_dir(&args.out_dir)?;
    write_file(&args.out_dir.join("report.json"), &report.to_json())?;
    write_file(&args.out_dir.join("scatter.csv"), &scatter_csv(&predictions))?;
    if args.svg {
        let points: Vec<(f64, f64)> = predictions
            .iter()
            .map(|r| (r.actual_km, r.predicted_km))
            .collect();
        write_file(&args.out_dir.join("scatter.svg"), &svg::scatter_svg(&points))?;
    }
    if let Some(model_path) = &args.save_model {
        save_full_fit_model(&args, &faults, &config, model_path)?;
    }
    RunManifest::new(
        "run",
        vec![args.data.display().to_string()],
        &args.out_dir,
        args.seed,
    )
    .with_config(config.to_flat())
    .write(&args.out_dir)?;

    let m = &report.averaged;
    println!(
        "{} on {} ({} folds, seed {}): MAPE {:.2}  MAE {:.2} km  PRR {:.4}  PP {:.4}",
        args.model,
        faults.channel,
        args.folds,
        args.seed,
        m.mape,
        m.mae,
        m.prr,
        m.pp
    );
    Ok(())
}

/// Fits the pipeline and a BRR model on the full dataset and persists it.
fn save_full_fit_model(
    args: &RunArgs,
    faults: &TraceDataset,
    config: &PipelineConfig,
    path: &Path,
) -> Result<()> {
    if args.model != "brr" {
        bail!("--save-model supports only the brr model, got '{}'", args.model);
    }
    let matrix = faults.to_matrix();
    let (_, transformed) = FittedPipeline::fit(config, &matrix, faults.sample_rate_hz)?;
    let model = brr_fit(&transformed, &faults.distances(), BrrHyper::default())?;
    write_file(path, &model.to_text())?;
    println!("saved full-fit brr model to {}", path.display());
    Ok(())
}

fn cmd_search(args: SearchArgs) -> Result<()> {
    let current = read_csv(&args.current)?;
    let voltage = read_csv(&args.voltage)?;
    let mut space = match &args.space {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SearchSpace::from_flat(&text)?
        }
        None => SearchSpace::default(),
    };
    if let Some(models) = &args.models {
        space.models = models.clone();
    }
    space.seed = args.seed;

    let outcome = match args.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .context("building the worker pool")?
            .install(|| run_search(&current, &voltage, &space, args.folds)),
        None => run_search(&current, &voltage, &space, args.folds),
    }?;

    ensure_out_dir(&args.out_dir)?;
    write_file(&args.out_dir.join("rows.csv"), &rows_to_csv(&outcome.rows))?;
    write_file(&args.out_dir.join("summary.json"), &outcome.summary_json())?;
    let (table_text, table_csv) = report_table(&outcome.rows)?;
    write_file(&args.out_dir.join("table.txt"), &table_text)?;
    write_file(&args.out_dir.join("table.csv"), &table_csv)?;
    write_file(
        &args.out_dir.join("mae_by_model.csv"),
        &mae_by_model_csv(&outcome.rows),
    )?;
    RunManifest::new(
        "search",
        vec![
            args.current.display().to_string(),
            args.voltage.display().to_string(),
        ],
        &args.out_dir,
        args.seed,
    )
    .with_space(space.to_flat())
    .write(&args.out_dir)?;

    println!(
        "evaluated {} rows ({} skipped as invalid, {} failed)",
        outcome.rows.len(),
        outcome.skipped_invalid,
        outcome.failed.len()
    );
    print!("{table_text}");
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.rows)
        .with_context(|| format!("reading {}", args.rows.display()))?;
    let mut rows = rows_from_csv(&text)?;
    if let Some(channel) = &args.channel {
        let channel: Channel = channel
            .parse()
            .map_err(|e: String| anyhow::anyhow!("--channel: {e}"))?;
        rows.retain(|r: &SearchRow| r.channel == channel);
    }
    if let Some(models) = &args.models {
        rows.retain(|r| models.contains(&r.model));
    }
    if rows.is_empty() {
        bail!("no rows matched the requested filters");
    }

    ensure_out_dir(&args.out_dir)?;
    let (table_text, table_csv) = report_table(&rows)?;
    write_file(&args.out_dir.join("table.txt"), &table_text)?;
    write_file(&args.out_dir.join("table.csv"), &table_csv)?;
    write_file(&args.out_dir.join("mae_by_model.csv"), &mae_by_model_csv(&rows))?;
    let seed = rows.first().map_or(0, |r| r.seed);
    RunManifest::new(
        "report",
        vec![args.rows.display().to_string()],
        &args.out_dir,
        seed,
    )
    .write(&args.out_dir)?;
    print!("{table_text}");
    Ok(())
}
