//! Exhaustive preprocessing/model search with cross-validated scoring.
//!
//! The search space is the Cartesian product of per-stage option lists. A
//! combination is skipped (counted, not evaluated) when it breaks a validity
//! rule: double normalization, a cutoff at or above the post-downsampling
//! Nyquist frequency, or more PCA components than the preceding stages
//! produce. Every remaining (channel, config, model) triple is scored by
//! k-fold cross-validation with a fold plan shared per channel, then ranked
//! by fold-averaged MAE.
//!
//! With the `parallel` feature the sweep is a rayon map over independent
//! triples; [`run_search_serial`] is the always-available sequential
//! reference and produces identical outcomes.

use crate::dataset::{Channel, TraceDataset};
use crate::evaluate::{cross_validate, make_folds, EvalError, FoldPlan, Metrics};
use crate::preprocess::{PipelineConfig, PipelineError};
use crate::regress::KNOWN_MODELS;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("search produced no successful rows (first failure: {0})")]
    NoSuccessfulRows(String),
    #[error("malformed rows csv: line {line}: {message}")]
    MalformedRows { line: usize, message: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Option lists spanning the search space, in stage-application order.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub lpf_options: Vec<Option<f64>>,
    pub ds_options: Vec<usize>,
    pub fft_options: Vec<bool>,
    pub l2norm_options: Vec<bool>,
    pub sqrt_options: Vec<bool>,
    pub scaler_options: Vec<bool>,
    pub pca_options: Vec<Option<usize>>,
    pub models: Vec<String>,
    pub seed: u64,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            lpf_options: [500.0, 300.0, 250.0, 200.0, 150.0, 100.0, 50.0]
                .into_iter()
                .map(Some)
                .collect(),
            ds_options: vec![1, 3, 5, 10, 100],
            fft_options: vec![true, false],
            l2norm_options: vec![true, false],
            sqrt_options: vec![true, false],
            scaler_options: vec![true, false],
            pca_options: vec![None, Some(4), Some(8), Some(12), Some(16), Some(28)],
            models: KNOWN_MODELS.iter().map(|m| m.to_string()).collect(),
            seed: 0,
        }
    }
}

impl SearchSpace {
    /// Size of the Cartesian product over the config axes (models and
    /// channels excluded).
    pub fn config_product_size(&self) -> usize {
        self.lpf_options.len()
            * self.ds_options.len()
            * self.fft_options.len()
            * self.l2norm_options.len()
            * self.sqrt_options.len()
            * self.scaler_options.len()
            * self.pca_options.len()
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let lists = [
            ("lpf", self.lpf_options.len()),
            ("ds", self.ds_options.len()),
            ("fft", self.fft_options.len()),
            ("l2norm", self.l2norm_options.len()),
            ("sqrt", self.sqrt_options.len()),
            ("scaler", self.scaler_options.len()),
            ("pca", self.pca_options.len()),
            ("models", self.models.len()),
        ];
        for (name, len) in lists {
            if len == 0 {
                return Err(SearchError::InvalidSpace(format!(
                    "option list '{name}' is empty"
                )));
            }
        }
        for model in &self.models {
            if !KNOWN_MODELS.contains(&model.as_str()) {
                return Err(SearchError::InvalidSpace(format!(
                    "unknown model '{model}', expected one of: {}",
                    KNOWN_MODELS.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Flat text form mirroring [`PipelineConfig::to_flat`]: one
    /// comma-separated option list per line, `none` for absent optionals.
    pub fn to_flat(&self) -> String {
        let join_f = |v: &[Option<f64>]| {
            v.iter()
                .map(|o| o.map_or("none".to_string(), |x| x.to_string()))
                .collect::<Vec<_>>()
                .join(",")
        };
        let join_u = |v: &[Option<usize>]| {
            v.iter()
                .map(|o| o.map_or("none".to_string(), |x| x.to_string()))
                .collect::<Vec<_>>()
                .join(",")
        };
        let join_b = |v: &[bool]| {
            v.iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let join_n = |v: &[usize]| {
            v.iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "lpf={}\nds={}\nfft={}\nl2norm={}\nsqrt={}\nscaler={}\npca={}\nmodels={}\n",
            join_f(&self.lpf_options),
            join_n(&self.ds_options),
            join_b(&self.fft_options),
            join_b(&self.l2norm_options),
            join_b(&self.sqrt_options),
            join_b(&self.scaler_options),
            join_u(&self.pca_options),
            self.models.join(","),
        )
    }

    /// Parses the flat form; keys absent from the text keep their defaults.
    pub fn from_flat(text: &str) -> Result<Self, SearchError> {
        let mut space = SearchSpace::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SearchError::InvalidSpace(format!(
                    "line {}: expected key=value, got '{line}'",
                    lineno + 1
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let items: Vec<&str> = value.split(',').map(|s| s.trim()).collect();
            let bad = |what: &str, item: &str| {
                SearchError::InvalidSpace(format!("{key}: invalid {what} '{item}'"))
            };
            match key {
                "lpf" => {
                    space.lpf_options = items
                        .iter()
                        .map(|s| {
                            if *s == "none" {
                                Ok(None)
                            } else {
                                s.parse().map(Some).map_err(|_| bad("number", s))
                            }
                        })
                        .collect::<Result<_, _>>()?;
                }
                "ds" => {
                    space.ds_options = items
                        .iter()
                        .map(|s| s.parse().map_err(|_| bad("integer", s)))
                        .collect::<Result<_, _>>()?;
                }
                "fft" | "l2norm" | "sqrt" | "scaler" => {
                    let parsed: Vec<bool> = items
                        .iter()
                        .map(|s| s.parse().map_err(|_| bad("boolean", s)))
                        .collect::<Result<_, _>>()?;
                    match key {
                        "fft" => space.fft_options = parsed,
                        "l2norm" => space.l2norm_options = parsed,
                        "sqrt" => space.sqrt_options = parsed,
                        _ => space.scaler_options = parsed,
                    }
                }
                "pca" => {
                    space.pca_options = items
                        .iter()
                        .map(|s| {
                            if *s == "none" {
                                Ok(None)
                            } else {
                                s.parse().map(Some).map_err(|_| bad("integer", s))
                            }
                        })
                        .collect::<Result<_, _>>()?;
                }
                "models" => {
                    space.models = items.iter().map(|s| s.to_string()).collect();
                }
                other => {
                    return Err(SearchError::InvalidSpace(format!(
                        "unknown space key '{other}'"
                    )));
                }
            }
        }
        space.validate()?;
        Ok(space)
    }
}

/// Enumerates every valid pipeline configuration for traces of `input_len`
/// samples at `sample_rate_hz`, in lexicographic order over the option lists
/// as declared (lpf, ds, fft, l2norm, sqrt, scaler, pca).
pub fn enumerate_valid(
    space: &SearchSpace,
    sample_rate_hz: f64,
    input_len: usize,
) -> Result<Vec<PipelineConfig>, SearchError> {
    if input_len < 2 {
        return Err(SearchError::InvalidInput(format!(
            "input length {input_len} is too short"
        )));
    }
    space.validate()?;
    let mut valid = Vec::new();
    for &lpf in &space.lpf_options {
        for &ds in &space.ds_options {
            for &fft in &space.fft_options {
                for &l2 in &space.l2norm_options {
                    for &sqrt in &space.sqrt_options {
                        for &scaler in &space.scaler_options {
                            for &pca in &space.pca_options {
                                let config = PipelineConfig {
                                    lpf_cutoff_hz: lpf,
                                    ds_factor: ds,
                                    apply_fft: fft,
                                    apply_l2_norm: l2,
                                    pca_components: pca,
                                    apply_sqrt: sqrt,
                                    apply_std_scaler: scaler,
                                };
                                if config.validate(sample_rate_hz, input_len).is_ok() {
                                    valid.push(config);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(valid)
}

/// One scored (channel, config, model) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRow {
    pub channel: Channel,
    pub config: PipelineConfig,
    pub model: String,
    pub metrics: Metrics,
    pub seed: u64,
}

/// An evaluation that failed at runtime; kept so one pathological
/// combination cannot abort the sweep.
#[derive(Debug, Clone)]
pub struct FailedEval {
    pub channel: Channel,
    pub config: PipelineConfig,
    pub model: String,
    pub message: String,
}

/// Ranked outcome of a full sweep.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// All successful evaluations, sorted by averaged MAE ascending with
    /// ties broken by (model, config serialization).
    pub rows: Vec<SearchRow>,
    /// Minimum-MAE row per model, across channels.
    pub best_per_model: BTreeMap<String, SearchRow>,
    /// Statically excluded (config x model x channel) combinations.
    pub skipped_invalid: usize,
    /// Evaluations that failed at runtime (normally empty).
    pub failed: Vec<FailedEval>,
    pub k_folds: usize,
    pub seed: u64,
}

struct ChannelData {
    dataset: TraceDataset,
    plan: FoldPlan,
    configs: Vec<PipelineConfig>,
}

struct Task<'a> {
    data: &'a ChannelData,
    config: &'a PipelineConfig,
    model: &'a str,
}

fn prepare_channels(
    datasets: &[&TraceDataset],
    space: &SearchSpace,
    k_folds: usize,
) -> Result<(Vec<ChannelData>, usize), SearchError> {
    let mut channels = Vec::with_capacity(datasets.len());
    let mut skipped = 0usize;
    for ds in datasets {
        let faults = ds.faults_only();
        if faults.len() < k_folds {
            return Err(SearchError::InvalidInput(format!(
                "{} channel has {} fault records, fewer than {k_folds} folds",
                ds.channel,
                faults.len()
            )));
        }
        faults
            .validate_rectangular()
            .map_err(|e| SearchError::InvalidInput(e.to_string()))?;
        let plan = make_folds(faults.len(), k_folds, space.seed)?;
        let configs = enumerate_valid(space, faults.sample_rate_hz, faults.n_samples())?;
        skipped += (space.config_product_size() - configs.len()) * space.models.len();
        channels.push(ChannelData {
            dataset: faults,
            plan,
            configs,
        });
    }
    Ok((channels, skipped))
}

fn evaluate_task(task: &Task<'_>) -> Result<SearchRow, FailedEval> {
    match cross_validate(&task.data.dataset, task.config, task.model, &task.data.plan) {
        Ok(report) => Ok(SearchRow {
            channel: task.data.dataset.channel,
            config: task.config.clone(),
            model: task.model.to_string(),
            metrics: report.averaged,
            seed: task.data.plan.seed,
        }),
        Err(e) => Err(FailedEval {
            channel: task.data.dataset.channel,
            config: task.config.clone(),
            model: task.model.to_string(),
            message: e.to_string(),
        }),
    }
}

fn assemble(
    results: Vec<Result<SearchRow, FailedEval>>,
    skipped_invalid: usize,
    k_folds: usize,
    seed: u64,
) -> Result<SearchOutcome, SearchError> {
    let mut rows = Vec::with_capacity(results.len());
    let mut failed = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(f) => failed.push(f),
        }
    }
    if rows.is_empty() {
        let first = failed
            .first()
            .map(|f| f.message.clone())
            .unwrap_or_else(|| "no evaluations were scheduled".to_string());
        return Err(SearchError::NoSuccessfulRows(first));
    }
    rows.sort_by(|a, b| {
        a.metrics
            .mae
            .total_cmp(&b.metrics.mae)
            .then_with(|| a.model.cmp(&b.model))
            .then_with(|| a.config.to_flat().cmp(&b.config.to_flat()))
            .then_with(|| a.channel.as_str().cmp(b.channel.as_str()))
    });
    let mut best_per_model = BTreeMap::new();
    for row in &rows {
        best_per_model
            .entry(row.model.clone())
            .or_insert_with(|| row.clone());
    }
    Ok(SearchOutcome {
        rows,
        best_per_model,
        skipped_invalid,
        failed,
        k_folds,
        seed,
    })
}

/// Sweeps every valid (channel, config, model) triple over both datasets.
/// With the `parallel` feature the evaluations run as a rayon parallel map
/// (honoring the ambient thread pool); the outcome is identical regardless
/// of execution order.
pub fn run_search(
    ds_current: &TraceDataset,
    ds_voltage: &TraceDataset,
    space: &SearchSpace,
    k_folds: usize,
) -> Result<SearchOutcome, SearchError> {
    if k_folds < 2 {
        return Err(SearchError::InvalidInput(format!(
            "k_folds must be at least 2, got {k_folds}"
        )));
    }
    space.validate()?;
    let (channels, skipped) = prepare_channels(&[ds_current, ds_voltage], space, k_folds)?;
    let tasks: Vec<Task<'_>> = channels
        .iter()
        .flat_map(|data| {
            data.configs.iter().flat_map(move |config| {
                space.models.iter().map(move |model| Task {
                    data,
                    config,
                    model,
                })
            })
        })
        .collect();

    #[cfg(feature = "parallel")]
    let results: Vec<Result<SearchRow, FailedEval>> =
        tasks.par_iter().map(evaluate_task).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<SearchRow, FailedEval>> = tasks.iter().map(evaluate_task).collect();

    assemble(results, skipped, k_folds, space.seed)
}

/// Sequential reference implementation of [`run_search`].
pub fn run_search_serial(
    ds_current: &TraceDataset,
    ds_voltage: &TraceDataset,
    space: &SearchSpace,
    k_folds: usize,
) -> Result<SearchOutcome, SearchError> {
    if k_folds < 2 {
        return Err(SearchError::InvalidInput(format!(
            "k_folds must be at least 2, got {k_folds}"
        )));
    }
    space.validate()?;
    let (channels, skipped) = prepare_channels(&[ds_current, ds_voltage], space, k_folds)?;
    let results: Vec<Result<SearchRow, FailedEval>> = channels
        .iter()
        .flat_map(|data| {
            data.configs.iter().flat_map(move |config| {
                space.models.iter().map(move |model| {
                    evaluate_task(&Task {
                        data,
                        config,
                        model,
                    })
                })
            })
        })
        .collect();
    assemble(results, skipped, k_folds, space.seed)
}

const ROWS_HEADER: &str = "channel,lpf_cutoff_hz,ds_factor,apply_fft,apply_l2_norm,\
pca_components,apply_sqrt,apply_std_scaler,model,mape,mae,prr,pp,seed";

/// Serializes rows as CSV, one line per evaluation.
pub fn rows_to_csv(rows: &[SearchRow]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from(ROWS_HEADER);
    out.push('\n');
    for r in rows {
        let lpf = r
            .config
            .lpf_cutoff_hz
            .map_or("none".to_string(), |v| v.to_string());
        let pca = r
            .config
            .pca_components
            .map_or("none".to_string(), |v| v.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.channel,
            lpf,
            r.config.ds_factor,
            r.config.apply_fft,
            r.config.apply_l2_norm,
            pca,
            r.config.apply_sqrt,
            r.config.apply_std_scaler,
            r.model,
            r.metrics.mape,
            r.metrics.mae,
            r.metrics.prr,
            r.metrics.pp,
            r.seed,
        );
    }
    out
}

/// Parses the CSV produced by [`rows_to_csv`].
pub fn rows_from_csv(text: &str) -> Result<Vec<SearchRow>, SearchError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(SearchError::MalformedRows {
            line: 1,
            message: "missing header".into(),
        })?;
    if header.trim() != ROWS_HEADER {
        return Err(SearchError::MalformedRows {
            line: 1,
            message: format!("unexpected header '{header}'"),
        });
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = raw.split(',').collect();
        if cells.len() != 14 {
            return Err(SearchError::MalformedRows {
                line,
                message: format!("expected 14 columns, found {}", cells.len()),
            });
        }
        let bad = |col: &str, v: &str| SearchError::MalformedRows {
            line,
            message: format!("column {col}: invalid value '{v}'"),
        };
        let channel: Channel = cells[0].parse().map_err(|_| bad("channel", cells[0]))?;
        let lpf = if cells[1] == "none" {
            None
        } else {
            Some(cells[1].parse().map_err(|_| bad("lpf_cutoff_hz", cells[1]))?)
        };
        let pca = if cells[5] == "none" {
            None
        } else {
            Some(cells[5].parse().map_err(|_| bad("pca_components", cells[5]))?)
        };
        let parse_f = |col: usize, name: &str| -> Result<f64, SearchError> {
            cells[col].parse().map_err(|_| bad(name, cells[col]))
        };
        rows.push(SearchRow {
            channel,
            config: PipelineConfig {
                lpf_cutoff_hz: lpf,
                ds_factor: cells[2].parse().map_err(|_| bad("ds_factor", cells[2]))?,
                apply_fft: cells[3].parse().map_err(|_| bad("apply_fft", cells[3]))?,
                apply_l2_norm: cells[4]
                    .parse()
                    .map_err(|_| bad("apply_l2_norm", cells[4]))?,
                pca_components: pca,
                apply_sqrt: cells[6].parse().map_err(|_| bad("apply_sqrt", cells[6]))?,
                apply_std_scaler: cells[7]
                    .parse()
                    .map_err(|_| bad("apply_std_scaler", cells[7]))?,
            },
            model: cells[8].to_string(),
            metrics: Metrics {
                mape: parse_f(9, "mape")?,
                mae: parse_f(10, "mae")?,
                prr: parse_f(11, "prr")?,
                pp: parse_f(12, "pp")?,
            },
            seed: cells[13].parse().map_err(|_| bad("seed", cells[13]))?,
        });
    }
    Ok(rows)
}

/// Minimum-MAE row per model over the given rows.
pub fn best_rows_per_model(rows: &[SearchRow]) -> BTreeMap<String, SearchRow> {
    let mut best: BTreeMap<String, SearchRow> = BTreeMap::new();
    for row in rows {
        match best.get(&row.model) {
            Some(b) if row_rank(b) <= row_rank(row) => {}
            _ => {
                best.insert(row.model.clone(), row.clone());
            }
        }
    }
    best
}

fn row_rank(r: &SearchRow) -> (f64, String, String) {
    (r.metrics.mae, r.model.clone(), r.config.to_flat())
}

/// Per-model summary table of the best (minimum averaged MAE) configuration,
/// as aligned text and as CSV.
pub fn report_table(rows: &[SearchRow]) -> Result<(String, String), SearchError> {
    if rows.is_empty() {
        return Err(SearchError::InvalidInput("no rows to report".into()));
    }
    let best = best_rows_per_model(rows);
    let mut text = format!(
        "{:<8} {:>10} {:>10} {:>10} {:>10}  {}\n",
        "model", "MAPE", "MAE", "PRR", "PP", "channel"
    );
    let mut csv = String::from("model,mape,mae,prr,pp,channel\n");
    for (model, row) in &best {
        use std::fmt::Write as _;
        let m = &row.metrics;
        let _ = writeln!(
            text,
            "{model:<8} {:>10.2} {:>10.2} {:>10.4} {:>10.4}  {}",
            m.mape, m.mae, m.prr, m.pp, row.channel
        );
        let _ = writeln!(
            csv,
            "{model},{},{},{},{},{}",
            m.mape, m.mae, m.prr, m.pp, row.channel
        );
    }
    Ok((text, csv))
}

/// Per-row MAE listing grouped by model, the data behind a box plot of MAE
/// distributions per model.
pub fn mae_by_model_csv(rows: &[SearchRow]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("model,channel,mae\n");
    let mut sorted: Vec<&SearchRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.model
            .cmp(&b.model)
            .then_with(|| a.channel.as_str().cmp(b.channel.as_str()))
            .then_with(|| a.metrics.mae.total_cmp(&b.metrics.mae))
    });
    for r in sorted {
        let _ = writeln!(out, "{},{},{}", r.model, r.channel, r.metrics.mae);
    }
    out
}

#[derive(Serialize)]
struct BestRowJson {
    channel: String,
    config: String,
    mape: f64,
    mae: f64,
    prr: f64,
    pp: f64,
}

#[derive(Serialize)]
struct SummaryJson {
    seed: u64,
    k_folds: usize,
    rows: usize,
    skipped_invalid: usize,
    failed: usize,
    model_defaults: BTreeMap<String, String>,
    best_per_model: BTreeMap<String, BestRowJson>,
}

impl SearchOutcome {
    /// Machine-readable summary with the best row per model.
    pub fn summary_json(&self) -> String {
        use crate::regress::{DEFAULT_KNN_K, DEFAULT_TREE_MAX_DEPTH, DEFAULT_TREE_MIN_LEAF};
        let mut model_defaults = BTreeMap::new();
        model_defaults.insert(
            "brr".to_string(),
            "evidence(max_iter=300, tol=1e-6)".to_string(),
        );
        model_defaults.insert("knn".to_string(), format!("k={DEFAULT_KNN_K}"));
        model_defaults.insert(
            "dtree".to_string(),
            format!("max_depth={DEFAULT_TREE_MAX_DEPTH}, min_leaf={DEFAULT_TREE_MIN_LEAF}"),
        );
        let best_per_model = self
            .best_per_model
            .iter()
            .map(|(model, row)| {
                (
                    model.clone(),
                    BestRowJson {
                        channel: row.channel.to_string(),
                        config: row.config.to_flat(),
                        mape: row.metrics.mape,
                        mae: row.metrics.mae,
                        prr: row.metrics.prr,
                        pp: row.metrics.pp,
                    },
                )
            })
            .collect();
        serde_json::to_string_pretty(&SummaryJson {
            seed: self.seed,
            k_folds: self.k_folds,
            rows: self.rows.len(),
            skipped_invalid: self.skipped_invalid,
            failed: self.failed.len(),
            model_defaults,
            best_per_model,
        })
        .expect("summary serialization cannot fail")
            + "\n"
    }
}
