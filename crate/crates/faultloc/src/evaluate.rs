//! Goodness-of-fit measures and k-fold cross-validation.
//!
//! Four measures are reported per evaluation: mean absolute percentage
//! error, mean absolute error in kilometers, predictive ratio risk (squared
//! relative errors normalized by the prediction, penalizing underestimation
//! more heavily), and predictive power (normalized by the actual value,
//! penalizing overestimation). Cross-validation fits the preprocessing
//! pipeline and the model on the training folds only; no fitted state
//! crosses folds.

use crate::dataset::{EventKind, TraceDataset};
use crate::preprocess::{FittedPipeline, PipelineConfig, PipelineError};
use crate::regress::{make_regressor_with, RegressorError, RegressorParams};
use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("metric domain error: {0}")]
    MetricDomain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid fold plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Regressor(#[from] RegressorError),
}

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<(), EvalError> {
    if actual.is_empty() {
        return Err(EvalError::InvalidInput("empty metric input".into()));
    }
    if actual.len() != predicted.len() {
        return Err(EvalError::InvalidInput(format!(
            "{} actual values but {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    Ok(())
}

/// Mean absolute percentage error: `(1/n) sum |(pred - actual) / actual| * 100`.
/// Errors if any actual value is zero — fault distances start well above
/// zero, so a zero signals mislabeled data.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    check_pair(actual, predicted)?;
    let mut acc = 0.0;
    for (i, (&a, &p)) in actual.iter().zip(predicted).enumerate() {
        if a == 0.0 {
            return Err(EvalError::MetricDomain(format!(
                "actual value at index {i} is zero; MAPE is undefined"
            )));
        }
        acc += ((p - a) / a).abs();
    }
    Ok(acc / actual.len() as f64 * 100.0)
}

/// Mean absolute error: `sum |pred - actual| / n`.
pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    check_pair(actual, predicted)?;
    Ok(actual
        .iter()
        .zip(predicted)
        .map(|(&a, &p)| (p - a).abs())
        .sum::<f64>()
        / actual.len() as f64)
}

/// Predictive ratio risk: `sum ((pred - actual) / pred)^2` over all points.
/// Errors if any prediction is zero.
pub fn prr(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    check_pair(actual, predicted)?;
    let mut acc = 0.0;
    for (i, (&a, &p)) in actual.iter().zip(predicted).enumerate() {
        if p == 0.0 {
            return Err(EvalError::MetricDomain(format!(
                "prediction at index {i} is zero; PRR is undefined"
            )));
        }
        acc += ((p - a) / p).powi(2);
    }
    Ok(acc)
}

/// Predictive power: `sum ((pred - actual) / actual)^2` over all points.
/// Errors if any actual value is zero.
pub fn pp(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    check_pair(actual, predicted)?;
    let mut acc = 0.0;
    for (i, (&a, &p)) in actual.iter().zip(predicted).enumerate() {
        if a == 0.0 {
            return Err(EvalError::MetricDomain(format!(
                "actual value at index {i} is zero; PP is undefined"
            )));
        }
        acc += ((p - a) / a).powi(2);
    }
    Ok(acc)
}

/// All four goodness-of-fit measures for one (actual, predicted) pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub mape: f64,
    pub mae: f64,
    pub prr: f64,
    pub pp: f64,
}

impl Metrics {
    pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Metrics, EvalError> {
        Ok(Metrics {
            mape: mape(actual, predicted)?,
            mae: mae(actual, predicted)?,
            prr: prr(actual, predicted)?,
            pp: pp(actual, predicted)?,
        })
    }

    /// Arithmetic per-field mean across folds.
    pub fn average(folds: &[Metrics]) -> Metrics {
        let n = folds.len() as f64;
        Metrics {
            mape: folds.iter().map(|m| m.mape).sum::<f64>() / n,
            mae: folds.iter().map(|m| m.mae).sum::<f64>() / n,
            prr: folds.iter().map(|m| m.prr).sum::<f64>() / n,
            pp: folds.iter().map(|m| m.pp).sum::<f64>() / n,
        }
    }
}

/// A seeded partition of `n` records into `k` folds of near-equal size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    /// `fold_assignments[i]` is the fold of record `i`, in `[0, k)`.
    pub fold_assignments: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        self.fold_assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_assignments.is_empty()
    }
}

/// Shuffles `0..n` with a ChaCha stream seeded by `seed` and cuts the result
/// into `k` contiguous blocks; the first `n % k` blocks get the extra record.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k == 0 || k > n {
        return Err(EvalError::InvalidPlan(format!(
            "k = {k} outside [1, n = {n}]"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let base = n / k;
    let extra = n % k;
    let mut assignments = vec![0usize; n];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &record in &order[pos..pos + size] {
            assignments[record] = fold;
        }
        pos += size;
    }
    Ok(FoldPlan {
        fold_assignments: assignments,
        k,
        seed,
    })
}

/// Fold-averaged evaluation of one (pipeline config, model) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_fold: Vec<Metrics>,
    pub averaged: Metrics,
    pub config: PipelineConfig,
    pub model_name: String,
    pub channel: crate::dataset::Channel,
    pub seed: u64,
}

#[derive(Serialize)]
struct EvalReportJson<'a> {
    model: &'a str,
    channel: &'a str,
    seed: u64,
    k_folds: usize,
    config: String,
    per_fold: &'a [Metrics],
    averaged: &'a Metrics,
}

impl EvalReport {
    /// Machine-readable JSON embedding the flat config form, the fold seed,
    /// and every metric at full precision.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&EvalReportJson {
            model: &self.model_name,
            channel: self.channel.as_str(),
            seed: self.seed,
            k_folds: self.per_fold.len(),
            config: self.config.to_flat(),
            per_fold: &self.per_fold,
            averaged: &self.averaged,
        })
        .expect("report serialization cannot fail")
        + "\n"
    }
}

/// One held-out prediction from cross-validation. For models without
/// predictive intervals the bounds collapse onto the point prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRow {
    pub record_index: usize,
    pub fold: usize,
    pub actual_km: f64,
    pub predicted_km: f64,
    pub lower_km: f64,
    pub upper_km: f64,
}

/// Cross-validates with default model hyperparameters, returning only the
/// metric report.
pub fn cross_validate(
    ds: &TraceDataset,
    config: &PipelineConfig,
    model_name: &str,
    plan: &FoldPlan,
) -> Result<EvalReport, EvalError> {
    cross_validate_detailed(ds, config, model_name, &RegressorParams::default(), plan, 0.9)
        .map(|(report, _)| report)
}

/// Full cross-validation: per fold, fits the pipeline and the model on the
/// other folds, transforms and predicts the held-out fold, and computes all
/// four measures on the held-out pairs. Also returns every held-out
/// prediction (with intervals at `confidence` where the model provides
/// them), ordered by record index.
pub fn cross_validate_detailed(
    ds: &TraceDataset,
    config: &PipelineConfig,
    model_name: &str,
    params: &RegressorParams,
    plan: &FoldPlan,
    confidence: f64,
) -> Result<(EvalReport, Vec<PredictionRow>), EvalError> {
    ds.validate_rectangular()
        .map_err(|e| EvalError::InvalidInput(e.to_string()))?;
    if plan.len() != ds.len() {
        return Err(EvalError::InvalidPlan(format!(
            "plan covers {} records but the dataset has {}",
            plan.len(),
            ds.len()
        )));
    }
    if let Some(i) = ds
        .records
        .iter()
        .position(|r| r.event_kind != EventKind::Fault)
    {
        return Err(EvalError::InvalidInput(format!(
            "record {i} is a non-fault event; filter with faults_only() before cross-validation"
        )));
    }
    config.validate(ds.sample_rate_hz, ds.n_samples())?;

    let matrix = ds.to_matrix();
    let targets = ds.distances();

    let mut per_fold = Vec::with_capacity(plan.k);
    let mut predictions = Vec::with_capacity(ds.len());
    for fold in 0..plan.k {
        let train_idx: Vec<usize> = (0..ds.len())
            .filter(|&i| plan.fold_assignments[i] != fold)
            .collect();
        let test_idx: Vec<usize> = (0..ds.len())
            .filter(|&i| plan.fold_assignments[i] == fold)
            .collect();
        if train_idx.len() < 2 {
            return Err(EvalError::InvalidInput(format!(
                "fold {fold} leaves only {} training records",
                train_idx.len()
            )));
        }

        let x_train = matrix.select_rows(&train_idx);
        let y_train = DVector::from_iterator(train_idx.len(), train_idx.iter().map(|&i| targets[i]));
        let x_test = matrix.select_rows(&test_idx);
        let actual: Vec<f64> = test_idx.iter().map(|&i| targets[i]).collect();

        let (pipeline, x_train_t) = FittedPipeline::fit(config, &x_train, ds.sample_rate_hz)?;
        let x_test_t = pipeline.transform(&x_test)?;

        let mut model = make_regressor_with(model_name, params)?;
        model.fit(&x_train_t, &y_train)?;
        let predicted_v = model.predict(&x_test_t)?;
        let predicted: Vec<f64> = predicted_v.iter().copied().collect();

        let intervals = model.predict_interval(&x_test_t, confidence).transpose()?;
        for (pos, &record_index) in test_idx.iter().enumerate() {
            let (lower, upper) = match &intervals {
                Some(iv) => (iv[pos].lower, iv[pos].upper),
                None => (predicted[pos], predicted[pos]),
            };
            predictions.push(PredictionRow {
                record_index,
                fold,
                actual_km: actual[pos],
                predicted_km: predicted[pos],
                lower_km: lower,
                upper_km: upper,
            });
        }
        per_fold.push(Metrics::compute(&actual, &predicted)?);
    }

    predictions.sort_by_key(|r| r.record_index);
    let averaged = Metrics::average(&per_fold);
    Ok((
        EvalReport {
            per_fold,
            averaged,
            config: config.clone(),
            model_name: model_name.to_string(),
            channel: ds.channel,
            seed: plan.seed,
        },
        predictions,
    ))
}

/// Fold-averaged MAE of the predictor that always answers the training-fold
/// mean. Used as the reference floor a learned model must beat.
pub fn mean_predictor_mae(ds: &TraceDataset, plan: &FoldPlan) -> Result<f64, EvalError> {
    if plan.len() != ds.len() {
        return Err(EvalError::InvalidPlan(format!(
            "plan covers {} records but the dataset has {}",
            plan.len(),
            ds.len()
        )));
    }
    let targets = ds.distances();
    let mut fold_maes = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let (mut train_sum, mut train_n) = (0.0, 0usize);
        for i in 0..ds.len() {
            if plan.fold_assignments[i] != fold {
                train_sum += targets[i];
                train_n += 1;
            }
        }
        if train_n == 0 {
            return Err(EvalError::InvalidPlan(format!("fold {fold} has no training records")));
        }
        let mean = train_sum / train_n as f64;
        let test: Vec<usize> = (0..ds.len())
            .filter(|&i| plan.fold_assignments[i] == fold)
            .collect();
        let actual: Vec<f64> = test.iter().map(|&i| targets[i]).collect();
        let predicted = vec![mean; actual.len()];
        fold_maes.push(mae(&actual, &predicted)?);
    }
    Ok(fold_maes.iter().sum::<f64>() / fold_maes.len() as f64)
}
