//! Regression models behind a common fit/predict contract.
//!
//! Bayesian ridge regression ([`brr_fit`]) is the primary model; brute-force
//! k-nearest neighbors and a CART-style decision tree serve as baselines.
//! All three are deterministic: identical inputs give identical outputs.

mod brr;
mod dtree;
mod knn;

pub use brr::{
    brr_fit, brr_interval, brr_predict, normal_quantile, BrrHyper, BrrModel, BrrRegressor,
    PredictionInterval,
};
pub use dtree::{dtree_fit_predict, DtreeRegressor};
pub use knn::{knn_fit_predict, KnnRegressor};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegressorError {
    #[error("fit error: {0}")]
    Fit(String),
    #[error("model used before fit")]
    NotFitted,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(String),
    #[error("unknown model '{0}', expected one of: brr, knn, dtree")]
    UnknownModel(String),
}

/// Behavioral contract shared by every regressor: `fit` then `predict`.
/// Predicting before fitting is an error; predictions have one entry per
/// input row.
pub trait Regressor: Send {
    fn name(&self) -> &'static str;

    fn fit(&mut self, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(), RegressorError>;

    fn predict(&self, x: &DMatrix<f64>) -> Result<DVector<f64>, RegressorError>;

    /// Per-row prediction intervals for models with a predictive
    /// distribution; `None` for point-only models.
    fn predict_interval(
        &self,
        _x: &DMatrix<f64>,
        _confidence: f64,
    ) -> Option<Result<Vec<PredictionInterval>, RegressorError>> {
        None
    }
}

/// Default baseline hyperparameters, recorded in search reports.
pub const DEFAULT_KNN_K: usize = 5;
pub const DEFAULT_TREE_MAX_DEPTH: usize = 12;
pub const DEFAULT_TREE_MIN_LEAF: usize = 2;

/// Optional overrides for the registry defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RegressorParams {
    pub knn_k: Option<usize>,
    pub tree_max_depth: Option<usize>,
    pub tree_min_leaf: Option<usize>,
}

/// Instantiates a registered regressor by name with default hyperparameters.
pub fn make_regressor(name: &str) -> Result<Box<dyn Regressor>, RegressorError> {
    make_regressor_with(name, &RegressorParams::default())
}

/// Instantiates a registered regressor, applying any overrides.
pub fn make_regressor_with(
    name: &str,
    params: &RegressorParams,
) -> Result<Box<dyn Regressor>, RegressorError> {
    match name {
        "brr" => Ok(Box::new(BrrRegressor::default())),
        "knn" => Ok(Box::new(KnnRegressor::new(
            params.knn_k.unwrap_or(DEFAULT_KNN_K),
        ))),
        "dtree" => Ok(Box::new(DtreeRegressor::new(
            params.tree_max_depth.unwrap_or(DEFAULT_TREE_MAX_DEPTH),
            params.tree_min_leaf.unwrap_or(DEFAULT_TREE_MIN_LEAF),
        ))),
        other => Err(RegressorError::UnknownModel(other.to_string())),
    }
}

/// Names accepted by [`make_regressor`].
pub const KNOWN_MODELS: &[&str] = &["brr", "knn", "dtree"];
