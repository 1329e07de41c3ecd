//! Brute-force k-nearest-neighbor regression.

use super::{Regressor, RegressorError};
use nalgebra::{DMatrix, DVector};

/// Predicts each test row as the mean target of its `k` nearest training
/// rows by Euclidean distance. Distance ties are broken by the lower
/// training-row index.
pub fn knn_fit_predict(
    x_train: &DMatrix<f64>,
    y_train: &DVector<f64>,
    x_test: &DMatrix<f64>,
    k: usize,
) -> Result<DVector<f64>, RegressorError> {
    let n = x_train.nrows();
    if k == 0 || k > n {
        return Err(RegressorError::InvalidHyper(format!(
            "k = {k} outside [1, {n}]"
        )));
    }
    if y_train.len() != n {
        return Err(RegressorError::ShapeMismatch(format!(
            "{n} training rows but {} targets",
            y_train.len()
        )));
    }
    if x_test.ncols() != x_train.ncols() {
        return Err(RegressorError::ShapeMismatch(format!(
            "test row length {} does not match training row length {}",
            x_test.ncols(),
            x_train.ncols()
        )));
    }

    let mut predictions = DVector::zeros(x_test.nrows());
    let mut distances: Vec<(f64, usize)> = Vec::with_capacity(n);
    for t in 0..x_test.nrows() {
        distances.clear();
        for i in 0..n {
            let mut d2 = 0.0;
            for j in 0..x_train.ncols() {
                let diff = x_train[(i, j)] - x_test[(t, j)];
                d2 += diff * diff;
            }
            distances.push((d2, i));
        }
        distances.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let sum: f64 = distances[..k].iter().map(|&(_, i)| y_train[i]).sum();
        predictions[t] = sum / k as f64;
    }
    Ok(predictions)
}

/// [`Regressor`] wrapper that stores the training set at fit time.
#[derive(Debug, Clone)]
pub struct KnnRegressor {
    pub k: usize,
    train: Option<(DMatrix<f64>, DVector<f64>)>,
}

impl KnnRegressor {
    pub fn new(k: usize) -> Self {
        KnnRegressor { k, train: None }
    }
}

impl Regressor for KnnRegressor {
    fn name(&self) -> &'static str {
        "knn"
    }

    fn fit(&mut self, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(), RegressorError> {
        if self.k == 0 || self.k > x.nrows() {
            return Err(RegressorError::InvalidHyper(format!(
                "k = {} outside [1, {}]",
                self.k,
                x.nrows()
            )));
        }
        if y.len() != x.nrows() {
            return Err(RegressorError::ShapeMismatch(format!(
                "{} training rows but {} targets",
                x.nrows(),
                y.len()
            )));
        }
        self.train = Some((x.clone(), y.clone()));
        Ok(())
    }

    fn predict(&self, x: &DMatrix<f64>) -> Result<DVector<f64>, RegressorError> {
        let (xt, yt) = self.train.as_ref().ok_or(RegressorError::NotFitted)?;
        knn_fit_predict(xt, yt, x, self.k)
    }
}
