//! Principal component analysis via singular value decomposition.

use super::PipelineError;
use nalgebra::{DMatrix, DVector};

/// Fits PCA on the rows of `x`: returns the column-mean vector and a
/// `components x p` basis whose rows are the leading right singular
/// directions of the centered matrix, ordered by non-increasing singular
/// value. Each direction is sign-fixed so its largest-magnitude entry is
/// positive, which makes the decomposition deterministic.
pub fn fit_pca(
    x: &DMatrix<f64>,
    components: usize,
) -> Result<(DVector<f64>, DMatrix<f64>), PipelineError> {
    let (n, p) = x.shape();
    if components == 0 || components > n.min(p) {
        return Err(PipelineError::InvalidConfig(format!(
            "pca components {components} outside [1, min(n={n}, p={p})]"
        )));
    }

    let mean = DVector::from_iterator(p, (0..p).map(|j| x.column(j).sum() / n as f64));
    let mut centered = x.clone();
    for i in 0..n {
        for j in 0..p {
            centered[(i, j)] -= mean[j];
        }
    }

    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let sigma = &svd.singular_values;

    // nalgebra returns singular values sorted in descending order; keep an
    // explicit stable ordering anyway so the basis is well-defined even for
    // repeated singular values.
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));

    let mut basis = DMatrix::zeros(components, p);
    for (c, &src) in order.iter().take(components).enumerate() {
        let row = v_t.row(src);
        let mut max_idx = 0;
        for j in 1..p {
            if row[j].abs() > row[max_idx].abs() {
                max_idx = j;
            }
        }
        let sign = if row[max_idx] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..p {
            basis[(c, j)] = sign * row[j];
        }
    }
    Ok((mean, basis))
}

/// Projects rows of `x` onto the basis: `(x - mean) * basis^T`.
pub fn project(x: &DMatrix<f64>, mean: &DVector<f64>, basis: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = x.shape();
    let mut centered = x.clone();
    for i in 0..n {
        for j in 0..p {
            centered[(i, j)] -= mean[j];
        }
    }
    centered * basis.transpose()
}
