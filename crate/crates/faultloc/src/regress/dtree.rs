//! CART-style regression tree with variance-reduction splits.

use super::{Regressor, RegressorError};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn predict(&self, row: impl Fn(usize) -> f64) -> f64 {
        match self {
            Node::Leaf(v) => *v,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row(*feature) <= *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }
}

fn mean(y: &DVector<f64>, idx: &[usize]) -> f64 {
    idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
}

/// Two-pass SSE of `values[i]` over the subset, summed in subset order.
/// Candidates that induce the same partition always score bitwise-equal
/// through this path, no matter which feature produced them.
fn subset_sse(values: &[f64], subset: &[usize]) -> f64 {
    let m = subset.iter().map(|&i| values[i]).sum::<f64>() / subset.len() as f64;
    subset.iter().map(|&i| (values[i] - m).powi(2)).sum()
}

fn partition(x: &DMatrix<f64>, idx: &[usize], feature: usize, threshold: f64) -> (Vec<usize>, Vec<usize>) {
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for &i in idx {
        if x[(i, feature)] <= threshold {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    (left, right)
}

/// Best axis-aligned split of the node, if any strictly reduces the summed
/// squared error. Candidate thresholds are midpoints between consecutive
/// distinct sorted feature values; score ties resolve to the smallest
/// `(feature, threshold)` pair.
///
/// Selection runs in two phases. A prefix-sum scan over node-centered
/// targets scores every candidate cheaply; prefix sums accumulate in
/// feature-sort order, so mathematically equal candidates (in particular
/// different features inducing the same partition) can differ by rounding
/// there. All candidates within a small band of the scan minimum are then
/// re-scored canonically with [`subset_sse`] in original row order, making
/// equal partitions bitwise-equal and the lexicographic tie-break
/// deterministic and translation-stable.
fn best_split(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    idx: &[usize],
    min_leaf: usize,
) -> Option<(usize, f64, Vec<usize>, Vec<usize>)> {
    let len = idx.len();
    let node_mean = mean(y, idx);
    let mut centered = vec![0.0; y.len()];
    for &i in idx {
        centered[i] = y[i] - node_mean;
    }
    let node_sse = subset_sse(&centered, idx);
    if node_sse <= 0.0 {
        return None;
    }

    let mut candidates: Vec<(f64, usize, f64)> = Vec::new();
    let mut order = idx.to_vec();
    for feature in 0..x.ncols() {
        order.sort_unstable_by(|&a, &b| x[(a, feature)].total_cmp(&x[(b, feature)]).then(a.cmp(&b)));

        let total_sum: f64 = order.iter().map(|&i| centered[i]).sum();
        let total_sq: f64 = order.iter().map(|&i| centered[i] * centered[i]).sum();
        let mut prefix_sum = 0.0;
        let mut prefix_sq = 0.0;
        for cut in 1..len {
            let i = order[cut - 1];
            prefix_sum += centered[i];
            prefix_sq += centered[i] * centered[i];
            if cut < min_leaf || len - cut < min_leaf {
                continue;
            }
            let lo = x[(order[cut - 1], feature)];
            let hi = x[(order[cut], feature)];
            if lo == hi {
                continue;
            }
            let left_n = cut as f64;
            let right_n = (len - cut) as f64;
            let sse_left = (prefix_sq - prefix_sum * prefix_sum / left_n).max(0.0);
            let rsum = total_sum - prefix_sum;
            let rsq = total_sq - prefix_sq;
            let sse_right = (rsq - rsum * rsum / right_n).max(0.0);
            candidates.push((sse_left + sse_right, feature, (lo + hi) / 2.0));
        }
    }

    let scan_best = candidates
        .iter()
        .map(|c| c.0)
        .fold(f64::INFINITY, f64::min);
    if !scan_best.is_finite() {
        return None;
    }
    let band = scan_best + 1e-9 * node_sse;

    let mut best: Option<(f64, usize, f64, Vec<usize>, Vec<usize>)> = None;
    for &(scan_score, feature, threshold) in &candidates {
        if scan_score > band {
            continue;
        }
        let (left, right) = partition(x, idx, feature, threshold);
        let score = subset_sse(&centered, &left) + subset_sse(&centered, &right);
        // Candidates arrive in (feature, threshold) ascending order, so a
        // strict comparison keeps the lexicographically smallest winner.
        if best.as_ref().map_or(true, |b| score < b.0) {
            best = Some((score, feature, threshold, left, right));
        }
    }

    let (score, feature, threshold, left, right) = best?;
    if score >= node_sse {
        return None;
    }
    Some((feature, threshold, left, right))
}

fn build(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    idx: &[usize],
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
) -> Node {
    let node_mean = mean(y, idx);
    if depth >= max_depth || idx.len() < 2 * min_leaf || idx.len() < 2 {
        return Node::Leaf(node_mean);
    }
    match best_split(x, y, idx, min_leaf) {
        None => Node::Leaf(node_mean),
        Some((feature, threshold, left, right)) => Node::Split {
            feature,
            threshold,
            left: Box::new(build(x, y, &left, depth + 1, max_depth, min_leaf)),
            right: Box::new(build(x, y, &right, depth + 1, max_depth, min_leaf)),
        },
    }
}

/// Fits a depth-limited regression tree on the training data and predicts
/// the test rows. `max_depth = 0` yields the training-mean stump.
pub fn dtree_fit_predict(
    x_train: &DMatrix<f64>,
    y_train: &DVector<f64>,
    x_test: &DMatrix<f64>,
    max_depth: usize,
    min_leaf: usize,
) -> Result<DVector<f64>, RegressorError> {
    let mut tree = DtreeRegressor::new(max_depth, min_leaf);
    tree.fit(x_train, y_train)?;
    tree.predict(x_test)
}

/// [`Regressor`] wrapper holding the fitted tree.
#[derive(Debug, Clone)]
pub struct DtreeRegressor {
    pub max_depth: usize,
    pub min_leaf: usize,
    root: Option<Node>,
}

impl DtreeRegressor {
    pub fn new(max_depth: usize, min_leaf: usize) -> Self {
        DtreeRegressor {
            max_depth,
            min_leaf,
            root: None,
        }
    }
}

impl Regressor for DtreeRegressor {
    fn name(&self) -> &'static str {
        "dtree"
    }

    fn fit(&mut self, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(), RegressorError> {
        let n = x.nrows();
        if n == 0 {
            return Err(RegressorError::Fit("empty training set".into()));
        }
        if self.min_leaf == 0 {
            return Err(RegressorError::InvalidHyper("min_leaf must be at least 1".into()));
        }
        if n < self.min_leaf {
            return Err(RegressorError::Fit(format!(
                "{n} training rows is fewer than min_leaf = {}",
                self.min_leaf
            )));
        }
        if y.len() != n {
            return Err(RegressorError::ShapeMismatch(format!(
                "{n} training rows but {} targets",
                y.len()
            )));
        }
        let idx: Vec<usize> = (0..n).collect();
        self.root = Some(build(x, y, &idx, 0, self.max_depth, self.min_leaf));
        Ok(())
    }

    fn predict(&self, x: &DMatrix<f64>) -> Result<DVector<f64>, RegressorError> {
        let root = self.root.as_ref().ok_or(RegressorError::NotFitted)?;
        Ok(DVector::from_fn(x.nrows(), |i, _| {
            root.predict(|j| x[(i, j)])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn depth_zero_is_the_training_mean_stump() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, 3.0, 5.0, 7.0]);
        let preds = dtree_fit_predict(&x, &y, &x, 0, 1).unwrap();
        for i in 0..4 {
            assert_eq!(preds[i], 4.0);
        }
    }

    #[test]
    fn single_threshold_split_fits_step_data_exactly() {
        let x = DMatrix::from_row_slice(6, 1, &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let y = DVector::from_vec(vec![5.0, 5.0, 5.0, 9.0, 9.0, 9.0]);
        let preds = dtree_fit_predict(&x, &y, &x, 1, 1).unwrap();
        for i in 0..6 {
            assert_eq!(preds[i], y[i]);
        }
    }

    #[test]
    fn unbounded_tree_memorizes_distinct_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let x = DMatrix::from_fn(30, 3, |_, _| rng.random_range(-10.0..10.0));
        let y = DVector::from_fn(30, |_, _| rng.random_range(-100.0..100.0));
        let preds = dtree_fit_predict(&x, &y, &x, 1000, 1).unwrap();
        for i in 0..30 {
            assert!(
                (preds[i] - y[i]).abs() < 1e-9,
                "row {i}: {} vs {}",
                preds[i],
                y[i]
            );
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x = DMatrix::from_fn(40, 4, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(40, |_, _| rng.random_range(0.0..10.0));
        let a = dtree_fit_predict(&x, &y, &x, 12, 2).unwrap();
        let b = dtree_fit_predict(&x, &y, &x, 12, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_empty_training_and_bad_min_leaf() {
        let x = DMatrix::zeros(0, 2);
        let y = DVector::zeros(0);
        assert!(dtree_fit_predict(&x, &y, &x, 3, 1).is_err());

        let x = DMatrix::zeros(3, 2);
        let y = DVector::zeros(3);
        assert!(dtree_fit_predict(&x, &y, &x, 3, 0).is_err());
        assert!(dtree_fit_predict(&x, &y, &x, 3, 4).is_err());
    }
}
