//! Bayesian ridge regression with Gaussian predictive intervals.
//!
//! The model places a `N(0, (sigma^2 / a) I)` prior on the weights and
//! Gaussian noise of variance `sigma^2` on the observations. The intercept
//! is handled by centering the targets, so the prior never shrinks it. With
//! both hyperparameters fixed, the posterior weight mean coincides with the
//! closed-form ridge solution `(X'X + aI)^-1 X' y_centered`; the predictive
//! distribution for a row `x` is `N(y_hat, (1 + g) sigma^2)` with
//! `g = x' (X'X + aI)^-1 x`.

use super::{Regressor, RegressorError};
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

/// Hyperparameter selection mode for [`brr_fit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BrrHyper {
    /// Use the given prior precision `a` and noise variance `sigma^2`.
    Fixed { a: f64, noise_variance: f64 },
    /// Estimate `a` and `sigma^2` by iterative type-II maximum likelihood:
    /// with `lambda_j` the eigenvalues of `X'X` and effective degrees of
    /// freedom `gamma = sum lambda_j / (lambda_j + a)`, iterate
    /// `a <- gamma / ||w||^2` and
    /// `sigma^2 <- ||y - Xw - intercept||^2 / (n - gamma)` from `a = 1`,
    /// `sigma^2 = var(y)`, until both change by less than `tol` relatively.
    Evidence { max_iter: usize, tol: f64 },
}

impl Default for BrrHyper {
    fn default() -> Self {
        BrrHyper::Evidence {
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

/// A fitted Bayesian ridge model.
#[derive(Debug, Clone, PartialEq)]
pub struct BrrModel {
    /// Posterior weight mean.
    pub weights: DVector<f64>,
    pub intercept: f64,
    /// The `a` in the weight prior `N(0, (sigma^2 / a) I)`.
    pub prior_precision_a: f64,
    /// Noise variance `sigma^2`.
    pub noise_variance: f64,
    /// `(X'X + aI)^-1`, the kernel of the predictive variance term `g`.
    pub posterior_matrix: DMatrix<f64>,
    pub n_train: usize,
}

/// A centered predictive interval at the given confidence level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionInterval {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
}

fn all_finite(x: &DMatrix<f64>) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Fits the model on rows of `x` against targets `y`.
pub fn brr_fit(x: &DMatrix<f64>, y: &DVector<f64>, hyper: BrrHyper) -> Result<BrrModel, RegressorError> {
    let (n, p) = x.shape();
    if n < 2 {
        return Err(RegressorError::Fit(format!(
            "need at least 2 training rows, got {n}"
        )));
    }
    if y.len() != n {
        return Err(RegressorError::ShapeMismatch(format!(
            "{n} rows but {} targets",
            y.len()
        )));
    }
    if !all_finite(x) || !y.iter().all(|v| v.is_finite()) {
        return Err(RegressorError::Fit("non-finite training values".into()));
    }

    let intercept = y.sum() / n as f64;
    let y_centered = y.map(|v| v - intercept);
    let xtx = x.transpose() * x;
    let xty = x.transpose() * &y_centered;

    let solve = |a: f64| -> Result<(Cholesky<f64, nalgebra::Dyn>, DVector<f64>), RegressorError> {
        let mut m = xtx.clone();
        for j in 0..p {
            m[(j, j)] += a;
        }
        let chol = Cholesky::new(m).ok_or_else(|| {
            RegressorError::Fit(format!("failed to factor X'X + aI at a = {a}"))
        })?;
        let w = chol.solve(&xty);
        Ok((chol, w))
    };

    let (a, noise_variance, chol, weights) = match hyper {
        BrrHyper::Fixed { a, noise_variance } => {
            if !(a > 0.0) || !(noise_variance > 0.0) {
                return Err(RegressorError::InvalidHyper(format!(
                    "a and noise variance must be positive, got a = {a}, sigma^2 = {noise_variance}"
                )));
            }
            let (chol, w) = solve(a)?;
            (a, noise_variance, chol, w)
        }
        BrrHyper::Evidence { max_iter, tol } => {
            if tol <= 0.0 {
                return Err(RegressorError::InvalidHyper("tol must be positive".into()));
            }
            // Iterating in the eigenbasis of X'X makes each update O(p^2):
            // with X'X = V diag(lambda) V', the ridge solution is
            // w(a) = V diag(1 / (lambda + a)) V' X'y.
            let eigen = SymmetricEigen::new(xtx.clone());
            let eigenvalues = eigen.eigenvalues.map(|l| l.max(0.0));
            let rotated_xty = eigen.eigenvectors.transpose() * &xty;
            let weights_at = |a: f64| -> DVector<f64> {
                let scaled = DVector::from_fn(p, |j, _| rotated_xty[j] / (eigenvalues[j] + a));
                &eigen.eigenvectors * scaled
            };
            let mut a = 1.0f64;
            let mut s2 = {
                let var = y_centered.norm_squared() / (n as f64 - 1.0);
                if var > 0.0 {
                    var
                } else {
                    1e-12
                }
            };
            let mut w = weights_at(a);
            for _ in 0..max_iter {
                let gamma: f64 = eigenvalues.iter().map(|&l| l / (l + a)).sum();
                let w_norm2 = w.norm_squared();
                if w_norm2 == 0.0 {
                    // Centered targets carry no signal; keep the current a.
                    break;
                }
                let a_new = (gamma / w_norm2).clamp(1e-12, 1e12);
                let residual2 = (&y_centered - x * &w).norm_squared();
                let dof = n as f64 - gamma;
                let s2_new = if dof > 1e-9 {
                    (residual2 / dof).max(1e-12)
                } else {
                    s2
                };
                let converged = (a_new - a).abs() < tol * a.abs()
                    && (s2_new - s2).abs() < tol * s2.abs();
                a = a_new;
                s2 = s2_new;
                w = weights_at(a);
                if converged {
                    break;
                }
            }
            // Final factorization at the converged prior precision, matching
            // the fixed-hyperparameter path.
            let (chol, w) = solve(a)?;
            (a, s2, chol, w)
        }
    };

    Ok(BrrModel {
        weights,
        intercept,
        prior_precision_a: a,
        noise_variance,
        posterior_matrix: chol.inverse(),
        n_train: n,
    })
}

/// Point predictions `X w + intercept`.
pub fn brr_predict(model: &BrrModel, x: &DMatrix<f64>) -> Result<DVector<f64>, RegressorError> {
    if x.ncols() != model.weights.len() {
        return Err(RegressorError::ShapeMismatch(format!(
            "row length {} does not match model dimension {}",
            x.ncols(),
            model.weights.len()
        )));
    }
    Ok((x * &model.weights).map(|v| v + model.intercept))
}

/// Predictive interval for one row, centered on the point prediction with
/// half-width `z_{eps/2} * sqrt((1 + g) * sigma^2)`, `eps = 1 - confidence`.
pub fn brr_interval(
    model: &BrrModel,
    x: &DVector<f64>,
    confidence: f64,
) -> Result<PredictionInterval, RegressorError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(RegressorError::InvalidHyper(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    if x.len() != model.weights.len() {
        return Err(RegressorError::ShapeMismatch(format!(
            "row length {} does not match model dimension {}",
            x.len(),
            model.weights.len()
        )));
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(RegressorError::Fit("non-finite prediction input".into()));
    }
    let g = (x.transpose() * &model.posterior_matrix * x)[(0, 0)].max(0.0);
    let point = model.weights.dot(x) + model.intercept;
    let z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
    let half_width = z * ((1.0 + g) * model.noise_variance).sqrt();
    Ok(PredictionInterval {
        point,
        lower: point - half_width,
        upper: point + half_width,
        confidence,
    })
}

impl BrrModel {
    /// Versioned flat text form: dimensions first, then the fields in
    /// declaration order, floats in shortest round-trip decimal form.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("brr-model v1\n");
        let _ = writeln!(out, "p {}", self.weights.len());
        let mut line = String::from("weights");
        for w in self.weights.iter() {
            let _ = write!(line, " {w}");
        }
        out.push_str(&line);
        out.push('\n');
        let _ = writeln!(out, "intercept {}", self.intercept);
        let _ = writeln!(out, "prior_precision_a {}", self.prior_precision_a);
        let _ = writeln!(out, "noise_variance {}", self.noise_variance);
        let mut pm = String::from("posterior_matrix");
        for i in 0..self.posterior_matrix.nrows() {
            for j in 0..self.posterior_matrix.ncols() {
                let _ = write!(pm, " {}", self.posterior_matrix[(i, j)]);
            }
        }
        out.push_str(&pm);
        out.push('\n');
        let _ = writeln!(out, "n_train {}", self.n_train);
        out
    }

    /// Parses the form produced by [`BrrModel::to_text`].
    pub fn from_text(text: &str) -> Result<Self, RegressorError> {
        let bad = |msg: String| RegressorError::Fit(format!("model parse error: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        if header.trim() != "brr-model v1" {
            return Err(bad(format!("unsupported header '{header}'")));
        }
        let mut field = |name: &str| -> Result<Vec<f64>, RegressorError> {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("missing field '{name}'")))?;
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or("");
            if key != name {
                return Err(bad(format!("expected field '{name}', found '{key}'")));
            }
            parts
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| bad(format!("{name}: invalid number '{t}'")))
                })
                .collect()
        };
        let p = field("p")?;
        if p.len() != 1 {
            return Err(bad("p must carry exactly one value".into()));
        }
        let p = p[0] as usize;
        let weights = field("weights")?;
        if weights.len() != p {
            return Err(bad(format!("expected {p} weights, found {}", weights.len())));
        }
        let scalar = |v: Vec<f64>, name: &str| -> Result<f64, RegressorError> {
            if v.len() != 1 {
                return Err(bad(format!("{name} must carry exactly one value")));
            }
            Ok(v[0])
        };
        let intercept = scalar(field("intercept")?, "intercept")?;
        let prior_precision_a = scalar(field("prior_precision_a")?, "prior_precision_a")?;
        let noise_variance = scalar(field("noise_variance")?, "noise_variance")?;
        let pm = field("posterior_matrix")?;
        if pm.len() != p * p {
            return Err(bad(format!(
                "expected {} posterior entries, found {}",
                p * p,
                pm.len()
            )));
        }
        let n_train = scalar(field("n_train")?, "n_train")? as usize;
        Ok(BrrModel {
            weights: DVector::from_vec(weights),
            intercept,
            prior_precision_a,
            noise_variance,
            posterior_matrix: DMatrix::from_row_slice(p, p, &pm),
            n_train,
        })
    }
}

/// Standard normal quantile (inverse CDF), Wichura's AS 241 double-precision
/// rational approximation.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must lie in (0, 1)");
    const A: [f64; 8] = [
        3.387_132_872_796_366_5e0,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_3e3,
        1.373_169_376_550_946_1e4,
        4.592_195_393_154_987e4,
        6.726_577_092_700_87e4,
        3.343_057_558_358_813e4,
        2.509_080_928_730_122_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091e1,
        6.871_870_074_920_579e2,
        5.394_196_021_424_751e3,
        2.121_379_430_158_659_7e4,
        3.930_789_580_009_271e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_545_5e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5e0,
        4.630_337_846_156_545e0,
        5.769_497_221_460_691e0,
        3.647_848_324_763_204_5e0,
        1.270_458_252_452_368_4e0,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_759e0,
        1.676_384_830_183_803_8e0,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_8e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_9e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103e0,
        5.463_784_911_164_114e0,
        1.784_826_539_917_291_3e0,
        2.965_605_718_285_048_7e-1,
        2.653_218_952_657_612_4e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_88e-1,
        1.369_298_809_227_358e-1,
        1.487_536_129_085_061_5e-2,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_7e-15,
    ];
    fn poly(c: &[f64; 8], r: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * r + k)
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

/// [`Regressor`] wrapper around the free functions.
#[derive(Debug, Clone, Default)]
pub struct BrrRegressor {
    pub hyper: BrrHyper,
    model: Option<BrrModel>,
}

impl BrrRegressor {
    pub fn new(hyper: BrrHyper) -> Self {
        BrrRegressor { hyper, model: None }
    }

    pub fn model(&self) -> Option<&BrrModel> {
        self.model.as_ref()
    }
}

impl Regressor for BrrRegressor {
    fn name(&self) -> &'static str {
        "brr"
    }

    fn fit(&mut self, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(), RegressorError> {
        self.model = Some(brr_fit(x, y, self.hyper)?);
        Ok(())
    }

    fn predict(&self, x: &DMatrix<f64>) -> Result<DVector<f64>, RegressorError> {
        let model = self.model.as_ref().ok_or(RegressorError::NotFitted)?;
        brr_predict(model, x)
    }

    fn predict_interval(
        &self,
        x: &DMatrix<f64>,
        confidence: f64,
    ) -> Option<Result<Vec<PredictionInterval>, RegressorError>> {
        let model = match self.model.as_ref().ok_or(RegressorError::NotFitted) {
            Ok(m) => m,
            Err(e) => return Some(Err(e)),
        };
        let mut out = Vec::with_capacity(x.nrows());
        for i in 0..x.nrows() {
            let row = x.row(i).transpose();
            match brr_interval(model, &row, confidence) {
                Ok(iv) => out.push(iv),
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Plain Gaussian elimination with partial pivoting, used as an oracle
    /// independent of the Cholesky path in the implementation.
    fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = b[row];
            for k in row + 1..n {
                acc -= a[row][k] * x[k];
            }
            x[row] = acc / a[row][row];
        }
        x
    }

    fn ridge_oracle(x: &DMatrix<f64>, y: &DVector<f64>, a: f64) -> Vec<f64> {
        let (n, p) = x.shape();
        let mean = y.sum() / n as f64;
        let mut m = vec![vec![0.0; p]; p];
        let mut rhs = vec![0.0; p];
        for i in 0..p {
            for j in 0..p {
                let mut acc = 0.0;
                for r in 0..n {
                    acc += x[(r, i)] * x[(r, j)];
                }
                m[i][j] = acc + if i == j { a } else { 0.0 };
            }
            let mut acc = 0.0;
            for r in 0..n {
                acc += x[(r, i)] * (y[r] - mean);
            }
            rhs[i] = acc;
        }
        gauss_solve(m, rhs)
    }

    fn random_problem(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (DMatrix<f64>, DVector<f64>) {
        let x = DMatrix::from_fn(n, p, |_, _| rng.random_range(-2.0..2.0));
        let y = DVector::from_fn(n, |_, _| rng.random_range(-50.0..50.0));
        (x, y)
    }

    #[test]
    fn fixed_hyper_matches_closed_form_ridge() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for &a in &[1e-3, 0.5, 10.0] {
            let (x, y) = random_problem(&mut rng, 50, 10);
            let model = brr_fit(&x, &y, BrrHyper::Fixed { a, noise_variance: 1.0 }).unwrap();
            let oracle = ridge_oracle(&x, &y, a);
            for j in 0..10 {
                assert!(
                    (model.weights[j] - oracle[j]).abs() < 1e-8,
                    "a = {a}, weight {j}: {} vs {}",
                    model.weights[j],
                    oracle[j]
                );
            }
        }
    }

    #[test]
    fn noiseless_linear_data_is_reproduced() {
        // Column-centered features keep the intercept-by-centering model
        // exact: the centered targets stay in the column space of X.
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut x = DMatrix::from_fn(40, 4, |_, _| rng.random_range(-1.0..1.0));
        for j in 0..4 {
            let mean = x.column(j).sum() / 40.0;
            for i in 0..40 {
                x[(i, j)] -= mean;
            }
        }
        let w_true = DVector::from_vec(vec![3.0, -1.5, 0.25, 2.0]);
        let y = (&x * &w_true).map(|v| v + 40.0);
        let model = brr_fit(&x, &y, BrrHyper::Fixed { a: 1e-12, noise_variance: 1.0 }).unwrap();
        let preds = brr_predict(&model, &x).unwrap();
        for i in 0..40 {
            assert!((preds[i] - y[i]).abs() < 1e-6, "{} vs {}", preds[i], y[i]);
        }
    }

    #[test]
    fn orthonormal_columns_shrink_by_one_plus_a() {
        // With X'X = I the ridge solution is (X'y)_j / (1 + a).
        let p = 4;
        let n = 4;
        let x = DMatrix::<f64>::identity(n, p);
        let y = DVector::from_vec(vec![2.0, -4.0, 8.0, 6.0]);
        let a = 0.5;
        let model = brr_fit(&x, &y, BrrHyper::Fixed { a, noise_variance: 1.0 }).unwrap();
        let mean = y.sum() / n as f64;
        for j in 0..p {
            let expected = (y[j] - mean) / (1.0 + a);
            assert!((model.weights[j] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn predict_matches_scalar_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (x, y) = random_problem(&mut rng, 30, 6);
        let model = brr_fit(&x, &y, BrrHyper::default()).unwrap();
        let test = DMatrix::from_fn(5, 6, |_, _| rng.random_range(-2.0..2.0));
        let preds = brr_predict(&model, &test).unwrap();
        for i in 0..5 {
            let mut acc = model.intercept;
            for j in 0..6 {
                acc += test[(i, j)] * model.weights[j];
            }
            assert!((preds[i] - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn evidence_iteration_terminates_with_positive_hyperparameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..10 {
            let (x, y) = random_problem(&mut rng, 25, 8);
            let model = brr_fit(&x, &y, BrrHyper::Evidence { max_iter: 200, tol: 1e-8 }).unwrap();
            assert!(model.prior_precision_a > 0.0);
            assert!(model.noise_variance > 0.0);
        }
        // Constant targets: no signal after centering, must still fit.
        let x = DMatrix::from_fn(10, 3, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_element(10, 123.0);
        let model = brr_fit(&x, &y, BrrHyper::default()).unwrap();
        assert!(model.prior_precision_a > 0.0);
        assert!(model.noise_variance > 0.0);
        assert!((model.intercept - 123.0).abs() < 1e-9);
    }

    /// Bisection on a quadrature-evaluated normal CDF (the integral form of
    /// erf); independent of the AS 241 path.
    fn quantile_oracle(p: f64) -> f64 {
        fn cdf(z: f64) -> f64 {
            // Composite Simpson over [0, z] of the standard normal density.
            let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let n = 4000;
            let h = z / n as f64;
            let mut acc = density(0.0) + density(z);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * density(h * i as f64);
            }
            0.5 + acc * h / 3.0
        }
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn quantile_matches_erf_bisection_oracle() {
        for &p in &[0.6, 0.75, 0.841344746, 0.9, 0.95, 0.975, 0.995, 0.9999] {
            let got = normal_quantile(p);
            let want = quantile_oracle(p);
            assert!((got - want).abs() < 1e-6, "p = {p}: {got} vs {want}");
        }
        assert!((normal_quantile(0.5)).abs() < 1e-12);
        assert!((normal_quantile(0.975) - 1.959964).abs() < 1e-5);
    }

    #[test]
    fn interval_width_follows_the_predictive_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let (x, y) = random_problem(&mut rng, 30, 5);
        let s2 = 4.0;
        let model = brr_fit(&x, &y, BrrHyper::Fixed { a: 1.0, noise_variance: s2 }).unwrap();

        // One-sigma coverage: z is exactly 1, so the half-width is
        // sigma * sqrt(1 + g).
        let one_sigma = 0.682_689_492_137_085_9;
        let row = DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
        let iv = brr_interval(&model, &row, one_sigma).unwrap();
        let g = (row.transpose() * &model.posterior_matrix * &row)[(0, 0)];
        assert!(g >= 0.0);
        let expected_half = (s2 * (1.0 + g)).sqrt();
        let half = (iv.upper - iv.lower) / 2.0;
        assert!((half - expected_half).abs() < 1e-6 * expected_half);
        assert!(iv.lower <= iv.point && iv.point <= iv.upper);

        // Zero input: g = 0, width exactly 2 * z * sigma.
        let zero = DVector::zeros(5);
        let iv = brr_interval(&model, &zero, 0.9).unwrap();
        let z = normal_quantile(0.95);
        let width = iv.upper - iv.lower;
        assert!((width - 2.0 * z * s2.sqrt()).abs() < 1e-10);
        assert!((iv.point - model.intercept).abs() < 1e-12);
    }

    #[test]
    fn model_text_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let (x, y) = random_problem(&mut rng, 20, 4);
        let model = brr_fit(&x, &y, BrrHyper::default()).unwrap();
        let text = model.to_text();
        let parsed = BrrModel::from_text(&text).unwrap();
        assert_eq!(parsed, model);
        assert!(BrrModel::from_text("garbage").is_err());
    }

    #[test]
    fn regressor_contract() {
        let reg = BrrRegressor::default();
        let x = DMatrix::zeros(3, 2);
        assert!(matches!(reg.predict(&x), Err(RegressorError::NotFitted)));

        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let (x, y) = random_problem(&mut rng, 20, 3);
        let mut reg = BrrRegressor::default();
        reg.fit(&x, &y).unwrap();
        let preds = reg.predict(&x).unwrap();
        assert_eq!(preds.len(), 20);
        let intervals = reg.predict_interval(&x, 0.9).unwrap().unwrap();
        assert_eq!(intervals.len(), 20);
        for (i, iv) in intervals.iter().enumerate() {
            assert!((iv.point - preds[i]).abs() < 1e-12);
        }
    }
}
