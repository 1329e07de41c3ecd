//! Composable preprocessing pipeline with train-fold fitting.
//!
//! Stages always apply in one fixed order:
//!
//! 1. low-pass FIR filtering (when a cutoff is configured),
//! 2. downsampling by an integer factor — combined with the filter into a
//!    single decimating FIR when both are active,
//! 3. FFT magnitude of each row,
//! 4. per-row ℓ²-normalization,
//! 5. PCA projection fitted on the training rows only,
//! 6. elementwise signed square root,
//! 7. per-feature standard scaling with training statistics.
//!
//! Configuration validity is decidable from `(config, sample_rate,
//! input_len)` alone, before touching any data: ℓ²-normalization and
//! standard scaling are mutually exclusive, a configured cutoff must stay
//! below the post-downsampling Nyquist frequency, and PCA cannot ask for
//! more components than the preceding stages produce.

mod fft;
mod fir;
mod pca;

pub use fft::fft_magnitude;
pub use fir::{decimate, design_lowpass};
pub use pca::fit_pca;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Tap count used for pipeline-designed anti-aliasing filters.
pub const FIR_NUM_TAPS: usize = 63;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Declarative stage settings for one preprocessing pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Low-pass cutoff in Hz; `None` disables filtering.
    pub lpf_cutoff_hz: Option<f64>,
    /// Keep one sample out of `ds_factor`.
    pub ds_factor: usize,
    pub apply_fft: bool,
    pub apply_l2_norm: bool,
    /// Number of principal components; `None` disables PCA.
    pub pca_components: Option<usize>,
    pub apply_sqrt: bool,
    pub apply_std_scaler: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            lpf_cutoff_hz: None,
            ds_factor: 1,
            apply_fft: false,
            apply_l2_norm: false,
            pca_components: None,
            apply_sqrt: false,
            apply_std_scaler: false,
        }
    }
}

impl PipelineConfig {
    /// The identity pipeline: every stage off, no downsampling.
    pub fn identity() -> Self {
        Self::default()
    }


    /// Feature count after stages 1–4 for rows of `input_len` samples.
    pub fn features_before_pca(&self, input_len: usize) -> usize {
        let m = input_len / self.ds_factor.max(1);
        if self.apply_fft {
            if m >= 2 {
                m.next_power_of_two() / 2 + 1
            } else {
                m
            }
        } else {
            m
        }
    }

    /// Output dimensionality of the full pipeline for rows of `input_len`.
    pub fn output_dim(&self, input_len: usize) -> usize {
        self.pca_components
            .unwrap_or_else(|| self.features_before_pca(input_len))
    }

    /// Checks all validity rules against the sample rate and row length.
    pub fn validate(&self, sample_rate_hz: f64, input_len: usize) -> Result<(), PipelineError> {
        if self.ds_factor == 0 {
            return Err(PipelineError::InvalidConfig(
                "ds_factor must be at least 1".into(),
            ));
        }
        if self.apply_l2_norm && self.apply_std_scaler {
            return Err(PipelineError::InvalidConfig(
                "l2 normalization and standard scaling together would apply \
                 two levels of normalization"
                    .into(),
            ));
        }
        if let Some(cutoff) = self.lpf_cutoff_hz {
            let nyquist_after_ds = sample_rate_hz / (2.0 * self.ds_factor as f64);
            if !(cutoff > 0.0) {
                return Err(PipelineError::InvalidConfig(format!(
                    "lpf cutoff must be positive, got {cutoff}"
                )));
            }
            if cutoff >= nyquist_after_ds {
                return Err(PipelineError::InvalidConfig(format!(
                    "lpf cutoff {cutoff} Hz is at or above the post-downsampling \
                     Nyquist frequency {nyquist_after_ds} Hz"
                )));
            }
            if input_len < FIR_NUM_TAPS {
                return Err(PipelineError::InvalidConfig(format!(
                    "input length {input_len} is shorter than the {FIR_NUM_TAPS}-tap filter"
                )));
            }
        }
        let after_ds = input_len / self.ds_factor;
        if after_ds == 0 {
            return Err(PipelineError::InvalidConfig(format!(
                "downsampling by {} leaves no samples of an input of length {input_len}",
                self.ds_factor
            )));
        }
        if self.apply_fft && after_ds < 2 {
            return Err(PipelineError::InvalidConfig(format!(
                "downsampling by {} leaves {after_ds} sample(s), too few for the FFT",
                self.ds_factor
            )));
        }
        if let Some(c) = self.pca_components {
            let feats = self.features_before_pca(input_len);
            if c == 0 || c > feats {
                return Err(PipelineError::InvalidConfig(format!(
                    "pca components {c} outside [1, {feats}] for input length {input_len}"
                )));
            }
        }
        Ok(())
    }

    /// Flat `key=value` text form, one field per line, `none` for absent
    /// optionals.
    pub fn to_flat(&self) -> String {
        let opt_f = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        let opt_u = |v: Option<usize>| v.map_or("none".to_string(), |x| x.to_string());
        format!(
            "lpf_cutoff_hz={}\nds_factor={}\napply_fft={}\napply_l2_norm={}\n\
             pca_components={}\napply_sqrt={}\napply_std_scaler={}\n",
            opt_f(self.lpf_cutoff_hz),
            self.ds_factor,
            self.apply_fft,
            self.apply_l2_norm,
            opt_u(self.pca_components),
            self.apply_sqrt,
            self.apply_std_scaler,
        )
    }

    /// Parses the flat form produced by [`PipelineConfig::to_flat`]. Every
    /// field must appear exactly once; blank lines and `#` comments are
    /// ignored.
    pub fn from_flat(text: &str) -> Result<Self, PipelineError> {
        let mut cfg = PipelineConfig::identity();
        let mut seen = [false; 7];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                PipelineError::InvalidConfig(format!(
                    "line {}: expected key=value, got '{line}'",
                    lineno + 1
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let field = match key {
                "lpf_cutoff_hz" => 0,
                "ds_factor" => 1,
                "apply_fft" => 2,
                "apply_l2_norm" => 3,
                "pca_components" => 4,
                "apply_sqrt" => 5,
                "apply_std_scaler" => 6,
                other => {
                    return Err(PipelineError::InvalidConfig(format!(
                        "unknown config key '{other}'"
                    )))
                }
            };
            if seen[field] {
                return Err(PipelineError::InvalidConfig(format!(
                    "duplicate config key '{key}'"
                )));
            }
            seen[field] = true;
            let bad = |what: &str| {
                PipelineError::InvalidConfig(format!("{key}: invalid {what} '{value}'"))
            };
            match field {
                0 => {
                    cfg.lpf_cutoff_hz = if value == "none" {
                        None
                    } else {
                        Some(value.parse().map_err(|_| bad("number"))?)
                    }
                }
                1 => cfg.ds_factor = value.parse().map_err(|_| bad("integer"))?,
                2 => cfg.apply_fft = value.parse().map_err(|_| bad("boolean"))?,
                3 => cfg.apply_l2_norm = value.parse().map_err(|_| bad("boolean"))?,
                4 => {
                    cfg.pca_components = if value == "none" {
                        None
                    } else {
                        Some(value.parse().map_err(|_| bad("integer"))?)
                    }
                }
                5 => cfg.apply_sqrt = value.parse().map_err(|_| bad("boolean"))?,
                6 => cfg.apply_std_scaler = value.parse().map_err(|_| bad("boolean"))?,
                _ => unreachable!(),
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            let names = [
                "lpf_cutoff_hz",
                "ds_factor",
                "apply_fft",
                "apply_l2_norm",
                "pca_components",
                "apply_sqrt",
                "apply_std_scaler",
            ];
            return Err(PipelineError::InvalidConfig(format!(
                "missing config key '{}'",
                names[missing]
            )));
        }
        Ok(cfg)
    }
}

/// Mean-centers and scales a row to unit ℓ²-norm: `(x - mean) / ||x - mean||`.
pub fn l2_normalize(x: &[f64]) -> Result<Vec<f64>, PipelineError> {
    if x.is_empty() {
        return Err(PipelineError::InvalidInput("empty row".into()));
    }
    let first = x[0];
    if x.iter().all(|&v| v == first) {
        return Err(PipelineError::DegenerateInput(
            "all row values are equal; l2 normalization is undefined".into(),
        ));
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(PipelineError::DegenerateInput(format!(
            "l2 norm of the centered row is {norm}"
        )));
    }
    Ok(centered.into_iter().map(|v| v / norm).collect())
}

fn signed_sqrt(v: f64) -> f64 {
    v.signum() * v.abs().sqrt()
}

/// A pipeline fitted on training rows; holds every statistic needed to
/// transform unseen data identically.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub config: PipelineConfig,
    /// FIR taps designed at fit time; empty when no low-pass is configured.
    pub fir_taps: Vec<f64>,
    pub pca_mean: DVector<f64>,
    pub pca_basis: DMatrix<f64>,
    pub scaler_mean: Vec<f64>,
    pub scaler_std: Vec<f64>,
    /// Row length the pipeline was fitted on.
    pub input_len: usize,
    pub output_dim: usize,
}

impl FittedPipeline {
    /// Fits all stateful stages on `x_train` and returns the fitted pipeline
    /// together with the transformed training matrix. Fitted state is a pure
    /// function of `(config, x_train, sample_rate_hz)`.
    pub fn fit(
        config: &PipelineConfig,
        x_train: &DMatrix<f64>,
        sample_rate_hz: f64,
    ) -> Result<(Self, DMatrix<f64>), PipelineError> {
        let (n, input_len) = x_train.shape();
        config.validate(sample_rate_hz, input_len)?;
        if n < 2 {
            return Err(PipelineError::InvalidInput(format!(
                "pipeline fitting needs at least 2 rows, got {n}"
            )));
        }

        let fir_taps = match config.lpf_cutoff_hz {
            Some(cutoff) => design_lowpass(cutoff, sample_rate_hz, FIR_NUM_TAPS)?,
            None => Vec::new(),
        };

        let early = early_stages(config, &fir_taps, x_train)?;

        let (pca_mean, pca_basis, projected) = match config.pca_components {
            Some(c) => {
                let (mean, basis) = fit_pca(&early, c)?;
                let projected = pca::project(&early, &mean, &basis);
                (mean, basis, projected)
            }
            None => (DVector::zeros(0), DMatrix::zeros(0, 0), early),
        };

        let mut staged = projected;
        if config.apply_sqrt {
            staged.apply(|v| *v = signed_sqrt(*v));
        }

        let (scaler_mean, scaler_std) = if config.apply_std_scaler {
            let cols = staged.ncols();
            let rows = staged.nrows() as f64;
            let mut means = Vec::with_capacity(cols);
            let mut stds = Vec::with_capacity(cols);
            for j in 0..cols {
                let col = staged.column(j);
                let mean = col.sum() / rows;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / rows;
                let std = var.sqrt();
                means.push(mean);
                // A zero-variance feature scales to constant zero instead of
                // failing the whole fold.
                stds.push(if std > 0.0 { std } else { 1.0 });
            }
            for i in 0..staged.nrows() {
                for j in 0..cols {
                    staged[(i, j)] = (staged[(i, j)] - means[j]) / stds[j];
                }
            }
            (means, stds)
        } else {
            (Vec::new(), Vec::new())
        };

        let output_dim = staged.ncols();
        let fitted = FittedPipeline {
            config: config.clone(),
            fir_taps,
            pca_mean,
            pca_basis,
            scaler_mean,
            scaler_std,
            input_len,
            output_dim,
        };
        Ok((fitted, staged))
    }

    /// Applies the fitted stages to new rows. Never mutates fitted state.
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>, PipelineError> {
        if x.ncols() != self.input_len {
            return Err(PipelineError::ShapeMismatch(format!(
                "row length {} does not match the fitted input length {}",
                x.ncols(),
                self.input_len
            )));
        }
        let early = early_stages(&self.config, &self.fir_taps, x)?;
        let mut staged = if self.config.pca_components.is_some() {
            pca::project(&early, &self.pca_mean, &self.pca_basis)
        } else {
            early
        };
        if self.config.apply_sqrt {
            staged.apply(|v| *v = signed_sqrt(*v));
        }
        if self.config.apply_std_scaler {
            for i in 0..staged.nrows() {
                for j in 0..staged.ncols() {
                    staged[(i, j)] = (staged[(i, j)] - self.scaler_mean[j]) / self.scaler_std[j];
                }
            }
        }
        Ok(staged)
    }
}

/// Stages 1–4 (decimating FIR, FFT magnitude, ℓ²-normalization), applied
/// row by row. These stages carry no fitted state beyond the FIR taps.
fn early_stages(
    config: &PipelineConfig,
    fir_taps: &[f64],
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>, PipelineError> {
    let n = x.nrows();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let unit_taps = [1.0f64];
    for i in 0..n {
        let mut row: Vec<f64> = x.row(i).iter().copied().collect();
        if !fir_taps.is_empty() || config.ds_factor > 1 {
            let taps: &[f64] = if fir_taps.is_empty() { &unit_taps } else { fir_taps };
            row = decimate(&row, taps, config.ds_factor)?;
        }
        if config.apply_fft {
            row = fft_magnitude(&row)?;
        }
        if config.apply_l2_norm {
            row = l2_normalize(&row).map_err(|e| match e {
                PipelineError::DegenerateInput(msg) => {
                    PipelineError::DegenerateInput(format!("row {i}: {msg}"))
                }
                other => other,
            })?;
        }
        rows.push(row);
    }
    let cols = rows[0].len();
    debug_assert!(rows.iter().all(|r| r.len() == cols));
    Ok(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_config() -> PipelineConfig {
        // DS = 3, PCA = 12, LPF = 150 Hz, followed by FFT and l2 norm.
        PipelineConfig {
            lpf_cutoff_hz: Some(150.0),
            ds_factor: 3,
            apply_fft: true,
            apply_l2_norm: true,
            pca_components: Some(12),
            apply_sqrt: false,
            apply_std_scaler: false,
        }
    }

    fn ramp_matrix(n: usize, p: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, p, |i, j| (i * p + j) as f64 * 0.01 + (i as f64).sin())
    }

    #[test]
    fn l2_normalize_examples() {
        let out = l2_normalize(&[1.0, -1.0]).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert!((out[0] - s).abs() < 1e-15 && (out[1] + s).abs() < 1e-15);

        let out = l2_normalize(&[1.0, 2.0, 3.0]).unwrap();
        assert!((out[0] + s).abs() < 1e-12);
        assert!(out[1].abs() < 1e-12);
        assert!((out[2] - s).abs() < 1e-12);

        let norm: f64 = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);

        assert!(matches!(
            l2_normalize(&[4.0, 4.0, 4.0]),
            Err(PipelineError::DegenerateInput(_))
        ));
    }

    #[test]
    fn identity_config_passes_input_through() {
        let x = ramp_matrix(4, 10);
        let (fp, out) = FittedPipeline::fit(&PipelineConfig::identity(), &x, 10_000.0).unwrap();
        assert_eq!(out, x);
        assert_eq!(fp.output_dim, 10);
        assert_eq!(fp.transform(&x).unwrap(), x);
    }

    #[test]
    fn heavy_downsampling_yields_two_features() {
        let cfg = PipelineConfig {
            ds_factor: 100,
            ..PipelineConfig::identity()
        };
        let x = ramp_matrix(3, 200);
        let (fp, out) = FittedPipeline::fit(&cfg, &x, 10_000.0).unwrap();
        assert_eq!(fp.output_dim, 2);
        assert_eq!(out.ncols(), 2);
    }

    #[test]
    fn reference_config_produces_twelve_features() {
        let cfg = fig_config();
        assert_eq!(cfg.output_dim(200), 12);
        let x = ramp_matrix(20, 200);
        let (fp, out) = FittedPipeline::fit(&cfg, &x, 10_000.0).unwrap();
        assert_eq!(fp.output_dim, 12);
        assert_eq!(out.ncols(), 12);

        // A single unseen row transforms to a 12-vector.
        let unseen = ramp_matrix(21, 200).rows(20, 1).into_owned();
        let t = fp.transform(&unseen).unwrap();
        assert_eq!((t.nrows(), t.ncols()), (1, 12));
    }

    #[test]
    fn transform_matches_fit_output_on_training_rows() {
        for cfg in [
            fig_config(),
            PipelineConfig {
                ds_factor: 5,
                apply_sqrt: true,
                apply_std_scaler: true,
                ..PipelineConfig::identity()
            },
        ] {
            let x = ramp_matrix(16, 200);
            let (fp, out) = FittedPipeline::fit(&cfg, &x, 10_000.0).unwrap();
            assert_eq!(fp.transform(&x).unwrap(), out);
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let x = ramp_matrix(16, 200);
        let (fp1, out1) = FittedPipeline::fit(&fig_config(), &x, 10_000.0).unwrap();
        let (fp2, out2) = FittedPipeline::fit(&fig_config(), &x, 10_000.0).unwrap();
        assert_eq!(fp1, fp2);
        assert_eq!(out1, out2);
    }

    #[test]
    fn validity_rules_are_enforced() {
        let both_norms = PipelineConfig {
            apply_l2_norm: true,
            apply_std_scaler: true,
            ..PipelineConfig::identity()
        };
        assert!(both_norms.validate(10_000.0, 200).is_err());

        let nyquist_violation = PipelineConfig {
            lpf_cutoff_hz: Some(500.0),
            ds_factor: 100,
            ..PipelineConfig::identity()
        };
        assert!(nyquist_violation.validate(10_000.0, 200).is_err());

        // 500 Hz at ds = 10 sits exactly at the post-downsampling Nyquist.
        let boundary = PipelineConfig {
            lpf_cutoff_hz: Some(500.0),
            ds_factor: 10,
            ..PipelineConfig::identity()
        };
        assert!(boundary.validate(10_000.0, 200).is_err());

        let too_many_components = PipelineConfig {
            ds_factor: 10,
            pca_components: Some(28),
            ..PipelineConfig::identity()
        };
        assert!(too_many_components.validate(10_000.0, 200).is_err());

        assert!(fig_config().validate(10_000.0, 200).is_ok());
    }

    #[test]
    fn transform_rejects_wrong_row_length() {
        let x = ramp_matrix(4, 50);
        let (fp, _) = FittedPipeline::fit(&PipelineConfig::identity(), &x, 10_000.0).unwrap();
        let bad = ramp_matrix(2, 49);
        assert!(matches!(
            fp.transform(&bad),
            Err(PipelineError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn flat_form_round_trips() {
        for cfg in [
            PipelineConfig::identity(),
            fig_config(),
            PipelineConfig {
                lpf_cutoff_hz: Some(50.0),
                ds_factor: 10,
                apply_fft: false,
                apply_l2_norm: false,
                pca_components: None,
                apply_sqrt: true,
                apply_std_scaler: true,
            },
        ] {
            let flat = cfg.to_flat();
            assert_eq!(PipelineConfig::from_flat(&flat).unwrap(), cfg);
        }
    }

    #[test]
    fn flat_form_rejects_malformed_text() {
        assert!(PipelineConfig::from_flat("nonsense").is_err());
        assert!(PipelineConfig::from_flat("lpf_cutoff_hz=150\n").is_err());
        let dup = "lpf_cutoff_hz=none\nlpf_cutoff_hz=150\nds_factor=1\napply_fft=false\n\
                   apply_l2_norm=false\npca_components=none\napply_sqrt=false\napply_std_scaler=false\n";
        assert!(PipelineConfig::from_flat(dup).is_err());
    }
}
