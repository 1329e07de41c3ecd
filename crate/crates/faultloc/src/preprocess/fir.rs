//! Windowed-sinc FIR design and the decimating filter.

use super::PipelineError;
use std::f64::consts::PI;

/// Designs a Hamming-windowed sinc low-pass filter with an odd tap count,
/// normalized to unit dc gain (the taps sum to 1).
pub fn design_lowpass(
    cutoff_hz: f64,
    sample_rate_hz: f64,
    num_taps: usize,
) -> Result<Vec<f64>, PipelineError> {
    if !(sample_rate_hz > 0.0) {
        return Err(PipelineError::InvalidConfig(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    if !(cutoff_hz > 0.0) || cutoff_hz >= sample_rate_hz / 2.0 {
        return Err(PipelineError::InvalidConfig(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, {}) Hz (below Nyquist)",
            sample_rate_hz / 2.0
        )));
    }
    if num_taps == 0 || num_taps % 2 == 0 {
        return Err(PipelineError::InvalidConfig(format!(
            "tap count must be odd and positive, got {num_taps}"
        )));
    }
    if num_taps == 1 {
        return Ok(vec![1.0]);
    }

    let fc = cutoff_hz / sample_rate_hz;
    let mid = (num_taps - 1) as f64 / 2.0;
    let mut taps: Vec<f64> = (0..num_taps)
        .map(|i| {
            let n = i as f64 - mid;
            let x = 2.0 * PI * fc * n;
            let sinc = if n == 0.0 { 1.0 } else { x.sin() / x };
            let window = 0.54 - 0.46 * (2.0 * PI * i as f64 / (num_taps - 1) as f64).cos();
            2.0 * fc * sinc * window
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in taps.iter_mut() {
        *t /= sum;
    }
    Ok(taps)
}

/// Decimating FIR filter: `y[m] = sum_i x[m*N - i] * h[i]`, keeping every
/// `N`-th filtered sample. Indices before the start of the signal read the
/// first sample, which avoids a spurious step transient at t = 0. The output
/// has `floor(len(x) / N)` samples.
pub fn decimate(x: &[f64], taps: &[f64], factor: usize) -> Result<Vec<f64>, PipelineError> {
    if factor == 0 {
        return Err(PipelineError::InvalidConfig(
            "decimation factor must be at least 1".into(),
        ));
    }
    if taps.is_empty() {
        return Err(PipelineError::InvalidConfig("empty filter taps".into()));
    }
    if x.len() < taps.len() {
        return Err(PipelineError::InvalidInput(format!(
            "signal length {} is shorter than the filter ({} taps)",
            x.len(),
            taps.len()
        )));
    }
    let out_len = x.len() / factor;
    let mut y = Vec::with_capacity(out_len);
    for m in 0..out_len {
        let base = m * factor;
        let mut acc = 0.0;
        for (i, h) in taps.iter().enumerate() {
            let v = if i > base { x[0] } else { x[base - i] };
            acc += v * h;
        }
        y.push(acc);
    }
    Ok(y)
}
