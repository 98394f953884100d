//! One-sided periodograms of uniformly sampled real series.
//!
//! Power is the raw `|X_k|²` of the mean-removed series with no window and no
//! `1/M` normalization.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};

#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Cycles per unit time, `k / (M dt)` for `k = 0..=M/2`.
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    /// Number of time samples the spectrum was computed from.
    pub n_samples: usize,
}

impl Spectrum {
    pub fn resolution(&self) -> f64 {
        if self.freqs.len() > 1 {
            self.freqs[1]
        } else {
            0.0
        }
    }

    /// Bin nearest to `freq`.
    pub fn bin_of(&self, freq: f64) -> usize {
        let k = (freq / self.resolution()).round().max(0.0) as usize;
        k.min(self.freqs.len() - 1)
    }

    /// Sum of `|X_k|²` over all `M` two-sided bins.
    pub fn two_sided_total(&self) -> f64 {
        let m = self.n_samples;
        self.power
            .iter()
            .enumerate()
            .map(|(k, p)| {
                // DC and (even M) Nyquist appear once, everything else twice
                if k == 0 || (m.is_multiple_of(2) && k == m / 2) {
                    *p
                } else {
                    2.0 * p
                }
            })
            .sum()
    }

    /// Whether some bin within `tolerance` bins of `freq` is a strict local
    /// maximum of the power.
    pub fn has_peak_near(&self, freq: f64, tolerance: usize) -> bool {
        let centre = self.bin_of(freq);
        let lo = centre.saturating_sub(tolerance).max(1);
        let hi = (centre + tolerance).min(self.power.len().saturating_sub(2));
        (lo..=hi).any(|k| self.power[k] > self.power[k - 1] && self.power[k] > self.power[k + 1])
    }

    /// Mean power over the harmonics `k/τ` (`k ≥ 1`, below Nyquist) divided
    /// by the median power of all non-DC bins.
    pub fn harmonic_to_median_ratio(&self, tau: f64) -> f64 {
        let nyquist = *self.freqs.last().unwrap_or(&0.0);
        let harmonics: Vec<f64> = (1..)
            .map(|k| k as f64 / tau)
            .take_while(|f| *f < nyquist)
            .map(|f| self.power[self.bin_of(f)])
            .collect();
        if harmonics.is_empty() {
            return f64::NAN;
        }
        let mean = harmonics.iter().sum::<f64>() / harmonics.len() as f64;
        mean / median(&self.power[1..])
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Periodogram of samples spaced by `dt`.
pub fn power_spectrum(values: &[f64], dt: f64) -> Result<Spectrum> {
    let m = values.len();
    if m < 4 {
        return Err(invalid(format!("need at least 4 samples, got {m}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("sample step must be positive, got {dt}")));
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let mut buf: Vec<Complex64> = values.iter().map(|x| Complex64::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let half = m / 2 + 1;
    let freqs = (0..half).map(|k| k as f64 / (m as f64 * dt)).collect();
    let power = buf[..half].iter().map(|z| z.norm_sqr()).collect();
    Ok(Spectrum { freqs, power, n_samples: m })
}

/// Periodogram of `(t, x)` samples; rejects a non-uniform time grid.
pub fn power_spectrum_of_series(times: &[f64], values: &[f64]) -> Result<Spectrum> {
    if times.len() != values.len() {
        return Err(invalid("time and value columns differ in length"));
    }
    if times.len() < 4 {
        return Err(invalid(format!("need at least 4 samples, got {}", times.len())));
    }
    let dt = uniform_step(times)?;
    power_spectrum(values, dt)
}

/// Common spacing of a time grid, or an error when it is not uniform.
pub fn uniform_step(times: &[f64]) -> Result<f64> {
    let span = times[times.len() - 1] - times[0];
    let dt = span / (times.len() - 1) as f64;
    if dt.is_nan() || dt <= 0.0 {
        return Err(invalid("time grid must be increasing"));
    }
    for (k, t) in times.iter().enumerate() {
        let expected = times[0] + k as f64 * dt;
        if (t - expected).abs() > 1e-6 * dt {
            return Err(invalid(format!(
                "non-uniform time grid at sample {k}: {t} vs {expected}"
            )));
        }
    }
    Ok(dt)
}
