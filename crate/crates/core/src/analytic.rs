//! Analytic signal along time by one-sided spectral masking.
//!
//! For a real series of length `N` the forward DFT is taken in natural bin
//! order (bin 0 = DC). Bins `1..=(N-1)/2` are positive frequencies and are
//! doubled; for even `N` the Nyquist bin `N/2` is kept as is; the remaining
//! (negative-frequency) bins are zeroed. The inverse DFT is the analytic
//! signal, whose imaginary part is the discrete Hilbert transform.
//!
//! No padding, windowing or detrending is applied, so bin `k` sits exactly at
//! `k / (N dt)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{CodError, Result};
use crate::field::{AnalyticField, SignalField};
use crate::grid::{TimeGrid, MIN_TIME_SAMPLES};

/// Reusable forward/inverse plan pair for one series length.
pub struct AnalyticTransform {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl AnalyticTransform {
    pub fn new(len: usize) -> Result<Self> {
        if len < MIN_TIME_SAMPLES {
            return Err(CodError::invalid(format!(
                "analytic signal needs at least {MIN_TIME_SAMPLES} samples, got {len}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn apply(&self, samples: &[f64]) -> Result<Vec<Complex64>> {
        if samples.len() != self.len {
            return Err(CodError::invalid(format!(
                "series has {} samples, transform planned for {}",
                samples.len(),
                self.len
            )));
        }
        if let Some(n) = samples.iter().position(|x| !x.is_finite()) {
            return Err(CodError::invalid(format!("sample {n} is not finite")));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        apply_one_sided_mask(&mut buf);
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        for z in &mut buf {
            *z *= scale;
        }
        Ok(buf)
    }
}

/// Multiplier applied to DFT bin `k` of a length-`n` real series.
pub fn mask_factor(k: usize, n: usize) -> f64 {
    if k == 0 || (n % 2 == 0 && k == n / 2) {
        1.0
    } else if k <= (n - 1) / 2 {
        2.0
    } else {
        0.0
    }
}

fn apply_one_sided_mask(spectrum: &mut [Complex64]) {
    let n = spectrum.len();
    for (k, z) in spectrum.iter_mut().enumerate() {
        *z *= mask_factor(k, n);
    }
}

/// Analytic signal of one real series.
pub fn analytic_series(samples: &[f64]) -> Result<Vec<Complex64>> {
    AnalyticTransform::new(samples.len())?.apply(samples)
}

/// Analytic signal of every spatial column. Columns are independent, so the
/// result does not depend on how many threads process them.
pub fn analytic_field(field: &SignalField) -> Result<AnalyticField> {
    let nt = field.time().len();
    let nx = field.space().len();
    let transform = AnalyticTransform::new(nt)?;
    let values = field.values();
    let columns: Vec<Vec<Complex64>> = (0..nx)
        .into_par_iter()
        .map(|j| transform.apply(values.column(j).as_slice()))
        .collect::<Result<_>>()?;
    let mut out = DMatrix::zeros(nt, nx);
    for (j, col) in columns.into_iter().enumerate() {
        out.column_mut(j).copy_from_slice(&col);
    }
    AnalyticField::new(*field.time(), field.space().clone(), out)
}

/// Share of spectral energy at strictly negative frequency bins.
pub fn negative_frequency_fraction(series: &[Complex64]) -> f64 {
    let n = series.len();
    let mut buf = series.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let negative: f64 = buf
        .iter()
        .enumerate()
        .filter(|(k, _)| *k > n / 2)
        .map(|(_, z)| z.norm_sqr())
        .sum();
    negative / total
}

/// Worst deviation of the discrete Hilbert transform of `e^{-γt} sin(ωt)`
/// from the slow-envelope approximation `-e^{-γt} cos(ωt)`.
///
/// The maximum is taken over the central 80% of the window (samples
/// `ceil(0.1 N) .. floor(0.9 N)`) and divided by the envelope at the first
/// sample.
pub fn hilbert_approx_error(gamma: f64, omega: f64, time: &TimeGrid) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(CodError::invalid(format!(
            "damping must be ≥ 0, got {gamma}"
        )));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(CodError::invalid(format!(
            "angular frequency must be > 0, got {omega}"
        )));
    }
    time.check()?;
    let envelope = |t: f64| (-gamma * t).exp();
    let samples: Vec<f64> = time
        .times()
        .map(|t| envelope(t) * (omega * t).sin())
        .collect();
    let analytic = analytic_series(&samples)?;
    let n = time.len();
    let lo = (0.1 * n as f64).ceil() as usize;
    let hi = (0.9 * n as f64).floor() as usize;
    let worst = (lo..hi)
        .map(|i| {
            let t = time.time(i);
            let approx = -envelope(t) * (omega * t).cos();
            (analytic[i].im - approx).abs()
        })
        .fold(0.0, f64::max);
    Ok(worst / envelope(time.t0()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sampled(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|i| f(i as f64 / n as f64)).collect()
    }

    #[test]
    fn cosine_becomes_complex_exponential() {
        for n in [64, 63] {
            let omega = 2.0 * PI * 5.0;
            let x = sampled(n, |t| (omega * t).cos());
            let z = analytic_series(&x).unwrap();
            for (i, zi) in z.iter().enumerate() {
                let t = i as f64 / n as f64;
                assert!((zi.re - (omega * t).cos()).abs() < 1e-12);
                assert!((zi.im - (omega * t).sin()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sine_hilbert_is_minus_cosine() {
        let n = 100;
        let omega = 2.0 * PI * 3.0;
        let x = sampled(n, |t| (omega * t).sin());
        let z = analytic_series(&x).unwrap();
        for (i, zi) in z.iter().enumerate() {
            let t = i as f64 / n as f64;
            assert!((zi.im + (omega * t).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_is_preserved() {
        let z = analytic_series(&[2.5; 16]).unwrap();
        for zi in z {
            assert!((zi.re - 2.5).abs() < 1e-14 && zi.im.abs() < 1e-14);
        }
    }

    #[test]
    fn mask_conventions() {
        // even: DC, 1..3 doubled, Nyquist 4 kept, 5..7 zeroed
        let even: Vec<f64> = (0..8).map(|k| mask_factor(k, 8)).collect();
        assert_eq!(even, vec![1.0, 2.0, 2.0, 2.0, 1.0, 0.0, 0.0, 0.0]);
        // odd: no Nyquist bin
        let odd: Vec<f64> = (0..7).map(|k| mask_factor(k, 7)).collect();
        assert_eq!(odd, vec![1.0, 2.0, 2.0, 2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_short_or_non_finite() {
        assert!(analytic_series(&[1.0, 2.0, 3.0]).is_err());
        assert!(analytic_series(&[1.0, f64::NAN, 3.0, 4.0]).is_err());
        assert!(analytic_series(&[1.0, 2.0, f64::INFINITY, 4.0]).is_err());
    }

    #[test]
    fn undamped_integer_periods_is_exact() {
        let time = TimeGrid::new(0.0, 0.008, 500).unwrap();
        let err = hilbert_approx_error(0.0, 2.0 * PI * 5.0, &time).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn approx_error_shrinks_with_damping() {
        let time = TimeGrid::new(0.0, 0.008, 500).unwrap();
        let omega = 2.0 * PI * 5.0;
        let sweep: Vec<f64> = [2.0, 1.0, 0.5, 0.25, 0.1, 0.05]
            .iter()
            .map(|&g| hilbert_approx_error(g, omega, &time).unwrap())
            .collect();
        for pair in sweep.windows(2) {
            assert!(pair[1] < pair[0], "{sweep:?}");
        }
    }

    #[test]
    fn damped_window_error_is_small_but_nonzero() {
        // 3.5 s at 5 Hz is 17.5 periods; the undamped reference is taken on an
        // integer number of periods.
        let omega = 2.0 * PI * 5.0;
        let damped =
            hilbert_approx_error(1.0, omega, &TimeGrid::new(0.0, 0.007, 500).unwrap()).unwrap();
        let undamped =
            hilbert_approx_error(0.0, omega, &TimeGrid::new(0.0, 0.008, 500).unwrap()).unwrap();
        assert!(damped > undamped);
        assert!(damped > 1e-4 && damped < 0.05, "{damped}");
    }

    #[test]
    fn approx_error_preconditions() {
        let time = TimeGrid::new(0.0, 0.01, 100).unwrap();
        assert!(hilbert_approx_error(-1.0, 1.0, &time).is_err());
        assert!(hilbert_approx_error(1.0, 0.0, &time).is_err());
    }
}
