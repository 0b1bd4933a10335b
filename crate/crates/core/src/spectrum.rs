//! One-sided amplitude spectra.
//!
//! With `X_k = Σ_n x_n e^{-2πi kn/N}` and bins `k = 0..=⌊N/2⌋` at `k/(N dt)` Hz:
//!
//! * real point signals: `|X_k|/N`, doubled for `0 < k < N/2`, so a sinusoid
//!   of amplitude `A` on an integer number of periods peaks at `A`;
//! * complex temporal coefficients: `|X_k|/N` without doubling. They are
//!   analytic, so the negative-frequency half is empty and `A e^{iωt}` again
//!   peaks at `A`.
//!
//! The optional Hann window is divided by its mean (coherent gain) so that
//! peak heights keep the same meaning.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::decompose::CodMode;
use crate::error::{CodError, Result};
use crate::field::SignalField;
use crate::grid::TimeGrid;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSeries {
    /// `0, 1/(N dt), …` up to Nyquist.
    pub frequencies: Vec<f64>,
    /// Amplitude-normalized magnitude per bin.
    pub amplitude: Vec<f64>,
}

impl SpectrumSeries {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Index of the largest bin (first one on ties).
    pub fn peak_bin(&self) -> usize {
        self.amplitude
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            })
            .0
    }

    /// Frequency of [`Self::peak_bin`].
    pub fn dominant_frequency(&self) -> f64 {
        self.frequencies[self.peak_bin()]
    }

    /// True when bin `k` is at least as high as both neighbours.
    pub fn is_local_max(&self, k: usize) -> bool {
        let a = &self.amplitude;
        (k == 0 || a[k] >= a[k - 1]) && (k + 1 >= a.len() || a[k] >= a[k + 1])
    }
}

fn window_weights(window: Window, n: usize) -> Option<Vec<f64>> {
    match window {
        Window::Rectangular => None,
        Window::Hann => {
            let raw: Vec<f64> = (0..n)
                .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()))
                .collect();
            let gain = raw.iter().sum::<f64>() / n as f64;
            Some(raw.into_iter().map(|w| w / gain).collect())
        }
    }
}

fn transform(mut buf: Vec<Complex64>, window: Window) -> Vec<Complex64> {
    let n = buf.len();
    if let Some(w) = window_weights(window, n) {
        for (z, wi) in buf.iter_mut().zip(w) {
            *z *= wi;
        }
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

fn one_sided(spectrum: &[Complex64], dt: f64, double: bool) -> SpectrumSeries {
    let n = spectrum.len();
    let bins = n / 2 + 1;
    let df = 1.0 / (n as f64 * dt);
    let frequencies = (0..bins).map(|k| k as f64 * df).collect();
    let amplitude = (0..bins)
        .map(|k| {
            let a = spectrum[k].norm() / n as f64;
            if double && k > 0 && 2 * k < n {
                2.0 * a
            } else {
                a
            }
        })
        .collect();
    SpectrumSeries {
        frequencies,
        amplitude,
    }
}

fn check_length(n: usize, dt: f64) -> Result<()> {
    if n == 0 {
        return Err(CodError::invalid(
            "cannot take the spectrum of an empty series",
        ));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CodError::invalid(format!(
            "time step must be positive, got {dt}"
        )));
    }
    Ok(())
}

/// Spectrum of a real series sampled every `dt` seconds.
pub fn real_series_spectrum(samples: &[f64], dt: f64, window: Window) -> Result<SpectrumSeries> {
    check_length(samples.len(), dt)?;
    let buf = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok(one_sided(&transform(buf, window), dt, true))
}

/// Non-negative-frequency spectrum of a complex series.
pub fn complex_series_spectrum(
    samples: &[Complex64],
    dt: f64,
    window: Window,
) -> Result<SpectrumSeries> {
    check_length(samples.len(), dt)?;
    Ok(one_sided(&transform(samples.to_vec(), window), dt, false))
}

/// Spectrum of the real signal at one spatial column.
pub fn point_spectrum(field: &SignalField, column: usize) -> Result<SpectrumSeries> {
    point_spectrum_with(field, column, Window::Rectangular)
}

pub fn point_spectrum_with(
    field: &SignalField,
    column: usize,
    window: Window,
) -> Result<SpectrumSeries> {
    let nx = field.space().len();
    if column >= nx {
        return Err(CodError::invalid(format!(
            "column {column} out of range for {nx} spatial points"
        )));
    }
    let samples: Vec<f64> = field.values().column(column).iter().copied().collect();
    real_series_spectrum(&samples, field.time().dt(), window)
}

/// Spectrum of a mode's temporal coefficients.
pub fn coefficient_spectrum(mode: &CodMode, time: &TimeGrid) -> SpectrumSeries {
    coefficient_spectrum_with(mode, time, Window::Rectangular)
}

pub fn coefficient_spectrum_with(
    mode: &CodMode,
    time: &TimeGrid,
    window: Window,
) -> SpectrumSeries {
    let n = mode.temporal_coeffs.len();
    if n == 0 {
        return SpectrumSeries {
            frequencies: vec![0.0],
            amplitude: vec![0.0],
        };
    }
    one_sided(
        &transform(mode.temporal_coeffs.clone(), window),
        time.dt(),
        false,
    )
}

/// `|Σ|x_n|² - Σ|X_k|²/N| / Σ|x_n|²` for the unnormalized DFT; 0 for a zero series.
pub fn parseval_residual(samples: &[Complex64]) -> f64 {
    let n = samples.len();
    let time_energy: f64 = samples.iter().map(|z| z.norm_sqr()).sum();
    if n == 0 || time_energy == 0.0 {
        return 0.0;
    }
    let spectrum = transform(samples.to_vec(), Window::Rectangular);
    let freq_energy: f64 = spectrum.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    (time_energy - freq_energy).abs() / time_energy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::uniform_grid;
    use std::f64::consts::PI;

    #[test]
    fn unit_sinusoid_reads_one() {
        let dt = 0.01;
        let x: Vec<f64> = (0..200)
            .map(|n| (2.0 * PI * 5.0 * n as f64 * dt + 0.3).sin())
            .collect();
        let s = real_series_spectrum(&x, dt, Window::Rectangular).unwrap();
        let k = s.peak_bin();
        assert!((s.frequencies[k] - 5.0).abs() < 1e-12);
        assert!((s.amplitude[k] - 1.0).abs() < 1e-6);
        assert_eq!(s.len(), 101);
        assert!((s.frequencies[100] - 50.0).abs() < 1e-12);
    }

    #[test]
    fn hann_keeps_peak_height_on_bin() {
        let dt = 0.01;
        let x: Vec<f64> = (0..200)
            .map(|n| 3.0 * (2.0 * PI * 5.0 * n as f64 * dt).cos())
            .collect();
        let s = real_series_spectrum(&x, dt, Window::Hann).unwrap();
        assert!((s.amplitude[s.peak_bin()] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn dc_and_nyquist_not_doubled() {
        let x: Vec<f64> = (0..8)
            .map(|n| 1.0 + if n % 2 == 0 { 0.5 } else { -0.5 })
            .collect();
        let s = real_series_spectrum(&x, 1.0, Window::Rectangular).unwrap();
        assert!((s.amplitude[0] - 1.0).abs() < 1e-14);
        assert!((s.amplitude[4] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_field_has_zero_spectrum() {
        let time = TimeGrid::new(0.0, 0.1, 16).unwrap();
        let f = SignalField::from_fn(time, uniform_grid(0.0, 1.0, 3).unwrap(), |_, _| 0.0).unwrap();
        let s = point_spectrum(&f, 1).unwrap();
        assert!(s.amplitude.iter().all(|a| *a == 0.0));
        assert!(point_spectrum(&f, 3).is_err());
    }

    #[test]
    fn constant_series_lives_in_dc() {
        let s = complex_series_spectrum(&[Complex64::new(2.0, -1.0); 10], 0.5, Window::Rectangular)
            .unwrap();
        assert!((s.amplitude[0] - 5f64.sqrt()).abs() < 1e-14);
        assert!(s.amplitude[1..].iter().all(|a| *a < 1e-14));
    }

    #[test]
    fn complex_exponential_reads_its_amplitude() {
        let n = 100;
        let z: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(7.0, 2.0 * PI * 3.0 * i as f64 / n as f64))
            .collect();
        let s = complex_series_spectrum(&z, 1.0 / n as f64, Window::Rectangular).unwrap();
        assert_eq!(s.peak_bin(), 3);
        assert!((s.amplitude[3] - 7.0).abs() < 1e-12);
        assert!(s.is_local_max(3));
    }

    #[test]
    fn cyclic_shift_keeps_amplitudes() {
        let x: Vec<f64> = (0..64).map(|n| ((n * n) % 17) as f64 - 8.0).collect();
        let mut y = x.clone();
        y.rotate_left(11);
        let a = real_series_spectrum(&x, 1.0, Window::Rectangular).unwrap();
        let b = real_series_spectrum(&y, 1.0, Window::Rectangular).unwrap();
        for (p, q) in a.amplitude.iter().zip(&b.amplitude) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn parseval_on_fixed_series() {
        let z: Vec<Complex64> = (0..37)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        assert!(parseval_residual(&z) < 1e-12);
        assert_eq!(parseval_residual(&[Complex64::new(0.0, 0.0); 4]), 0.0);
    }
}
