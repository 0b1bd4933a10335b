//! Synthetic wave fields with known modal content, and the closed-form
//! quantities used to check decompositions of them.
//!
//! Positions are in millimetres, times in seconds, gravity in mm/s².

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{CodError, Result};
use crate::field::SignalField;
use crate::grid::{trapezoidal_weights, uniform_grid, SpatialGrid, TimeGrid};
use crate::special::{bessel_j_signed, BESSEL_MAX_ORDER};

/// Water-wave angular frequency `ω = sqrt(g k tanh(k h))` of tank mode `n`,
/// with `k = n π / L`.
pub fn airy_omega(n: u32, length: f64, depth: f64, gravity: f64) -> Result<f64> {
    if n == 0 {
        return Err(CodError::invalid("mode index must be ≥ 1"));
    }
    for (name, v) in [
        ("tank length", length),
        ("water depth", depth),
        ("gravity", gravity),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CodError::invalid(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let k = n as f64 * PI / length;
    Ok((gravity * k * (k * depth).tanh()).sqrt())
}

/// One term `A [sin(ωt) sin(kx) + α cos(ωt) cos(kx)]`.
fn wave_term(amplitude: f64, alpha: f64, omega: f64, k: f64, t: f64, x: f64) -> f64 {
    amplitude * ((omega * t).sin() * (k * x).sin() + alpha * ((omega * t).cos() * (k * x).cos()))
}

fn tank_grid() -> SpatialGrid {
    uniform_grid(-200.0, 200.0, 250).expect("static grid")
}

/// One sloshing component: tank mode `n` with amplitude and travelling mix `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveComponent {
    pub n: u32,
    pub amplitude: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SloshingParams {
    pub length: f64,
    pub depth: f64,
    pub gravity: f64,
    pub components: Vec<WaveComponent>,
    pub time: TimeGrid,
    pub space: SpatialGrid,
}

impl Default for SloshingParams {
    /// 400 mm tank, 100 mm depth, modes 1 and 3 with amplitudes 15 and 4,
    /// 1000 samples over 22.1 s and 250 points. The window holds a
    /// near-integer number of periods of both modes.
    fn default() -> Self {
        Self {
            length: 400.0,
            depth: 100.0,
            gravity: 9810.0,
            components: vec![
                WaveComponent {
                    n: 1,
                    amplitude: 15.0,
                    alpha: 0.0,
                },
                WaveComponent {
                    n: 3,
                    amplitude: 4.0,
                    alpha: 0.0,
                },
            ],
            time: TimeGrid::new(0.0, 0.0221, 1000).expect("static grid"),
            space: tank_grid(),
        }
    }
}

impl SloshingParams {
    /// Wavelength `2L/n` of a tank mode.
    pub fn wavelength(&self, n: u32) -> f64 {
        2.0 * self.length / n as f64
    }
}

/// `s(x,t) = Σ_i A_i [sin(ω_i t) sin(2πx/λ_i) + α_i cos(ω_i t) cos(2πx/λ_i)]`
/// with `λ_i = 2L/n_i` and `ω_i` from [`airy_omega`].
pub fn sloshing_field(p: &SloshingParams) -> Result<SignalField> {
    let mut terms = Vec::with_capacity(p.components.len());
    for c in &p.components {
        if !(c.alpha.is_finite() && c.alpha.abs() <= 1.0) {
            return Err(CodError::invalid(format!(
                "travelling mix must lie in [-1, 1], got {}",
                c.alpha
            )));
        }
        if !c.amplitude.is_finite() {
            return Err(CodError::invalid("amplitude must be finite"));
        }
        let omega = airy_omega(c.n, p.length, p.depth, p.gravity)?;
        let k = 2.0 * PI / p.wavelength(c.n);
        terms.push((c.amplitude, c.alpha, omega, k));
    }
    SignalField::from_fn(p.time, p.space.clone(), |t, x| {
        terms.iter().fold(0.0, |acc, &(a, alpha, omega, k)| {
            acc + wave_term(a, alpha, omega, k, t, x)
        })
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DampedParams {
    pub length: f64,
    pub wavelength: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub gamma: f64,
    pub time: TimeGrid,
    pub space: SpatialGrid,
}

impl Default for DampedParams {
    /// 16 units at 5 Hz, wavelength 300 mm, damping 1/s, 500 samples over
    /// 3.5 s and 1200 points across the 400 mm tank.
    fn default() -> Self {
        Self {
            length: 400.0,
            wavelength: 300.0,
            amplitude: 16.0,
            frequency: 5.0,
            gamma: 1.0,
            time: TimeGrid::new(0.0, 0.007, 500).expect("static grid"),
            space: uniform_grid(-200.0, 200.0, 1200).expect("static grid"),
        }
    }
}

impl DampedParams {
    /// `A sqrt((1 - e^{-2γT}) / (2γT))`: root-mean-square envelope over the
    /// window, which is what a constant-amplitude estimate reads.
    pub fn expected_amplitude(&self) -> f64 {
        let x = 2.0 * self.gamma * self.time.duration();
        if x == 0.0 {
            self.amplitude
        } else {
            self.amplitude * (-(-x).exp_m1() / x).sqrt()
        }
    }
}

/// `s(x,t) = A e^{-γt} sin(2πf t) sin(2πx/λ)`.
pub fn damped_standing_field(p: &DampedParams) -> Result<SignalField> {
    if !(p.gamma.is_finite() && p.gamma >= 0.0) {
        return Err(CodError::invalid(format!(
            "damping must be ≥ 0, got {}",
            p.gamma
        )));
    }
    for (name, v) in [
        ("frequency", p.frequency),
        ("wavelength", p.wavelength),
        ("tank length", p.length),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CodError::invalid(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if !p.amplitude.is_finite() {
        return Err(CodError::invalid("amplitude must be finite"));
    }
    let omega = 2.0 * PI * p.frequency;
    let k = 2.0 * PI / p.wavelength;
    SignalField::from_fn(p.time, p.space.clone(), |t, x| {
        (-p.gamma * t).exp() * wave_term(p.amplitude, 0.0, omega, k, t, x)
    })
}

/// Spatial profile `(scale · x)³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicShape {
    pub scale: f64,
}

impl Default for CubicShape {
    fn default() -> Self {
        Self { scale: 0.01 }
    }
}

impl CubicShape {
    pub fn eval(&self, x: f64) -> f64 {
        (self.scale * x).powi(3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FmParams {
    pub length: f64,
    pub amplitude: f64,
    pub carrier: f64,
    pub modulation: f64,
    pub epsilon: f64,
    pub shape: CubicShape,
    pub time: TimeGrid,
    pub space: SpatialGrid,
}

impl Default for FmParams {
    /// Carrier 1 Hz, modulation 0.2 Hz, depth 1, amplitude 2 on a `(0.01x)³`
    /// profile, 1000 samples over 50 s (both frequencies on exact bins).
    fn default() -> Self {
        Self {
            length: 400.0,
            amplitude: 2.0,
            carrier: 1.0,
            modulation: 0.2,
            epsilon: 1.0,
            shape: CubicShape::default(),
            time: TimeGrid::new(0.0, 0.05, 1000).expect("static grid"),
            space: tank_grid(),
        }
    }
}

/// `s(x,t) = A (0.01x)³ sin(2πf₁t + ε sin(2πF t))`.
pub fn fm_cubic_field(p: &FmParams) -> Result<SignalField> {
    if !(p.modulation.is_finite() && p.modulation > 0.0) {
        return Err(CodError::invalid(format!(
            "modulation frequency must be > 0, got {}",
            p.modulation
        )));
    }
    if !(p.carrier.is_finite() && p.carrier > p.modulation) {
        return Err(CodError::invalid(format!(
            "carrier {} must exceed the modulation frequency {}",
            p.carrier, p.modulation
        )));
    }
    if !(p.epsilon.is_finite() && p.epsilon >= 0.0) {
        return Err(CodError::invalid(format!(
            "modulation depth must be ≥ 0, got {}",
            p.epsilon
        )));
    }
    if !(p.amplitude.is_finite() && p.shape.scale.is_finite()) {
        return Err(CodError::invalid(
            "amplitude and shape scale must be finite",
        ));
    }
    let w1 = 2.0 * PI * p.carrier;
    let wm = 2.0 * PI * p.modulation;
    SignalField::from_fn(p.time, p.space.clone(), |t, x| {
        p.amplitude * p.shape.eval(x) * (w1 * t + p.epsilon * (wm * t).sin()).sin()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub order: i32,
    pub frequency: f64,
    pub weight: f64,
}

/// Lines of `e^{i(ω₁t + ε sin Ωt)} = Σ_n J_n(ε) e^{i(ω₁ + nΩ)t}` for
/// `|n| ≤ n_max`, ascending in frequency, with weight `J_n(ε)²`.
pub fn jacobi_anger_lines(
    f1: f64,
    modulation: f64,
    epsilon: f64,
    n_max: u32,
) -> Result<Vec<SpectralLine>> {
    if !(1..=BESSEL_MAX_ORDER).contains(&n_max) {
        return Err(CodError::invalid(format!(
            "line count must lie in 1..={BESSEL_MAX_ORDER}, got {n_max}"
        )));
    }
    if !(f1.is_finite() && modulation.is_finite() && modulation > 0.0) {
        return Err(CodError::invalid(
            "frequencies must be finite with a positive modulation",
        ));
    }
    let n_max = n_max as i32;
    (-n_max..=n_max)
        .map(|n| {
            Ok(SpectralLine {
                order: n,
                frequency: f1 + n as f64 * modulation,
                weight: bessel_j_signed(n, epsilon)?.powi(2),
            })
        })
        .collect()
}

/// Smallest `n_max ≥ 1` whose omitted weight `2 Σ_{n > n_max} J_n(ε)²` is
/// below `tol`.
pub fn jacobi_anger_truncation(epsilon: f64, tol: f64) -> Result<u32> {
    let squares: Vec<f64> = (0..=BESSEL_MAX_ORDER)
        .map(|n| bessel_j_signed(n as i32, epsilon).map(|v| v * v))
        .collect::<Result<_>>()?;
    for n_max in 1..BESSEL_MAX_ORDER {
        let tail: f64 = 2.0 * squares[n_max as usize + 1..].iter().sum::<f64>();
        if tail < tol {
            return Ok(n_max);
        }
    }
    Err(CodError::invalid(format!(
        "no truncation within order {BESSEL_MAX_ORDER} meets tolerance {tol} at depth {epsilon}"
    )))
}

/// Cosine-spaced points `x_j = -(L/2) cos(π j / (Nx-1))` on `[-L/2, L/2]`,
/// dense near the walls, with trapezoidal weights.
pub fn chebyshev_grid(length: f64, count: usize) -> Result<SpatialGrid> {
    if count < 3 {
        return Err(CodError::invalid(format!(
            "cosine-spaced grid needs at least 3 points, got {count}"
        )));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(CodError::invalid(format!(
            "length must be positive, got {length}"
        )));
    }
    // sin form of the same nodes: exact ±L/2 at the ends and exact 0 in the middle.
    let m = (count - 1) as f64;
    let positions: Vec<f64> = (0..count)
        .map(|j| 0.5 * length * (PI * (2.0 * j as f64 - m) / (2.0 * m)).sin())
        .collect();
    let weights = trapezoidal_weights(&positions)?;
    SpatialGrid::with_weights(positions, weights)
}

/// Adds i.i.d. `N(0, σ²)` noise to every sample.
///
/// The stream is ChaCha8 seeded through `seed_from_u64`, drawn in
/// column-major order and shaped by the `rand_distr` normal sampler, so a
/// given seed yields the same field on every platform.
pub fn add_noise(field: &SignalField, sigma: f64, seed: u64) -> Result<SignalField> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(CodError::invalid(format!(
            "noise level must be ≥ 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(field.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| CodError::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = field.values().clone();
    for v in values.iter_mut() {
        *v += normal.sample(&mut rng);
    }
    SignalField::new(*field.time(), field.space().clone(), values)
}
