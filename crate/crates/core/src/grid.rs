//! Time and space sampling grids.
//!
//! Time sampling is always uniform: the analytic signal is built with an
//! exact-length DFT along time, which has no meaning for irregular sampling.
//! Space sampling may be irregular; every spatial point carries a positive
//! quadrature weight so that discrete sums approximate spatial integrals.
//!
//! Units are metadata only. The built-in generators use millimetres for
//! positions and seconds for time.

use crate::error::{CodError, Result};

/// Smallest number of time samples accepted anywhere in the crate.
pub const MIN_TIME_SAMPLES: usize = 4;

/// Uniform time sampling `t_n = t0 + n * dt`, `n = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    count: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, count: usize) -> Result<Self> {
        let grid = Self::new_unchecked(t0, dt, count);
        grid.check()?;
        Ok(grid)
    }

    /// Builds a grid without checking its invariants. Use [`crate::field::validate_field`]
    /// to diagnose fields assembled from unchecked parts.
    pub fn new_unchecked(t0: f64, dt: f64, count: usize) -> Self {
        Self { t0, dt, count }
    }

    pub(crate) fn check(&self) -> Result<()> {
        if !self.t0.is_finite() {
            return Err(CodError::invalid("time origin must be finite"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(CodError::invalid(format!(
                "time step must be positive and finite, got {}",
                self.dt
            )));
        }
        if self.count < MIN_TIME_SAMPLES {
            return Err(CodError::invalid(format!(
                "count ≥ {MIN_TIME_SAMPLES} violated: {} time samples",
                self.count
            )));
        }
        Ok(())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Window length `T = count * dt`.
    pub fn duration(&self) -> f64 {
        self.count as f64 * self.dt
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |n| self.time(n))
    }

    /// DFT bin spacing `1 / (count * dt)` in Hz.
    pub fn frequency_resolution(&self) -> f64 {
        1.0 / self.duration()
    }
}

/// Strictly increasing spatial positions with positive quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl SpatialGrid {
    /// Grid with trapezoidal weights derived from the positions.
    pub fn from_positions(positions: Vec<f64>) -> Result<Self> {
        let weights = trapezoidal_weights(&positions)?;
        Ok(Self { positions, weights })
    }

    /// Grid with caller-supplied weights (e.g. read from a file).
    pub fn with_weights(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let grid = Self::new_unchecked(positions, weights);
        grid.check()?;
        Ok(grid)
    }

    /// Grid whose weights are all one. Weighted and plain inner products then coincide.
    pub fn with_unit_weights(positions: Vec<f64>) -> Result<Self> {
        let weights = vec![1.0; positions.len()];
        Self::with_weights(positions, weights)
    }

    pub fn new_unchecked(positions: Vec<f64>, weights: Vec<f64>) -> Self {
        Self { positions, weights }
    }

    pub(crate) fn check(&self) -> Result<()> {
        check_positions(&self.positions)?;
        if self.weights.len() != self.positions.len() {
            return Err(CodError::invalid(format!(
                "{} weights for {} positions",
                self.weights.len(),
                self.positions.len()
            )));
        }
        if let Some((j, w)) = self
            .weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(CodError::invalid(format!(
                "weight {j} must be positive and finite, got {w}"
            )));
        }
        Ok(())
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Index of the grid point closest to `x` (first one on ties).
    pub fn nearest_index(&self, x: f64) -> usize {
        let mut best = 0;
        for (j, p) in self.positions.iter().enumerate() {
            if (p - x).abs() < (self.positions[best] - x).abs() {
                best = j;
            }
        }
        best
    }

    /// Weighted inner product `Σ_j w_j conj(u_j) v_j`.
    pub fn inner(
        &self,
        u: &[num_complex::Complex64],
        v: &[num_complex::Complex64],
    ) -> num_complex::Complex64 {
        self.weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| a.conj() * b * *w)
            .sum()
    }
}

fn check_positions(positions: &[f64]) -> Result<()> {
    if positions.len() < 2 {
        return Err(CodError::invalid(format!(
            "at least 2 spatial points required, got {}",
            positions.len()
        )));
    }
    if let Some(j) = positions.iter().position(|x| !x.is_finite()) {
        return Err(CodError::invalid(format!("position {j} is not finite")));
    }
    if let Some(j) = positions.windows(2).position(|p| p[1] <= p[0]) {
        return Err(CodError::invalid(format!(
            "positions must be strictly increasing: x[{}] = {} follows x[{}] = {}",
            j + 1,
            positions[j + 1],
            j,
            positions[j]
        )));
    }
    Ok(())
}

/// Trapezoidal quadrature weights on an arbitrary strictly increasing grid.
///
/// End points get half of their single neighbouring interval, interior points
/// half of the two intervals around them, so the weights sum to the span
/// `x_last - x_first`.
pub fn trapezoidal_weights(positions: &[f64]) -> Result<Vec<f64>> {
    check_positions(positions)?;
    let n = positions.len();
    let mut weights = Vec::with_capacity(n);
    weights.push((positions[1] - positions[0]) / 2.0);
    for j in 1..n - 1 {
        weights.push((positions[j + 1] - positions[j - 1]) / 2.0);
    }
    weights.push((positions[n - 1] - positions[n - 2]) / 2.0);
    Ok(weights)
}

/// `count` equally spaced points from `x_start` to `x_end` inclusive, with
/// trapezoidal weights.
pub fn uniform_grid(x_start: f64, x_end: f64, count: usize) -> Result<SpatialGrid> {
    if !(x_start.is_finite() && x_end.is_finite() && x_end > x_start) {
        return Err(CodError::invalid(format!(
            "grid bounds must satisfy x_start < x_end, got [{x_start}, {x_end}]"
        )));
    }
    if count < 2 {
        return Err(CodError::invalid(format!(
            "uniform grid needs at least 2 points, got {count}"
        )));
    }
    let step = (x_end - x_start) / (count - 1) as f64;
    let mut positions: Vec<f64> = (0..count).map(|j| x_start + j as f64 * step).collect();
    positions[count - 1] = x_end;
    SpatialGrid::from_positions(positions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_uniform_grid() {
        let g = uniform_grid(0.0, 1.0, 2).unwrap();
        assert_eq!(g.positions(), &[0.0, 1.0]);
        assert_eq!(g.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn five_point_tank_grid() {
        let g = uniform_grid(-200.0, 200.0, 5).unwrap();
        assert_eq!(g.positions(), &[-200.0, -100.0, 0.0, 100.0, 200.0]);
        assert_eq!(g.weights(), &[50.0, 100.0, 100.0, 100.0, 50.0]);
    }

    #[test]
    fn weights_telescope_to_span() {
        let g = uniform_grid(0.0, 3.0, 4).unwrap();
        assert_relative_eq!(g.weights().iter().sum::<f64>(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn bad_uniform_arguments() {
        assert!(uniform_grid(1.0, 0.0, 5).is_err());
        assert!(uniform_grid(0.0, 0.0, 5).is_err());
        assert!(uniform_grid(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn trapezoid_uniform_and_irregular() {
        assert_eq!(
            trapezoidal_weights(&[0.0, 1.0, 2.0]).unwrap(),
            vec![0.5, 1.0, 0.5]
        );
        assert_eq!(
            trapezoidal_weights(&[0.0, 1.0, 3.0]).unwrap(),
            vec![0.5, 1.5, 1.0]
        );
    }

    #[test]
    fn trapezoid_six_point_sketch() {
        // Abscissae of the six-point non-uniform sampling sketch.
        let x = [0.7, 1.8, 3.2, 5.0, 6.8, 7.5];
        let w = trapezoidal_weights(&x).unwrap();
        let expected = [
            (1.8 - 0.7) / 2.0,
            (3.2 - 0.7) / 2.0,
            (5.0 - 1.8) / 2.0,
            (6.8 - 3.2) / 2.0,
            (7.5 - 5.0) / 2.0,
            (7.5 - 6.8) / 2.0,
        ];
        for (a, b) in w.iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn trapezoid_rejects_non_monotone() {
        assert!(trapezoidal_weights(&[0.0, 1.0, 1.0]).is_err());
        assert!(trapezoidal_weights(&[0.0, 2.0, 1.0]).is_err());
        assert!(trapezoidal_weights(&[0.0]).is_err());
    }

    #[test]
    fn time_grid_rules() {
        let t = TimeGrid::new(0.0, 0.5, 4).unwrap();
        assert_eq!(t.duration(), 2.0);
        assert_eq!(t.times().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0, 1.5]);
        assert!(TimeGrid::new(0.0, 0.5, 3).is_err());
        assert!(TimeGrid::new(0.0, 0.0, 8).is_err());
        assert!(TimeGrid::new(0.0, -1.0, 8).is_err());
    }

    #[test]
    fn custom_weights_must_be_positive() {
        assert!(SpatialGrid::with_weights(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(SpatialGrid::with_weights(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(SpatialGrid::with_weights(vec![0.0, 1.0], vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn nearest_index_picks_closest() {
        let g = uniform_grid(-200.0, 200.0, 5).unwrap();
        assert_eq!(g.nearest_index(-200.0), 0);
        assert_eq!(g.nearest_index(10.0), 2);
        assert_eq!(g.nearest_index(1e9), 4);
    }
}
