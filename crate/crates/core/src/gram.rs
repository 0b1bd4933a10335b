//! Travelling index of a complex spatial mode.
//!
//! Writing a mode as `φ = u + i v`, the weighted Gram matrix of `{u, v}` is
//!
//! ```text
//! G = | a  c |     a = uᵀ W u,  b = vᵀ W v,  c = uᵀ W v
//!     | c  b |
//! ```
//!
//! and the travelling index is `sqrt(λ_min(G) / λ_max(G))`: 0 for a mode whose
//! trace in the complex plane is a segment (standing wave), 1 for a circle
//! (travelling wave).

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramSummary {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GramSummary {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn from_mode(mode: &[Complex64], weights: &[f64]) -> Self {
        assert_eq!(
            mode.len(),
            weights.len(),
            "mode and weights differ in length"
        );
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for (z, w) in mode.iter().zip(weights) {
            a += w * z.re * z.re;
            b += w * z.im * z.im;
            c += w * z.re * z.im;
        }
        Self { a, b, c }
    }

    /// `(λ_max, λ_min)` of the 2×2 Gram matrix.
    ///
    /// `λ_min` is taken as `det / λ_max` rather than `(a + b - d) / 2`: the
    /// difference form cancels catastrophically for nearly standing modes.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let Self { a, b, c } = *self;
        let d = ((a - b) * (a - b) + 4.0 * c * c).sqrt();
        let max = 0.5 * (a + b + d);
        if max <= 0.0 {
            return (0.0, 0.0);
        }
        let min = ((a * b - c * c) / max).max(0.0);
        (max, min)
    }

    /// Closed-form index `sqrt((a+b-√((a-b)²+4c²)) / (a+b+√((a-b)²+4c²)))`,
    /// with 0 for the degenerate `a + b = 0`.
    pub fn travelling_index(&self) -> f64 {
        let (max, min) = self.eigenvalues();
        if max <= 0.0 {
            return 0.0;
        }
        (min / max).sqrt().clamp(0.0, 1.0)
    }

    /// `a b - c² ≥ 0` up to rounding.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        self.a >= 0.0 && self.b >= 0.0 && self.a * self.b - self.c * self.c >= -tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn real_mode_is_standing() {
        assert_eq!(GramSummary::new(1.0, 0.0, 0.0).travelling_index(), 0.0);
    }

    #[test]
    fn circular_trace_is_travelling() {
        assert_eq!(GramSummary::new(1.0, 1.0, 0.0).travelling_index(), 1.0);
    }

    #[test]
    fn degenerate_zero_mode() {
        assert_eq!(GramSummary::new(0.0, 0.0, 0.0).travelling_index(), 0.0);
    }

    #[test]
    fn matches_difference_formula_away_from_zero() {
        let g = GramSummary::new(2.0, 0.7, 0.3);
        let d = ((g.a - g.b).powi(2) + 4.0 * g.c * g.c).sqrt();
        let direct = ((g.a + g.b - d) / (g.a + g.b + d)).sqrt();
        assert!((g.travelling_index() - direct).abs() < 1e-14);
    }

    #[test]
    fn sin_minus_i_alpha_cos_over_full_period() {
        // u = sin, v = -α cos sampled over one period: index = |α|
        let n = 400;
        let weights = vec![1.0 / n as f64; n];
        for alpha in [0.0, 0.25, -0.5, 1.0] {
            let mode: Vec<Complex64> = (0..n)
                .map(|j| {
                    let x = 2.0 * PI * j as f64 / n as f64;
                    Complex64::new(x.sin(), -alpha * x.cos())
                })
                .collect();
            let g = GramSummary::from_mode(&mode, &weights);
            assert!(g.is_positive_semidefinite(1e-12));
            assert!((g.travelling_index() - f64::abs(alpha)).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_standing_mode_stays_standing() {
        let weights = [0.5, 1.0, 1.0, 0.5];
        let rot = Complex64::from_polar(1.0, 0.7);
        let mode: Vec<Complex64> = [0.1, -0.4, 0.9, 0.3].iter().map(|&r| rot * r).collect();
        let idx = GramSummary::from_mode(&mode, &weights).travelling_index();
        assert!(idx < 1e-7, "{idx}");
    }
}
