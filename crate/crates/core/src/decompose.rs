//! The decomposition engine.
//!
//! With `Z = S_cᵀ` (`Nx × Nt`) and `B = diag(√w)`, the weighted temporal
//! covariance is taken in its symmetric form
//!
//! ```text
//! C = (1/Nt) B Z Z† B
//! ```
//!
//! whose orthonormal eigenvectors `ψ_j` give the spatial modes
//! `φ_j = B⁻¹ ψ_j`. These satisfy `φ_j† W φ_k = δ_jk` on any grid, and reduce
//! to the plain covariance eigenvectors (up to a constant) when all weights
//! are equal. Temporal coefficients are the weighted projections
//! `a_j = φ_j† W Z`, and `λ_j = (1/Nt) Σ_n |a_j(t_n)|²`.
//!
//! When `Nx > Nt` the covariance has rank at most `Nt`; the eigenproblem is
//! then solved on the `Nt × Nt` factor of a thin QR of `B Z`, which yields
//! the same non-trivial modes at a fraction of the cost.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{CodError, Result};
use crate::field::{AnalyticField, SignalField};
use crate::gram::GramSummary;
use crate::grid::{SpatialGrid, TimeGrid};

/// Relative threshold under which a mode is flagged negligible.
pub const NEGLIGIBLE_ENERGY_RATIO: f64 = 1e-12;
/// Eigenvalues down to `-NEGATIVE_EIGENVALUE_TOLERANCE * λ_max` are rounding
/// noise and are clamped to zero; anything below is reported as an error.
pub const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-10;
/// Largest accepted `||C V - V Λ||_F / ||C||_F`.
pub const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CodMode {
    /// `φ_j`, unit norm in the weighted inner product.
    pub spatial_mode: Vec<Complex64>,
    /// `a_j(t_n)`.
    pub temporal_coeffs: Vec<Complex64>,
    /// `λ_j`.
    pub energy: f64,
    pub travelling_index: f64,
    pub amplitude: f64,
    /// `λ_j < 1e-12 λ_1`. Kept in the basis so reconstruction stays exact.
    pub negligible: bool,
}

/// Numerical health of one decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodDiagnostics {
    /// `max |C - C†|` of the matrix handed to the eigensolver, before symmetrization.
    pub hermitian_residual: f64,
    /// Smallest eigenvalue before clamping.
    pub min_raw_eigenvalue: f64,
    /// `||C V - V Λ||_F / ||C||_F`.
    pub eigen_residual: f64,
    /// True when the reduced `Nt × Nt` eigenproblem was solved.
    pub reduced: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodResult {
    pub modes: Vec<CodMode>,
    /// `Σ_j λ_j`.
    pub total_energy: f64,
    pub time: TimeGrid,
    pub space: SpatialGrid,
    pub diagnostics: CodDiagnostics,
}

impl CodResult {
    pub fn energies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.energy).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.total_energy == 0.0
    }
}

/// `B Z`, the weighted snapshot matrix (`Nx × Nt`).
fn weighted_snapshots(field: &AnalyticField) -> DMatrix<Complex64> {
    let sqrt_w: Vec<f64> = field.space().weights().iter().map(|w| w.sqrt()).collect();
    let mut y = field.transposed();
    for (mut row, s) in y.row_iter_mut().zip(&sqrt_w) {
        row *= Complex64::from(*s);
    }
    y
}

/// The symmetric weighted covariance `C = (1/Nt) B Z Z† B`.
pub fn weighted_covariance(field: &AnalyticField) -> DMatrix<Complex64> {
    let y = weighted_snapshots(field);
    let nt = field.time().len() as f64;
    (&y * y.adjoint()).unscale(nt)
}

fn hermitian_residual(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)] = Complex64::new(m[(j, j)].re, 0.0);
        for i in 0..j {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

struct Eigenpairs {
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
    hermitian_residual: f64,
    residual: f64,
}

fn hermitian_eigen(mut m: DMatrix<Complex64>) -> Result<Eigenpairs> {
    let hermitian_residual = hermitian_residual(&m);
    symmetrize(&mut m);
    let n = m.nrows();
    let norm = m.norm();
    let max_iter = 100 * n + 1000;
    let Some(eig) = SymmetricEigen::try_new(m.clone(), f64::EPSILON, max_iter) else {
        let off_diag = (0..n)
            .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        return Err(CodError::Eigen {
            reason: format!("no convergence within {max_iter} iterations"),
            residual: off_diag / norm.max(f64::MIN_POSITIVE),
        });
    };
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let vectors = eig.eigenvectors;
    let mut lambda_v = vectors.clone();
    for (mut col, l) in lambda_v.column_iter_mut().zip(&values) {
        col *= Complex64::from(*l);
    }
    let residual = if norm > 0.0 {
        (&m * &vectors - lambda_v).norm() / norm
    } else {
        0.0
    };
    if residual.is_nan() || residual > EIGEN_RESIDUAL_TOLERANCE {
        return Err(CodError::Eigen {
            reason: "eigenpair residual above tolerance".into(),
            residual,
        });
    }
    Ok(Eigenpairs {
        values,
        vectors,
        hermitian_residual,
        residual,
    })
}

/// Index of the largest-magnitude entry (first one on ties) and that magnitude.
fn peak(v: &[Complex64]) -> (usize, f64) {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bm), (i, z)| {
            let m = z.norm();
            if m > bm {
                (i, m)
            } else {
                (bi, bm)
            }
        })
}

/// Complex orthogonal decomposition of an analytic field.
pub fn cod(field: &AnalyticField) -> Result<CodResult> {
    let time = *field.time();
    let space = field.space().clone();
    let nt = time.len();
    let nx = space.len();
    if field.values().shape() != (nt, nx) {
        return Err(CodError::invalid(
            "analytic values do not match their grids",
        ));
    }
    if nx < 2 {
        return Err(CodError::invalid(
            "decomposition needs at least 2 spatial points",
        ));
    }
    let weights = space.weights();
    if weights.iter().any(|w| w.is_nan() || *w <= 0.0) {
        return Err(CodError::invalid("all quadrature weights must be positive"));
    }

    let y = weighted_snapshots(field);
    let reduced = nx > nt;
    let (eig, basis) = if reduced {
        let qr = y.qr();
        let q = qr.q();
        let r = qr.r();
        let m = (&r * r.adjoint()).unscale(nt as f64);
        (hermitian_eigen(m)?, Some(q))
    } else {
        let c = (&y * y.adjoint()).unscale(nt as f64);
        (hermitian_eigen(c)?, None)
    };
    let psi = match basis {
        Some(q) => q * &eig.vectors,
        None => eig.vectors.clone(),
    };

    let lambda_max = eig.values.iter().copied().fold(0.0f64, f64::max);
    let min_raw = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    if min_raw < -NEGATIVE_EIGENVALUE_TOLERANCE * lambda_max {
        return Err(CodError::Eigen {
            reason: format!("negative eigenvalue {min_raw:.3e} (largest {lambda_max:.3e})"),
            residual: eig.residual,
        });
    }

    let inv_sqrt_w: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    struct Candidate {
        energy: f64,
        mode: Vec<Complex64>,
        peak_mag: f64,
        peak_pos: usize,
    }
    let mut candidates: Vec<Candidate> = psi
        .column_iter()
        .zip(&eig.values)
        .map(|(col, &l)| {
            let mut mode: Vec<Complex64> =
                col.iter().zip(&inv_sqrt_w).map(|(z, s)| z * *s).collect();
            let (pos, mag) = peak(&mode);
            if mag > 0.0 {
                let rot = mode[pos].conj() / mag;
                for z in &mut mode {
                    *z *= rot;
                }
                mode[pos] = Complex64::new(mode[pos].re, 0.0);
            }
            Candidate {
                energy: l.max(0.0),
                mode,
                peak_mag: mag,
                peak_pos: pos,
            }
        })
        .collect();
    candidates.sort_by(|p, q| {
        q.energy
            .total_cmp(&p.energy)
            .then(q.peak_mag.total_cmp(&p.peak_mag))
            .then(p.peak_pos.cmp(&q.peak_pos))
    });

    // a_j(t_n) = Σ_x conj(φ_j(x)) w_x s_c(t_n, x), all modes at once.
    let m = candidates.len();
    let weighted_conj_modes =
        DMatrix::from_fn(nx, m, |x, j| candidates[j].mode[x].conj() * weights[x]);
    let coeffs = field.values() * weighted_conj_modes;

    let leading = candidates.first().map_or(0.0, |c| c.energy);
    let modes: Vec<CodMode> = candidates
        .into_iter()
        .enumerate()
        .map(|(j, c)| {
            let gram = GramSummary::from_mode(&c.mode, weights);
            CodMode {
                amplitude: c.energy.sqrt() * c.peak_mag.max(0.0),
                travelling_index: gram.travelling_index(),
                negligible: c.energy < NEGLIGIBLE_ENERGY_RATIO * leading || leading == 0.0,
                energy: c.energy,
                temporal_coeffs: coeffs.column(j).iter().copied().collect(),
                spatial_mode: c.mode,
            }
        })
        .collect();
    let total_energy = modes.iter().map(|m| m.energy).sum();

    Ok(CodResult {
        modes,
        total_energy,
        time,
        space,
        diagnostics: CodDiagnostics {
            hermitian_residual: eig.hermitian_residual,
            min_raw_eigenvalue: if min_raw.is_finite() { min_raw } else { 0.0 },
            eigen_residual: eig.residual,
            reduced,
        },
    })
}

fn check_rank(result: &CodResult, k: usize) -> Result<()> {
    if k > result.modes.len() {
        return Err(CodError::invalid(format!(
            "rank {k} exceeds the {} available modes",
            result.modes.len()
        )));
    }
    Ok(())
}

/// `Σ_{j<k} a_j(t) φ_j(x)` as an analytic field.
pub fn reconstruct(result: &CodResult, k: usize) -> Result<AnalyticField> {
    check_rank(result, k)?;
    let nt = result.time.len();
    let nx = result.space.len();
    let coeffs = DMatrix::from_fn(nt, k, |n, j| result.modes[j].temporal_coeffs[n]);
    let modes_t = DMatrix::from_fn(k, nx, |j, x| result.modes[j].spatial_mode[x]);
    let values = if k == 0 {
        DMatrix::zeros(nt, nx)
    } else {
        coeffs * modes_t
    };
    AnalyticField::new(result.time, result.space.clone(), values)
}

/// Real part of [`reconstruct`].
pub fn reconstruct_real(result: &CodResult, k: usize) -> Result<SignalField> {
    let analytic = reconstruct(result, k)?;
    SignalField::new(
        *analytic.time(),
        analytic.space().clone(),
        analytic.values().map(|z| z.re),
    )
}

/// `λ_j / Σλ`, in mode order.
pub fn modal_energy_fractions(result: &CodResult) -> Result<Vec<f64>> {
    if result.total_energy.is_nan() || result.total_energy <= 0.0 {
        return Err(CodError::invalid("total modal energy is zero"));
    }
    Ok(result
        .modes
        .iter()
        .map(|m| m.energy / result.total_energy)
        .collect())
}

/// `sqrt(λ) · max_x |φ(x)|`. Equals the generating amplitude for a
/// constant-envelope harmonic wave whose antinode lies on the grid.
pub fn amplitude_estimate(mode: &CodMode) -> f64 {
    let peak = mode
        .spatial_mode
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    mode.energy.max(0.0).sqrt() * peak
}

pub fn travelling_index(mode: &CodMode, space: &SpatialGrid) -> f64 {
    GramSummary::from_mode(&mode.spatial_mode, space.weights()).travelling_index()
}

/// Relative gap between the time-domain energy `(1/Nt) Σ |a|²` of a mode's
/// coefficients and the sum of its discrete power spectrum `Σ_k |A_k|² / Nt²`.
/// Zero for a zero mode.
pub fn psd_energy_check(mode: &CodMode, time: &TimeGrid) -> f64 {
    let a = &mode.temporal_coeffs;
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let _ = time;
    let time_energy = a.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    let mut spectrum = a.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut spectrum);
    let n2 = (n * n) as f64;
    let spectral_energy = spectrum.iter().map(|z| z.norm_sqr() / n2).sum::<f64>();
    let scale = if mode.energy > 0.0 {
        mode.energy
    } else {
        time_energy
    };
    if scale == 0.0 {
        return 0.0;
    }
    (time_energy - spectral_energy).abs() / scale
}
