//! Independent reference eigensolver for small decompositions.
//!
//! Builds the weighted covariance with plain loops, finds its characteristic
//! polynomial by the Faddeev–LeVerrier recurrence, extracts the (real,
//! non-negative) roots by Newton iteration from an upper bound with
//! deflation, and recovers each eigenvector from a column of the adjugate of
//! `C - λI`. Nothing here shares code with the main engine beyond the input
//! field, so agreement between the two is meaningful.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decompose::CodResult;
use crate::error::Result;
use crate::field::{AnalyticField, SignalField};
use crate::grid::{SpatialGrid, TimeGrid};

type Matrix = Vec<Vec<Complex64>>;

/// Largest spatial size handled by the reference solver.
pub const ORACLE_MAX_POINTS: usize = 4;

/// `C_ij = (1/Nt) Σ_n √w_i s_c(t_n, x_i) conj(√w_j s_c(t_n, x_j))`.
pub fn dense_covariance(field: &AnalyticField) -> Matrix {
    let v = field.values();
    let (nt, nx) = v.shape();
    let sw: Vec<f64> = field.space().weights().iter().map(|w| w.sqrt()).collect();
    let mut c = vec![vec![Complex64::new(0.0, 0.0); nx]; nx];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, cij) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..nt {
                acc += v[(n, i)] * sw[i] * (v[(n, j)] * sw[j]).conj();
            }
            *cij = acc / nt as f64;
        }
    }
    c
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Characteristic polynomial `det(λI - C)` as real coefficients, constant
/// term first. The imaginary parts vanish for Hermitian `C` and are dropped.
pub fn characteristic_polynomial(c: &Matrix) -> Vec<f64> {
    let n = c.len();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for k in 1..=n {
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += coeffs[n - k + 1];
        }
        let am = matmul(c, &m);
        let trace: Complex64 = (0..n).map(|i| am[i][i]).sum();
        coeffs[n - k] = -trace.re / k as f64;
        m = am;
    }
    coeffs
}

fn eval_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn newton(coeffs: &[f64], mut x: f64) -> f64 {
    for _ in 0..500 {
        let (p, dp) = eval_with_derivative(coeffs, x);
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        let next = x - step;
        if !next.is_finite() || step.abs() <= 1e-17 * x.abs().max(f64::MIN_POSITIVE) {
            return if next.is_finite() { next } else { x };
        }
        x = next;
    }
    x
}

/// Roots of a real-rooted polynomial (constant term first), descending.
///
/// Newton started above the largest root descends monotonically onto it;
/// the root is divided out and the process repeats. Each root is finally
/// polished against the undeflated polynomial.
pub fn real_roots_descending(coeffs: &[f64]) -> Vec<f64> {
    let degree = coeffs.len() - 1;
    let bound = |c: &[f64]| {
        let lead = c[c.len() - 1];
        1.0 + c[..c.len() - 1]
            .iter()
            .map(|v| (v / lead).abs())
            .fold(0.0, f64::max)
    };
    let mut work = coeffs.to_vec();
    let mut roots = Vec::with_capacity(degree);
    while work.len() > 1 {
        let r = newton(&work, bound(&work));
        roots.push(newton(coeffs, r));
        // synthetic division by (x - r)
        let d = work.len() - 1;
        let mut quotient = vec![0.0; d];
        let mut carry = 0.0;
        for k in (0..d).rev() {
            carry = work[k + 1] + carry * r;
            quotient[k] = carry;
        }
        work = quotient;
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

fn det3(m: [[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det(m: &Matrix) -> Complex64 {
    match m.len() {
        0 => Complex64::new(1.0, 0.0),
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => det3([
            [m[0][0], m[0][1], m[0][2]],
            [m[1][0], m[1][1], m[1][2]],
            [m[2][0], m[2][1], m[2][2]],
        ]),
        n => (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                m[0][j] * det(&minor(m, 0, j)) * sign
            })
            .sum(),
    }
}

fn minor(m: &Matrix, row: usize, col: usize) -> Matrix {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, v)| *v)
                .collect()
        })
        .collect()
}

/// Unit eigenvector for a simple eigenvalue: the largest column of
/// `adj(C - λI)`.
pub fn eigenvector(c: &Matrix, lambda: f64) -> Vec<Complex64> {
    let n = c.len();
    let mut shifted = c.clone();
    for (i, row) in shifted.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    if n == 1 {
        return vec![Complex64::new(1.0, 0.0)];
    }
    // adj[i][j] = (-1)^{i+j} det(minor(j, i))
    let column = |j: usize| -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                det(&minor(&shifted, j, i)) * sign
            })
            .collect()
    };
    let best = (0..n)
        .map(column)
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .expect("n ≥ 2");
    let s = norm(&best);
    best.into_iter().map(|z| z / s).collect()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Outcome of one engine-versus-reference comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    /// `max_j |λ_engine - λ_ref| / λ_ref`.
    pub eigenvalue_rel_error: f64,
    /// Largest sine of the principal angle between matching eigenvectors.
    pub max_sin_angle: f64,
}

/// Spectrum is too clustered (or too close to singular) for the
/// single-vector comparison to be well conditioned.
fn well_separated(values: &[f64]) -> bool {
    let top = values[0];
    top > 0.0
        && values.iter().all(|v| *v > 1e-4 * top)
        && values.windows(2).all(|p| p[0] - p[1] > 1e-3 * top)
}

/// Compares an engine result against the reference solver. `None` when the
/// instance is too close to degenerate to compare eigenvectors one by one.
pub fn compare(field: &AnalyticField, result: &CodResult) -> Option<OracleComparison> {
    let c = dense_covariance(field);
    if c.len() > ORACLE_MAX_POINTS || c.len() > field.time().len() {
        return None;
    }
    let values = real_roots_descending(&characteristic_polynomial(&c));
    if !well_separated(&values) {
        return None;
    }
    let sw: Vec<f64> = field.space().weights().iter().map(|w| w.sqrt()).collect();
    let mut rel = 0.0f64;
    let mut sin = 0.0f64;
    for (lambda, mode) in values.iter().zip(&result.modes) {
        rel = rel.max((mode.energy - lambda).abs() / lambda);
        let reference = eigenvector(&c, *lambda);
        let engine: Vec<Complex64> = mode
            .spatial_mode
            .iter()
            .zip(&sw)
            .map(|(z, s)| z * *s)
            .collect();
        let overlap: Complex64 = reference
            .iter()
            .zip(&engine)
            .map(|(r, e)| r.conj() * e)
            .sum();
        let cos = (overlap.norm() / norm(&engine)).min(1.0);
        sin = sin.max((1.0 - cos * cos).max(0.0).sqrt());
    }
    Some(OracleComparison {
        eigenvalue_rel_error: rel,
        max_sin_angle: sin,
    })
}

/// Random small field: `8..=16` time samples, `2..=4` points on a random
/// strictly increasing grid, entries uniform in `[-1, 1)`.
pub fn random_small_field(seed: u64) -> Result<SignalField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nt = rng.random_range(8..=16);
    let nx = rng.random_range(2..=ORACLE_MAX_POINTS);
    let mut x = 0.0;
    let positions: Vec<f64> = (0..nx)
        .map(|_| {
            x += rng.random_range(0.1..2.0);
            x
        })
        .collect();
    let time = TimeGrid::new(0.0, rng.random_range(0.01..1.0), nt)?;
    let space = SpatialGrid::from_positions(positions)?;
    let values = DMatrix::from_fn(nt, nx, |_, _| rng.random_range(-1.0..1.0));
    SignalField::new(time, space, values)
}
