//! Sampled spatio-temporal fields: rows are time samples, columns are
//! spatial points.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CodError, Result};
use crate::grid::{SpatialGrid, TimeGrid};

/// Real field `s(t_n, x_j)` stored as an `Nt × Nx` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalField {
    time: TimeGrid,
    space: SpatialGrid,
    values: DMatrix<f64>,
}

impl SignalField {
    pub fn new(time: TimeGrid, space: SpatialGrid, values: DMatrix<f64>) -> Result<Self> {
        let field = Self::new_unchecked(time, space, values);
        let report = validate_field(&field);
        if report.is_ok() {
            Ok(field)
        } else {
            Err(CodError::InvalidField(report))
        }
    }

    /// Assembles a field without checking it; see [`validate_field`].
    pub fn new_unchecked(time: TimeGrid, space: SpatialGrid, values: DMatrix<f64>) -> Self {
        Self {
            time,
            space,
            values,
        }
    }

    /// Evaluates `f(t, x)` on every grid node.
    pub fn from_fn(
        time: TimeGrid,
        space: SpatialGrid,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self> {
        let values = DMatrix::from_fn(time.len(), space.len(), |n, j| {
            f(time.time(n), space.positions()[j])
        });
        Self::new(time, space, values)
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn space(&self) -> &SpatialGrid {
        &self.space
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    /// Same samples on a different spatial grid with the same number of points.
    pub fn with_space(self, space: SpatialGrid) -> Result<Self> {
        Self::new(self.time, space, self.values)
    }
}

/// Complex analytic field. Its real part is the source [`SignalField`] and
/// each column has no content at strictly negative frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticField {
    time: TimeGrid,
    space: SpatialGrid,
    values: DMatrix<Complex64>,
}

impl AnalyticField {
    pub fn new(time: TimeGrid, space: SpatialGrid, values: DMatrix<Complex64>) -> Result<Self> {
        time.check()?;
        space.check()?;
        if values.nrows() != time.len() || values.ncols() != space.len() {
            return Err(CodError::invalid(format!(
                "analytic values are {}×{}, grids require {}×{}",
                values.nrows(),
                values.ncols(),
                time.len(),
                space.len()
            )));
        }
        if values
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(CodError::invalid("analytic field has non-finite entries"));
        }
        Ok(Self {
            time,
            space,
            values,
        })
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn space(&self) -> &SpatialGrid {
        &self.space
    }

    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    /// `Z = S_cᵀ`, the `Nx × Nt` layout used by the decomposition.
    pub fn transposed(&self) -> DMatrix<Complex64> {
        self.values.transpose()
    }

    /// Real part as a [`SignalField`].
    pub fn real_part(&self) -> SignalField {
        SignalField::new_unchecked(self.time, self.space.clone(), self.values.map(|z| z.re))
    }

    /// `(1/Nt) Σ_{n,j} w_j |s_c(t_n, x_j)|²`.
    pub fn weighted_energy(&self) -> f64 {
        let w = self.space.weights();
        let total: f64 = self
            .values
            .column_iter()
            .zip(w)
            .map(|(col, wj)| wj * col.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        total / self.time.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    Time(String),
    Space(String),
    Dimensions {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    NonFinite {
        row: usize,
        col: usize,
        value: f64,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::Time(msg) => write!(f, "time grid: {msg}"),
            ValidationIssue::Space(msg) => write!(f, "spatial grid: {msg}"),
            ValidationIssue::Dimensions {
                rows,
                cols,
                expected_rows,
                expected_cols,
            } => write!(
                f,
                "values are {rows}×{cols} but the grids require {expected_rows}×{expected_cols}"
            ),
            ValidationIssue::NonFinite { row, col, value } => {
                write!(f, "non-finite value {value} at row {row}, column {col}")
            }
        }
    }
}

/// Every invariant violation found in a field. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "ok");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Non-finite entries reported before the list is truncated.
const MAX_NON_FINITE_REPORTED: usize = 16;

pub fn validate_field(field: &SignalField) -> ValidationReport {
    let mut issues = Vec::new();
    if let Err(e) = field.time.check() {
        issues.push(ValidationIssue::Time(strip_prefix(e)));
    }
    if let Err(e) = field.space.check() {
        issues.push(ValidationIssue::Space(strip_prefix(e)));
    }
    let (rows, cols) = field.values.shape();
    if rows != field.time.len() || cols != field.space.len() {
        issues.push(ValidationIssue::Dimensions {
            rows,
            cols,
            expected_rows: field.time.len(),
            expected_cols: field.space.len(),
        });
    }
    let non_finite = (0..cols)
        .flat_map(|col| (0..rows).map(move |row| (row, col)))
        .filter(|&(row, col)| !field.values[(row, col)].is_finite())
        .take(MAX_NON_FINITE_REPORTED)
        .map(|(row, col)| ValidationIssue::NonFinite {
            row,
            col,
            value: field.values[(row, col)],
        });
    issues.extend(non_finite);
    ValidationReport { issues }
}

fn strip_prefix(e: CodError) -> String {
    match e {
        CodError::InvalidArgument(msg) => msg,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::uniform_grid;

    fn small_field() -> SignalField {
        let time = TimeGrid::new(0.0, 0.1, 8).unwrap();
        let space = uniform_grid(0.0, 1.0, 3).unwrap();
        SignalField::from_fn(time, space, |t, x| t + x).unwrap()
    }

    #[test]
    fn well_formed_field_is_ok() {
        assert!(validate_field(&small_field()).is_ok());
    }

    #[test]
    fn nan_entry_is_located() {
        let f = small_field();
        let mut values = f.values().clone();
        values[(5, 2)] = f64::NAN;
        let bad = SignalField::new_unchecked(*f.time(), f.space().clone(), values);
        let report = validate_field(&bad);
        assert_eq!(report.issues.len(), 1);
        match &report.issues[0] {
            ValidationIssue::NonFinite { row, col, .. } => assert_eq!((*row, *col), (5, 2)),
            other => panic!("unexpected issue {other:?}"),
        }
        assert!(report.to_string().contains("row 5, column 2"));
    }

    #[test]
    fn three_time_samples_rejected() {
        let time = TimeGrid::new_unchecked(0.0, 0.1, 3);
        let space = uniform_grid(0.0, 1.0, 2).unwrap();
        let bad = SignalField::new_unchecked(time, space, DMatrix::zeros(3, 2));
        let report = validate_field(&bad);
        assert!(!report.is_ok());
        assert!(
            report.to_string().contains("count ≥ 4 violated"),
            "{report}"
        );
    }

    #[test]
    fn dimension_mismatch_reported() {
        let time = TimeGrid::new(0.0, 0.1, 8).unwrap();
        let space = uniform_grid(0.0, 1.0, 2).unwrap();
        let err = SignalField::new(time, space, DMatrix::zeros(8, 3)).unwrap_err();
        assert!(matches!(err, CodError::InvalidField(_)));
    }

    #[test]
    fn weighted_energy_of_constant_field() {
        let time = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let space = uniform_grid(0.0, 2.0, 3).unwrap();
        let values = DMatrix::from_element(4, 3, Complex64::new(0.0, 2.0));
        let a = AnalyticField::new(time, space, values).unwrap();
        // Σ w = 2, |s|² = 4
        assert!((a.weighted_energy() - 8.0).abs() < 1e-14);
    }
}
