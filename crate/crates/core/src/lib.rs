//! Complex orthogonal decomposition of spatio-temporal wave fields.
//!
//! A real field `s(t, x)` is turned into its analytic counterpart along time,
//! then split into spatially orthonormal complex modes with complex temporal
//! coefficients. Each mode carries an energy, an amplitude estimate and a
//! travelling index telling standing waves (0) from travelling ones (1).

pub mod analytic;
pub mod cli;
pub mod decompose;
pub mod error;
pub mod field;
pub mod generators;
pub mod gram;
pub mod grid;
pub mod io;
pub mod oracle;
pub mod selftest;
pub mod special;
pub mod spectrum;

pub use analytic::{analytic_field, analytic_series, hilbert_approx_error};
pub use decompose::{
    amplitude_estimate, cod, modal_energy_fractions, psd_energy_check, reconstruct,
    reconstruct_real, travelling_index, CodMode, CodResult,
};
pub use error::{CodError, ParseError, Result};
pub use field::{validate_field, AnalyticField, SignalField, ValidationReport};
pub use gram::GramSummary;
pub use grid::{trapezoidal_weights, uniform_grid, SpatialGrid, TimeGrid};
pub use spectrum::{coefficient_spectrum, point_spectrum, SpectrumSeries};

/// Crate version, echoed in written summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
