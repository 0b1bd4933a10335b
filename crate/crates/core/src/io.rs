//! CSV ingestion and result files.
//!
//! Input is two header-less CSV files plus a time step given separately:
//! a grid file with one row per spatial point (`position` or
//! `position,weight`) and a signal file with one row per time sample and one
//! column per spatial point. Output floats are written as `{:.16e}`
//! (17 significant digits), which reads back bit-exactly.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::decompose::{CodResult, NEGLIGIBLE_ENERGY_RATIO};
use crate::error::{CodError, ParseError, Result};
use crate::field::SignalField;
use crate::grid::{SpatialGrid, TimeGrid};
use crate::spectrum::{coefficient_spectrum, SpectrumSeries};

/// Where quadrature weights come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Weights from the grid file when it has them, trapezoidal otherwise.
    #[default]
    Auto,
    /// Trapezoidal weights from the positions, ignoring any weight column.
    On,
    /// Unit weights.
    Off,
}

/// Contents of a grid file.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub positions: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

fn parse_error(
    file: &Path,
    line: usize,
    column: Option<usize>,
    message: impl Into<String>,
) -> CodError {
    CodError::Parse(ParseError {
        file: file.to_path_buf(),
        line,
        column,
        message: message.into(),
    })
}

/// Rows of a header-less numeric CSV file, each tagged with its 1-based line.
fn read_rows(path: &Path) -> Result<Vec<(usize, Vec<f64>)>> {
    let file = File::open(path).map_err(|e| CodError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line() as usize;
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(line, |p| p.line() as usize);
                return Err(parse_error(path, line, None, e.to_string()));
            }
        }
        let line = record.position().map_or(line, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        parse_error(
                            path,
                            line,
                            Some(c + 1),
                            format!("'{cell}' is not a finite number"),
                        )
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, values));
    }
    if rows.is_empty() {
        return Err(parse_error(path, 1, None, "file has no data rows"));
    }
    Ok(rows)
}

pub fn read_grid_csv(path: &Path) -> Result<GridFile> {
    let rows = read_rows(path)?;
    let width = rows[0].1.len();
    if width != 1 && width != 2 {
        return Err(parse_error(
            path,
            rows[0].0,
            None,
            format!("grid rows need 1 or 2 cells (position[,weight]), found {width}"),
        ));
    }
    let mut positions = Vec::with_capacity(rows.len());
    let mut weights = Vec::with_capacity(rows.len());
    for (line, row) in &rows {
        if row.len() != width {
            return Err(parse_error(
                path,
                *line,
                None,
                format!("ragged row: {} cells, expected {width}", row.len()),
            ));
        }
        if let Some(&prev) = positions.last() {
            if row[0] <= prev {
                return Err(parse_error(
                    path,
                    *line,
                    Some(1),
                    format!(
                        "positions must be strictly increasing: {} follows {prev}",
                        row[0]
                    ),
                ));
            }
        }
        positions.push(row[0]);
        if width == 2 {
            if row[1] <= 0.0 {
                return Err(parse_error(
                    path,
                    *line,
                    Some(2),
                    format!("weight {} must be positive", row[1]),
                ));
            }
            weights.push(row[1]);
        }
    }
    if positions.len() < 2 {
        return Err(parse_error(
            path,
            rows[0].0,
            None,
            "grid needs at least 2 points",
        ));
    }
    Ok(GridFile {
        positions,
        weights: (width == 2).then_some(weights),
    })
}

/// Signal matrix, rows = time samples.
pub fn read_signal_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let rows = read_rows(path)?;
    let width = rows[0].1.len();
    for (line, row) in &rows {
        if row.len() != width {
            return Err(parse_error(
                path,
                *line,
                None,
                format!("ragged row: {} cells, expected {width}", row.len()),
            ));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), width, |n, j| rows[n].1[j]))
}

/// Builds the spatial grid for the requested weighting.
pub fn spatial_grid(grid: GridFile, weighting: Weighting) -> Result<SpatialGrid> {
    match (weighting, grid.weights) {
        (Weighting::Auto, Some(w)) => SpatialGrid::with_weights(grid.positions, w),
        (Weighting::Auto | Weighting::On, _) => SpatialGrid::from_positions(grid.positions),
        (Weighting::Off, _) => SpatialGrid::with_unit_weights(grid.positions),
    }
}

/// Reads the two-file format into a field sampled every `dt` seconds from t = 0.
pub fn read_signal_csv(
    grid_path: &Path,
    signal_path: &Path,
    dt: f64,
    weighting: Weighting,
) -> Result<SignalField> {
    let grid = read_grid_csv(grid_path)?;
    let values = read_signal_matrix(signal_path)?;
    if values.ncols() != grid.positions.len() {
        return Err(parse_error(
            signal_path,
            1,
            None,
            format!(
                "{} columns but {} lists {} spatial points",
                values.ncols(),
                grid_path.display(),
                grid.positions.len()
            ),
        ));
    }
    let time = TimeGrid::new(0.0, dt, values.nrows())?;
    let space = spatial_grid(grid, weighting)?;
    SignalField::new(time, space, values)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CodError::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CodError::io(dir, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| CodError::io(path, e))
}

/// Float text used in every output file.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_line(
    w: &mut impl Write,
    path: &Path,
    cells: impl IntoIterator<Item = String>,
) -> Result<()> {
    let line = cells.into_iter().collect::<Vec<_>>().join(",");
    writeln!(w, "{line}").map_err(|e| CodError::io(path, e))
}

/// Writes `grid.csv` (positions, plus weights when `with_weights`) and
/// `signal.csv` in the input format.
pub fn write_signal_csv(
    field: &SignalField,
    dir: &Path,
    with_weights: bool,
) -> Result<(PathBuf, PathBuf)> {
    ensure_dir(dir)?;
    let grid_path = dir.join("grid.csv");
    let mut w = create(&grid_path)?;
    for (x, wt) in field
        .space()
        .positions()
        .iter()
        .zip(field.space().weights())
    {
        let mut cells = vec![fmt_f64(*x)];
        if with_weights {
            cells.push(fmt_f64(*wt));
        }
        write_line(&mut w, &grid_path, cells)?;
    }
    finish(&grid_path, w)?;

    let signal_path = dir.join("signal.csv");
    let mut w = create(&signal_path)?;
    for row in field.values().row_iter() {
        write_line(&mut w, &signal_path, row.iter().map(|v| fmt_f64(*v)))?;
    }
    finish(&signal_path, w)?;
    Ok((grid_path, signal_path))
}

/// How a result was produced, echoed into `summary.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub grid: Option<String>,
    pub signal: Option<String>,
    pub preset: Option<String>,
    pub dt: f64,
    pub rank: Option<usize>,
    pub weighted: Weighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub index: usize,
    pub energy: f64,
    pub energy_fraction: f64,
    pub travelling_index: f64,
    pub amplitude: f64,
    pub dominant_frequency: f64,
    pub negligible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub hermitian_residual: f64,
    pub eigen_residual: f64,
    pub min_raw_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub library_version: String,
    pub config: ConfigEcho,
    pub nt: usize,
    pub nx: usize,
    pub dt: f64,
    pub total_energy: f64,
    pub degenerate: bool,
    pub negligible_threshold: f64,
    pub modes_total: usize,
    pub modes: Vec<ModeSummary>,
    pub diagnostics: Diagnostics,
}

/// Summary of the leading `rank` modes (all when `None`).
pub fn summarize(result: &CodResult, config: &ConfigEcho, spectra: &[SpectrumSeries]) -> Summary {
    let total = result.total_energy;
    let modes = result
        .modes
        .iter()
        .zip(spectra)
        .enumerate()
        .map(|(j, (m, s))| ModeSummary {
            index: j + 1,
            energy: m.energy,
            energy_fraction: if total > 0.0 { m.energy / total } else { 0.0 },
            travelling_index: m.travelling_index,
            amplitude: m.amplitude,
            dominant_frequency: s.dominant_frequency(),
            negligible: m.negligible,
        })
        .collect();
    Summary {
        library_version: crate::VERSION.to_string(),
        config: config.clone(),
        nt: result.time.len(),
        nx: result.space.len(),
        dt: result.time.dt(),
        total_energy: total,
        degenerate: result.is_degenerate(),
        negligible_threshold: NEGLIGIBLE_ENERGY_RATIO,
        modes_total: result.modes.len(),
        modes,
        diagnostics: Diagnostics {
            hermitian_residual: result.diagnostics.hermitian_residual,
            eigen_residual: result.diagnostics.eigen_residual,
            min_raw_eigenvalue: result.diagnostics.min_raw_eigenvalue,
        },
    }
}

/// Pretty JSON with every float printed to 17 significant digits.
struct PreciseFormatter(serde_json::ser::PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
            self.0.$name(writer $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

pub fn summary_to_json(summary: &Summary) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        PreciseFormatter(serde_json::ser::PrettyFormatter::with_indent(b"  ")),
    );
    summary
        .serialize(&mut ser)
        .map_err(|e| CodError::invalid(format!("cannot serialize summary: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes `summary.json`, `modes.csv`, `coeffs.csv` and `spectra.csv` for
/// the leading `rank` modes (all modes when `None`).
pub fn write_result(
    result: &CodResult,
    config: &ConfigEcho,
    rank: Option<usize>,
    dir: &Path,
) -> Result<Summary> {
    let k = rank.unwrap_or(result.modes.len());
    if k > result.modes.len() {
        return Err(CodError::invalid(format!(
            "rank {k} exceeds the {} available modes",
            result.modes.len()
        )));
    }
    ensure_dir(dir)?;
    let modes = &result.modes[..k];
    let spectra: Vec<SpectrumSeries> = modes
        .iter()
        .map(|m| coefficient_spectrum(m, &result.time))
        .collect();

    let mut summary = summarize(result, config, &spectra);
    summary.modes.truncate(k);
    let path = dir.join("summary.json");
    fs::write(&path, summary_to_json(&summary)?).map_err(|e| CodError::io(&path, e))?;

    let path = dir.join("modes.csv");
    let mut w = create(&path)?;
    let header = ["x".to_string(), "w".to_string()]
        .into_iter()
        .chain((1..=k).flat_map(|j| [format!("re_phi{j}"), format!("im_phi{j}")]));
    write_line(&mut w, &path, header)?;
    for (i, (x, wt)) in result
        .space
        .positions()
        .iter()
        .zip(result.space.weights())
        .enumerate()
    {
        let cells = [fmt_f64(*x), fmt_f64(*wt)].into_iter().chain(
            modes
                .iter()
                .flat_map(|m| [fmt_f64(m.spatial_mode[i].re), fmt_f64(m.spatial_mode[i].im)]),
        );
        write_line(&mut w, &path, cells)?;
    }
    finish(&path, w)?;

    let path = dir.join("coeffs.csv");
    let mut w = create(&path)?;
    let header = std::iter::once("t".to_string())
        .chain((1..=k).flat_map(|j| [format!("re_a{j}"), format!("im_a{j}")]));
    write_line(&mut w, &path, header)?;
    for (n, t) in result.time.times().enumerate() {
        let cells = std::iter::once(fmt_f64(t)).chain(modes.iter().flat_map(|m| {
            [
                fmt_f64(m.temporal_coeffs[n].re),
                fmt_f64(m.temporal_coeffs[n].im),
            ]
        }));
        write_line(&mut w, &path, cells)?;
    }
    finish(&path, w)?;

    let path = dir.join("spectra.csv");
    let mut w = create(&path)?;
    let header =
        std::iter::once("frequency".to_string()).chain((1..=k).map(|j| format!("amplitude{j}")));
    write_line(&mut w, &path, header)?;
    let bins = result.time.len() / 2 + 1;
    for b in 0..bins {
        let f = b as f64 / result.time.duration();
        let cells =
            std::iter::once(fmt_f64(f)).chain(spectra.iter().map(|s| fmt_f64(s.amplitude[b])));
        write_line(&mut w, &path, cells)?;
    }
    finish(&path, w)?;
    Ok(summary)
}

/// Writes a single spectrum as `frequency,amplitude` with a header row.
pub fn write_spectrum_csv(spectrum: &SpectrumSeries, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    let mut w = create(path)?;
    write_line(
        &mut w,
        path,
        ["frequency".to_string(), "amplitude".to_string()],
    )?;
    for (f, a) in spectrum.frequencies.iter().zip(&spectrum.amplitude) {
        write_line(&mut w, path, [fmt_f64(*f), fmt_f64(*a)])?;
    }
    finish(path, w)
}
