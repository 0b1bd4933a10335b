//! Command-line front end.
//!
//! Exit codes: 0 success, 1 bad input (usage, parse, validation, I/O),
//! 2 numerical failure or a failing self-test.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytic::analytic_field;
use crate::decompose::cod;
use crate::error::{CodError, Result};
use crate::field::SignalField;
use crate::generators::{
    add_noise, chebyshev_grid, damped_standing_field, fm_cubic_field, sloshing_field, DampedParams,
    FmParams, SloshingParams,
};
use crate::grid::{uniform_grid, SpatialGrid, TimeGrid};
use crate::io::{self, ConfigEcho, Weighting};
use crate::spectrum::{point_spectrum_with, Window};

#[derive(Debug, Parser)]
#[command(
    name = "cod",
    version,
    about = "Complex orthogonal decomposition of spatio-temporal signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic field as grid.csv, signal.csv and meta.json.
    Generate(GenerateArgs),
    /// Decompose a field given as two CSV files.
    Decompose(DecomposeArgs),
    /// One-sided amplitude spectrum of one column of a signal file.
    Spectrum(SpectrumArgs),
    /// Run the acceptance suite.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Sloshing,
    Damped,
    FmCubic,
    SloshingChebyshev,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    preset: Preset,
    #[arg(short, long)]
    output: PathBuf,
    /// Number of time samples.
    #[arg(long)]
    nt: Option<usize>,
    /// Number of spatial points.
    #[arg(long)]
    nx: Option<usize>,
    /// Time step in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Amplitude of the first (or only) component.
    #[arg(long)]
    a1: Option<f64>,
    /// Amplitude of the second sloshing component.
    #[arg(long)]
    a2: Option<f64>,
    /// Travelling mix of the first sloshing component.
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<f64>,
    /// Travelling mix of the second sloshing component.
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<f64>,
    /// Damping rate in 1/s.
    #[arg(long)]
    gamma: Option<f64>,
    /// Frequency modulation depth.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Standard deviation of added Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Seed of the noise generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    signal: PathBuf,
    /// Time step in seconds.
    #[arg(long)]
    dt: f64,
    /// Number of leading modes to write (default: all).
    #[arg(short = 'k', long)]
    rank: Option<usize>,
    #[arg(long, value_enum, default_value_t = Weighting::Auto)]
    weighted: Weighting,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WindowArg {
    None,
    Hann,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    dt: f64,
    /// Zero-based column index.
    #[arg(long)]
    column: usize,
    #[arg(long, value_enum, default_value_t = WindowArg::None)]
    window: WindowArg,
    #[arg(short, long)]
    output: PathBuf,
}

fn unused(preset: Preset, flags: &[(&str, bool)]) -> Result<()> {
    match flags.iter().find(|(_, set)| *set) {
        Some((name, _)) => Err(CodError::invalid(format!(
            "--{name} does not apply to the {preset:?} preset"
        ))),
        None => Ok(()),
    }
}

fn time_grid(default: TimeGrid, a: &GenerateArgs) -> Result<TimeGrid> {
    TimeGrid::new(
        0.0,
        a.dt.unwrap_or(default.dt()),
        a.nt.unwrap_or(default.len()),
    )
}

fn tank_grid(default: &SpatialGrid, nx: Option<usize>) -> Result<SpatialGrid> {
    match nx {
        Some(n) => uniform_grid(-200.0, 200.0, n),
        None => Ok(default.clone()),
    }
}

fn build_preset(a: &GenerateArgs) -> Result<SignalField> {
    let field = match a.preset {
        Preset::Sloshing | Preset::SloshingChebyshev => {
            unused(
                a.preset,
                &[
                    ("gamma", a.gamma.is_some()),
                    ("epsilon", a.epsilon.is_some()),
                ],
            )?;
            let mut p = SloshingParams::default();
            p.time = time_grid(p.time, a)?;
            p.space = if a.preset == Preset::SloshingChebyshev {
                chebyshev_grid(p.length, a.nx.unwrap_or(p.space.len()))?
            } else {
                tank_grid(&p.space, a.nx)?
            };
            let c = &mut p.components;
            c[0].amplitude = a.a1.unwrap_or(c[0].amplitude);
            c[1].amplitude = a.a2.unwrap_or(c[1].amplitude);
            c[0].alpha = a.alpha1.unwrap_or(c[0].alpha);
            c[1].alpha = a.alpha2.unwrap_or(c[1].alpha);
            sloshing_field(&p)?
        }
        Preset::Damped => {
            unused(
                a.preset,
                &[
                    ("a2", a.a2.is_some()),
                    ("alpha1", a.alpha1.is_some()),
                    ("alpha2", a.alpha2.is_some()),
                    ("epsilon", a.epsilon.is_some()),
                ],
            )?;
            let mut p = DampedParams::default();
            p.time = time_grid(p.time, a)?;
            p.space = tank_grid(&p.space, a.nx)?;
            p.amplitude = a.a1.unwrap_or(p.amplitude);
            p.gamma = a.gamma.unwrap_or(p.gamma);
            damped_standing_field(&p)?
        }
        Preset::FmCubic => {
            unused(
                a.preset,
                &[
                    ("a2", a.a2.is_some()),
                    ("alpha1", a.alpha1.is_some()),
                    ("alpha2", a.alpha2.is_some()),
                    ("gamma", a.gamma.is_some()),
                ],
            )?;
            let mut p = FmParams::default();
            p.time = time_grid(p.time, a)?;
            p.space = tank_grid(&p.space, a.nx)?;
            p.amplitude = a.a1.unwrap_or(p.amplitude);
            p.epsilon = a.epsilon.unwrap_or(p.epsilon);
            fm_cubic_field(&p)?
        }
    };
    add_noise(&field, a.noise, a.seed)
}

fn generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let field = build_preset(a)?;
    let (grid, signal) = io::write_signal_csv(&field, &a.output, false)?;
    let meta = serde_json::json!({
        "preset": a.preset.to_possible_value().map(|v| v.get_name().to_string()),
        "dt": field.time().dt(),
        "nt": field.time().len(),
        "nx": field.space().len(),
        "noise": a.noise,
        "seed": a.seed,
        "library_version": crate::VERSION,
    });
    let meta_path = a.output.join("meta.json");
    std::fs::write(&meta_path, format!("{meta:#}\n")).map_err(|e| CodError::io(&meta_path, e))?;
    let _ = writeln!(
        out,
        "wrote {} and {} ({}×{}, dt = {})",
        grid.display(),
        signal.display(),
        field.time().len(),
        field.space().len(),
        field.time().dt()
    );
    Ok(())
}

fn decompose(a: &DecomposeArgs, out: &mut dyn Write) -> Result<()> {
    let field = io::read_signal_csv(&a.grid, &a.signal, a.dt, a.weighted)?;
    let result = cod(&analytic_field(&field)?)?;
    let config = ConfigEcho {
        grid: Some(a.grid.display().to_string()),
        signal: Some(a.signal.display().to_string()),
        preset: None,
        dt: a.dt,
        rank: a.rank,
        weighted: a.weighted,
    };
    let summary = io::write_result(&result, &config, a.rank, &a.output)?;
    for m in summary.modes.iter().filter(|m| !m.negligible).take(10) {
        let _ = writeln!(
            out,
            "mode {:>3}: fraction {:.6e}  amplitude {:.6}  travelling index {:.3e}  peak {:.5} Hz",
            m.index, m.energy_fraction, m.amplitude, m.travelling_index, m.dominant_frequency
        );
    }
    let _ = writeln!(out, "wrote results to {}", a.output.display());
    Ok(())
}

fn spectrum(a: &SpectrumArgs, out: &mut dyn Write) -> Result<()> {
    let values = io::read_signal_matrix(&a.signal)?;
    let positions = (0..values.ncols()).map(|j| j as f64).collect();
    let space = SpatialGrid::with_unit_weights(positions)?;
    let time = TimeGrid::new(0.0, a.dt, values.nrows())?;
    let field = SignalField::new(time, space, values)?;
    let window = match a.window {
        WindowArg::None => Window::Rectangular,
        WindowArg::Hann => Window::Hann,
    };
    let s = point_spectrum_with(&field, a.column, window)?;
    let path = a.output.join("spectrum.csv");
    io::write_spectrum_csv(&s, &path)?;
    let _ = writeln!(
        out,
        "peak {:.6} at {:.6} Hz; wrote {}",
        s.amplitude[s.peak_bin()],
        s.dominant_frequency(),
        path.display()
    );
    Ok(())
}

fn selftest(out: &mut dyn Write) -> i32 {
    let outcomes = crate::selftest::run_all();
    for o in &outcomes {
        let _ = writeln!(out, "{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let _ = writeln!(out, "{} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        0
    } else {
        2
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("COD_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| {
            CodError::invalid(format!(
                "COD_THREADS must be a positive integer, got '{value}'"
            ))
        })?;
    // A pool built earlier in the same process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn exit_code(e: &CodError) -> i32 {
    if e.is_numeric() {
        2
    } else {
        1
    }
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return 1;
    }
    let result = match &cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Decompose(a) => decompose(a, out),
        Command::Spectrum(a) => spectrum(a, out),
        Command::Selftest => return selftest(out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs the CLI on the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}
