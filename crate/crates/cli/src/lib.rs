//! `weakval` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error (including a
//! failed self-check), 3 I/O error.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use weakval_core::estimator::{
    invert_weak_value, parameter_uncertainty, propagate_uncertainty_closed,
    reconstruct_preselection,
};
use weakval_core::noise::paper_noise_model;
use weakval_core::sweep::{
    emit_csv, emit_json, read_json, run_sweep, run_sweep_with_threads, write_csv, write_plot_data,
};
use weakval_core::{
    verify, Error, ExperimentSetting, IntensitySet, NoiseModel, Parameter, PhaseMode,
    PreselectionEstimate, SweepConfig, WeakValueEstimate,
};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_io() => EXIT_IO,
            CliError::Core(_) => EXIT_VALIDATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "weakval",
    version,
    about = "Weak values at arbitrary measurement strength"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep measurement strength and axis, writing per-sample rows and merit figures.
    Sweep {
        /// JSON document with SweepConfig fields; missing fields take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_json: Option<PathBuf>,
        /// Overrides master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// `none`, `paper`, or a path to a noise-model JSON document.
        #[arg(long)]
        noise: Option<String>,
        /// Exact probabilities instead of sampled shots.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Invert one set of intensities read from a JSON file (`-` for stdin).
    Estimate {
        input: PathBuf,
        /// Measurement strength; overrides `epsilon` in the input.
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<f64>,
        #[arg(long, value_parser = parse_phase_mode)]
        phase_mode: Option<PhaseMode>,
    },
    /// Run the decomposition, wave-plate and interferometer self-checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reshape a sweep JSON into `ln σ̄` / `ln Δ̄` series per parameter.
    PlotData {
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn parse_phase_mode(s: &str) -> Result<PhaseMode, String> {
    match s {
        "signed" => Ok(PhaseMode::Signed),
        "first_quadrant" => Ok(PhaseMode::FirstQuadrant),
        _ => Err(format!(
            "unknown phase mode `{s}` (signed | first_quadrant)"
        )),
    }
}

/// Estimate input: intensities plus the strength and, optionally, the
/// setting that produced them.
#[derive(Debug, Deserialize)]
struct EstimateInput {
    epsilon: Option<f64>,
    phi: Option<f64>,
    alpha_i: Option<f64>,
    phase_mode: Option<PhaseMode>,
}

#[derive(Debug, Serialize)]
struct EstimateOutput {
    epsilon: f64,
    weak_value: WeakValueEstimate,
    preselection: Option<PreselectionEstimate>,
    preselection_error: Option<&'static str>,
}

/// Parses `args` (program name first) and runs the command, writing results
/// to `out`. Returns the exit code of a completed command.
pub fn run<I, T, W>(args: I, out: &mut W) -> Result<u8, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(out, "{e}")?;
                return Ok(0);
            }
            return Err(CliError::Usage(e.render().to_string()));
        }
    };
    match cli.command {
        Command::Sweep {
            config,
            out_csv,
            out_json,
            seed,
            noise,
            exact,
            threads,
        } => sweep(config, out_csv, out_json, seed, noise, exact, threads, out),
        Command::Estimate {
            input,
            epsilon,
            phase_mode,
        } => estimate(&input, epsilon, phase_mode, out),
        Command::Verify { seed } => {
            let report = verify::run_all(seed);
            serde_json::to_writer_pretty(&mut *out, &report).map_err(Error::from)?;
            writeln!(out)?;
            Ok(if report.all_passed() {
                0
            } else {
                EXIT_VALIDATION
            })
        }
        Command::PlotData { input, out_dir } => {
            let output = read_json(&input)?;
            for p in write_plot_data(&output, &out_dir)? {
                writeln!(out, "{}", p.display())?;
            }
            Ok(0)
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)?;
        Ok(s)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn noise_from_flag(flag: &str) -> Result<Option<NoiseModel>, CliError> {
    match flag {
        "none" => Ok(None),
        "paper" => Ok(Some(paper_noise_model())),
        path => {
            let nm: NoiseModel =
                serde_json::from_str(&read_text(Path::new(path))?).map_err(Error::from)?;
            nm.validate()?;
            Ok(Some(nm))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep<W: Write>(
    config: Option<PathBuf>,
    out_csv: Option<PathBuf>,
    out_json: Option<PathBuf>,
    seed: Option<u64>,
    noise: Option<String>,
    exact: bool,
    threads: Option<usize>,
    out: &mut W,
) -> Result<u8, CliError> {
    let mut cfg = match config {
        Some(p) => serde_json::from_str::<SweepConfig>(&read_text(&p)?).map_err(Error::from)?,
        None => SweepConfig::default(),
    };
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(n) = noise {
        cfg.noise = noise_from_flag(&n)?;
    }
    if exact {
        cfg.shots = 0;
    }
    let output = match threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => run_sweep_with_threads(&cfg, t)?,
        None => run_sweep(&cfg)?,
    };
    let failed = output.rows.iter().filter(|r| r.error.is_some()).count();
    log::info!("{} rows, {} with errors", output.rows.len(), failed);
    if let Some(p) = &out_csv {
        emit_csv(&output.rows, p)?;
    }
    if let Some(p) = &out_json {
        emit_json(&output, p)?;
    }
    if out_csv.is_none() && out_json.is_none() {
        write_csv(&output.rows, &mut *out)?;
    }
    Ok(0)
}

fn estimate<W: Write>(
    input: &Path,
    epsilon: Option<f64>,
    phase_mode: Option<PhaseMode>,
    out: &mut W,
) -> Result<u8, CliError> {
    let text = read_text(input)?;
    let iset: IntensitySet = serde_json::from_str(&text).map_err(Error::from)?;
    let meta: EstimateInput = serde_json::from_str(&text).map_err(Error::from)?;
    let epsilon = epsilon.or(meta.epsilon).ok_or_else(|| {
        CliError::Usage("estimate needs `epsilon` in the input or --epsilon".into())
    })?;
    let mode = phase_mode.or(meta.phase_mode).unwrap_or_default();

    let mut weak_value = invert_weak_value(&iset, epsilon)?;
    let setting = match (meta.phi, meta.alpha_i) {
        (Some(phi), Some(alpha_i)) => Some(ExperimentSetting::new(epsilon, phi, alpha_i)),
        _ => None,
    };
    if let Some(s) = &setting {
        let (sr, si) = propagate_uncertainty_closed(&iset, s)?;
        weak_value.sigma_real = sr;
        weak_value.sigma_imag = si;
    }
    let (preselection, preselection_error) = match reconstruct_preselection(&iset, epsilon, mode) {
        Ok(mut p) => {
            if let Some(s) = &setting {
                p.sigma_nu = parameter_uncertainty(Parameter::Nu, &iset, s, mode)?;
                p.sigma_alpha = parameter_uncertainty(Parameter::Alpha, &iset, s, mode)?;
                p.sigma_phi = parameter_uncertainty(Parameter::Phi, &iset, s, mode)?;
            }
            (Some(p), None)
        }
        Err(e) => (None, Some(e.code())),
    };
    let result = EstimateOutput {
        epsilon,
        weak_value,
        preselection,
        preselection_error,
    };
    serde_json::to_writer_pretty(&mut *out, &result).map_err(Error::from)?;
    writeln!(out)?;
    Ok(0)
}
