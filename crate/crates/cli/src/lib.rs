//! `tcentre` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;

pub use config::{RunConfig, CONFIG_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tcentre", version, about = "T-centre hyperpolarization models and linewidth fits")]
pub struct Cli {
    /// JSON configuration file (defaults to $TCENTRE_CONFIG, then built-in values).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// Unit of frequency-valued inputs (CSV detuning columns and frequency flags).
/// Outputs are always in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Unit {
    #[default]
    Mhz,
    Ghz,
}

impl Unit {
    pub fn to_mhz(self) -> f64 {
        match self {
            Unit::Mhz => 1.0,
            Unit::Ghz => 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Lorentzian,
    Gaussian,
    Glp,
}

impl From<Shape> for tcentre_core::LineshapeKind {
    fn from(s: Shape) -> Self {
        match s {
            Shape::Lorentzian => Self::Lorentzian,
            Shape::Gaussian => Self::Gaussian,
            Shape::Glp => Self::Glp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weighting {
    Equal,
    SingleMin,
    SingleMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Homogeneous,
    Convolved,
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got '{s}'"));
    }
    let mut v = [0.0; 3];
    for (x, p) in v.iter_mut().zip(&parts) {
        *x = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
    }
    Ok(v)
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got '{s}'"))?;
    let n = a.trim().parse().map_err(|_| format!("'{a}' is not a count"))?;
    let m = b.trim().parse().map_err(|_| format!("'{b}' is not a count"))?;
    Ok((n, m))
}

/// Ensemble seen by the field: either a direction through the hole model,
/// or explicit g-factors.
#[derive(Debug, Clone, clap::Args)]
pub struct HoleArgs {
    /// Field direction in crystal coordinates, e.g. 1,0,0.
    #[arg(long, value_parser = parse_vec3, default_value = "1,0,0", allow_hyphen_values = true)]
    pub dir: [f64; 3],
    /// Use one hole g-factor for all orientations instead of the model.
    #[arg(long)]
    pub g_h: Option<f64>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ModelArgs {
    /// Homogeneous linewidth.
    #[arg(long, alias = "gamma-mhz")]
    pub gamma: f64,
    /// Inhomogeneous linewidth; convolves the model when given.
    #[arg(long, alias = "lambda-mhz")]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value = "glp")]
    pub shape: Shape,
    /// Cross-spin to spin-conserving branch ratio.
    #[arg(long, default_value_t = 0.0)]
    pub branch_ratio: f64,
    #[command(flatten)]
    pub holes: HoleArgs,
    #[arg(long, value_enum, default_value = "mhz")]
    pub unit: Unit,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SweepFitArgs {
    #[arg(long, value_enum, default_value = "homogeneous")]
    pub mode: Mode,
    /// Inhomogeneous linewidth for convolved mode.
    #[arg(long, alias = "lambda-mhz")]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value = "glp")]
    pub shape: Shape,
    #[arg(long, value_enum, default_value = "equal")]
    pub weight_mode: Weighting,
    #[arg(long, default_value_t = 0.0)]
    pub branch_ratio: f64,
    /// Fit an additive offset.
    #[arg(long)]
    pub free_offset: bool,
    #[arg(long, value_enum, default_value = "mhz")]
    pub unit: Unit,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hole g-factors of the twelve orientations for a field direction.
    Gfactors {
        #[arg(long, value_parser = parse_vec3, default_value = "1,0,0", allow_hyphen_values = true)]
        dir: [f64; 3],
        /// Propagate a +/- misalignment (degrees) by Monte Carlo.
        #[arg(long)]
        alignment_error_deg: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fit g1, g2 and field misalignment to a `g_h,sigma` table of 12 rows.
    CalibrateG {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, value_parser = parse_vec3, default_value = "1,1,0")]
        nominal: [f64; 3],
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Synthetic zero-detuning field sweep.
    SimulateSweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 500.0)]
        b_max: f64,
        #[arg(long, default_value_t = 40)]
        n_points: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Synthetic (field, detuning) PLE map in long CSV format.
    SimulateMap {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 500.0)]
        b_max: f64,
        #[arg(long, default_value_t = 21)]
        n_b: usize,
        /// Detuning half-range, in --unit.
        #[arg(long, default_value_t = 2000.0)]
        delta_max: f64,
        #[arg(long, default_value_t = 161)]
        n_delta: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fit the optical linewidth of a PLE spectrum (`delta_mhz,counts[,sigma]`).
    FitSpectrum {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "lorentzian")]
        shape: Shape,
        #[arg(long, default_value_t = 0.0)]
        residual_b_gauss: f64,
        #[command(flatten)]
        holes: HoleArgs,
        #[arg(long, value_enum, default_value = "mhz")]
        unit: Unit,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fit Gamma_sd to a field sweep (`b_gauss,amplitude[,sigma]`).
    FitSweep {
        #[arg(long, short)]
        input: PathBuf,
        #[command(flatten)]
        fit: SweepFitArgs,
        #[command(flatten)]
        holes: HoleArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fit Gamma_sd over a grid of field directions and report the maximum.
    OrientationBound {
        #[arg(long, short)]
        input: PathBuf,
        #[command(flatten)]
        fit: SweepFitArgs,
        /// Grid size NxM over theta and phi in [0, pi/2].
        #[arg(long, value_parser = parse_grid, default_value = "16x16")]
        grid: (usize, usize),
        /// CSV file for the full map.
        #[arg(long)]
        map_output: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Lorentzian FWHM of every fixed-field row of a map CSV.
    MapLinewidths {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "mhz")]
        unit: Unit,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Photon indistinguishability for a spectral-diffusion width.
    Indist {
        #[arg(long, alias = "gamma-sd-mhz")]
        gamma_sd: f64,
        #[arg(long, value_enum, default_value = "mhz")]
        unit: Unit,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the effective configuration as JSON.
    Config {
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Results go to `out` unless an output file is given.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = RunConfig::resolve(cli.config.as_deref()).and_then(|cfg| commands::execute(&cfg, &cli.command, out));
    match result {
        Ok(status) if status.converged => EXIT_OK,
        Ok(_) => {
            let _ = writeln!(err, "warning: fit did not converge");
            EXIT_NOT_CONVERGED
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                tcentre_core::Error::Numerical(_) => EXIT_NOT_CONVERGED,
                _ => EXIT_VALIDATION,
            }
        }
    }
}
