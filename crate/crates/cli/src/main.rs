//! `polaraug`: batch augmentation, decomposition, validation, comparison and
//! synthesis of Mueller matrix images.
//!
//! Exit codes: 0 success, 1 domain error (singular or degenerate data),
//! 2 usage or format error. Data goes to files, reports to stdout,
//! diagnostics to stderr.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use polaraug::transforms::{Interpolation, Padding};

mod commands;
mod config;
mod error;
mod files;

use error::{CliError, CliResult, EXIT_USAGE};

/// Environment variable capping the worker thread count.
const THREADS_VAR: &str = "POLARAUG_THREADS";

#[derive(Parser, Debug)]
#[command(name = "polaraug", version, about = "Polarization-consistent augmentation of Mueller matrix images")]
#[command(after_help = "Angles are in degrees. Any flag can also be set from an INI-style --config file.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rotate and/or flip an image, consistently in space and polarization.
    Augment(AugmentArgs),
    /// Lu-Chipman decomposition into azimuth and retardance maps.
    Decompose(DecomposeArgs),
    /// Admissibility of sampled pixel pairs before and after a transform.
    Validate(ValidateArgs),
    /// Azimuth error between two maps under a retardance mask.
    Compare(CompareArgs),
    /// Generate synthetic scenes.
    Synth(SynthArgs),
    /// Compute Mueller matrices from raw intensities and calibration.
    Compute(ComputeArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RawInputArgs {
    /// Mueller image (NPY or MMPI) or a 48-channel MMPI bundle.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Analyzer matrices A: per-pixel image or one (4, 4) array.
    #[arg(long)]
    pub analyzer: Option<PathBuf>,
    /// Raw intensities B.
    #[arg(long)]
    pub intensities: Option<PathBuf>,
    /// Modulator matrices W: per-pixel image or one (4, 4) array.
    #[arg(long)]
    pub modulator: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Transform the Mueller matrices directly.
    Mueller,
    /// Fold the transform into the calibration; intensities keep their values.
    Calibration,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaddingArg {
    Identity,
    Mirror,
}

impl From<PaddingArg> for Padding {
    fn from(p: PaddingArg) -> Self {
        match p {
            PaddingArg::Identity => Padding::IdentityFill,
            PaddingArg::Mirror => Padding::Mirror,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpArg {
    Nearest,
    Bilinear,
}

impl From<InterpArg> for Interpolation {
    fn from(i: InterpArg) -> Self {
        match i {
            InterpArg::Nearest => Interpolation::Nearest,
            InterpArg::Bilinear => Interpolation::Bilinear,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub source: RawInputArgs,
    /// Output file; with --mode calibration a `.mmpi` bundle or a directory.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "mueller")]
    pub mode: Mode,
    /// Rotation angle, counter-clockwise on screen.
    #[arg(long, conflicts_with = "random", allow_hyphen_values = true)]
    pub angle: Option<f64>,
    /// Sample rotation and flips from the augmentation policy.
    #[arg(long)]
    pub random: bool,
    #[arg(long)]
    pub flip_h: bool,
    #[arg(long)]
    pub flip_v: bool,
    /// Policy rotation probability.
    #[arg(long, default_value_t = 0.5)]
    pub prob_rot: f64,
    /// Policy probability of each flip.
    #[arg(long, default_value_t = 0.25)]
    pub prob_flip: f64,
    /// Policy rotation range half-width.
    #[arg(long, default_value_t = 45.0)]
    pub max_angle: f64,
    #[arg(long, value_enum, default_value = "identity")]
    pub padding: PaddingArg,
    #[arg(long, value_enum, default_value = "bilinear")]
    pub interp: InterpArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print per-frame wall time to stderr.
    #[arg(long)]
    pub bench: bool,
    /// Timed repetitions with --bench.
    #[arg(long, default_value_t = 10)]
    pub repeat: usize,
}

#[derive(Args, Debug, Clone)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub source: RawInputArgs,
    /// Directory for azimuth.npy and retardance.npy.
    #[arg(long)]
    pub output_dir: PathBuf,
    /// Also write depolarizer/retarder/diattenuator stacks.
    #[arg(long)]
    pub factors: bool,
    /// Azimuth rendering, masked by retardance.
    #[arg(long)]
    pub png: Option<PathBuf>,
    #[arg(long, default_value_t = 75.0)]
    pub mask_percentile: f64,
    /// Write maps as MMPI instead of NPY.
    #[arg(long)]
    pub mmpi: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    #[arg(long)]
    pub before: PathBuf,
    #[arg(long)]
    pub after: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = polaraug::decompose::ADMISSIBILITY_TOL)]
    pub tol: f64,
    /// Rotation relating `after` to `before`; pixels are then matched through it.
    #[arg(long, allow_hyphen_values = true)]
    pub angle: Option<f64>,
    #[arg(long)]
    pub flip_h: bool,
    #[arg(long)]
    pub flip_v: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct CompareArgs {
    /// Predicted azimuth map (radians).
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference azimuth map (radians).
    #[arg(long)]
    pub truth: PathBuf,
    /// Retardance map used for masking; without it every pixel counts.
    #[arg(long)]
    pub retardance: Option<PathBuf>,
    #[arg(long, default_value_t = 75.0)]
    pub percentile: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    Constant,
    Radial,
    RandomPhysical,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationKind {
    /// Write the Mueller image itself.
    None,
    /// One tetrahedral analyzer and its transpose as modulator.
    Global,
    /// Random well-conditioned matrices per pixel.
    PerPixel,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub pattern: Pattern,
    /// Image size as HxW.
    #[arg(long, default_value = "128x128")]
    pub size: String,
    /// Linear retardance of constant and radial patterns.
    #[arg(long, default_value_t = 90.0)]
    pub delta: f64,
    /// Azimuth of the constant pattern.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub azimuth: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit raw intensities with this calibration instead of a Mueller image.
    #[arg(long, value_enum, default_value = "none")]
    pub calibration: CalibrationKind,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub source: RawInputArgs,
    #[arg(long)]
    pub output: PathBuf,
}

fn init_threads() -> CliResult {
    let Ok(value) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    let available = std::thread::available_parallelism().map_or(n, |a| a.get());
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.min(available))
        .build_global()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))
}

fn run(argv: Vec<OsString>) -> CliResult {
    let command = Cli::command();
    let accepts = |sub: &str, key: &str| {
        command.find_subcommand(sub).is_some_and(|c| c.get_arguments().any(|a| a.get_long() == Some(key)))
    };
    let argv = config::expand(argv, accepts)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return if code == 0 { Ok(()) } else { Err(CliError { code, message: String::new() }) };
        }
    };
    init_threads()?;
    match &cli.command {
        Command::Augment(a) => commands::augment(a),
        Command::Decompose(a) => commands::decompose(a),
        Command::Validate(a) => commands::validate(a),
        Command::Compare(a) => commands::compare(a),
        Command::Synth(a) => commands::synth(a),
        Command::Compute(a) => commands::compute(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !e.message.is_empty() {
                eprintln!("polaraug: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}
