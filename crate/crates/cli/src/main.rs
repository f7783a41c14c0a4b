mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Rotational alignment of subtomograms in the ball-harmonics domain.
#[derive(Debug, Parser)]
#[command(name = "bhalign", version, about)]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic template, subtomogram and ground truth.
    Phantom(PhantomArgs),
    /// Expand a volume into ball-harmonics coefficients.
    Expand(ExpandArgs),
    /// Align a subtomogram to a template.
    Align(AlignArgs),
    /// Energy ratio and evaluation cost per band, as CSV.
    Bandscan(BandscanArgs),
    /// Compare alignment against the exhaustive Euler grid.
    Bench(BenchArgs),
    /// Dump the correlation over an (alpha, beta) slice, as CSV.
    Landscape(LandscapeArgs),
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub blobs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Signal-to-noise ratio inside the support ball; noiseless if omitted.
    #[arg(long)]
    pub snr: Option<f64>,
    /// Missing-wedge half angle in degrees; no wedge if omitted.
    #[arg(long)]
    pub wedge: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,1,0")]
    pub tilt_axis: Vec<f64>,
    /// ZYZ Euler angles in degrees; random if omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rot_euler: Option<Vec<f64>>,
    /// Integer voxel shift.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub shift: Option<Vec<i32>>,
    #[arg(long, default_value_t = 0.8)]
    pub support: f64,
    #[arg(long, default_value_t = 1.0)]
    pub voxel_size: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub lmax: usize,
    /// Radial frequency cutoff; picked from the grid size if omitted.
    #[arg(long)]
    pub lambda_cut: Option<f64>,
    /// Coefficient file (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the band-limited reconstruction here.
    #[arg(long)]
    pub synthesize: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(long)]
    pub template: PathBuf,
    #[arg(long)]
    pub subtomo: PathBuf,
    /// Missing-wedge half angle of the subtomogram, degrees.
    #[arg(long)]
    pub wedge: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,1,0")]
    pub tilt_axis: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Optimizer configuration (JSON); flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub lmax: Option<usize>,
    /// Strictly increasing band list.
    #[arg(long, value_delimiter = ',')]
    pub bands: Option<Vec<usize>>,
    /// Pick bands by energy-ratio thresholds instead of a fixed list.
    #[arg(long, value_delimiter = ',', conflicts_with = "bands")]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long)]
    pub shift_radius: Option<i32>,
    #[arg(long)]
    pub shift_step: Option<i32>,
    #[arg(long)]
    pub max_candidates: Option<usize>,
    /// Seeding grid step, degrees.
    #[arg(long)]
    pub seed_step: Option<f64>,
    #[arg(long)]
    pub newton_iter: Option<usize>,
    #[arg(long)]
    pub lambda_cut: Option<f64>,
    /// Ground truth written by `phantom`, for error reporting.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Report file (JSON); printed to standard output if omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BandscanArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, default_value_t = 42)]
    pub lmax: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0,0")]
    pub shift: Vec<i32>,
    /// CSV file; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Exhaustive grid step, degrees.
    #[arg(long, default_value_t = 1.0)]
    pub baseline_step: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, default_value_t = 42)]
    pub lmax: usize,
    #[arg(long, value_delimiter = ',', default_value = "7,12,33")]
    pub bands: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0,0")]
    pub shift: Vec<i32>,
    #[arg(long, default_value_t = 360)]
    pub n_alpha: usize,
    #[arg(long, default_value_t = 30)]
    pub n_beta: usize,
    /// Fixed third Euler angle, degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NotConverged,
    Io(String),
    Other(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::Usage(_) => 2,
            CliError::NotConverged => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<bhalign::Error> for CliError {
    fn from(e: bhalign::Error) -> Self {
        match e {
            bhalign::Error::Mrc(m) => CliError::Io(m.to_string()),
            bhalign::Error::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Phantom(a) => commands::phantom(a),
        Command::Expand(a) => commands::expand(a),
        Command::Align(a) => commands::align(a),
        Command::Bandscan(a) => commands::bandscan(a),
        Command::Bench(a) => commands::bench(a),
        Command::Landscape(a) => commands::landscape(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(t) => bhalign::par::with_threads(t, || run(cli)),
        None => run(cli),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("usage error: {m}"),
                CliError::NotConverged => eprintln!("alignment did not converge; best result written"),
                CliError::Io(m) => eprintln!("i/o error: {m}"),
                CliError::Other(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
