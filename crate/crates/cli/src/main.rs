mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use scsa_core::{ImageFormat, Objective};

use crate::error::CliError;
use crate::report::TableFormat;

/// Semi-classical signal analysis of grayscale images.
///
/// Every option may also be given in a `key = value` file passed with
/// `--config`; options on the command line override the file.
#[derive(Debug, Parser)]
#[command(name = "scsa", version, args_override_self = true)]
struct Cli {
    /// `key = value` file supplying default options.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reconstruct an image from its separated spectra.
    Reconstruct(ReconstructArgs),
    /// Add seeded Gaussian noise to a clean image and denoise it over an h grid.
    Denoise(DenoiseArgs),
    /// Score reconstructions over an (h, gamma) grid.
    Sweep(SweepArgs),
    /// Write a synthetic test image.
    Synth(SynthArgs),
    /// Compare two images.
    Metrics(MetricsArgs),
    /// Per-slice negative eigenvalue counts over an h grid.
    Eigreport(EigreportArgs),
}

#[derive(Debug, Clone, Args)]
struct OperatorArgs {
    /// Spectral threshold (nonpositive).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Sample spacing used for the differentiation matrices.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.3)]
    h_min: f64,
    #[arg(long, default_value_t = 3.0)]
    h_max: f64,
    /// Number of log-spaced h values from h-min to h-max.
    #[arg(long, default_value_t = 10)]
    h_steps: usize,
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Format of tabular outputs.
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    /// Format of written images.
    #[arg(long, value_parser = parse_image_format, default_value = "png")]
    image_format: ImageFormat,
}

#[derive(Debug, Clone, Args)]
struct ReconstructArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = 4.0)]
    gamma: f64,
    #[command(flatten)]
    operator: OperatorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
struct DenoiseArgs {
    /// Clean image; the noisy copy is generated from it.
    #[arg(long)]
    input: PathBuf,
    /// Noise standard deviation on the 0-255 scale.
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated exponents to try.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "4")]
    gamma: Vec<f64>,
    #[arg(long, value_parser = parse_objective, default_value = "max-psnr")]
    objective: Objective,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    operator: OperatorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    /// Image scored against (default: the input itself).
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "4")]
    gamma: Vec<f64>,
    #[arg(long, value_parser = parse_objective, default_value = "min-mse")]
    objective: Objective,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    operator: OperatorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SynthKind {
    /// The analytic surface on [-1, 3]², halved into [0, 1].
    Example1,
    Checkerboard,
}

#[derive(Debug, Clone, Args)]
struct SynthArgs {
    #[arg(value_enum)]
    kind: SynthKind,
    /// Samples per axis for example1 (default: step 0.02, 201 samples).
    #[arg(long)]
    samples: Option<usize>,
    /// Checkerboard side length.
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 16)]
    cell: usize,
    #[arg(long, default_value_t = 0.3)]
    low: f64,
    #[arg(long, default_value_t = 0.7)]
    high: f64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_image_format, default_value = "png")]
    image_format: ImageFormat,
}

#[derive(Debug, Clone, Args)]
struct MetricsArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Peak intensity for PSNR on the loaded [0, 1] scale.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, value_enum, default_value_t = TableFormat::Json)]
    format: TableFormat,
    /// Also write the result and a report into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct EigreportArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    operator: OperatorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_image_format(s: &str) -> Result<ImageFormat, String> {
    ImageFormat::parse(s).ok_or_else(|| format!("unknown image format `{s}` (png, pgm, pgm-p2)"))
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    Objective::parse(s).ok_or_else(|| format!("unknown objective `{s}` (min-mse, max-psnr, max-mssim)"))
}

fn run() -> Result<(), CliError> {
    let args = config::expand(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { CliError::USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))?;
    }

    match cli.command {
        Command::Reconstruct(a) => commands::reconstruct(a),
        Command::Denoise(a) => commands::denoise(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Synth(a) => commands::synth(a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Eigreport(a) => commands::eigreport(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
