//! The `pyramask` command line: label generation, mask decoding, synthetic
//! corpora, evaluation sweeps and benchmark reports.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod bench;
pub mod commands;
pub mod config;
pub mod corpus;
pub mod report;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DEGENERATE: u8 = 2;

/// A failed command with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn degenerate(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DEGENERATE,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<pyramask::Error> for Failure {
    fn from(e: pyramask::Error) -> Self {
        if e.is_degenerate_input() || e == pyramask::Error::EmptyDataset {
            Self::degenerate(e.to_string())
        } else {
            Self::usage(e.to_string())
        }
    }
}

impl From<pyramask::io::FormatError> for Failure {
    fn from(e: pyramask::io::FormatError) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Method {
    Pyramid,
    Baseline,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pyramid => "pyramid",
            Method::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pyramask",
    version,
    about = "Quadrilateral text regions from soft pyramid masks"
)]
pub struct Cli {
    /// JSON config with optional "clustering", "baseline", "noise" and "synth" sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for record-level parallelism (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rasterize the pyramid label of a quad into a mask file.
    Generate(GenerateArgs),
    /// Recover a quad from a mask file and print it as a JSON line.
    Decode(DecodeArgs),
    /// Write a seeded synthetic corpus of masks and ground truth.
    Synth(SynthArgs),
    /// Score JSON Lines predictions against ground truth over IoU thresholds.
    Eval(EvalArgs),
    /// Decode a corpus with each method and write comparison reports.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Eight comma-separated coordinates x1,y1,...,x4,y4.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub quad: Vec<f64>,
    /// Box spanned by the mask: x0,y0,x1,y1.
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true)]
    pub rect: Vec<f64>,
    #[arg(long, default_value_t = pyramask::pyramid_label::DEFAULT_MASK_SIZE)]
    pub width: usize,
    #[arg(long, default_value_t = pyramask::pyramid_label::DEFAULT_MASK_SIZE)]
    pub height: usize,
    /// Output PGM path; the sidecar goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    pub mask: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Pyramid)]
    pub method: Method,
    /// Detection box for plane initialization; defaults to the mask's box.
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true)]
    pub rect: Option<Vec<f64>>,
    /// Record id for the output line; defaults to the file stem.
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub baseline_threshold: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct NoiseArgs {
    #[arg(long)]
    pub uniform: Option<f64>,
    #[arg(long)]
    pub gaussian: Option<f64>,
    #[arg(long)]
    pub salt: Option<f64>,
    #[arg(long)]
    pub truncate_left: Option<f64>,
    #[arg(long)]
    pub truncate_top: Option<f64>,
    #[arg(long)]
    pub truncate_right: Option<f64>,
    #[arg(long)]
    pub truncate_bottom: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(short = 'n', long)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Box margin around each quad as a fraction of its extent.
    #[arg(long)]
    pub margin: Option<f64>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = pyramask::evaluation::DEFAULT_IOU_THRESHOLDS)]
    pub iou_thresholds: Vec<f64>,
    /// Directory for report.csv, report.md and histogram.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Corpus directory holding manifest.json.
    pub corpus: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Method::Pyramid, Method::Baseline])]
    pub method: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_values_t = pyramask::evaluation::DEFAULT_IOU_THRESHOLDS)]
    pub iou_thresholds: Vec<f64>,
    #[arg(long)]
    pub baseline_threshold: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {f}");
            f.code
        }
    }
}

pub fn execute(cli: Cli) -> CmdResult {
    let cfg = config::Config::load(cli.config.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Decode(a) => commands::decode(&a, &cfg),
        Command::Synth(a) => corpus::synth(&a, &cfg),
        Command::Eval(a) => commands::eval(&a),
        Command::Bench(a) => bench::bench(&a, &cfg),
    })
}
