//! The `fingergeo` command-line driver.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub use manifest::{Artifact, RunManifest};

use crate::classify::ForestConfig;
use crate::error::Error;
use crate::eval::{IdentificationProtocol, MeanDivision};
use crate::imaging::SegmentationConfig;
use crate::selection::SelectionConfig;

/// Defaults for every stage, overridable from a `--config` JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub segmentation: SegmentationConfig,
    pub selection: SelectionConfig,
    pub forest: ForestConfig,
    /// Neighbors for wk-NN identification.
    pub knn_k: usize,
    pub n_thresholds: usize,
    pub protocol: IdentificationProtocol,
    pub division: MeanDivision,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            segmentation: SegmentationConfig::default(),
            selection: SelectionConfig::default(),
            forest: ForestConfig::default(),
            knn_k: 1,
            n_thresholds: 2000,
            protocol: IdentificationProtocol::default(),
            division: MeanDivision::PerTerm,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fingergeo",
    version,
    about = "Four-finger hand geometry biometrics"
)]
pub struct Cli {
    /// JSON file overriding default parameters.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "FINGERGEO_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment hand images and write the 52-column feature matrix.
    Extract(ExtractArgs),
    /// Run forward-backward feature selection on a feature matrix.
    Select(SelectArgs),
    /// Identification accuracy or verification scores on a test matrix.
    Evaluate(EvaluateArgs),
    /// ROC curve and EER from a score file.
    Roc(RocArgs),
    /// Render a synthetic corpus to disk.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HandArg {
    Right,
    Left,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Corpus directory.
    pub corpus: Option<PathBuf>,
    /// Layout JSON (default: `layout.json` in the corpus directory, if present).
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Synthetic corpus as `<subjects>x<samples>`, instead of a directory.
    #[arg(long, value_name = "NxS")]
    pub synthetic: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write subject-disjoint train/test matrices, e.g. `2:3`.
    #[arg(long, value_name = "A:B")]
    pub split: Option<String>,
    #[arg(long, value_enum)]
    pub hand: Option<HandArg>,
    /// Write intermediate segmentation images here.
    #[arg(long)]
    pub debug_dir: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GranularityArg {
    Global,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderingArg {
    Random,
    Rank,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Training feature matrix CSV.
    pub matrix: PathBuf,
    #[arg(long, value_enum)]
    pub granularity: Option<GranularityArg>,
    #[arg(long, value_enum)]
    pub ordering: Option<OrderingArg>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Selection result JSON.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierArg {
    Forest,
    Wknn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Identify,
    Verify,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Matrix the normalization is fit on.
    #[arg(long)]
    pub train: PathBuf,
    /// Matrix of the evaluated subjects, split into enrolled and probe sessions.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub selection: PathBuf,
    #[arg(long, value_enum, default_value = "forest")]
    pub classifier: ClassifierArg,
    #[arg(long, value_enum, default_value = "identify")]
    pub mode: ModeArg,
    #[arg(long)]
    pub enrolled: Option<usize>,
    #[arg(long)]
    pub probes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    /// CSV with `kind,score` rows (`genuine` or `imposter`).
    pub scores: PathBuf,
    #[arg(long)]
    pub thresholds: Option<usize>,
    /// Output directory.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    pub subjects: usize,
    #[arg(long, default_value_t = 3)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.02)]
    pub noise: f64,
    #[arg(long, default_value_t = 20.0)]
    pub max_rotation: f64,
    /// Output directory.
    #[arg(short, long)]
    pub output: PathBuf,
}

/// A failed run: exit code plus the error reported on stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn usage(kind: &str, message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            kind: kind.to_string(),
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind, "message": self.message, "exit_code": self.code } })
            .to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        let code = match e {
            Error::InvalidConfig(_) | Error::ParamsOutOfRange(_) => 2,
            _ => 1,
        };
        CliError {
            code,
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are printed to stderr as JSON.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = CliError::usage("usage", e.to_string().trim_end());
            eprintln!("{}", err.to_json());
            return err.code;
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.code
        }
    }
}
