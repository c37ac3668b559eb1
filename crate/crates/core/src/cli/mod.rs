//! Command-line front end: argument schema, run envelopes, deterministic
//! orchestration and atomic output.

mod alpha;
mod commands;
mod instance;
mod output;

pub use alpha::{AlphaArgs, ResolvedAlpha};
pub use commands::{
    CellgraphArgs, ClassifyArgs, CoverCheckArgs, DeepFitArgs, DensityScanArgs, ModelKind, PartitionArgs, RenderArgs,
    RotnumArgs,
};
pub use instance::{load_instance, save_instance, Instance};
pub use output::{write_atomic, Artifact};

use crate::blaschke::BlaschkeError;
use crate::cellgraph::CellGraphError;
use crate::contfrac::ContFracError;
use crate::covering::CoveringError;
use crate::dynamics::DynamicsError;
use clap::{Parser, Subcommand};
use serde::Serialize;
use std::ffi::OsString;
use thiserror::Error;

/// Embedded in every output; baselines compare it before comparing payloads.
pub const VERSION_TAG: &str = concat!("siegel-lab/", env!("CARGO_PKG_VERSION"));

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "SIEGEL_LAB_THREADS";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    /// Schema violation; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Module error; exit code 1.
    #[error("{message}")]
    Domain { kind: &'static str, message: String },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Domain { kind, .. } => kind,
            CliError::Io(_) => "io",
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}` on one line.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

macro_rules! domain_error {
    ($ty:ty, $kind:literal) => {
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Domain { kind: $kind, message: e.to_string() }
            }
        }
    };
}

domain_error!(ContFracError, "contfrac");
domain_error!(BlaschkeError, "blaschke");
domain_error!(DynamicsError, "dynamics");
domain_error!(CoveringError, "covering");
domain_error!(CellGraphError, "cellgraph");

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "siegel-lab", version, about = "Siegel disks, Blaschke models and covering certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Continued-fraction data of a rotation number.
    Classify(ClassifyArgs),
    /// Solve for the Blaschke parameter with a given rotation number.
    Rotnum(RotnumArgs),
    /// Closest-return lengths of the critical backward orbit (CSV).
    Partition(PartitionArgs),
    /// Escaped-area fractions on shrinking balls (CSV).
    DensityScan(DensityScanArgs),
    /// Deficiency exponent fitted to a density-scan CSV.
    DeepFit(DeepFitArgs),
    /// Fate raster as a binary greyscale pixmap.
    Render(RenderArgs),
    /// Certify a covering lemma on a synthetic or loaded instance.
    CoverCheck(CoverCheckArgs),
    /// Imbedded cell graph, strip heights and cell dilatations.
    Cellgraph(CellgraphArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::Rotnum(_) => "rotnum",
            Command::Partition(_) => "partition",
            Command::DensityScan(_) => "density-scan",
            Command::DeepFit(_) => "deep-fit",
            Command::Render(_) => "render",
            Command::CoverCheck(_) => "cover-check",
            Command::Cellgraph(_) => "cellgraph",
        }
    }
}

/// Parse, execute and report; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

/// Compute every artifact first, then write them; a failure leaves no file.
pub fn execute(command: &Command) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let artifacts = pool.install(|| commands::dispatch(command))?;
    for a in &artifacts {
        a.emit()?;
    }
    Ok(())
}

/// `0` lets the pool pick the hardware default.
fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}
