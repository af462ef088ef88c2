use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "ttls-dmd",
    version,
    about = "Exact, TLS, truncated-TLS and subspace DMD on snapshot data",
    long_about = None
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Gen,
    Decompose,
    SweepK,
    Montecarlo,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Gen => "gen",
            CommandKind::Decompose => "decompose",
            CommandKind::SweepK => "sweep-k",
            CommandKind::Montecarlo => "montecarlo",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted-field snapshot file.
    Gen(RunArgs),
    /// Decompose a snapshot file with one algorithm.
    Decompose(RunArgs),
    /// Run T-TLS DMD for a list of truncation levels.
    SweepK(RunArgs),
    /// Repeat noisy decompositions of a planted field and summarize the
    /// eigenvalue scatter.
    Montecarlo(RunArgs),
}

impl Command {
    pub fn split(self) -> (CommandKind, RunArgs) {
        match self {
            Command::Gen(a) => (CommandKind::Gen, a),
            Command::Decompose(a) => (CommandKind::Decompose, a),
            Command::SweepK(a) => (CommandKind::SweepK, a),
            Command::Montecarlo(a) => (CommandKind::Montecarlo, a),
        }
    }
}

/// Flags shared by every subcommand. Each one overrides the key of the same
/// name (with `-` replaced by `_`) in the `--config` file; which keys a
/// subcommand accepts is checked after merging.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Snapshot file (`.bin` or `.csv`).
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Snapshot file written by `gen` (default: `<out-dir>/snapshots.bin`).
    #[arg(long)]
    pub output: Option<PathBuf>,

    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    /// exact, tls, ttls or subspace; `montecarlo` takes a comma-separated list.
    #[arg(long)]
    pub algorithm: Option<String>,

    /// Number of POD vectors (reduced dimension).
    #[arg(long)]
    pub r: Option<usize>,

    /// T-TLS truncation level: a positive integer or `auto`.
    #[arg(long)]
    pub k: Option<String>,

    /// Comma-separated truncation levels for `sweep-k` (default: 1..=r).
    #[arg(long)]
    pub k_list: Option<String>,

    /// Observation noise variance.
    #[arg(long)]
    pub sigma2: Option<f64>,

    #[arg(long)]
    pub trials: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Norm of the selection residual: spectral or frobenius.
    #[arg(long)]
    pub ek_norm: Option<String>,

    /// Remove the temporal mean before decomposing.
    #[arg(long)]
    pub subtract_mean: bool,

    /// Multiply loaded snapshots by this factor.
    #[arg(long)]
    pub scale: Option<f64>,

    /// Eigenvalue matching radius for `montecarlo`.
    #[arg(long)]
    pub match_radius: Option<f64>,

    /// Run Monte Carlo trials on one thread.
    #[arg(long)]
    pub serial: bool,
}
