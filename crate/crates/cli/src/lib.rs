//! Command-line frontend: `synth`, `embed`, `train`, `sweep` and `report`.
//!
//! Every command accepts `--config FILE` with `key=value` lines whose keys
//! are the long flag names; flags given on the command line win. Each run
//! writes `<primary output>.manifest` in the same format, so a manifest can
//! be passed back as `--config` to repeat the run.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 numerical failure.

pub mod commands;
pub mod config;
pub mod svg;

use std::fmt;
use std::path::PathBuf;

use aaseq_core::trainer::TrainError;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "aaseq",
    version,
    about = "Sequence embeddings and Anderson-accelerated linear classifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate labeled sequences with planted class motifs.
    Synth(SynthArgs),
    /// Turn labeled FASTA into a feature matrix.
    Embed(EmbedArgs),
    /// Train the linear classifier and log a per-iteration trace.
    Train(TrainArgs),
    /// Train once per Anderson factor and compare.
    Sweep(SweepArgs),
    /// Plot loss traces as SVG.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// key=value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of classes [default: 3]
    #[arg(long)]
    pub classes: Option<usize>,
    /// Sequences per class [default: 100]
    #[arg(long)]
    pub per_class: Option<usize>,
    /// Residues per sequence [default: 60]
    #[arg(long)]
    pub length: Option<usize>,
    /// Planted motif length [default: 6]
    #[arg(long)]
    pub motif_len: Option<usize>,
    /// Per-residue mutation probability in [0, 1) [default: 0.05]
    #[arg(long)]
    pub noise: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Preset (amino, nucleotide) or literal symbols [default: amino]
    #[arg(long)]
    pub alphabet: Option<String>,
    #[arg(long)]
    pub fasta_out: Option<PathBuf>,
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub fasta: Option<PathBuf>,
    /// Two-column `id<TAB>class` file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// spike2vec, minimizer or spaced [default: spike2vec]
    #[arg(long)]
    pub method: Option<String>,
    /// Mer length [default: 3, 9 for minimizer, 4 for spaced]
    #[arg(long)]
    pub k: Option<usize>,
    /// Minimizer length [default: 3]
    #[arg(long)]
    pub m: Option<usize>,
    /// Spaced window length [default: 9]
    #[arg(long)]
    pub g: Option<usize>,
    /// Preset (amino, nucleotide) or literal symbols [default: amino]
    #[arg(long)]
    pub alphabet: Option<String>,
    /// Apply PCA when the spectrum is wider than this [default: 1000]
    #[arg(long)]
    pub pca_threshold: Option<usize>,
    /// [default: 500]
    #[arg(long)]
    pub pca_components: Option<usize>,
    /// Matrix CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Labels in matrix row order [default: <out>.labels.tsv]
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Anderson factor in [0, 1] [default: 0]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// [default: 700]
    #[arg(long)]
    pub iters: Option<usize>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// paper-sum or softmax [default: softmax]
    #[arg(long)]
    pub norm: Option<String>,
    /// Gradient multiplier [default: 1.0]
    #[arg(long)]
    pub step: Option<f64>,
    /// [default: 1e-10]
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// [default: <trace-out>.model]
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// `start:stop:step` (inclusive) or a comma list [default: 0:1:0.1]
    #[arg(long)]
    pub grid: Option<String>,
    /// Loss level for iterations_to_threshold, or `auto` for 1.1 × the
    /// final loss at the smallest successful α [default: auto]
    #[arg(long)]
    pub threshold: Option<String>,
    /// [default: 300]
    #[arg(long)]
    pub iters: Option<usize>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// [default: softmax]
    #[arg(long)]
    pub norm: Option<String>,
    /// [default: 1.0]
    #[arg(long)]
    pub step: Option<f64>,
    /// [default: 1e-10]
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Trace drawn in green; repeatable.
    #[arg(long)]
    pub with_aa: Vec<PathBuf>,
    /// Trace drawn in red; repeatable.
    #[arg(long)]
    pub without_aa: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Marks an error as a numerical failure (exit code 3).
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<NumericalFailure>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<TrainError>() {
            if matches!(
                e,
                TrainError::NonFiniteWeights { .. }
                    | TrainError::NonFiniteUpdate
                    | TrainError::DegenerateSum { .. }
            ) {
                return 3;
            }
        }
    }
    2
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Embed(a) => commands::embed(a),
        Command::Train(a) => commands::train(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Report(a) => commands::report(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        let e = anyhow::Error::new(TrainError::InvalidConfig("x".into()));
        assert_eq!(exit_code(&e), 2);
        let e = anyhow::Error::new(TrainError::NonFiniteUpdate).context("train");
        assert_eq!(exit_code(&e), 3);
        let e = anyhow::Error::new(NumericalFailure("all failed".into()));
        assert_eq!(exit_code(&e), 3);
    }
}
