//! `genquant`: score, mine and run experiments from the command line.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 when some records
//! or samples failed (a `failures.json` lists them).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::BackendArgs;

#[derive(Debug, Parser)]
#[command(
    name = "genquant",
    version,
    about = "Quantifier p-acceptability for generic sentences"
)]
struct Cli {
    /// key = value config file, consulted after flags and environment.
    #[arg(long, global = true, env = "GENQUANT_CONFIG")]
    config: Option<PathBuf>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// p-acceptability of every sample.
    Score(ScoreArgs),
    /// Run one experiment and write its CSV reports.
    Exp(ExpArgs),
    /// Mine candidate generic sentences from documents.
    Mine(MineArgs),
    /// Write the stereotype seed file.
    GenStereo(GenStereoArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Input samples.
    #[arg(long)]
    data: Option<PathBuf>,
    /// congen-jsonl or genericskb-tsv.
    #[arg(long, default_value = "congen-jsonl")]
    format: String,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    backend: BackendArgs,
    /// none, full or tokens:K.
    #[arg(long, default_value = "full")]
    context: String,
    /// Leave GEN out of the candidates.
    #[arg(long)]
    no_gen: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    Confusion,
    Implicit,
    Context,
    Stereo,
    Hvshp,
}

#[derive(Debug, Args)]
struct ExpArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    backend: BackendArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Seed for random contexts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Longest context in the sweep (multiple of 4).
    #[arg(long, default_value_t = 64)]
    max_ctx: usize,
    /// Sweep without GEN among the candidates.
    #[arg(long)]
    no_gen: bool,
    /// Sweep with contexts borrowed from other documents.
    #[arg(long)]
    random_context: bool,
    /// Confusion without context.
    #[arg(long)]
    no_context: bool,
    /// Context lengths for hvshp.
    #[arg(long, value_delimiter = ',', default_value = "0,32,128")]
    lengths: Vec<usize>,
    /// Real-group stereotype seeds (JSON lines).
    #[arg(long, env = "GENQUANT_REAL_SEEDS")]
    real_seeds: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MineArgs {
    /// Documents, one `{"id", "text"}` object per line.
    #[arg(long)]
    input: PathBuf,
    /// Candidate output (congen-jsonl with empty quantifiers).
    #[arg(long)]
    out: PathBuf,
    /// Classifier scores must exceed this.
    #[arg(long, default_value_t = 0.7)]
    threshold: f64,
    /// none, keyword, or the URL of a scoring service.
    #[arg(long, default_value = "none")]
    scorer: String,
    #[arg(long)]
    no_exclusion: bool,
    #[arg(long)]
    no_passive: bool,
    #[arg(long)]
    no_plural_present: bool,
    #[arg(long)]
    no_dedup: bool,
    /// Source label for the candidates.
    #[arg(long, default_value = "other")]
    source: String,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
}

#[derive(Debug, Args)]
struct GenStereoArgs {
    /// Seed file to write.
    #[arg(long)]
    out: PathBuf,
    /// Real-group seeds to merge with the bundled invented ones.
    #[arg(long, env = "GENQUANT_REAL_SEEDS")]
    real_seeds: Option<PathBuf>,
    /// Also write the generated paraphrase samples (congen-jsonl).
    #[arg(long)]
    samples_out: Option<PathBuf>,
}

/// How a command finished when it did not hit a configuration error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Partial,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match commands::run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
