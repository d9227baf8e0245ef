use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lexalign_cli::{Pipeline, PipelineConfig, PipelineError, RunOptions, Stage};

/// Bilingual lexicon induction pipeline.
#[derive(Parser)]
#[command(name = "lexalign", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides the embedding and split seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of training threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Forget the manifest and recompute every stage.
    #[arg(long)]
    reset: bool,
    /// Fail instead of replacing outputs of an out-of-date stage.
    #[arg(long)]
    no_overwrite: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize both corpora and count vocabularies.
    Preprocess(Common),
    /// Train skip-gram embeddings for both languages.
    TrainEmbeddings(Common),
    /// Translate source words into a seed dictionary.
    BuildDict(Common),
    /// Split the dictionary into train and test sets.
    Split(Common),
    /// Fit the orthogonal map on the training pairs.
    Map(Common),
    /// Score retrieval on the test pairs.
    Evaluate(Common),
    /// Run a single named stage.
    Run {
        #[arg(long, value_enum)]
        stage: Stage,
        #[command(flatten)]
        common: Common,
    },
    /// Run every stage in order, reusing cached results.
    RunAll(Common),
}

fn open(common: &Common) -> Result<Pipeline, PipelineError> {
    let mut config = PipelineConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config = config.with_seed(seed);
    }
    if let Some(threads) = common.threads {
        config = config.with_threads(threads);
    }
    Pipeline::open(
        config,
        RunOptions {
            no_overwrite: common.no_overwrite,
            reset: common.reset,
        },
    )
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let (stage, common) = match cli.command {
        Command::Preprocess(c) => (Stage::Preprocess, c),
        Command::TrainEmbeddings(c) => (Stage::TrainEmbeddings, c),
        Command::BuildDict(c) => (Stage::BuildDict, c),
        Command::Split(c) => (Stage::Split, c),
        Command::Map(c) => (Stage::Map, c),
        Command::Evaluate(c) => (Stage::Evaluate, c),
        Command::Run { stage, common } => (stage, common),
        Command::RunAll(c) => {
            let mut pipeline = open(&c)?;
            let report = pipeline.run_all(|stage, status| println!("{stage}: {status}"))?;
            print!("\n{}", report.to_text());
            return Ok(());
        }
    };
    let mut pipeline = open(&common)?;
    let status = pipeline.run_stage(stage)?;
    println!("{stage}: {status}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
