//! `lingemb`: subcommand front end for the experiment pipeline — corpus
//! ingestion, feature encoding, embedding training, classifier training,
//! and the cross-validated scheme x model comparison matrix.
//!
//! Exit codes: 0 success, 1 validation error (nothing written), 2 runtime
//! error, 3 experiment finished with at least one failed cell.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{CliError, Overrides, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "lingemb",
    version,
    about = "Feature-scheme embeddings and harmful-text classification experiments"
)]
struct Cli {
    /// JSON pipeline manifest; the flags below override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Global seed propagated to every seeded component.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads for embedding training and experiment cells.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Force a single worker everywhere; re-runs are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,

    /// Feature scheme (repeatable): TOK, LEM, TOKPOS, LEMPOS, DEP, DEPC.
    #[arg(long = "scheme", global = true, value_name = "NAME")]
    schemes: Vec<String>,

    /// Classifier (repeatable): SVM, MLP, CNN, LSTM.
    #[arg(long = "model", global = true, value_name = "NAME")]
    models: Vec<String>,

    /// Condition (repeatable): pretrained or adhoc.
    #[arg(long = "condition", global = true, value_name = "NAME")]
    conditions: Vec<String>,

    /// Output directory (default: out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the configured inputs and print corpus statistics.
    IngestCheck,
    /// Write encoded unit files (and the DEPC pair file) per scheme.
    Encode,
    /// Train skip-gram embeddings from encoded units or pairs.
    TrainEmbeddings,
    /// Fit one classifier on the whole dataset and save a checkpoint.
    TrainClassifier,
    /// Run the scheme x model x condition matrix under cross-validation.
    Experiment,
    /// Re-render the TSV report from a previous experiment's JSON.
    Report,
}

fn main() -> ExitCode {
    ExitCode::from(run())
}

fn run() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version land here too; only real parse errors
            // count as validation failures.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return code;
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8, CliError> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    cfg.apply(&Overrides {
        seed: cli.seed,
        workers: cli.workers,
        deterministic: cli.deterministic,
        schemes: cli.schemes.clone(),
        models: cli.models.clone(),
        conditions: cli.conditions.clone(),
        out: cli.out.clone(),
    });
    let resolved = cfg.resolve()?;
    match cli.command {
        Command::IngestCheck => commands::ingest_check::run(&resolved),
        Command::Encode => commands::encode::run(&resolved),
        Command::TrainEmbeddings => commands::train_embeddings::run(&resolved),
        Command::TrainClassifier => commands::train_classifier::run(&resolved),
        Command::Experiment => commands::experiment::run(&resolved),
        Command::Report => commands::report::run(&resolved),
    }
}
