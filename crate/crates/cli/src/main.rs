//! `pseudoword`: build vocabularies, fit visual representations, initialize
//! mappings, train, and evaluate multimodal embeddings.
//!
//! Exit status is 0 on success, 1 for invalid input or configuration and 2
//! when a computation fails.

mod commands;
mod settings;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use settings::{Overrides, Settings};

#[derive(Parser)]
#[command(name = "pseudoword", version, about = "Skip-gram embeddings with visual pseudowords")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count a corpus into a vocabulary file
    BuildVocab(Overrides),
    /// Fit per-word centroids or Gaussian mixtures to visual features
    FitVisual(Overrides),
    /// Write an initial mapping matrix (random or regressed on pretrained embeddings)
    InitMapping(Overrides),
    /// Train embeddings and the mapping
    Train(Overrides),
    /// Spearman correlation on word-similarity benchmarks
    Eval(Overrides),
    /// Nearest neighbors of query words
    Neighbors(Overrides),
}

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<pseudoword::Error> for CliError {
    fn from(e: pseudoword::Error) -> Self {
        let code = match e {
            pseudoword::Error::Numerical(_) => 2,
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (overrides, handler): (&Overrides, fn(&Settings) -> Result<(), CliError>) = match &cli.command {
        Command::BuildVocab(o) => (o, commands::build_vocab),
        Command::FitVisual(o) => (o, commands::fit_visual),
        Command::InitMapping(o) => (o, commands::init_mapping),
        Command::Train(o) => (o, commands::train),
        Command::Eval(o) => (o, commands::eval),
        Command::Neighbors(o) => (o, commands::neighbors),
    };
    handler(&Settings::resolve(overrides)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
