//! `clozer`: generate, rank, grade, serve and analyze open cloze questions.

mod analyze;
mod exit;
mod generate;
mod inputs;
mod rank;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::exit::Failure;

#[derive(Debug, Parser)]
#[command(name = "clozer", version, about = "Open cloze question generation and quizzes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a question bank from a corpus, target words and a predictor.
    Generate(generate::GenerateArgs),
    /// Write masked target sentences as JSON-lines, e.g. to build a
    /// prediction table offline.
    Extract(generate::ExtractArgs),
    /// List bank questions by gap score.
    Rank(rank::RankArgs),
    /// Grade one answer against a target word.
    Grade(rank::GradeArgs),
    /// Run the quiz HTTP service.
    Serve(serve::ServeArgs),
    /// Correlate gap scores with correct ratios from an answer log.
    Analyze(analyze::AnalyzeArgs),
}

/// Default data directory, overridable through `CLOZER_DATA_DIR`.
pub(crate) const DEFAULT_DATA_DIR: &str = "clozer-data";

pub(crate) fn data_dir_arg(v: Option<PathBuf>) -> PathBuf {
    v.unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate::run(a),
        Command::Extract(a) => generate::extract(a),
        Command::Rank(a) => rank::run(a),
        Command::Grade(a) => rank::grade(a),
        Command::Serve(a) => serve::run(a),
        Command::Analyze(a) => analyze::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
