use std::path::PathBuf;

use clap::Args;
use clozer_core::bank::{load_bank, select, Order, Selection};
use clozer_core::grading::{grade as grade_answer, stem};

use crate::exit::{usage, CmdResult, OrExit};

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Question bank (JSON-lines).
    #[arg(long)]
    bank: PathBuf,
    /// Show only the N highest-scoring questions.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long)]
    min_gap: Option<f64>,
    #[arg(long)]
    target: Option<String>,
}

pub fn run(a: RankArgs) -> CmdResult {
    if !a.bank.is_file() {
        return Err(usage(format!("bank {} does not exist", a.bank.display())));
    }
    let bank = load_bank(&a.bank).or_runtime()?;
    let rows = select(
        &bank.questions,
        &Selection {
            min_gap: a.min_gap,
            target_word: a.target,
            limit: a.top,
            order: Order::PhiDesc,
        },
    );
    println!(
        "{:>4}  {:>8}  {:>8}  {:>8}  {:>3}  {:<24}  masked_text",
        "rank", "phi", "gini", "rw", "j", "question_id"
    );
    for (i, q) in rows.iter().enumerate() {
        println!(
            "{:>4}  {:>8.6}  {:>8.6}  {:>8.6}  {:>3}  {:<24}  {}",
            i + 1,
            q.phi,
            q.gini,
            q.rw,
            q.target_rank,
            q.question_id,
            q.masked_text
        );
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct GradeArgs {
    /// Ground-truth target word.
    #[arg(long)]
    truth: String,
    /// Submitted answer.
    #[arg(long, allow_hyphen_values = true)]
    answer: String,
}

pub fn grade(a: GradeArgs) -> CmdResult {
    let g = grade_answer(&a.answer, &a.truth).or_usage()?;
    println!("truth   {}", g.normalized_truth);
    println!("answer  {}", g.normalized_answer);
    println!("stems   {} / {}", stem(&g.normalized_truth), stem(&g.normalized_answer));
    println!("exact   {}", g.exact);
    println!("stem    {}", g.stem);
    Ok(())
}
