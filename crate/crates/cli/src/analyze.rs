use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use clozer_core::analysis::{aggregate, correlation, export_scatter, Metric};
use clozer_core::answer_log::read_log;
use clozer_core::bank::load_bank;

use crate::exit::{runtime, usage, CmdResult, OrExit};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Exact,
    Stem,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    bank: PathBuf,
    /// Answer log; defaults to answers.jsonl in the data directory.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, env = "CLOZER_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Scatter CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Correct ratio to correlate with the gap score.
    #[arg(long, value_enum, default_value_t = MetricArg::Exact)]
    metric: MetricArg,
}

pub fn run(a: AnalyzeArgs) -> CmdResult {
    let log_path = a
        .log
        .unwrap_or_else(|| crate::data_dir_arg(a.data_dir).join(clozer_service::ANSWERS_FILE));
    for (p, what) in [(&a.bank, "bank"), (&log_path, "answer log")] {
        if !p.is_file() {
            return Err(usage(format!("{what} {} does not exist", p.display())));
        }
    }
    let bank = load_bank(&a.bank).or_runtime()?;
    let log = read_log(&log_path).or_runtime()?;
    if log.is_empty() {
        return Err(runtime(format!("answer log {} is empty", log_path.display())));
    }
    let stats = aggregate(&bank.questions, &log).or_runtime()?;
    if let Some(out) = &a.out {
        let f = File::create(out).map_err(|e| runtime(format!("cannot create {}: {e}", out.display())))?;
        export_scatter(&stats, BufWriter::new(f)).or_runtime()?;
    }
    let (metric, label) = match a.metric {
        MetricArg::Exact => (Metric::Exact, "exact"),
        MetricArg::Stem => (Metric::Stem, "stem"),
    };
    let answered = stats.iter().filter(|s| s.n_answers > 0).count();
    let unanswered = stats.len() - answered;
    println!("questions answered: {answered} (unanswered: {unanswered})");
    println!("first-attempt answers: {}", stats.iter().map(|s| s.n_answers).sum::<usize>());
    let r = correlation(&stats, metric).or_runtime()?;
    println!("pearson r (phi vs {label} ratio): {r:.6}");
    Ok(())
}
