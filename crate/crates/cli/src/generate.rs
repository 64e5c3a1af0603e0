use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use clozer_core::bank::save_bank;
use clozer_core::mlm::{open_backend, BackendDescriptor};
use clozer_core::pipeline::{run_generation, GenerationJob, PipelineError, SampleSpec};
use clozer_core::text::{extract_target_sentences, filter_sentences, mask_sentence};
use serde::Serialize;

use crate::exit::{runtime, usage, CmdResult, Failure, OrExit};
use crate::inputs::InputArgs;

fn parse_min_gap(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1)"))
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    inputs: InputArgs,
    /// Predictor: `tabular:<path>` or `remote:<url>`.
    #[arg(long)]
    backend: String,
    /// Model name recorded in the bank (defaults to the table's file stem or
    /// `remote`).
    #[arg(long)]
    model_name: Option<String>,
    /// Mask token sent to the model.
    #[arg(long, default_value = "[MASK]")]
    mask_token: String,
    #[arg(long, default_value_t = BackendDescriptor::DEFAULT_TOP_M)]
    top_m: usize,
    /// Gap threshold in [0, 1).
    #[arg(long, default_value_t = clozer_core::DEFAULT_MIN_GAP, value_parser = parse_min_gap)]
    min_gap: f64,
    /// Number of leading confidences in the reweighting denominator.
    #[arg(long, default_value_t = clozer_core::DEFAULT_TOP_K)]
    k: usize,
    /// Maximum questions per target word.
    #[arg(long, default_value_t = GenerationJob::DEFAULT_PER_TARGET_LIMIT)]
    per_target: usize,
    /// Keep a random subset of this many questions (requires --seed).
    #[arg(long, requires = "seed")]
    sample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Timestamp stored in each question. Defaults to SOURCE_DATE_EPOCH when
    /// set, else the current time.
    #[arg(long)]
    created_at: Option<String>,
    /// Output bank (JSON-lines).
    #[arg(long)]
    out: PathBuf,
    /// Also write the run report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn parse_backend(
    spec: &str,
    model_name: Option<String>,
    mask_token: &str,
    top_m: usize,
) -> Result<BackendDescriptor, Failure> {
    let mut desc = match spec.split_once(':') {
        Some(("tabular", path)) if !path.is_empty() => {
            let path = PathBuf::from(path);
            if !path.is_file() {
                return Err(usage(format!("prediction table {} does not exist", path.display())));
            }
            let name = model_name.unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "tabular".into())
            });
            BackendDescriptor::tabular(path, name)
        }
        Some(("remote", url)) if url.starts_with("http://") || url.starts_with("https://") => {
            BackendDescriptor::remote(url, model_name.unwrap_or_else(|| "remote".into()))
        }
        _ => {
            return Err(usage(format!(
                "invalid backend {spec:?}; expected tabular:<path> or remote:<url>"
            )))
        }
    };
    desc.mask_token = mask_token.to_string();
    desc.top_m = top_m;
    desc.validate().or_usage()?;
    Ok(desc)
}

fn created_at(flag: Option<String>) -> Result<String, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    let at = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => {
            let secs: i64 = v
                .trim()
                .parse()
                .map_err(|_| usage(format!("SOURCE_DATE_EPOCH {v:?} is not an integer")))?;
            chrono::DateTime::from_timestamp(secs, 0)
                .ok_or_else(|| usage(format!("SOURCE_DATE_EPOCH {secs} out of range")))?
        }
        Err(_) => chrono::Utc::now(),
    };
    Ok(at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

pub fn run(a: GenerateArgs) -> CmdResult {
    let desc = parse_backend(&a.backend, a.model_name.clone(), &a.mask_token, a.top_m)?;
    if a.k < 2 || a.k > a.top_m {
        return Err(usage(format!("--k must be in 2..={}", a.top_m)));
    }
    if a.per_target == 0 {
        return Err(usage("--per-target must be at least 1"));
    }
    if a.sample == Some(0) {
        return Err(usage("--sample must be at least 1"));
    }
    let inputs = a.inputs.load()?;
    let backend = open_backend(&desc).or_runtime()?;

    let mut job = GenerationJob::new(inputs.targets, inputs.extraction, created_at(a.created_at)?);
    job.k = a.k;
    job.min_gap = a.min_gap;
    job.per_target_limit = a.per_target;
    job.sample = a.sample.zip(a.seed).map(|(n, seed)| SampleSpec { n, seed });

    let (questions, report) = match run_generation(&job, &inputs.corpus, backend.as_ref()) {
        Ok(r) => r,
        Err(e @ PipelineError::InvalidJob(_)) => return Err(usage(e)),
        Err(e) => return Err(runtime(e)),
    };
    eprintln!("{report}");
    if let Some(path) = &a.report {
        std::fs::write(path, format!("{report}\n"))
            .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    save_bank(&questions, &a.out).or_runtime()?;
    if questions.is_empty() {
        return Err(runtime(format!(
            "no questions produced (bank written empty to {})",
            a.out.display()
        )));
    }
    eprintln!("wrote {} question(s) to {}", questions.len(), a.out.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    inputs: InputArgs,
    /// Mask token written into `masked_text`.
    #[arg(long, default_value = "[MASK]")]
    mask_token: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ExtractRow<'a> {
    key: &'a str,
    target: &'a str,
    masked_text: String,
    surface: &'a str,
}

pub fn extract(a: ExtractArgs) -> CmdResult {
    if a.mask_token.is_empty() {
        return Err(usage("--mask-token is empty"));
    }
    let inputs = a.inputs.load()?;
    let cfg = &inputs.extraction;
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            runtime(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    let mut rows = 0usize;
    for target in &inputs.targets {
        let kept = filter_sentences(&extract_target_sentences(&inputs.corpus, target), target, cfg);
        for r in kept {
            let Ok(m) = mask_sentence(&r, target, 0, &cfg.mask_placeholder) else {
                continue;
            };
            let row = ExtractRow {
                key: &r.id,
                target,
                masked_text: m.with_mask_token(&a.mask_token),
                surface: &m.surface,
            };
            serde_json::to_writer(&mut out, &row).or_runtime()?;
            out.write_all(b"\n").or_runtime()?;
            rows += 1;
        }
    }
    out.flush().or_runtime()?;
    eprintln!("extracted {rows} masked sentence(s)");
    Ok(())
}
