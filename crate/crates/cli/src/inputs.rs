//! Corpus, word list and target inputs shared by `generate` and `extract`.

use std::path::{Path, PathBuf};

use clap::Args;
use clozer_core::text::{ingest, CorpusFormat, CorpusSource, ExtractionConfig, SentenceRecord, WordList};
use walkdir::WalkDir;

use crate::exit::{runtime, usage, Failure, OrExit};

const CORPUS_EXTENSIONS: &[&str] = &["txt", "text", "md", "jsonl", "ndjson"];

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Corpus files or directories (searched recursively for .txt, .text,
    /// .md, .jsonl and .ndjson files).
    #[arg(long, required = true, num_args = 1..)]
    pub corpus: Vec<PathBuf>,
    /// Allowed vocabulary, one lowercase word per line.
    #[arg(long)]
    pub wordlist: PathBuf,
    /// Target words, one per line.
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long, default_value_t = ExtractionConfig::DEFAULT_MIN_TOKENS)]
    pub min_tokens: usize,
    #[arg(long, default_value_t = ExtractionConfig::DEFAULT_MAX_TOKENS)]
    pub max_tokens: usize,
    /// Check capitalized tokens against the word list too.
    #[arg(long)]
    pub no_proper_noun_exemption: bool,
    /// Keep sentences where the target occurs more than once.
    #[arg(long)]
    pub keep_repeated: bool,
}

pub struct Inputs {
    pub corpus: Vec<SentenceRecord>,
    pub targets: Vec<String>,
    pub extraction: ExtractionConfig,
}

fn require(path: &Path, what: &str) -> Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(usage(format!("{what} {} does not exist", path.display())))
    }
}

/// Target words: blank lines and `#` comments skipped, lowercased, order
/// kept, duplicates dropped.
pub fn parse_targets(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let t = t.to_lowercase();
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

fn doc_id(root: &Path, file: &Path) -> String {
    let rel = file.strip_prefix(root).unwrap_or(file);
    let rel = if rel.as_os_str().is_empty() {
        Path::new(file.file_name().unwrap_or(file.as_os_str()))
    } else {
        rel
    };
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Corpus files in a stable order with ids relative to the given roots, so
/// output does not depend on the working directory.
pub fn corpus_sources(roots: &[PathBuf]) -> Result<Vec<CorpusSource>, Failure> {
    let mut out = Vec::new();
    for root in roots {
        require(root, "corpus path")?;
        if root.is_file() {
            out.push(CorpusSource {
                path: root.clone(),
                doc_id: doc_id(root, root),
                format: CorpusFormat::from_path(root),
            });
            continue;
        }
        for entry in WalkDir::new(root).sort_by_file_name() {
            let entry = entry.or_runtime()?;
            let p = entry.path();
            let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("");
            if entry.file_type().is_file() && CORPUS_EXTENSIONS.contains(&ext) {
                out.push(CorpusSource {
                    path: p.to_path_buf(),
                    doc_id: doc_id(root, p),
                    format: CorpusFormat::from_path(p),
                });
            }
        }
    }
    if out.is_empty() {
        return Err(usage("no corpus files found"));
    }
    Ok(out)
}

impl InputArgs {
    /// Validates every path, then reads the inputs.
    pub fn load(&self) -> Result<Inputs, Failure> {
        require(&self.wordlist, "word list")?;
        require(&self.targets, "targets file")?;
        let sources = corpus_sources(&self.corpus)?;

        let targets_text = std::fs::read_to_string(&self.targets)
            .map_err(|e| usage(format!("cannot read {}: {e}", self.targets.display())))?;
        let targets = parse_targets(&targets_text);
        if targets.is_empty() {
            return Err(usage(format!("no targets in {}", self.targets.display())));
        }
        let word_list = WordList::load(&self.wordlist).or_usage()?;
        let mut extraction = ExtractionConfig::new(word_list);
        extraction.min_tokens = self.min_tokens;
        extraction.max_tokens = self.max_tokens;
        extraction.exempt_capitalized = !self.no_proper_noun_exemption;
        extraction.drop_repeated_target = !self.keep_repeated;
        extraction.validate().or_usage()?;

        let outcome = ingest(&sources);
        for e in &outcome.errors {
            eprintln!("warning: {e}");
        }
        if outcome.records.is_empty() {
            return Err(runtime("corpus contains no sentences"));
        }
        Ok(Inputs {
            corpus: outcome.records,
            targets,
            extraction,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_parsing() {
        assert_eq!(parse_targets("Peace\n\n# c\nturn\npeace\n  mind  \n"), ["peace", "turn", "mind"]);
        assert!(parse_targets("\n# only comments\n").is_empty());
    }

    #[test]
    fn relative_doc_ids() {
        assert_eq!(doc_id(Path::new("/a/corpus"), Path::new("/a/corpus/sub/x.txt")), "sub/x.txt");
        assert_eq!(doc_id(Path::new("/a/x.txt"), Path::new("/a/x.txt")), "x.txt");
    }
}
