use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::segment::{collapse_whitespace, sentence_spans};
use super::{SentenceRecord, SourceRef, TextError};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// UTF-8 text, paragraphs separated by blank lines.
    Plaintext,
    /// One JSON object per line with a `text` field.
    Jsonl,
}

impl CorpusFormat {
    /// `.jsonl` / `.ndjson` files are JSON-lines, anything else plaintext.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => CorpusFormat::Jsonl,
            _ => CorpusFormat::Plaintext,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusSource {
    pub path: PathBuf,
    /// Stable document identifier; sentence ids are derived from it.
    pub doc_id: String,
    pub format: CorpusFormat,
}

#[derive(Debug, Default)]
pub struct IngestOutcome {
    pub records: Vec<SentenceRecord>,
    /// Per-file failures. Records from files that failed part way through
    /// are still included.
    pub errors: Vec<TextError>,
}

/// Segments one document. Sentence ids are `{doc_id}#{n}` with `n` counting
/// the document's sentences from zero.
pub fn segment_document(doc_id: &str, text: &str) -> Vec<SentenceRecord> {
    sentence_spans(text)
        .into_iter()
        .filter_map(|span| {
            let sentence = collapse_whitespace(&text[span.clone()]);
            SentenceRecord::new(String::new(), sentence, SourceRef {
                doc: doc_id.to_string(),
                offset: span.start,
            })
        })
        .enumerate()
        .map(|(n, mut rec)| {
            rec.id = format!("{doc_id}#{n}");
            rec
        })
        .collect()
}

#[derive(Deserialize)]
struct JsonlDoc {
    text: String,
}

fn read_utf8(path: &Path) -> Result<String, TextError> {
    let bytes = std::fs::read(path).map_err(|source| TextError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|_| TextError::InvalidUtf8 {
        path: path.to_path_buf(),
    })
}

fn ingest_one(src: &CorpusSource) -> (Vec<SentenceRecord>, Vec<TextError>) {
    let text = match read_utf8(&src.path) {
        Ok(t) => t,
        Err(e) => return (Vec::new(), vec![e]),
    };
    match src.format {
        CorpusFormat::Plaintext => (segment_document(&src.doc_id, &text), Vec::new()),
        CorpusFormat::Jsonl => {
            let mut records = Vec::new();
            let mut errors = Vec::new();
            for (idx, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let lineno = idx + 1;
                match serde_json::from_str::<JsonlDoc>(line) {
                    Ok(doc) => {
                        let doc_id = format!("{}:{lineno}", src.doc_id);
                        records.extend(segment_document(&doc_id, &doc.text));
                    }
                    Err(e) => errors.push(TextError::Malformed {
                        path: src.path.clone(),
                        line: lineno,
                        message: e.to_string(),
                    }),
                }
            }
            (records, errors)
        }
    }
}

/// Reads and segments every source. Files are processed independently (in
/// parallel when enabled); output keeps the order of `sources`. Sources that
/// repeat an earlier `doc_id` are rejected so sentence ids stay unique.
pub fn ingest(sources: &[CorpusSource]) -> IngestOutcome {
    let mut seen = HashSet::new();
    let mut unique = Vec::with_capacity(sources.len());
    let mut out = IngestOutcome::default();
    for src in sources {
        if seen.insert(src.doc_id.as_str()) {
            unique.push(src.clone());
        } else {
            out.errors.push(TextError::Malformed {
                path: src.path.clone(),
                line: 0,
                message: format!("duplicate document id {:?}", src.doc_id),
            });
        }
    }
    for (records, errors) in par::map(&unique, ingest_one) {
        out.records.extend(records);
        out.errors.extend(errors);
    }
    out
}

/// Ingests files in one format, using each path as its document id.
pub fn ingest_corpus(paths: &[PathBuf], format: CorpusFormat) -> IngestOutcome {
    let sources: Vec<CorpusSource> = paths
        .iter()
        .map(|p| CorpusSource {
            path: p.clone(),
            doc_id: p.display().to_string(),
            format,
        })
        .collect();
    ingest(&sources)
}
