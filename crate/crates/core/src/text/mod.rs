//! Corpus ingestion and target sentence preparation.

mod corpus;
mod segment;
mod select;
mod tokenize;
mod wordlist;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use corpus::{ingest, ingest_corpus, segment_document, CorpusFormat, CorpusSource, IngestOutcome};
pub use segment::{collapse_whitespace, paragraph_spans, sentence_spans};
pub use select::{
    count_occurrences, extract_target_sentences, filter_sentences, keep_sentence, mask_sentence,
};
pub use tokenize::{token_spans, tokenize};
pub use wordlist::WordList;

#[derive(Debug, thiserror::Error)]
pub enum TextError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8")]
    InvalidUtf8 { path: PathBuf },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("occurrence {occurrence} of {target:?} does not exist ({found} found)")]
    OccurrenceOutOfRange {
        target: String,
        occurrence: usize,
        found: usize,
    },
    #[error("sentence {0} already contains the mask placeholder")]
    PlaceholderInText(String),
    #[error("invalid extraction config: {0}")]
    InvalidConfig(String),
    #[error("invalid word list entry {0:?}")]
    InvalidWord(String),
}

/// Where a sentence came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRef {
    pub doc: String,
    /// Byte offset of the sentence within the document text.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub source: SourceRef,
}

impl SentenceRecord {
    /// Builds a record from sentence text. Returns `None` when the text has
    /// no word tokens.
    pub fn new(id: impl Into<String>, text: impl Into<String>, source: SourceRef) -> Option<Self> {
        let text = text.into();
        let tokens = tokenize(&text);
        if tokens.is_empty() {
            return None;
        }
        Some(SentenceRecord {
            id: id.into(),
            text,
            tokens,
            source,
        })
    }
}

/// A sentence with one occurrence of the target replaced by a placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedSentence {
    pub sentence_id: String,
    pub target_word: String,
    /// Surface form of the masked occurrence, as written in the sentence.
    pub surface: String,
    pub target_token_index: usize,
    pub masked_text: String,
    pub placeholder: String,
}

impl MaskedSentence {
    /// Puts the original surface form back at the placeholder.
    pub fn unmask(&self) -> String {
        self.masked_text.replacen(&self.placeholder, &self.surface, 1)
    }

    /// The masked text with the placeholder swapped for `token`.
    pub fn with_mask_token(&self, token: &str) -> String {
        self.masked_text.replacen(&self.placeholder, token, 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionConfig {
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub word_list: WordList,
    /// Tokens starting with an uppercase letter past the first position skip
    /// the word list check (proper nouns).
    pub exempt_capitalized: bool,
    pub drop_repeated_target: bool,
    pub mask_placeholder: String,
}

impl ExtractionConfig {
    pub const DEFAULT_MIN_TOKENS: usize = 8;
    pub const DEFAULT_MAX_TOKENS: usize = 30;
    pub const DEFAULT_PLACEHOLDER: &'static str = "[MASK]";

    pub fn new(word_list: WordList) -> Self {
        ExtractionConfig {
            min_tokens: Self::DEFAULT_MIN_TOKENS,
            max_tokens: Self::DEFAULT_MAX_TOKENS,
            word_list,
            exempt_capitalized: true,
            drop_repeated_target: true,
            mask_placeholder: Self::DEFAULT_PLACEHOLDER.to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), TextError> {
        if self.min_tokens < 1 || self.min_tokens > self.max_tokens {
            return Err(TextError::InvalidConfig(format!(
                "token bounds must satisfy 1 <= min ({}) <= max ({})",
                self.min_tokens, self.max_tokens
            )));
        }
        if self.mask_placeholder.trim().is_empty() {
            return Err(TextError::InvalidConfig("mask placeholder is empty".into()));
        }
        Ok(())
    }
}
