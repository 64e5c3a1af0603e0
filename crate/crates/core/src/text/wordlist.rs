use std::collections::BTreeSet;
use std::path::Path;

use super::TextError;

/// Allowed vocabulary. Entries are lowercase and free of whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordList {
    words: BTreeSet<String>,
}

impl WordList {
    pub fn new<I, S>(words: I) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for w in words {
            let w = w.into();
            if w.is_empty() || w.chars().any(char::is_whitespace) || w.to_lowercase() != w {
                return Err(TextError::InvalidWord(w));
            }
            set.insert(w);
        }
        Ok(WordList { words: set })
    }

    /// Parses the one-word-per-line format. Blank lines and lines starting
    /// with `#` are ignored; entries are trimmed.
    pub fn parse(text: &str) -> Result<Self, TextError> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> Result<Self, TextError> {
        let bytes = std::fs::read(path).map_err(|source| TextError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let text = String::from_utf8(bytes).map_err(|_| TextError::InvalidUtf8 {
            path: path.to_path_buf(),
        })?;
        Self::parse(&text)
    }

    /// Case-insensitive membership.
    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}
