use super::tokenize::token_spans;
use super::{ExtractionConfig, MaskedSentence, SentenceRecord, TextError};

fn token_matches(token: &str, target: &str) -> bool {
    token.to_lowercase() == target.to_lowercase()
}

/// Case-insensitive whole-token occurrences of `target` in `record`.
pub fn count_occurrences(record: &SentenceRecord, target: &str) -> usize {
    record
        .tokens
        .iter()
        .filter(|t| token_matches(t, target))
        .count()
}

/// Records whose tokens contain `target`, in input order.
pub fn extract_target_sentences(corpus: &[SentenceRecord], target: &str) -> Vec<SentenceRecord> {
    corpus
        .iter()
        .filter(|r| count_occurrences(r, target) > 0)
        .cloned()
        .collect()
}

/// Length, vocabulary and repeated-target checks for a single record.
pub fn keep_sentence(record: &SentenceRecord, target: &str, cfg: &ExtractionConfig) -> bool {
    let n = record.tokens.len();
    if n < cfg.min_tokens || n > cfg.max_tokens {
        return false;
    }
    let in_vocab = record.tokens.iter().enumerate().all(|(i, tok)| {
        let proper = cfg.exempt_capitalized
            && i > 0
            && tok.chars().next().is_some_and(char::is_uppercase);
        proper || cfg.word_list.contains(tok)
    });
    if !in_vocab {
        return false;
    }
    !cfg.drop_repeated_target || count_occurrences(record, target) == 1
}

pub fn filter_sentences(
    candidates: &[SentenceRecord],
    target: &str,
    cfg: &ExtractionConfig,
) -> Vec<SentenceRecord> {
    candidates
        .iter()
        .filter(|r| keep_sentence(r, target, cfg))
        .cloned()
        .collect()
}

/// Replaces the `occurrence`-th match of `target` (0-based) with
/// `placeholder`.
pub fn mask_sentence(
    record: &SentenceRecord,
    target: &str,
    occurrence: usize,
    placeholder: &str,
) -> Result<MaskedSentence, TextError> {
    if record.text.contains(placeholder) {
        return Err(TextError::PlaceholderInText(record.id.clone()));
    }
    let spans = token_spans(&record.text);
    let matches: Vec<(usize, std::ops::Range<usize>)> = spans
        .into_iter()
        .enumerate()
        .filter(|(_, r)| token_matches(&record.text[r.clone()], target))
        .collect();
    let (index, span) = matches
        .get(occurrence)
        .cloned()
        .ok_or_else(|| TextError::OccurrenceOutOfRange {
            target: target.to_string(),
            occurrence,
            found: matches.len(),
        })?;
    let mut masked_text = String::with_capacity(record.text.len() + placeholder.len());
    masked_text.push_str(&record.text[..span.start]);
    masked_text.push_str(placeholder);
    masked_text.push_str(&record.text[span.end..]);
    Ok(MaskedSentence {
        sentence_id: record.id.clone(),
        target_word: target.to_lowercase(),
        surface: record.text[span].to_string(),
        target_token_index: index,
        masked_text,
        placeholder: placeholder.to_string(),
    })
}
