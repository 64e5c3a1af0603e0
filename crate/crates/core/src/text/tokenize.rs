use std::ops::Range;

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Byte ranges of the word tokens in `text`.
///
/// A token is a run of alphabetic characters. An apostrophe joins two runs
/// when it sits between alphabetic characters ("don't", "o'clock"); leading
/// and trailing apostrophes are dropped along with all other punctuation.
pub fn token_spans(text: &str) -> Vec<Range<usize>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphabetic() {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut j = i;
        loop {
            while j < chars.len() && chars[j].1.is_alphabetic() {
                j += 1;
            }
            let joins = j + 1 < chars.len()
                && is_apostrophe(chars[j].1)
                && chars[j + 1].1.is_alphabetic();
            if joins {
                j += 1;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        spans.push(start..end);
        i = j;
    }
    spans
}

/// Word tokens of `text` in order, surface form preserved.
pub fn tokenize(text: &str) -> Vec<String> {
    token_spans(text)
        .into_iter()
        .map(|r| text[r].to_string())
        .collect()
}
