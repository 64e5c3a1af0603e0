//! Rule-based sentence segmentation.
//!
//! A sentence ends at `.`, `!` or `?` (plus any run of further terminators
//! and closing quotes or brackets) when the next non-space character starts
//! with an uppercase letter, possibly behind an opening quote, or when the
//! paragraph ends. A period after a known abbreviation never ends a sentence.
//! Blank lines are hard paragraph boundaries.

use std::ops::Range;

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "jr", "sr", "prof", "rev", "hon", "gen", "col", "lt", "sgt",
    "capt", "cmdr", "gov", "sen", "rep", "pres", "mt", "ave", "blvd", "rd", "inc", "ltd", "co",
    "corp", "vs", "etc", "e.g", "i.e", "cf", "al", "fig", "approx", "dept", "est", "jan", "feb",
    "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "u.k", "a.m",
    "p.m",
];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{201D}' | '\u{2019}' | ')' | ']')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{201C}' | '\u{2018}' | '(' | '[')
}

fn is_abbreviation(before_period: &str) -> bool {
    let word = before_period
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    !word.is_empty() && ABBREVIATIONS.contains(&word.as_str())
}

/// Byte ranges of the paragraphs in `text` (runs of lines not separated by a
/// blank line).
pub fn paragraph_spans(text: &str) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.trim().is_empty() {
            if let Some(s) = start.take() {
                spans.push(s..end);
            }
        } else {
            if start.is_none() {
                start = Some(offset);
            }
            end = offset + line.len();
        }
        offset += line.len();
    }
    if let Some(s) = start {
        spans.push(s..end);
    }
    spans
}

/// Byte ranges of the sentences in `text`, trimmed of surrounding whitespace.
pub fn sentence_spans(text: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    for para in paragraph_spans(text) {
        split_paragraph(text, para, &mut out);
    }
    out
}

fn split_paragraph(text: &str, para: Range<usize>, out: &mut Vec<Range<usize>>) {
    let body = &text[para.clone()];
    let chars: Vec<(usize, char)> = body.char_indices().collect();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && is_terminator(chars[j].1) {
            j += 1;
        }
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map_or(body.len(), |&(b, _)| b);

        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let boundary = if k == chars.len() {
            true
        } else if k == j {
            false
        } else {
            let next = chars[k].1;
            next.is_uppercase()
                || (is_opener(next) && chars.get(k + 1).is_some_and(|&(_, c)| c.is_uppercase()))
        };
        let single_period = c == '.' && chars[i + 1..j].iter().all(|&(_, c)| !is_terminator(c));
        if boundary && !(single_period && is_abbreviation(&body[start..pos])) {
            push_trimmed(body, para.start, start..end, out);
            start = end;
        }
        i = j;
    }
    if start < body.len() {
        push_trimmed(body, para.start, start..body.len(), out);
    }
}

fn push_trimmed(body: &str, base: usize, r: Range<usize>, out: &mut Vec<Range<usize>>) {
    let s = &body[r.clone()];
    let lead = s.len() - s.trim_start().len();
    let trail = s.len() - s.trim_end().len();
    if lead + trail < s.len() {
        out.push(base + r.start + lead..base + r.end - trail);
    }
}

/// Collapses every whitespace run to a single space.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentences(text: &str) -> Vec<&str> {
        sentence_spans(text).into_iter().map(|r| &text[r]).collect()
    }

    #[test]
    fn abbreviation_does_not_split() {
        assert_eq!(sentences("I saw Dr. Smith. He waved."), [
            "I saw Dr. Smith.",
            "He waved."
        ]);
        assert_eq!(sentences("Mrs. Brown met Mr. Green on Elm St. Then they left."), [
            "Mrs. Brown met Mr. Green on Elm St. Then they left."
        ]);
    }

    #[test]
    fn needs_capital_after_terminator() {
        assert_eq!(sentences("It costs 3.5 dollars. ok then. Fine!"), [
            "It costs 3.5 dollars. ok then.",
            "Fine!"
        ]);
    }

    #[test]
    fn terminator_runs_and_quotes() {
        assert_eq!(sentences("Really?! \"Yes.\" She left... Then \"Why?\" he asked."), [
            "Really?!",
            "\"Yes.\"",
            "She left...",
            "Then \"Why?\" he asked."
        ]);
    }

    #[test]
    fn paragraphs_are_hard_boundaries() {
        let text = "First line without stop\ncontinues here\n\n  Second paragraph.\n";
        assert_eq!(sentences(text), [
            "First line without stop\ncontinues here",
            "Second paragraph."
        ]);
    }

    #[test]
    fn empty_and_blank() {
        assert!(sentences("").is_empty());
        assert!(sentences("\n\n   \n").is_empty());
    }

    #[test]
    fn collapse() {
        assert_eq!(collapse_whitespace(" a\n b\t\tc "), "a b c");
    }
}
