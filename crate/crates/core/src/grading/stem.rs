//! English Snowball ("Porter2") stemmer.
//!
//! Follows the current english.sbl rule set: the prefix exceptions for R1
//! (gener, commun, arsen, emerg, inter, later, organ, past, univers), the
//! special handling of `-ying` and of `-ing` after a few fixed stems in step
//! 1b, and the whole-word exception list.

const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u', 'y'];
const VALID_LI: &[char] = &['c', 'd', 'e', 'g', 'h', 'k', 'm', 'n', 'r', 't'];
const DOUBLES: &[&str] = &["bb", "dd", "ff", "gg", "mm", "nn", "pp", "rr", "tt"];
const R1_PREFIXES: &[&str] = &[
    "arsen", "commun", "emerg", "gener", "inter", "later", "organ", "past", "univers",
];

const EXCEPTIONS: &[(&str, &str)] = &[
    ("skis", "ski"),
    ("skies", "sky"),
    ("idly", "idl"),
    ("gently", "gentl"),
    ("ugly", "ugli"),
    ("early", "earli"),
    ("only", "onli"),
    ("singly", "singl"),
    ("sky", "sky"),
    ("news", "news"),
    ("howe", "howe"),
    ("atlas", "atlas"),
    ("cosmos", "cosmos"),
    ("bias", "bias"),
    ("andes", "andes"),
];

// (suffix, replacement); `None` marks rules with an extra condition.
const STEP2: &[(&str, Option<&str>)] = &[
    ("ization", Some("ize")),
    ("ational", Some("ate")),
    ("fulness", Some("ful")),
    ("ousness", Some("ous")),
    ("iveness", Some("ive")),
    ("tional", Some("tion")),
    ("biliti", Some("ble")),
    ("lessli", Some("less")),
    ("ogist", Some("og")),
    ("entli", Some("ent")),
    ("ation", Some("ate")),
    ("alism", Some("al")),
    ("aliti", Some("al")),
    ("ousli", Some("ous")),
    ("iviti", Some("ive")),
    ("fulli", Some("ful")),
    ("enci", Some("ence")),
    ("anci", Some("ance")),
    ("abli", Some("able")),
    ("izer", Some("ize")),
    ("ator", Some("ate")),
    ("alli", Some("al")),
    ("bli", Some("ble")),
    ("ogi", None),
    ("li", None),
];

const STEP3: &[(&str, Option<&str>)] = &[
    ("ational", Some("ate")),
    ("tional", Some("tion")),
    ("alize", Some("al")),
    ("icate", Some("ic")),
    ("iciti", Some("ic")),
    ("ative", None),
    ("ical", Some("ic")),
    ("ness", Some("")),
    ("ful", Some("")),
];

const STEP4: &[&str] = &[
    "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism", "ate", "iti", "ous",
    "ive", "ize", "ion", "al", "er", "ic",
];

struct Word {
    w: Vec<char>,
    r1: usize,
    r2: usize,
}

fn is_vowel(c: char) -> bool {
    VOWELS.contains(&c)
}

impl Word {
    fn ends_with(&self, suffix: &str) -> bool {
        let s: Vec<char> = suffix.chars().collect();
        self.w.len() >= s.len() && self.w[self.w.len() - s.len()..] == s[..]
    }

    fn len(&self) -> usize {
        self.w.len()
    }

    fn replace_suffix(&mut self, suffix_len: usize, with: &str) {
        let n = self.w.len() - suffix_len;
        self.w.truncate(n);
        self.w.extend(with.chars());
    }

    /// Longest suffix from `table` present at the end of the word.
    fn longest<'a, T>(&self, table: &'a [(&'a str, T)]) -> Option<&'a (&'a str, T)> {
        table
            .iter()
            .filter(|(s, _)| self.ends_with(s))
            .max_by_key(|(s, _)| s.chars().count())
    }

    fn contains_vowel(&self, end: usize) -> bool {
        self.w[..end].iter().any(|&c| is_vowel(c))
    }

    /// Short syllable ending at `end` (exclusive).
    fn short_syllable_at(&self, end: usize) -> bool {
        let w = &self.w[..end];
        let n = w.len();
        if n >= 3
            && !is_vowel(w[n - 1])
            && !matches!(w[n - 1], 'w' | 'x' | 'Y')
            && is_vowel(w[n - 2])
            && !is_vowel(w[n - 3])
        {
            return true;
        }
        if n == 2 && is_vowel(w[0]) && !is_vowel(w[1]) {
            return true;
        }
        n >= 4 && w[n - 4..] == ['p', 'a', 's', 't']
    }
}

fn mark_regions(w: &[char]) -> (usize, usize) {
    let after_vc = |from: usize| -> usize {
        let mut i = from;
        while i < w.len() && !is_vowel(w[i]) {
            i += 1;
        }
        while i < w.len() && is_vowel(w[i]) {
            i += 1;
        }
        (i + 1).min(w.len())
    };
    let prefix = R1_PREFIXES
        .iter()
        .filter(|p| w.len() >= p.len() && w.iter().take(p.len()).copied().eq(p.chars()))
        .map(|p| p.len())
        .max();
    let r1 = match prefix {
        Some(n) => n,
        None => after_vc(0),
    };
    let r2 = if r1 >= w.len() { w.len() } else { after_vc(r1) };
    (r1, r2)
}

fn prelude(mut w: Vec<char>) -> Vec<char> {
    if w.first() == Some(&'\'') {
        w.remove(0);
    }
    if w.first() == Some(&'y') {
        w[0] = 'Y';
    }
    for i in 1..w.len() {
        if w[i] == 'y' && is_vowel(w[i - 1]) {
            w[i] = 'Y';
        }
    }
    w
}

fn step1a(word: &mut Word) {
    for s in ["'s'", "'s", "'"] {
        if word.ends_with(s) {
            let n = s.chars().count();
            word.replace_suffix(n, "");
            break;
        }
    }
    if word.ends_with("sses") {
        word.replace_suffix(4, "ss");
    } else if word.ends_with("ied") || word.ends_with("ies") {
        let with = if word.len() > 4 { "i" } else { "ie" };
        word.replace_suffix(3, with);
    } else if word.ends_with("ss") || word.ends_with("us") {
    } else if word.ends_with("s") {
        let n = word.len();
        if n >= 2 && word.contains_vowel(n - 2) {
            word.replace_suffix(1, "");
        }
    }
}

fn step1b(word: &mut Word) {
    const SUFFIXES: &[(&str, u8)] = &[
        ("eedly", 1),
        ("ingly", 2),
        ("edly", 2),
        ("eed", 1),
        ("ing", 3),
        ("ed", 2),
    ];
    let Some(&(suffix, kind)) = word.longest(SUFFIXES) else {
        return;
    };
    let slen = suffix.len();
    let stem_end = word.len() - slen;
    match kind {
        1 => {
            if stem_end >= word.r1 {
                let stem: String = word.w[..stem_end].iter().collect();
                if !matches!(stem.as_str(), "succ" | "proc" | "exc") {
                    word.replace_suffix(slen, "ee");
                }
            }
            return;
        }
        3 => {
            let stem: String = word.w[..stem_end].iter().collect();
            if stem_end == 2 && word.w[1] == 'y' && !is_vowel(word.w[0]) {
                word.replace_suffix(slen + 1, "ie");
                return;
            }
            if matches!(stem.as_str(), "even" | "cann" | "inn" | "earr" | "herr" | "out") {
                return;
            }
        }
        _ => {}
    }
    if !word.contains_vowel(stem_end) {
        return;
    }
    word.replace_suffix(slen, "");
    if word.ends_with("at") || word.ends_with("bl") || word.ends_with("iz") {
        word.w.push('e');
    } else if DOUBLES.iter().any(|d| word.ends_with(d)) {
        let whole_aeo = word.len() == 3 && matches!(word.w[0], 'a' | 'e' | 'o');
        if !whole_aeo {
            word.w.pop();
        }
    } else if word.r1 == word.len() && word.short_syllable_at(word.len()) {
        word.w.push('e');
    }
}

fn step1c(word: &mut Word) {
    let n = word.len();
    if n >= 3 && matches!(word.w[n - 1], 'y' | 'Y') && !is_vowel(word.w[n - 2]) {
        word.w[n - 1] = 'i';
    }
}

fn step2(word: &mut Word) {
    let Some(&(suffix, with)) = word.longest(STEP2) else {
        return;
    };
    let slen = suffix.len();
    let start = word.len() - slen;
    if start < word.r1 {
        return;
    }
    match (suffix, with) {
        (_, Some(rep)) => word.replace_suffix(slen, rep),
        ("ogi", None) => {
            if start >= 1 && word.w[start - 1] == 'l' {
                word.replace_suffix(slen, "og");
            }
        }
        (_, None) => {
            if start >= 1 && VALID_LI.contains(&word.w[start - 1]) {
                word.replace_suffix(slen, "");
            }
        }
    }
}

fn step3(word: &mut Word) {
    let Some(&(suffix, with)) = word.longest(STEP3) else {
        return;
    };
    let slen = suffix.len();
    let start = word.len() - slen;
    if start < word.r1 {
        return;
    }
    match with {
        Some(rep) => word.replace_suffix(slen, rep),
        None => {
            if start >= word.r2 {
                word.replace_suffix(slen, "");
            }
        }
    }
}

fn step4(word: &mut Word) {
    let Some(suffix) = STEP4
        .iter()
        .filter(|s| word.ends_with(s))
        .max_by_key(|s| s.len())
    else {
        return;
    };
    let slen = suffix.len();
    let start = word.len() - slen;
    if start < word.r2 {
        return;
    }
    if *suffix == "ion" {
        if start >= 1 && matches!(word.w[start - 1], 's' | 't') {
            word.replace_suffix(slen, "");
        }
    } else {
        word.replace_suffix(slen, "");
    }
}

fn step5(word: &mut Word) {
    let n = word.len();
    if word.ends_with("e") {
        let start = n - 1;
        if start >= word.r2 || (start >= word.r1 && !word.short_syllable_at(start)) {
            word.w.pop();
        }
    } else if word.ends_with("l") {
        let start = n - 1;
        if start >= word.r2 && start >= 1 && word.w[start - 1] == 'l' {
            word.w.pop();
        }
    }
}

/// Stem of a lowercase English word.
pub fn stem(word: &str) -> String {
    if let Some((_, out)) = EXCEPTIONS.iter().find(|(w, _)| *w == word) {
        return (*out).to_string();
    }
    let chars: Vec<char> = word.chars().collect();
    if chars.len() < 3 {
        return word.to_string();
    }
    let w = prelude(chars);
    let (r1, r2) = mark_regions(&w);
    let mut word = Word { w, r1, r2 };
    step1a(&mut word);
    step1b(&mut word);
    step1c(&mut word);
    step2(&mut word);
    step3(&mut word);
    step4(&mut word);
    step5(&mut word);
    word.w
        .into_iter()
        .map(|c| if c == 'Y' { 'y' } else { c })
        .collect()
}
