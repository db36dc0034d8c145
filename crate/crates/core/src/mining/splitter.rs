//! Rule-based sentence splitter.

use std::collections::HashSet;
use std::sync::LazyLock;

static ABBREVIATIONS: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    [
        "dr", "mr", "mrs", "ms", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "eg", "ie",
        "no", "fig", "figs", "approx", "dept", "est", "inc", "ltd", "co", "corp", "mt", "jan",
        "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "u.k",
        "ph.d", "cf", "al", "gen", "gov", "sgt", "capt", "col", "lt", "rev",
    ]
    .into_iter()
    .collect()
});

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '”' | '’' | '»')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '“' | '‘' | '«')
}

/// The word ending right before position `dot` (exclusive).
fn word_before(chars: &[char], dot: usize) -> String {
    let mut start = dot;
    while start > 0 && !chars[start - 1].is_whitespace() && !is_opener(chars[start - 1]) {
        start -= 1;
    }
    chars[start..dot].iter().collect()
}

fn is_abbreviation(word: &str) -> bool {
    let lower = word.to_lowercase();
    if ABBREVIATIONS.contains(lower.as_str()) {
        return true;
    }
    // Initials such as "J." or "U.S."
    let letters: Vec<char> = word.chars().filter(|c| *c != '.').collect();
    letters.len() == 1 && letters[0].is_uppercase()
}

/// Split `text` into sentences, returned as trimmed character spans.
///
/// A boundary is terminal punctuation (with trailing closers) followed by
/// whitespace and an uppercase letter, digit or opening quote, unless the
/// preceding word is a known abbreviation or an initial. Blank lines always
/// end a sentence.
pub fn split_sentences(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    let push = |spans: &mut Vec<(usize, usize)>, s: usize, e: usize| {
        let mut s = s;
        let mut e = e;
        while s < e && chars[s].is_whitespace() {
            s += 1;
        }
        while e > s && chars[e - 1].is_whitespace() {
            e -= 1;
        }
        if s < e {
            spans.push((s, e));
        }
    };
    while i < n {
        let c = chars[i];
        if c == '\n' && i + 1 < n && chars[i + 1] == '\n' {
            push(&mut spans, start, i);
            while i < n && chars[i].is_whitespace() {
                i += 1;
            }
            start = i;
            continue;
        }
        if matches!(c, '.' | '!' | '?') {
            let mut end = i + 1;
            while end < n && (matches!(chars[end], '.' | '!' | '?') || is_closer(chars[end])) {
                end += 1;
            }
            let at_end = end >= n;
            let followed = !at_end && chars[end].is_whitespace() && {
                let mut k = end;
                while k < n && chars[k].is_whitespace() {
                    k += 1;
                }
                k >= n
                    || chars[k].is_uppercase()
                    || chars[k].is_ascii_digit()
                    || is_opener(chars[k])
            };
            let abbrev = c == '.' && is_abbreviation(&word_before(&chars, i));
            if (at_end || followed) && !abbrev {
                push(&mut spans, start, end);
                start = end;
            }
            i = end;
            continue;
        }
        i += 1;
    }
    push(&mut spans, start, n);
    spans
}
