//! Character-offset helpers.
//!
//! Every span in this crate counts Unicode scalar values, not bytes.

/// Number of Unicode scalar values in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Byte index of the `char_idx`-th scalar value (or `s.len()` at the end).
pub fn byte_index(s: &str, char_idx: usize) -> Option<usize> {
    if char_idx == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (b, _) in s.char_indices() {
        if count == char_idx {
            return Some(b);
        }
        count += 1;
    }
    (count == char_idx).then_some(s.len())
}

/// Slice `s` by character offsets `[start, end)`.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let b0 = byte_index(s, start)?;
    let b1 = byte_index(s, end)?;
    Some(&s[b0..b1])
}

/// Suffix of `s` starting at character offset `start`.
pub fn char_suffix(s: &str, start: usize) -> Option<&str> {
    byte_index(s, start).map(|b| &s[b..])
}

fn map_first(s: &str, upper: bool) -> String {
    let mut chars = s.chars();
    let Some(first) = chars.next() else {
        return String::new();
    };
    let mapped: Vec<char> = if upper {
        first.to_uppercase().collect()
    } else {
        first.to_lowercase().collect()
    };
    // Multi-char case mappings would move every downstream offset.
    if mapped.len() != 1 {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    out.push(mapped[0]);
    out.push_str(chars.as_str());
    out
}

/// Uppercase the first character, keeping the character count unchanged.
pub fn upper_first(s: &str) -> String {
    map_first(s, true)
}

/// Lowercase the first character, keeping the character count unchanged.
pub fn lower_first(s: &str) -> String {
    map_first(s, false)
}

/// First whitespace-delimited token of `s`.
pub fn first_token(s: &str) -> &str {
    s.split_whitespace().next().unwrap_or("")
}

/// Acronym guard: the token's letters are all uppercase once a plural `s`
/// (or `'s`) is removed, e.g. `NASA`, `MCTs`, `DNA's`.
pub fn is_acronym(token: &str) -> bool {
    let core = token.trim_matches(|c: char| !c.is_alphanumeric());
    let core = core
        .strip_suffix("'s")
        .or_else(|| core.strip_suffix("’s"))
        .or_else(|| core.strip_suffix('s'))
        .unwrap_or(core);
    let mut letters = core.chars().filter(|c| c.is_alphabetic()).peekable();
    letters.peek().is_some() && letters.all(|c| c.is_uppercase())
}

/// Lowercase the first character unless the first token is an acronym.
pub fn normalize_initial_case(s: &str) -> String {
    if is_acronym(first_token(s)) {
        s.to_string()
    } else {
        lower_first(s)
    }
}

/// True when `a` and `b` are identical except possibly for the case of the
/// first character.
pub fn eq_modulo_initial_case(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    let mut ca = a.chars();
    let mut cb = b.chars();
    match (ca.next(), cb.next()) {
        (Some(x), Some(y)) => x.to_lowercase().eq(y.to_lowercase()) && ca.as_str() == cb.as_str(),
        _ => false,
    }
}

/// Whether the character range `[start, end)` of `s` contains at least one
/// non-whitespace character.
pub fn has_non_whitespace(chars: &[char], start: usize, end: usize) -> bool {
    let end = end.min(chars.len());
    start < end && chars[start..end].iter().any(|c| !c.is_whitespace())
}
