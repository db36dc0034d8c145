//! Building the variation set `{c + q + s | q in Q}` for a sample.

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusSample, PropertySpan};
use crate::quantifier::Quantifier;
use crate::text::{char_len, char_slice, char_suffix, normalize_initial_case, upper_first};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VariationError {
    #[error("sentence does not start with quantifier {surface:?}: {sentence:?}")]
    MissingQuantifier {
        surface: &'static str,
        sentence: String,
    },
    #[error("candidate list is empty")]
    NoCandidates,
    #[error("candidate list contains duplicates")]
    DuplicateCandidates,
    #[error("invalid property span: {0}")]
    InvalidSpan(String),
}

/// Knobs for surface construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariationOptions {
    /// Capitalise the sentence-initial word when no context precedes it.
    pub capitalize_initial: bool,
    /// Joiner between context and the quantified sentence.
    pub separator: String,
}

impl Default for VariationOptions {
    fn default() -> Self {
        Self {
            capitalize_initial: true,
            separator: " ".to_string(),
        }
    }
}

/// One member of the variation set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variation {
    pub quantifier: Quantifier,
    pub full_text: String,
    pub property_span_in_full: PropertySpan,
    /// Characters before the `q + s` segment (context plus separator).
    pub context_char_len: usize,
}

impl Variation {
    pub fn property_text(&self) -> &str {
        self.property_span_in_full
            .extract(&self.full_text)
            .unwrap_or("")
    }
}

/// Remove the leading quantifier of `sentence`.
///
/// Returns the base sentence and the number of characters removed. The first
/// character of the base is lowercased unless its first token is an acronym.
pub fn strip_quantifier(
    sentence: &str,
    label: Quantifier,
) -> Result<(String, usize), VariationError> {
    if label == Quantifier::Gen {
        return Ok((normalize_initial_case(sentence), 0));
    }
    let surface = label.surface();
    let shift = char_len(surface) + 1;
    let head = char_slice(sentence, 0, shift).unwrap_or("");
    if !head.eq_ignore_ascii_case(&format!("{surface} ")) {
        return Err(VariationError::MissingQuantifier {
            surface,
            sentence: sentence.to_string(),
        });
    }
    let rest = char_suffix(sentence, shift).unwrap_or("");
    Ok((normalize_initial_case(rest), shift))
}

/// Build one variation per candidate, in canonical order.
pub fn build_variations(
    base: &str,
    span: PropertySpan,
    context: &str,
    candidates: &[Quantifier],
    opts: &VariationOptions,
) -> Result<Vec<Variation>, VariationError> {
    if candidates.is_empty() {
        return Err(VariationError::NoCandidates);
    }
    let (ordered, dup) = Quantifier::canonicalize(candidates);
    if dup {
        return Err(VariationError::DuplicateCandidates);
    }
    span.validate(base).map_err(VariationError::InvalidSpan)?;

    let context = context.trim_end();
    let prefix = if context.is_empty() {
        String::new()
    } else {
        format!("{context}{}", opts.separator)
    };
    let context_char_len = char_len(&prefix);

    Ok(ordered
        .into_iter()
        .map(|q| {
            let sentence_initial = prefix.is_empty();
            let body = if q == Quantifier::Gen && sentence_initial {
                if opts.capitalize_initial {
                    upper_first(base)
                } else {
                    base.to_string()
                }
            } else {
                normalize_initial_case(base)
            };
            let quant = match q {
                Quantifier::Gen => String::new(),
                q if sentence_initial && opts.capitalize_initial => {
                    format!("{} ", upper_first(q.surface()))
                }
                q => format!("{} ", q.surface()),
            };
            let shift = context_char_len + char_len(&quant);
            Variation {
                quantifier: q,
                full_text: format!("{prefix}{quant}{body}"),
                property_span_in_full: span.shifted(shift),
                context_char_len,
            }
        })
        .collect())
}

/// Variations for a sample with an explicit (already truncated) context.
pub fn sample_variations(
    sample: &CorpusSample,
    context: &str,
    candidates: &[Quantifier],
    opts: &VariationOptions,
) -> Result<Vec<Variation>, VariationError> {
    build_variations(
        &sample.base_sentence,
        sample.property_span,
        context,
        candidates,
        opts,
    )
}
