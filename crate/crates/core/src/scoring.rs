//! Property-token surprisal and p-acceptability.
//!
//! For a variation `c + q + s`, the property tokens are the backend tokens
//! that overlap the property span by at least one non-whitespace character.
//! `h_p` is their mean negative logprob; `h_full` is the mean over every token
//! of the `q + s` segment (context tokens condition but are not averaged).
//! The p-acceptable quantifier is the candidate with the lowest `h_p`, ties
//! going to the first in canonical order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, ScoredSequence, ScoringBackend, TokenSpan};
use crate::corpus::CorpusSample;
use crate::par::Executor;
use crate::quantifier::Quantifier;
use crate::text::{char_len, char_suffix, has_non_whitespace};
use crate::variation::{sample_variations, Variation, VariationError, VariationOptions};

pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Variation(#[from] VariationError),
    #[error("no property tokens for span [{start}, {end}) in {text:?}")]
    NoPropertyTokens {
        text: String,
        start: usize,
        end: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurprisalScore {
    /// Mean surprisal of the property tokens, nats per token.
    pub h_p: f64,
    /// Mean surprisal of the whole `q + s` segment, nats per token.
    pub h_full: f64,
    pub n_property_tokens: usize,
    pub n_full_tokens: usize,
    /// A property token at position 0 had no logprob and was skipped.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub skipped_first_token: bool,
}

/// How much left context to prepend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContextSpec {
    None,
    Tokens(usize),
    Full,
}

impl fmt::Display for ContextSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextSpec::None => f.write_str("none"),
            ContextSpec::Tokens(k) => write!(f, "tokens:{k}"),
            ContextSpec::Full => f.write_str("full"),
        }
    }
}

impl FromStr for ContextSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(ContextSpec::None),
            "full" => Ok(ContextSpec::Full),
            other => other
                .strip_prefix("tokens:")
                .and_then(|k| k.parse().ok())
                .map(ContextSpec::Tokens)
                .ok_or_else(|| format!("invalid context spec {other:?} (none | full | tokens:K)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScoringConfig {
    pub tie_epsilon: f64,
    pub variation: VariationOptions,
    /// Executor for the variations of one sample.
    pub executor: Executor,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            tie_epsilon: DEFAULT_TIE_EPSILON,
            variation: VariationOptions::default(),
            executor: Executor::sequential(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PAcceptabilityResult {
    pub sample_id: String,
    pub context_tokens_used: usize,
    pub per_quantifier: BTreeMap<Quantifier, SurprisalScore>,
    pub winner: Quantifier,
    pub tie: bool,
    /// `h_p` gap between the best and second-best candidate; `None` with a
    /// single candidate.
    pub margin: Option<f64>,
}

impl PAcceptabilityResult {
    /// Argmin over `h_full` instead of `h_p`, with the same tie rule.
    pub fn winner_by_h_full(&self, tie_epsilon: f64) -> Quantifier {
        let scores: Vec<_> = self
            .per_quantifier
            .iter()
            .map(|(q, s)| (*q, s.h_full))
            .collect();
        select_winner(&scores, tie_epsilon).winner
    }
}

/// Outcome of an argmin over per-quantifier values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub winner: Quantifier,
    pub tie: bool,
    pub margin: Option<f64>,
}

/// Argmin with canonical-order tie-breaking.
///
/// Every candidate within `tie_epsilon` of the minimum is tied; the winner is
/// the first tied candidate in canonical order.
pub fn select_winner(scores: &[(Quantifier, f64)], tie_epsilon: f64) -> Selection {
    assert!(
        !scores.is_empty(),
        "select_winner needs at least one candidate"
    );
    let mut sorted = scores.to_vec();
    sorted.sort_by_key(|(q, _)| *q);
    let min = sorted.iter().map(|(_, h)| *h).fold(f64::INFINITY, f64::min);
    let tied: Vec<Quantifier> = sorted
        .iter()
        .filter(|(_, h)| *h - min < tie_epsilon)
        .map(|(q, _)| *q)
        .collect();
    let mut values: Vec<f64> = sorted.iter().map(|(_, h)| *h).collect();
    values.sort_by(f64::total_cmp);
    Selection {
        winner: tied[0],
        tie: tied.len() > 1,
        margin: (values.len() > 1).then(|| values[1] - values[0]),
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Compute the surprisal of a variation from an already scored sequence.
pub fn surprisal_from_sequence(
    seq: &ScoredSequence,
    variation: &Variation,
) -> Result<SurprisalScore, ScoringError> {
    let chars: Vec<char> = variation.full_text.chars().collect();
    let span = variation.property_span_in_full;
    let segment_start = variation.context_char_len;

    let mut property = Vec::new();
    let mut full = Vec::new();
    let mut skipped_first_token = false;
    for (i, tok) in seq.tokens.iter().enumerate() {
        let in_span = has_non_whitespace(
            &chars,
            tok.char_start.max(span.start),
            tok.char_end.min(span.end),
        );
        let in_segment =
            has_non_whitespace(&chars, tok.char_start.max(segment_start), tok.char_end);
        match tok.logprob {
            Some(lp) => {
                if in_span {
                    property.push(-lp);
                }
                if in_segment {
                    full.push(-lp);
                }
            }
            None if in_span => {
                warn!(
                    "property span of {:?} includes unscored token {i}; skipping it",
                    variation.full_text
                );
                skipped_first_token = true;
            }
            None => {}
        }
    }
    if property.is_empty() {
        return Err(ScoringError::NoPropertyTokens {
            text: variation.full_text.clone(),
            start: span.start,
            end: span.end,
        });
    }
    Ok(SurprisalScore {
        h_p: mean(&property),
        h_full: mean(&full),
        n_property_tokens: property.len(),
        n_full_tokens: full.len(),
        skipped_first_token,
    })
}

/// Score one variation.
pub fn property_surprisal<B: ScoringBackend + ?Sized>(
    backend: &B,
    variation: &Variation,
) -> Result<SurprisalScore, ScoringError> {
    let seq = backend.score_text(&variation.full_text)?;
    surprisal_from_sequence(&seq, variation)
}

/// Suffix of `context` covering its last `k` tokens, given the tokenization.
pub fn truncate_with_tokens(context: &str, tokens: &[TokenSpan], k: usize) -> String {
    if k == 0 {
        return String::new();
    }
    if k >= tokens.len() {
        return context.to_string();
    }
    let start = tokens[tokens.len() - k].0;
    char_suffix(context, start)
        .unwrap_or("")
        .trim_start()
        .to_string()
}

/// Keep the last `k` backend tokens of `context`.
pub fn truncate_context<B: ScoringBackend + ?Sized>(
    backend: &B,
    context: &str,
    k: usize,
) -> Result<String, BackendError> {
    if k == 0 || context.is_empty() {
        return Ok(String::new());
    }
    let tokens = backend.tokenize(context)?;
    Ok(truncate_with_tokens(context, &tokens, k))
}

/// Resolve a context spec into the context text and the number of context
/// tokens it holds.
pub fn prepare_context<B: ScoringBackend + ?Sized>(
    backend: &B,
    context: &str,
    spec: ContextSpec,
) -> Result<(String, usize), BackendError> {
    if context.trim().is_empty() {
        return Ok((String::new(), 0));
    }
    match spec {
        ContextSpec::None | ContextSpec::Tokens(0) => Ok((String::new(), 0)),
        ContextSpec::Tokens(k) => {
            let tokens = backend.tokenize(context)?;
            Ok((
                truncate_with_tokens(context, &tokens, k),
                k.min(tokens.len()),
            ))
        }
        ContextSpec::Full => {
            let tokens = backend.tokenize(context)?;
            Ok((context.to_string(), tokens.len()))
        }
    }
}

/// p-acceptability of `sample` given an explicit context string.
pub fn p_acceptable_with_context<B: ScoringBackend + ?Sized>(
    backend: &B,
    sample: &CorpusSample,
    candidates: &[Quantifier],
    context: &str,
    context_tokens_used: usize,
    config: &ScoringConfig,
) -> Result<PAcceptabilityResult, ScoringError> {
    let variations = sample_variations(sample, context, candidates, &config.variation)?;
    let scores = config
        .executor
        .map(&variations, |_, v| property_surprisal(backend, v));
    let mut per_quantifier = BTreeMap::new();
    for (v, score) in variations.iter().zip(scores) {
        per_quantifier.insert(v.quantifier, score?);
    }
    let hp: Vec<_> = per_quantifier.iter().map(|(q, s)| (*q, s.h_p)).collect();
    let sel = select_winner(&hp, config.tie_epsilon);
    Ok(PAcceptabilityResult {
        sample_id: sample.id.clone(),
        context_tokens_used,
        per_quantifier,
        winner: sel.winner,
        tie: sel.tie,
        margin: sel.margin,
    })
}

/// The p-acceptable quantifier of `sample` among `candidates`.
pub fn p_acceptable<B: ScoringBackend + ?Sized>(
    backend: &B,
    sample: &CorpusSample,
    candidates: &[Quantifier],
    context_spec: ContextSpec,
    config: &ScoringConfig,
) -> Result<PAcceptabilityResult, ScoringError> {
    if candidates.is_empty() {
        return Err(VariationError::NoCandidates.into());
    }
    let (context, used) = prepare_context(backend, &sample.context, context_spec)?;
    p_acceptable_with_context(backend, sample, candidates, &context, used, config)
}

/// Number of characters in the context prefix of a variation (exposed for
/// report writers).
pub fn context_prefix_len(context: &str, opts: &VariationOptions) -> usize {
    let c = context.trim_end();
    if c.is_empty() {
        0
    } else {
        char_len(c) + char_len(&opts.separator)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{MockBackend, MockTable};
    use crate::corpus::{PropertySpan, Source};
    use crate::variation::build_variations;
    use proptest::prelude::*;
    use serde_json::Map;

    fn tiger_sample(context: &str) -> CorpusSample {
        CorpusSample {
            id: "t".into(),
            source: Source::Other,
            context: context.into(),
            sentence: "Tigers have stripes".into(),
            original_quantifier: Quantifier::Gen,
            base_sentence: "tigers have stripes".into(),
            property_span: PropertySpan::new(12, 19),
            metadata: Map::new(),
        }
    }

    fn tiger_table() -> MockTable {
        MockTable::uniform(1000)
            .with_entry("all tigers have", "stripes", 0.25)
            .with_entry("most tigers have", "stripes", 0.5)
            .with_entry("some tigers have", "stripes", 0.1)
            .with_entry("tigers have", "stripes", 0.4)
    }

    #[test]
    fn property_surprisal_single_token() {
        let m = MockBackend::new(tiger_table()).unwrap();
        let v = build_variations(
            "tigers have stripes",
            PropertySpan::new(12, 19),
            "",
            &[Quantifier::All],
            &VariationOptions::default(),
        )
        .unwrap();
        let s = property_surprisal(&m, &v[0]).unwrap();
        assert_eq!(s.n_property_tokens, 1);
        assert!((s.h_p - 1.3863).abs() < 1e-4);
        assert_eq!(s.h_p, -(0.25f64.ln()));
    }

    #[test]
    fn uniform_model_gives_ln_v() {
        let m = MockBackend::uniform(321);
        let v = build_variations(
            "tigers have long stripes",
            PropertySpan::new(12, 24),
            "",
            &[Quantifier::Most],
            &VariationOptions::default(),
        )
        .unwrap();
        let s = property_surprisal(&m, &v[0]).unwrap();
        let ln_v = (321f64).ln();
        assert!((s.h_p - ln_v).abs() < 1e-12);
        assert!((s.h_full - ln_v).abs() < 1e-12);
        assert_eq!(s.n_property_tokens, 2);
    }

    #[test]
    fn argmin_example() {
        let m = MockBackend::new(tiger_table()).unwrap();
        let r = p_acceptable(
            &m,
            &tiger_sample(""),
            &Quantifier::CANONICAL,
            ContextSpec::None,
            &ScoringConfig::default(),
        )
        .unwrap();
        assert_eq!(r.winner, Quantifier::Most);
        assert!(!r.tie);
        let expected =
            r.per_quantifier[&Quantifier::Gen].h_p - r.per_quantifier[&Quantifier::Most].h_p;
        assert!((r.margin.unwrap() - expected).abs() < 1e-12);
        assert!((r.margin.unwrap() - (0.5f64 / 0.4).ln()).abs() < 1e-12);
        assert!((r.margin.unwrap() - 0.2231).abs() < 1e-4);

        let r = p_acceptable(
            &m,
            &tiger_sample(""),
            &Quantifier::EXPLICIT,
            ContextSpec::None,
            &ScoringConfig::default(),
        )
        .unwrap();
        assert_eq!(r.winner, Quantifier::Most);
        assert!(!r.per_quantifier.contains_key(&Quantifier::Gen));
    }

    #[test]
    fn uniform_model_ties_to_gen() {
        let m = MockBackend::uniform(100);
        let r = p_acceptable(
            &m,
            &tiger_sample(""),
            &Quantifier::CANONICAL,
            ContextSpec::None,
            &ScoringConfig::default(),
        )
        .unwrap();
        assert!(r.tie);
        assert_eq!(r.winner, Quantifier::Gen);
        assert_eq!(r.margin, Some(0.0));
    }

    #[test]
    fn empty_candidates_error() {
        let m = MockBackend::uniform(100);
        assert!(matches!(
            p_acceptable(
                &m,
                &tiger_sample(""),
                &[],
                ContextSpec::None,
                &ScoringConfig::default()
            ),
            Err(ScoringError::Variation(VariationError::NoCandidates))
        ));
    }

    #[test]
    fn brute_force_mean_over_multi_token_span() {
        let mut table = MockTable::uniform(50);
        for (i, w) in ["have", "black", "and", "orange", "stripes"]
            .iter()
            .enumerate()
        {
            table = table.with_entry("", w, 0.05 * (i + 1) as f64);
        }
        let m = MockBackend::new(table).unwrap();
        let base = "tigers have black and orange stripes";
        let span = PropertySpan::new(7, char_len(base));
        let v = &build_variations(
            base,
            span,
            "",
            &[Quantifier::Some],
            &VariationOptions::default(),
        )
        .unwrap()[0];
        let s = property_surprisal(&m, v).unwrap();
        // Recompute directly from the raw sequence.
        let seq = m.score_text(&v.full_text).unwrap();
        let from = v.property_span_in_full.start;
        let raw: Vec<f64> = seq
            .tokens
            .iter()
            .filter(|t| t.char_start >= from - 1)
            .map(|t| -t.logprob.unwrap())
            .collect();
        assert_eq!(raw.len(), 5);
        assert_eq!(s.n_property_tokens, 5);
        assert!((s.h_p - raw.iter().sum::<f64>() / 5.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_span_on_first_token_is_skipped() {
        let m = MockBackend::uniform(10);
        let v = Variation {
            quantifier: Quantifier::Gen,
            full_text: "tigers roar".into(),
            property_span_in_full: PropertySpan::new(0, 11),
            context_char_len: 0,
        };
        let s = property_surprisal(&m, &v).unwrap();
        assert!(s.skipped_first_token);
        assert_eq!(s.n_property_tokens, 1);
        let only_first = Variation {
            property_span_in_full: PropertySpan::new(0, 6),
            ..v
        };
        assert!(matches!(
            property_surprisal(&m, &only_first),
            Err(ScoringError::NoPropertyTokens { .. })
        ));
    }

    #[test]
    fn h_full_excludes_context_tokens() {
        let table = MockTable::uniform(10).with_entry("", "yesterday", 0.9);
        let m = MockBackend::new(table).unwrap();
        let with_ctx = p_acceptable(
            &m,
            &tiger_sample("I saw one yesterday"),
            &[Quantifier::Gen],
            ContextSpec::Full,
            &ScoringConfig::default(),
        )
        .unwrap();
        let s = with_ctx.per_quantifier[&Quantifier::Gen];
        assert_eq!(s.n_full_tokens, 3);
        assert!((s.h_full - (10f64).ln()).abs() < 1e-12);
        assert_eq!(with_ctx.context_tokens_used, 4);
    }

    #[test]
    fn truncation_examples() {
        let m = MockBackend::uniform(10);
        let ctx = "me an explanation for this surprising reaction of the spider.";
        assert_eq!(truncate_context(&m, ctx, 0).unwrap(), "");
        assert_eq!(truncate_context(&m, ctx, 3).unwrap(), "the spider.");
        assert_eq!(truncate_context(&m, ctx, 100).unwrap(), ctx);
        assert_eq!(
            truncate_context(&m, ctx, 7).unwrap(),
            "this surprising reaction of the spider."
        );
    }

    #[test]
    fn select_winner_rules() {
        let s = select_winner(
            &[(Quantifier::Some, 1.0), (Quantifier::All, 1.0 + 1e-12)],
            1e-9,
        );
        assert_eq!(s.winner, Quantifier::All);
        assert!(s.tie);
        let s = select_winner(&[(Quantifier::Some, 1.0), (Quantifier::All, 2.0)], 1e-9);
        assert_eq!(s.winner, Quantifier::Some);
        assert_eq!(s.margin, Some(1.0));
        let s = select_winner(&[(Quantifier::Most, 3.0)], 1e-9);
        assert_eq!((s.winner, s.tie, s.margin), (Quantifier::Most, false, None));
    }

    #[test]
    fn context_spec_parsing() {
        assert_eq!("none".parse::<ContextSpec>().unwrap(), ContextSpec::None);
        assert_eq!(
            "tokens:12".parse::<ContextSpec>().unwrap(),
            ContextSpec::Tokens(12)
        );
        assert_eq!("full".parse::<ContextSpec>().unwrap(), ContextSpec::Full);
        assert!("tokens:-1".parse::<ContextSpec>().is_err());
    }

    #[test]
    fn parallel_variations_match_sequential() {
        let m = MockBackend::new(tiger_table()).unwrap();
        let seq = p_acceptable(
            &m,
            &tiger_sample("ctx here."),
            &Quantifier::CANONICAL,
            ContextSpec::Full,
            &ScoringConfig::default(),
        )
        .unwrap();
        let cfg = ScoringConfig {
            executor: Executor::new(crate::par::Parallelism::Threads(4)),
            ..Default::default()
        };
        let par = p_acceptable(
            &m,
            &tiger_sample("ctx here."),
            &Quantifier::CANONICAL,
            ContextSpec::Full,
            &cfg,
        )
        .unwrap();
        assert_eq!(seq, par);
    }

    proptest! {
        #[test]
        fn truncation_suffixes_nest(text in "[a-z ,.?]{0,80}", k1 in 0usize..30, k2 in 0usize..30) {
            let m = MockBackend::uniform(10);
            let (lo, hi) = (k1.min(k2), k1.max(k2));
            let a = truncate_context(&m, &text, lo).unwrap();
            let b = truncate_context(&m, &text, hi).unwrap();
            prop_assert!(b.ends_with(&a), "{b:?} does not end with {a:?}");
        }

        #[test]
        fn h_p_ignores_text_after_span(extra in "( [a-z]{1,6}){1,5}") {
            let m = MockBackend::new(tiger_table()).unwrap();
            let base = "tigers have stripes";
            let longer = format!("{base}{extra}");
            let span = PropertySpan::new(12, 19);
            let opts = VariationOptions::default();
            for q in Quantifier::CANONICAL {
                let a = &build_variations(base, span, "", &[q], &opts).unwrap()[0];
                let b = &build_variations(&longer, span, "", &[q], &opts).unwrap()[0];
                prop_assert_eq!(
                    property_surprisal(&m, a).unwrap().h_p,
                    property_surprisal(&m, b).unwrap().h_p
                );
            }
        }
    }
}
