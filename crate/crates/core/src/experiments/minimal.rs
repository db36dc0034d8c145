use serde::{Deserialize, Serialize};

use super::sweep::SweepReport;
use crate::mining::tagger::{last_word_is_noun, Tagger};
use crate::quantifier::Quantifier;

/// Quantifier words looked for in contexts. "entirely" appears twice; the
/// list is kept as is.
pub const QUANTIFIER_WORDS: [&str; 41] = [
    "all",
    "some",
    "each",
    "every",
    "no",
    "much",
    "more",
    "most",
    "less",
    "few",
    "several",
    "many",
    "enough",
    "little",
    "various",
    "always",
    "usually",
    "often",
    "frequently",
    "sometimes",
    "occasionally",
    "seldom",
    "rarely",
    "never",
    "almost",
    "nearly",
    "hardly",
    "scarcely",
    "barely",
    "completely",
    "entirely",
    "totally",
    "absolutely",
    "partly",
    "largely",
    "mostly",
    "entirely",
    "extremely",
    "exceptionally",
    "especially",
    "particularly",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextFeatures {
    pub quantifier_word: bool,
    pub noun_last: bool,
    pub question: bool,
    pub all: bool,
    pub most: bool,
    pub some: bool,
}

impl ContextFeatures {
    pub const NAMES: [&'static str; 6] = [
        "quantifier_word",
        "noun_last",
        "question",
        "all",
        "most",
        "some",
    ];

    pub fn flags(&self) -> [bool; 6] {
        [
            self.quantifier_word,
            self.noun_last,
            self.question,
            self.all,
            self.most,
            self.some,
        ]
    }
}

/// Feature flags of a context text. Words are matched case-insensitively on
/// alphabetic runs; a tagger failure leaves `noun_last` false.
pub fn context_features<T: Tagger + ?Sized>(text: &str, tagger: &T) -> ContextFeatures {
    let words: Vec<String> = text
        .split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect();
    let has = |w: &str| words.iter().any(|x| x == w);
    let noun_last = match last_word_is_noun(text, tagger) {
        Ok(b) => b,
        Err(e) => {
            log::warn!("tagger failed on context: {e}");
            false
        }
    };
    ContextFeatures {
        quantifier_word: words.iter().any(|w| QUANTIFIER_WORDS.contains(&w.as_str())),
        noun_last,
        question: text.contains('?'),
        all: has("all"),
        most: has("most"),
        some: has("some"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalContextRecord {
    pub sample_id: String,
    pub gold: Quantifier,
    pub minimal_k: usize,
    pub context: String,
    pub features: ContextFeatures,
}

/// Samples wrong without context and right at some length, with the first
/// such length (first crossing).
pub fn extract_minimal_contexts<T: Tagger + ?Sized>(
    sweep: &SweepReport,
    tagger: &T,
) -> Vec<MinimalContextRecord> {
    sweep
        .records
        .iter()
        .filter(|r| !r.correct_at(0))
        .filter_map(|r| {
            let i = (1..sweep.lengths.len()).find(|&i| r.correct_at(i))?;
            assert!(!r.correct_at(0) && r.correct_at(i));
            let context = r.contexts[i].clone();
            Some(MinimalContextRecord {
                sample_id: r.sample_id.clone(),
                gold: r.gold,
                minimal_k: sweep.lengths[i],
                features: context_features(&context, tagger),
                context,
            })
        })
        .collect()
}

/// Feature percentages over all (longest swept) contexts and over minimal
/// contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub n_full: usize,
    pub n_minimal: usize,
    pub full: [f64; 6],
    pub minimal: [f64; 6],
}

fn feature_percentages(features: &[ContextFeatures]) -> [f64; 6] {
    let mut counts = [0usize; 6];
    for f in features {
        for (c, on) in counts.iter_mut().zip(f.flags()) {
            *c += on as usize;
        }
    }
    let n = features.len().max(1) as f64;
    counts.map(|c| 100.0 * c as f64 / n)
}

/// Full contexts are the longest swept context of every sample that has one.
pub fn feature_table<T: Tagger + ?Sized>(
    sweep: &SweepReport,
    minimal: &[MinimalContextRecord],
    tagger: &T,
) -> FeatureTable {
    let full: Vec<ContextFeatures> = sweep
        .records
        .iter()
        .filter_map(|r| r.contexts.last())
        .filter(|c| !c.trim().is_empty())
        .map(|c| context_features(c, tagger))
        .collect();
    let min: Vec<ContextFeatures> = minimal.iter().map(|m| m.features).collect();
    FeatureTable {
        n_full: full.len(),
        n_minimal: min.len(),
        full: feature_percentages(&full),
        minimal: feature_percentages(&min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mining::tagger::RuleTagger;

    #[test]
    fn spider_context_features() {
        let f = context_features("this surprising reaction of the spider.", &RuleTagger);
        assert!(f.noun_last);
        assert!(!f.question);
        assert!(!f.quantifier_word);
        assert!(!f.all && !f.most && !f.some);
    }

    #[test]
    fn quantifier_and_question() {
        let f = context_features("Do most of them usually bite?", &RuleTagger);
        assert!(f.quantifier_word && f.question && f.most);
        assert!(!f.some);
        assert_eq!(
            QUANTIFIER_WORDS
                .iter()
                .filter(|w| **w == "entirely")
                .count(),
            2
        );
    }
}
