use serde::{Deserialize, Serialize};

use super::{percentages, score_all, ExperimentConfig, SampleError, ScoredSample};
use crate::backend::ScoringBackend;
use crate::corpus::CorpusSample;
use crate::quantifier::Quantifier;
use crate::scoring::ContextSpec;

/// Which explicit quantifier generics take when GEN is not a candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicitReport {
    /// Winner counts in `EXPLICIT` order (all, most, some).
    pub counts: [usize; 3],
    /// Sample ids whose winner is SOME.
    pub weak_generics: Vec<String>,
    /// Non-generic samples that were ignored.
    pub skipped_non_generic: usize,
    pub scored: Vec<ScoredSample>,
    pub errors: Vec<SampleError>,
}

impl ImplicitReport {
    pub fn shares(&self) -> Option<[f64; 3]> {
        percentages(&self.counts)
    }

    pub fn weak_share(&self) -> Option<f64> {
        self.shares().map(|s| s[2])
    }
}

/// p-acceptability of gold-GEN samples over {all, most, some}, without context.
pub fn run_implicit_quantification<B: ScoringBackend + ?Sized>(
    backend: &B,
    samples: &[CorpusSample],
    config: &ExperimentConfig,
) -> ImplicitReport {
    let generics: Vec<CorpusSample> = samples
        .iter()
        .filter(|s| s.original_quantifier == Quantifier::Gen)
        .cloned()
        .collect();
    let skipped_non_generic = samples.len() - generics.len();
    let (scored, errors) = score_all(
        backend,
        &generics,
        &Quantifier::EXPLICIT,
        ContextSpec::None,
        config,
    );
    let mut counts = [0usize; 3];
    let mut weak_generics = Vec::new();
    for s in &scored {
        counts[s.result.winner.index() - 1] += 1;
        if s.result.winner == Quantifier::Some {
            weak_generics.push(s.sample_id.clone());
        }
    }
    ImplicitReport {
        counts,
        weak_generics,
        skipped_non_generic,
        scored,
        errors,
    }
}
