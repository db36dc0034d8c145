//! Experiment folds over per-sample p-acceptability results.
//!
//! Every experiment scores its samples through a sample-level [`Executor`],
//! then folds the results single-threaded into count tables. Samples whose
//! scoring fails are excluded from every denominator and listed in the
//! report's `errors`.

mod confusion;
mod hvshp;
mod implicit;
mod minimal;
pub mod report;
mod stereo;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::backend::ScoringBackend;
use crate::corpus::CorpusSample;
use crate::par::Executor;
use crate::quantifier::Quantifier;
use crate::scoring::{
    p_acceptable, ContextSpec, PAcceptabilityResult, ScoringConfig, ScoringError,
};

pub use confusion::{run_confusion, ConfusionMatrix, ConfusionReport};
pub use hvshp::{run_h_vs_hp, HvsHpReport, HvsHpRow, DEFAULT_H_VS_HP_LENGTHS};
pub use implicit::{run_implicit_quantification, ImplicitReport};
pub use minimal::{
    context_features, extract_minimal_contexts, feature_table, ContextFeatures, FeatureTable,
    MinimalContextRecord, QUANTIFIER_WORDS,
};
pub use report::{config_hash, Manifest};
pub use stereo::{run_stereotypes, StereoCell, StereoReport};
pub use sweep::{
    random_context_for, run_context_sweep, CandidatesMode, ContextSource, SweepConfig, SweepCurve,
    SweepReport, SweepSampleRecord,
};

#[derive(Debug, Clone, Default)]
pub struct ExperimentConfig {
    pub scoring: ScoringConfig,
    /// Executor across samples.
    pub executor: Executor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleError {
    pub sample_id: String,
    pub message: String,
}

/// One successfully scored sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub sample_id: String,
    pub gold: Quantifier,
    pub result: PAcceptabilityResult,
}

impl ScoredSample {
    pub fn correct(&self) -> bool {
        self.result.winner == self.gold
    }
}

/// Candidate set for a mode.
pub fn candidate_set(with_gen: bool) -> &'static [Quantifier] {
    if with_gen {
        &Quantifier::CANONICAL
    } else {
        &Quantifier::EXPLICIT
    }
}

/// Percentages from counts, or `None` when the total is zero.
pub fn percentages<const N: usize>(counts: &[usize; N]) -> Option<[f64; N]> {
    let total: usize = counts.iter().sum();
    (total > 0).then(|| counts.map(|c| 100.0 * c as f64 / total as f64))
}

/// Score every sample, keeping input order.
pub(crate) fn score_all<B: ScoringBackend + ?Sized>(
    backend: &B,
    samples: &[CorpusSample],
    candidates: &[Quantifier],
    spec: ContextSpec,
    config: &ExperimentConfig,
) -> (Vec<ScoredSample>, Vec<SampleError>) {
    let results = config.executor.map(samples, |_, s| {
        p_acceptable(backend, s, candidates, spec, &config.scoring)
    });
    split_results(samples, results)
}

pub(crate) fn split_results(
    samples: &[CorpusSample],
    results: Vec<Result<PAcceptabilityResult, ScoringError>>,
) -> (Vec<ScoredSample>, Vec<SampleError>) {
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (s, r) in samples.iter().zip(results) {
        match r {
            Ok(result) => ok.push(ScoredSample {
                sample_id: s.id.clone(),
                gold: s.original_quantifier,
                result,
            }),
            Err(e) => {
                log::warn!("sample {} failed: {e}", s.id);
                errors.push(SampleError {
                    sample_id: s.id.clone(),
                    message: e.to_string(),
                });
            }
        }
    }
    (ok, errors)
}
