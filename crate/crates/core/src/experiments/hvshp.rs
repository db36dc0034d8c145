use serde::{Deserialize, Serialize};

use super::{score_all, ExperimentConfig, SampleError, ScoredSample};
use crate::backend::ScoringBackend;
use crate::corpus::CorpusSample;
use crate::quantifier::Quantifier;
use crate::scoring::ContextSpec;

pub const DEFAULT_H_VS_HP_LENGTHS: [usize; 3] = [0, 32, 128];

/// Accuracy (fraction of gold-GEN samples whose argmin is GEN) under the
/// whole-segment surprisal and under the property surprisal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvsHpRow {
    pub context_tokens: usize,
    pub n: usize,
    pub h_accuracy: f64,
    pub hp_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvsHpReport {
    pub rows: Vec<HvsHpRow>,
    /// `(context length, sample)` pairs.
    pub scored: Vec<(usize, ScoredSample)>,
    pub errors: Vec<SampleError>,
}

/// Compare argmin by `h_full` and by `h_p` on gold-GEN samples at each
/// context length. A sample failing at one length only drops out of that row.
pub fn run_h_vs_hp<B: ScoringBackend + ?Sized>(
    backend: &B,
    samples: &[CorpusSample],
    lengths: &[usize],
    config: &ExperimentConfig,
) -> HvsHpReport {
    let generics: Vec<CorpusSample> = samples
        .iter()
        .filter(|s| s.original_quantifier == Quantifier::Gen)
        .cloned()
        .collect();
    let eps = config.scoring.tie_epsilon;
    let mut rows = Vec::with_capacity(lengths.len());
    let mut all_scored = Vec::new();
    let mut all_errors = Vec::new();
    for &k in lengths {
        let spec = if k == 0 {
            ContextSpec::None
        } else {
            ContextSpec::Tokens(k)
        };
        let (scored, errors) = score_all(backend, &generics, &Quantifier::CANONICAL, spec, config);
        let n = scored.len();
        let h_correct = scored
            .iter()
            .filter(|s| s.result.winner_by_h_full(eps) == Quantifier::Gen)
            .count();
        let hp_correct = scored
            .iter()
            .filter(|s| s.result.winner == Quantifier::Gen)
            .count();
        let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
        rows.push(HvsHpRow {
            context_tokens: k,
            n,
            h_accuracy: frac(h_correct),
            hp_accuracy: frac(hp_correct),
        });
        all_scored.extend(scored.into_iter().map(|s| (k, s)));
        all_errors.extend(errors.into_iter().map(|e| SampleError {
            message: format!("context {k}: {}", e.message),
            ..e
        }));
    }
    HvsHpReport {
        rows,
        scored: all_scored,
        errors: all_errors,
    }
}
