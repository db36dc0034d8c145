use serde::{Deserialize, Serialize};

use super::{percentages, score_all, ExperimentConfig, SampleError, ScoredSample};
use crate::backend::ScoringBackend;
use crate::corpus::CorpusSample;
use crate::quantifier::Quantifier;
use crate::scoring::ContextSpec;

/// Gold quantifier (rows) against p-accepted quantifier (columns), both in
/// canonical order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 4]; 4],
}

impl ConfusionMatrix {
    pub fn from_scored(scored: &[ScoredSample]) -> Self {
        let mut m = ConfusionMatrix::default();
        for s in scored {
            m.counts[s.gold.index()][s.result.winner.index()] += 1;
        }
        m
    }

    pub fn row_total(&self, gold: Quantifier) -> usize {
        self.counts[gold.index()].iter().sum()
    }

    /// Row percentages; `None` for a row with no samples.
    pub fn row_percentages(&self, gold: Quantifier) -> Option<[f64; 4]> {
        percentages(&self.counts[gold.index()])
    }

    /// Correct predictions over all samples, in percent.
    pub fn diagonal_share(&self) -> Option<f64> {
        let total: usize = self.counts.iter().flatten().sum();
        let diag: usize = (0..4).map(|i| self.counts[i][i]).sum();
        (total > 0).then(|| 100.0 * diag as f64 / total as f64)
    }

    /// Whether the most frequent p-accepted quantifier of every non-empty row
    /// is the gold one.
    pub fn diagonal_dominant(&self) -> bool {
        (0..4).all(|i| {
            let row = &self.counts[i];
            row.iter().sum::<usize>() == 0 || row.iter().all(|&c| c <= row[i])
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub use_context: bool,
    pub matrix: ConfusionMatrix,
    pub scored: Vec<ScoredSample>,
    pub errors: Vec<SampleError>,
}

/// Score every sample over all four candidates, with full context or none.
pub fn run_confusion<B: ScoringBackend + ?Sized>(
    backend: &B,
    samples: &[CorpusSample],
    use_context: bool,
    config: &ExperimentConfig,
) -> ConfusionReport {
    let spec = if use_context {
        ContextSpec::Full
    } else {
        ContextSpec::None
    };
    let (scored, errors) = score_all(backend, samples, &Quantifier::CANONICAL, spec, config);
    ConfusionReport {
        use_context,
        matrix: ConfusionMatrix::from_scored(&scored),
        scored,
        errors,
    }
}
