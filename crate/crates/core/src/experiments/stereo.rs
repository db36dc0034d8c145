use serde::{Deserialize, Serialize};

use super::{percentages, score_all, ExperimentConfig, SampleError, ScoredSample};
use crate::backend::ScoringBackend;
use crate::quantifier::Quantifier;
use crate::scoring::ContextSpec;
use crate::stereotype::{
    generate_stereotype_dataset, sample_design, Paraphrase, Polarity, Realness, StereotypeSeed,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereoCell {
    pub realness: Realness,
    pub polarity: Polarity,
    pub paraphrase: Paraphrase,
    pub n: usize,
    /// Winner counts, canonical order.
    pub counts: [usize; 4],
}

impl StereoCell {
    pub fn shares(&self) -> Option<[f64; 4]> {
        percentages(&self.counts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereoReport {
    /// All twelve design cells, realness-major, then polarity, then paraphrase.
    pub cells: Vec<StereoCell>,
    pub scored: Vec<ScoredSample>,
    pub errors: Vec<SampleError>,
}

impl StereoReport {
    pub fn cell(&self, r: Realness, p: Polarity, para: Paraphrase) -> &StereoCell {
        self.cells
            .iter()
            .find(|c| c.realness == r && c.polarity == p && c.paraphrase == para)
            .expect("every design cell exists")
    }
}

/// Contextless p-acceptability of every paraphrase of every seed, over all
/// four candidates.
pub fn run_stereotypes<B: ScoringBackend + ?Sized>(
    backend: &B,
    seeds: &[StereotypeSeed],
    config: &ExperimentConfig,
) -> Result<StereoReport, String> {
    let samples = generate_stereotype_dataset(seeds)?;
    let (scored, errors) = score_all(
        backend,
        &samples,
        &Quantifier::CANONICAL,
        ContextSpec::None,
        config,
    );
    let mut cells = Vec::with_capacity(12);
    for realness in Realness::ALL {
        for polarity in Polarity::ALL {
            for paraphrase in Paraphrase::ALL {
                cells.push(StereoCell {
                    realness,
                    polarity,
                    paraphrase,
                    n: 0,
                    counts: [0; 4],
                });
            }
        }
    }
    let by_id: std::collections::HashMap<&str, _> =
        samples.iter().map(|s| (s.id.as_str(), s)).collect();
    for s in &scored {
        let design = sample_design(by_id[s.sample_id.as_str()]).expect("generated sample metadata");
        let cell = cells
            .iter_mut()
            .find(|c| (c.polarity, c.realness, c.paraphrase) == design)
            .expect("design cell");
        cell.n += 1;
        cell.counts[s.result.winner.index()] += 1;
    }
    Ok(StereoReport {
        cells,
        scored,
        errors,
    })
}
