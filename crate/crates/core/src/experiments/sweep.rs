use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{candidate_set, percentages, ExperimentConfig, SampleError};
use crate::backend::ScoringBackend;
use crate::corpus::CorpusSample;
use crate::quantifier::Quantifier;
use crate::scoring::{
    p_acceptable_with_context, truncate_with_tokens, PAcceptabilityResult, ScoringError,
};

pub const SWEEP_STEP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidatesMode {
    WithGen,
    WithoutGen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextSource {
    /// The sample's own left context.
    True,
    /// A context drawn from another document of the same source.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Largest context length in tokens; a multiple of 4.
    pub max_tokens: usize,
    pub mode: CandidatesMode,
    pub source: ContextSource,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            max_tokens: 64,
            mode: CandidatesMode::WithGen,
            source: ContextSource::True,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !self.max_tokens.is_multiple_of(SWEEP_STEP) {
            return Err(format!(
                "max context {} is not a multiple of {SWEEP_STEP}",
                self.max_tokens
            ));
        }
        Ok(())
    }

    /// `0, 4, 8, ..., max_tokens`.
    pub fn lengths(&self) -> Vec<usize> {
        (0..=self.max_tokens).step_by(SWEEP_STEP).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSampleRecord {
    pub sample_id: String,
    pub gold: Quantifier,
    /// Id of the sample whose context was borrowed (random source only).
    pub context_from: Option<String>,
    /// Context text at each length.
    pub contexts: Vec<String>,
    /// One result per length.
    pub results: Vec<PAcceptabilityResult>,
}

impl SweepSampleRecord {
    pub fn correct_at(&self, i: usize) -> bool {
        self.results[i].winner == self.gold
    }
}

/// Accuracy and winner shares per context length for one gold quantifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub gold: Quantifier,
    pub context_lengths: Vec<usize>,
    pub n_samples: usize,
    /// Percent of samples whose winner is the gold quantifier.
    pub accuracy: Vec<f64>,
    /// Percent of winners per quantifier, canonical order.
    pub shares: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub lengths: Vec<usize>,
    pub curves: Vec<SweepCurve>,
    pub records: Vec<SweepSampleRecord>,
    pub errors: Vec<SampleError>,
}

/// Deterministic random context donor for the sample at `index`.
///
/// Donors share the sample's source, come from a different document and have
/// a non-empty context. The draw depends only on `seed` and `index`.
pub fn random_context_for<'a>(
    index: usize,
    sample: &CorpusSample,
    pool: &'a [CorpusSample],
    seed: u64,
) -> Option<&'a CorpusSample> {
    let own = sample.document_key();
    let donors: Vec<&CorpusSample> = pool
        .iter()
        .filter(|d| {
            d.source == sample.source && !d.context.trim().is_empty() && d.document_key() != own
        })
        .collect();
    if donors.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    Some(donors[rng.random_range(0..donors.len())])
}

fn sweep_sample<B: ScoringBackend + ?Sized>(
    backend: &B,
    sample: &CorpusSample,
    context: &str,
    context_from: Option<String>,
    lengths: &[usize],
    candidates: &[Quantifier],
    config: &ExperimentConfig,
) -> Result<SweepSampleRecord, ScoringError> {
    let context = context.trim();
    let tokens = if context.is_empty() {
        Vec::new()
    } else {
        backend.tokenize(context)?
    };
    let mut contexts = Vec::with_capacity(lengths.len());
    let mut results: Vec<PAcceptabilityResult> = Vec::with_capacity(lengths.len());
    for &k in lengths {
        let ctx = truncate_with_tokens(context, &tokens, k);
        let used = k.min(tokens.len());
        // Past the context length the text stops changing.
        let reuse = contexts.last().is_some_and(|prev: &String| *prev == ctx);
        let result = if reuse {
            results.last().cloned().expect("previous result")
        } else {
            p_acceptable_with_context(backend, sample, candidates, &ctx, used, &config.scoring)?
        };
        contexts.push(ctx);
        results.push(result);
    }
    Ok(SweepSampleRecord {
        sample_id: sample.id.clone(),
        gold: sample.original_quantifier,
        context_from,
        contexts,
        results,
    })
}

/// p-acceptability at context lengths `0, 4, ..., max_tokens`.
///
/// Samples with fewer context tokens than a length keep their full context
/// there, so their curve freezes. A sample that fails at any length is
/// excluded from every length.
pub fn run_context_sweep<B: ScoringBackend + ?Sized>(
    backend: &B,
    samples: &[CorpusSample],
    sweep: &SweepConfig,
    config: &ExperimentConfig,
) -> Result<SweepReport, String> {
    sweep.validate()?;
    let lengths = sweep.lengths();
    let candidates = candidate_set(sweep.mode == CandidatesMode::WithGen);
    let outcomes = config.executor.map(samples, |i, s| {
        let (context, from) = match sweep.source {
            ContextSource::True => (s.context.as_str(), None),
            ContextSource::Random { seed } => match random_context_for(i, s, samples, seed) {
                Some(d) => (d.context.as_str(), Some(d.id.clone())),
                None => return Err("no random context donor available".to_string()),
            },
        };
        sweep_sample(backend, s, context, from, &lengths, candidates, config)
            .map_err(|e| e.to_string())
    });

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (s, o) in samples.iter().zip(outcomes) {
        match o {
            Ok(r) => records.push(r),
            Err(message) => {
                log::warn!("sample {} failed: {message}", s.id);
                errors.push(SampleError {
                    sample_id: s.id.clone(),
                    message,
                });
            }
        }
    }

    let curves = Quantifier::CANONICAL
        .into_iter()
        .filter_map(|gold| {
            let group: Vec<&SweepSampleRecord> =
                records.iter().filter(|r| r.gold == gold).collect();
            if group.is_empty() {
                return None;
            }
            let mut accuracy = Vec::with_capacity(lengths.len());
            let mut shares = Vec::with_capacity(lengths.len());
            for i in 0..lengths.len() {
                let mut counts = [0usize; 4];
                for r in &group {
                    counts[r.results[i].winner.index()] += 1;
                }
                let correct = group.iter().filter(|r| r.correct_at(i)).count();
                accuracy.push(100.0 * correct as f64 / group.len() as f64);
                shares.push(percentages(&counts).expect("non-empty group"));
            }
            Some(SweepCurve {
                gold,
                context_lengths: lengths.clone(),
                n_samples: group.len(),
                accuracy,
                shares,
            })
        })
        .collect();

    Ok(SweepReport {
        config: *sweep,
        lengths,
        curves,
        records,
        errors,
    })
}
