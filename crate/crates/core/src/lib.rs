//! Quantifier p-acceptability for generic sentences.
//!
//! Given a bare plural sentence `s` (optionally preceded by a left context `c`),
//! the library builds the variations `c + q + s` for every candidate quantifier
//! `q` in {GEN, all, most, some}, asks a language-model backend for per-token
//! log-probabilities, and picks the quantifier whose variation minimises the
//! mean surprisal of the property tokens (the tokens after the main verb).
//!
//! On top of that metric sit the corpus types and readers ([`corpus`]), the
//! stereotype paraphrase generator ([`stereotype`]), candidate sentence mining
//! ([`mining`]) and the experiment folds that turn per-sample results into
//! CSV reports ([`experiments`]).
//!
//! Batch work (samples, documents) runs through [`par::Executor`], which uses
//! rayon when the `parallel` feature is on and falls back to a sequential loop
//! otherwise. Results never depend on the schedule.

pub mod backend;
pub mod corpus;
pub mod experiments;
pub mod mining;
pub mod par;
pub mod quantifier;
pub mod scoring;
pub mod stereotype;
pub mod text;
pub mod variation;

pub use backend::{
    cached, BackendError, CachedBackend, FileStore, HttpBackend, HttpConfig, KeyValueStore,
    MemoryStore, MockBackend, MockTable, ScoredSequence, ScoredToken, ScoringBackend, TokenSpan,
};
pub use corpus::{
    read_samples, write_samples, CorpusError, CorpusSample, InputFormat, LineError, PropertySpan,
    ReadOutcome, Source,
};
pub use par::{Executor, Parallelism};
pub use quantifier::Quantifier;
pub use scoring::{
    p_acceptable, property_surprisal, truncate_context, ContextSpec, PAcceptabilityResult,
    ScoringConfig, ScoringError, SurprisalScore,
};
pub use stereotype::{generate_stereotype_dataset, Paraphrase, Polarity, Realness, StereotypeSeed};
pub use variation::{
    build_variations, strip_quantifier, Variation, VariationError, VariationOptions,
};
