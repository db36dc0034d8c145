//! Candidate generic sentence mining.
//!
//! Documents are split into sentences; each sentence runs through the
//! enabled heuristic filters and, when every filter passes, through an
//! optional genericity scorer. Sentences that clear everything (with a score
//! strictly above the threshold) become candidates for annotation.

pub mod filters;
mod mine;
pub mod splitter;
pub mod tagger;

pub use filters::{
    bare_plural_filter, exclusion_filter, passive_filter, FilterOutcome, EXCLUSION_PATTERN,
};
pub use mine::{
    candidate_record, mine_document, CandidateSentence, Document, FilterSet, FilterStep,
    GenericityScorer, HttpScorer, KeywordScorer, Miner, MiningConfig, MiningError,
};
pub use splitter::split_sentences;
pub use tagger::{RuleTagger, Tagger};
