//! Language-model scoring backends.
//!
//! A backend returns, for a text, its tokenization (character offsets that
//! tile the text) and each token's natural-log conditional probability. The
//! first token's logprob may be absent, as is usual for echo-style servers.

mod cache;
mod http;
mod mock;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::text::{char_len, char_slice};

pub use cache::{cached, CacheStats, CachedBackend, FileStore, KeyValueStore, MemoryStore};
pub use http::{HttpBackend, HttpConfig};
pub use mock::{mock_tokenize, MockBackend, MockEntry, MockTable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    /// Network-level failure; safe to retry.
    #[error("transport failure: {0}")]
    Transport(String),
    /// The server refused the request.
    #[error("server rejected request (status {status}): {message}")]
    Rejected { status: u16, message: String },
    /// The response violates the scoring contract.
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport(_))
    }
}

/// Character offsets `[start, end)` of one token.
pub type TokenSpan = (usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredToken {
    pub text: String,
    /// Natural-log probability given all previous tokens.
    pub logprob: Option<f64>,
    pub char_start: usize,
    pub char_end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSequence {
    pub text: String,
    pub tokens: Vec<ScoredToken>,
    pub backend_id: String,
}

impl ScoredSequence {
    /// Check that tokens tile the text, token surfaces concatenate back to
    /// it, and every logprob is a finite value `<= 0` (only the first token may
    /// lack one).
    pub fn validate(&self) -> Result<(), BackendError> {
        check_tiling(
            &self.text,
            self.tokens.iter().map(|t| (t.char_start, t.char_end)),
        )?;
        for (i, tok) in self.tokens.iter().enumerate() {
            let expected = char_slice(&self.text, tok.char_start, tok.char_end).unwrap_or("");
            if tok.text != expected {
                return Err(BackendError::Protocol(format!(
                    "token {i} surface {:?} does not match text slice {expected:?}",
                    tok.text
                )));
            }
            match tok.logprob {
                None if i > 0 => {
                    return Err(BackendError::Protocol(format!("token {i} has no logprob")))
                }
                Some(lp) if !(lp.is_finite() && lp <= 0.0) => {
                    return Err(BackendError::Protocol(format!(
                        "token {i} has invalid logprob {lp}"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn offsets(&self) -> Vec<TokenSpan> {
        self.tokens
            .iter()
            .map(|t| (t.char_start, t.char_end))
            .collect()
    }
}

/// Assert that `spans` tile `[0, len(text))` contiguously with non-empty
/// tokens.
pub fn check_tiling<I>(text: &str, spans: I) -> Result<(), BackendError>
where
    I: IntoIterator<Item = TokenSpan>,
{
    let len = char_len(text);
    let mut pos = 0;
    for (i, (start, end)) in spans.into_iter().enumerate() {
        if start != pos || end <= start {
            return Err(BackendError::Protocol(format!(
                "token {i} [{start}, {end}) breaks tiling at offset {pos}"
            )));
        }
        pos = end;
    }
    if pos != len {
        return Err(BackendError::Protocol(format!(
            "tokens cover {pos} of {len} characters"
        )));
    }
    Ok(())
}

/// Scoring requests must contain something other than whitespace.
pub fn check_scorable(text: &str) -> Result<(), BackendError> {
    if text.trim().is_empty() {
        return Err(BackendError::InvalidInput(
            "text is empty or whitespace-only".into(),
        ));
    }
    Ok(())
}

/// A language model that can score and tokenize text.
///
/// Implementations must be deterministic and callable from many threads.
pub trait ScoringBackend: Send + Sync {
    /// Identifies the model (and anything else that changes its outputs,
    /// such as quantization). Used as part of cache keys.
    fn backend_id(&self) -> &str;

    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError>;

    fn tokenize(&self, text: &str) -> Result<Vec<TokenSpan>, BackendError>;
}

impl<B: ScoringBackend + ?Sized> ScoringBackend for &B {
    fn backend_id(&self) -> &str {
        (**self).backend_id()
    }
    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        (**self).score_text(text)
    }
    fn tokenize(&self, text: &str) -> Result<Vec<TokenSpan>, BackendError> {
        (**self).tokenize(text)
    }
}

impl<B: ScoringBackend + ?Sized> ScoringBackend for Box<B> {
    fn backend_id(&self) -> &str {
        (**self).backend_id()
    }
    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        (**self).score_text(text)
    }
    fn tokenize(&self, text: &str) -> Result<Vec<TokenSpan>, BackendError> {
        (**self).tokenize(text)
    }
}

impl<B: ScoringBackend + ?Sized> ScoringBackend for Arc<B> {
    fn backend_id(&self) -> &str {
        (**self).backend_id()
    }
    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        (**self).score_text(text)
    }
    fn tokenize(&self, text: &str) -> Result<Vec<TokenSpan>, BackendError> {
        (**self).tokenize(text)
    }
}
