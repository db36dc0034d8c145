use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::{check_scorable, BackendError, ScoredSequence, ScoredToken, ScoringBackend, TokenSpan};
use crate::text::char_slice;

/// One conditional probability: `p(token | ... prefix)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockEntry {
    /// Words immediately preceding the token (matched as a suffix of the
    /// scored prefix, case-insensitively, at token boundaries).
    pub prefix: String,
    pub token: String,
    pub p: f64,
}

/// File form of a table-driven mock model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockTable {
    #[serde(default = "default_id")]
    pub id: String,
    /// Tokens without a matching entry get probability `1 / vocab_size`.
    pub vocab_size: u64,
    /// Whether the first token gets a logprob (echo servers usually omit it).
    #[serde(default)]
    pub first_token_scored: bool,
    #[serde(default)]
    pub entries: Vec<MockEntry>,
}

fn default_id() -> String {
    "mock".to_string()
}

impl MockTable {
    pub fn uniform(vocab_size: u64) -> Self {
        Self {
            id: format!("mock-uniform-{vocab_size}"),
            vocab_size,
            first_token_scored: false,
            entries: Vec::new(),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, BackendError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| BackendError::InvalidInput(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&raw)
            .map_err(|e| BackendError::InvalidInput(format!("{}: {e}", path.display())))
    }

    pub fn with_entry(mut self, prefix: &str, token: &str, p: f64) -> Self {
        self.entries.push(MockEntry {
            prefix: prefix.into(),
            token: token.into(),
            p,
        });
        self
    }
}

/// Whitespace-and-punctuation tokenizer used by the mock.
///
/// Each token is any leading whitespace followed by either a run of word
/// characters (alphanumerics, apostrophes, hyphens) or a single other
/// character. Trailing whitespace becomes its own token, so the output always
/// tiles the text.
pub fn mock_tokenize(text: &str) -> Vec<TokenSpan> {
    let chars: Vec<char> = text.chars().collect();
    let is_word = |c: char| c.is_alphanumeric() || c == '\'' || c == '’' || c == '-';
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let start = i;
        while i < chars.len() && chars[i].is_whitespace() {
            i += 1;
        }
        if i < chars.len() {
            if is_word(chars[i]) {
                while i < chars.len() && is_word(chars[i]) {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        out.push((start, i));
    }
    out
}

fn norm(tok: &str) -> String {
    tok.trim().to_lowercase()
}

fn words(text: &str) -> Vec<String> {
    mock_tokenize(text)
        .into_iter()
        .filter_map(|(s, e)| char_slice(text, s, e).map(norm))
        .filter(|w| !w.is_empty())
        .collect()
}

/// Deterministic table-driven model for tests and dry runs.
///
/// The probability of a token is looked up by the longest entry prefix that
/// matches the end of the preceding text; unmatched tokens fall back to the
/// uniform `1 / vocab_size`.
#[derive(Debug)]
pub struct MockBackend {
    id: String,
    default_logprob: f64,
    first_token_scored: bool,
    table: HashMap<(Vec<String>, String), f64>,
    max_prefix: usize,
    calls: AtomicUsize,
}

impl MockBackend {
    pub fn new(table: MockTable) -> Result<Self, BackendError> {
        if table.vocab_size == 0 {
            return Err(BackendError::InvalidInput("vocab_size must be >= 1".into()));
        }
        let mut map = HashMap::new();
        let mut max_prefix = 0;
        for e in &table.entries {
            if !(e.p > 0.0 && e.p <= 1.0) {
                return Err(BackendError::InvalidInput(format!(
                    "probability {} for {:?} outside (0, 1]",
                    e.p, e.token
                )));
            }
            let prefix = words(&e.prefix);
            max_prefix = max_prefix.max(prefix.len());
            map.insert((prefix, norm(&e.token)), e.p.ln());
        }
        Ok(Self {
            id: table.id,
            default_logprob: -(table.vocab_size as f64).ln(),
            first_token_scored: table.first_token_scored,
            table: map,
            max_prefix,
            calls: AtomicUsize::new(0),
        })
    }

    pub fn uniform(vocab_size: u64) -> Self {
        Self::new(MockTable::uniform(vocab_size)).expect("uniform table is valid")
    }

    /// Number of `score_text` and `tokenize` calls served so far.
    pub fn upstream_calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Conditional logprob of `token` after the words `prefix`.
    pub fn lookup(&self, prefix: &[String], token: &str) -> f64 {
        let token = norm(token);
        let longest = self.max_prefix.min(prefix.len());
        for len in (0..=longest).rev() {
            let key = (prefix[prefix.len() - len..].to_vec(), token.clone());
            if let Some(lp) = self.table.get(&key) {
                return *lp;
            }
        }
        self.default_logprob
    }
}

impl ScoringBackend for MockBackend {
    fn backend_id(&self) -> &str {
        &self.id
    }

    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        check_scorable(text)?;
        self.calls.fetch_add(1, Ordering::SeqCst);
        let mut history: Vec<String> = Vec::new();
        let mut tokens = Vec::new();
        for (i, (s, e)) in mock_tokenize(text).into_iter().enumerate() {
            let surface = char_slice(text, s, e).unwrap_or("").to_string();
            let logprob = if i == 0 && !self.first_token_scored {
                None
            } else {
                Some(self.lookup(&history, &surface))
            };
            let w = norm(&surface);
            if !w.is_empty() {
                history.push(w);
            }
            tokens.push(ScoredToken {
                text: surface,
                logprob,
                char_start: s,
                char_end: e,
            });
        }
        let seq = ScoredSequence {
            text: text.to_string(),
            tokens,
            backend_id: self.id.clone(),
        };
        seq.validate()?;
        Ok(seq)
    }

    fn tokenize(&self, text: &str) -> Result<Vec<TokenSpan>, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(mock_tokenize(text))
    }
}
