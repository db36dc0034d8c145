//! Client for completion servers that can echo a prompt with per-token
//! logprobs (`max_tokens = 0, echo = true, logprobs = k`).

use std::thread;
use std::time::Duration;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use ureq::Agent;

use super::{check_scorable, BackendError, ScoredSequence, ScoredToken, ScoringBackend, TokenSpan};
use crate::text::{char_len, char_slice};

#[derive(Debug, Clone)]
pub struct HttpConfig {
    /// Full URL of the completions endpoint.
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    /// Cache identity; defaults to the model name. Include quantization or
    /// revision here when they differ between deployments.
    pub backend_id: Option<String>,
    pub logprobs: u32,
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff: Duration,
    /// Optional tokenize endpoint. Without it, tokenization reuses the
    /// offsets of an echo scoring call.
    pub tokenize_endpoint: Option<String>,
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: None,
            backend_id: None,
            logprobs: 1,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            backoff: Duration::from_millis(250),
            tokenize_endpoint: None,
        }
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: u32,
    echo: bool,
    logprobs: u32,
}

#[derive(Serialize)]
struct TokenizeRequest<'a> {
    model: &'a str,
    prompt: &'a str,
}

#[derive(Debug, Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    logprobs: Option<LogprobBlock>,
}

#[derive(Debug, Deserialize)]
struct LogprobBlock {
    tokens: Vec<String>,
    token_logprobs: Vec<Option<f64>>,
    #[serde(default)]
    text_offset: Option<Vec<usize>>,
}

pub struct HttpBackend {
    agent: Agent,
    config: HttpConfig,
    id: String,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent_config = Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build();
        let id = config
            .backend_id
            .clone()
            .unwrap_or_else(|| config.model.clone());
        Self {
            agent: Agent::new_with_config(agent_config),
            config,
            id,
        }
    }

    fn post_once<B: Serialize>(&self, url: &str, body: &B) -> Result<Value, BackendError> {
        let mut req = self.agent.post(url);
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        match status {
            200..=299 => serde_json::from_str(&text)
                .map_err(|e| BackendError::Protocol(format!("invalid JSON response: {e}"))),
            429 | 500..=599 => Err(BackendError::Transport(format!("status {status}: {text}"))),
            _ => Err(BackendError::Rejected {
                status,
                message: text,
            }),
        }
    }

    /// POST with bounded exponential backoff on retryable failures.
    fn post<B: Serialize>(&self, url: &str, body: &B) -> Result<Value, BackendError> {
        let mut delay = self.config.backoff;
        let mut attempt = 0;
        loop {
            match self.post_once(url, body) {
                Err(e) if e.is_retryable() && attempt < self.config.max_retries => {
                    attempt += 1;
                    warn!("{url}: {e}; retry {attempt}/{}", self.config.max_retries);
                    thread::sleep(delay);
                    delay *= 2;
                }
                other => return other,
            }
        }
    }
}

impl ScoringBackend for HttpBackend {
    fn backend_id(&self) -> &str {
        &self.id
    }

    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        check_scorable(text)?;
        let body = CompletionRequest {
            model: &self.config.model,
            prompt: text,
            max_tokens: 0,
            echo: true,
            logprobs: self.config.logprobs,
        };
        let value = self.post(&self.config.endpoint, &body)?;
        parse_completion(text, value, &self.id)
    }

    fn tokenize(&self, text: &str) -> Result<Vec<TokenSpan>, BackendError> {
        if text.is_empty() {
            return Ok(Vec::new());
        }
        match &self.config.tokenize_endpoint {
            Some(url) => {
                let body = TokenizeRequest {
                    model: &self.config.model,
                    prompt: text,
                };
                parse_tokenize(text, self.post(url, &body)?)
            }
            None if text.trim().is_empty() => Ok(vec![(0, char_len(text))]),
            None => Ok(self.score_text(text)?.offsets()),
        }
    }
}

/// Turn an echo completion response into a validated [`ScoredSequence`].
pub(crate) fn parse_completion(
    text: &str,
    value: Value,
    backend_id: &str,
) -> Result<ScoredSequence, BackendError> {
    let resp: CompletionResponse = serde_json::from_value(value)
        .map_err(|e| BackendError::Protocol(format!("unexpected response shape: {e}")))?;
    let block = resp
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.logprobs)
        .ok_or_else(|| BackendError::Protocol("response has no logprobs".into()))?;
    if block.tokens.len() != block.token_logprobs.len() {
        return Err(BackendError::Protocol(
            "tokens and token_logprobs differ in length".into(),
        ));
    }
    let starts = match block.text_offset {
        Some(offsets) => {
            if offsets.len() != block.tokens.len() {
                return Err(BackendError::Protocol(
                    "text_offset and tokens differ in length".into(),
                ));
            }
            normalize_offsets(text, &block.tokens, offsets)?
        }
        None => greedy_offsets(text, &block.tokens)?,
    };

    let len = char_len(text);
    let mut tokens = Vec::with_capacity(starts.len());
    for (i, &start) in starts.iter().enumerate() {
        let end = starts.get(i + 1).copied().unwrap_or(len);
        if end < start {
            return Err(BackendError::Protocol(format!(
                "offsets decrease at token {i}"
            )));
        }
        // Zero-width tokens (BOS and friends) carry no text.
        if end == start {
            continue;
        }
        tokens.push(ScoredToken {
            text: char_slice(text, start, end).unwrap_or("").to_string(),
            logprob: block.token_logprobs[i],
            char_start: start,
            char_end: end,
        });
    }
    let seq = ScoredSequence {
        text: text.to_string(),
        tokens,
        backend_id: backend_id.to_string(),
    };
    seq.validate()?;
    Ok(seq)
}

/// Whether `starts` slices `text` into the given token strings. Special
/// `<...>` tokens and a leading space marker on the first token are allowed.
fn offsets_match_tokens(text: &str, tokens: &[String], starts: &[usize]) -> bool {
    let len = char_len(text);
    starts.iter().enumerate().all(|(i, &start)| {
        let end = starts.get(i + 1).copied().unwrap_or(len);
        let raw = &tokens[i];
        if raw.starts_with('<') && raw.ends_with('>') {
            return true;
        }
        let Some(piece) = char_slice(text, start, end) else {
            return false;
        };
        let tok = unmark(raw);
        piece == tok || (start == 0 && tok.strip_prefix(' ') == Some(piece))
    })
}

fn byte_to_char_offsets(text: &str, offsets: &[usize]) -> Option<Vec<usize>> {
    offsets
        .iter()
        .map(|&b| {
            text.is_char_boundary(b)
                .then(|| char_len(&text[..b.min(text.len())]))
        })
        .collect()
}

/// Decide whether `text_offset` counts characters or bytes.
///
/// The interpretation whose slices reproduce the token strings wins; when
/// neither does (byte-level tokens, for instance), offsets within the
/// character length are taken as characters and larger ones as bytes.
fn normalize_offsets(
    text: &str,
    tokens: &[String],
    offsets: Vec<usize>,
) -> Result<Vec<usize>, BackendError> {
    let len = char_len(text);
    let as_chars = offsets.iter().all(|&o| o <= len);
    if as_chars && offsets_match_tokens(text, tokens, &offsets) {
        return Ok(offsets);
    }
    let as_bytes = byte_to_char_offsets(text, &offsets);
    if let Some(b) = &as_bytes {
        if offsets_match_tokens(text, tokens, b) {
            return Ok(b.clone());
        }
    }
    if as_chars {
        return Ok(offsets);
    }
    as_bytes.ok_or_else(|| {
        BackendError::Protocol("text_offset values are neither character nor byte offsets".into())
    })
}

fn unmark(token: &str) -> String {
    token.replace(['Ġ', '▁'], " ").replace('Ċ', "\n")
}

/// Re-derive start offsets from token strings by left-to-right matching.
fn greedy_offsets(text: &str, tokens: &[String]) -> Result<Vec<usize>, BackendError> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut starts = Vec::with_capacity(tokens.len());
    for (i, raw) in tokens.iter().enumerate() {
        starts.push(pos);
        let tok: Vec<char> = unmark(raw).chars().collect();
        let matches = |t: &[char]| chars.len() >= pos + t.len() && chars[pos..pos + t.len()] == *t;
        if matches(&tok) {
            pos += tok.len();
        } else if pos == 0 && tok.first() == Some(&' ') && matches(&tok[1..]) {
            // sentencepiece prefixes the first word with a space marker
            pos += tok.len() - 1;
        } else if !(raw.starts_with('<') && raw.ends_with('>')) {
            return Err(BackendError::Protocol(format!(
                "token {i} {raw:?} does not match text at offset {pos}"
            )));
        }
    }
    Ok(starts)
}

fn parse_tokenize(text: &str, value: Value) -> Result<Vec<TokenSpan>, BackendError> {
    if let Some(offsets) = value.get("offsets") {
        let spans: Vec<TokenSpan> = serde_json::from_value(offsets.clone())
            .map_err(|e| BackendError::Protocol(format!("bad offsets: {e}")))?;
        super::check_tiling(text, spans.iter().copied())?;
        return Ok(spans);
    }
    let strs = value
        .get("token_strs")
        .or_else(|| value.get("tokens"))
        .and_then(|v| serde_json::from_value::<Vec<String>>(v.clone()).ok())
        .ok_or_else(|| BackendError::Protocol("tokenize response has no token strings".into()))?;
    let starts = greedy_offsets(text, &strs)?;
    let len = char_len(text);
    let spans: Vec<TokenSpan> = starts
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, starts.get(i + 1).copied().unwrap_or(len)))
        .filter(|(s, e)| e > s)
        .collect();
    super::check_tiling(text, spans.iter().copied())?;
    Ok(spans)
}
