use std::collections::{HashMap, HashSet, VecDeque};
use std::time::Duration;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::filters::{bare_plural_filter, exclusion_filter, passive_filter, FilterOutcome};
use super::splitter::split_sentences;
use super::tagger::{property_span_after_main_verb, RuleTagger, Tagger};
use crate::corpus::Source;
use crate::par::Executor;
use crate::quantifier::Quantifier;
use crate::text::{char_slice, normalize_initial_case};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MiningError {
    #[error("scorer failure: {0}")]
    Scorer(String),
    #[error("invalid document: {0}")]
    Document(String),
}

/// One input document (`{id, text}` per JSON line).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

/// Genericity classifier: sentence to a score in `[0, 1]`.
pub trait GenericityScorer: Send + Sync {
    fn name(&self) -> &str;
    fn score(&self, sentence: &str) -> Result<f64, MiningError>;
}

/// Keyword-weight stub scorer for tests and offline runs.
///
/// Starts at `bias`, adds the weight of every matching lowercase word and a
/// bonus when the first word looks like a bare plural, then clamps to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct KeywordScorer {
    pub bias: f64,
    pub plural_start_bonus: f64,
    pub weights: HashMap<String, f64>,
}

impl Default for KeywordScorer {
    fn default() -> Self {
        let mut weights = HashMap::new();
        for w in [
            "are",
            "have",
            "do",
            "generally",
            "usually",
            "often",
            "typically",
        ] {
            weights.insert(w.to_string(), 0.1);
        }
        for w in [
            "i",
            "you",
            "we",
            "my",
            "me",
            "yesterday",
            "today",
            "tomorrow",
            "was",
            "had",
            "he",
            "she",
            "his",
            "her",
            "did",
        ] {
            weights.insert(w.to_string(), -0.3);
        }
        Self {
            bias: 0.45,
            plural_start_bonus: 0.2,
            weights,
        }
    }
}

impl GenericityScorer for KeywordScorer {
    fn name(&self) -> &str {
        "keyword"
    }

    fn score(&self, sentence: &str) -> Result<f64, MiningError> {
        let words: Vec<String> = sentence
            .split_whitespace()
            .map(|w| {
                w.trim_matches(|c: char| !c.is_alphanumeric())
                    .to_lowercase()
            })
            .filter(|w| !w.is_empty())
            .collect();
        let mut s = self.bias;
        if words
            .first()
            .is_some_and(|w| super::tagger::looks_plural(w))
        {
            s += self.plural_start_bonus;
        }
        s += words
            .iter()
            .filter_map(|w| self.weights.get(w))
            .sum::<f64>();
        Ok(s.clamp(0.0, 1.0))
    }
}

/// Scorer served over HTTP: `POST {"text": ...}` answered by `{"score": x}`.
pub struct HttpScorer {
    agent: ureq::Agent,
    endpoint: String,
}

impl HttpScorer {
    pub fn new(endpoint: impl Into<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .build();
        Self {
            agent: ureq::Agent::new_with_config(config),
            endpoint: endpoint.into(),
        }
    }
}

impl GenericityScorer for HttpScorer {
    fn name(&self) -> &str {
        &self.endpoint
    }

    fn score(&self, sentence: &str) -> Result<f64, MiningError> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .send_json(json!({ "text": sentence }))
            .map_err(|e| MiningError::Scorer(e.to_string()))?;
        let v: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| MiningError::Scorer(e.to_string()))?;
        let score = v
            .get("score")
            .and_then(Value::as_f64)
            .ok_or_else(|| MiningError::Scorer("response has no numeric score".into()))?;
        if !(0.0..=1.0).contains(&score) {
            return Err(MiningError::Scorer(format!("score {score} outside [0, 1]")));
        }
        Ok(score)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSet {
    pub exclusion: bool,
    pub passive: bool,
    /// Present-tense plural verb with a bare plural subject (after dropping a
    /// leading all/most/some).
    pub plural_present: bool,
}

impl Default for FilterSet {
    fn default() -> Self {
        Self {
            exclusion: true,
            passive: true,
            plural_present: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MiningConfig {
    pub threshold: f64,
    pub filters: FilterSet,
    pub dedup: bool,
    /// Documents handed to the executor at a time.
    pub batch_size: usize,
    pub executor: Executor,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self {
            threshold: 0.7,
            filters: FilterSet::default(),
            dedup: true,
            batch_size: 64,
            executor: Executor::sequential(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterStep {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl FilterStep {
    fn from_outcome(name: &str, o: FilterOutcome) -> Self {
        Self {
            name: name.to_string(),
            passed: o.passed,
            detail: o.detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSentence {
    pub document_id: String,
    /// Position of the sentence within its document.
    pub sentence_index: usize,
    pub sentence: String,
    /// Document text preceding the sentence.
    pub context: String,
    pub classifier_score: Option<f64>,
    pub filter_trace: Vec<FilterStep>,
}

fn strip_leading_quantifier(sentence: &str) -> String {
    for q in Quantifier::EXPLICIT {
        if let Ok((base, _)) = crate::variation::strip_quantifier(sentence, q) {
            return base;
        }
    }
    sentence.to_string()
}

/// Run the enabled filters on one sentence. Every enabled filter runs so the
/// trace is complete.
fn trace_sentence<T: Tagger + ?Sized>(
    sentence: &str,
    filters: &FilterSet,
    tagger: &T,
) -> Vec<FilterStep> {
    let mut trace = Vec::new();
    if filters.exclusion {
        trace.push(FilterStep::from_outcome(
            "exclusion",
            exclusion_filter(sentence),
        ));
    }
    if filters.passive {
        trace.push(FilterStep::from_outcome(
            "passive",
            passive_filter(sentence),
        ));
    }
    if filters.plural_present {
        let body = strip_leading_quantifier(sentence);
        trace.push(FilterStep::from_outcome(
            "plural_present",
            bare_plural_filter(&body, tagger),
        ));
    }
    trace
}

/// Mine one document.
pub fn mine_document(
    doc: &Document,
    scorer: Option<&dyn GenericityScorer>,
    config: &MiningConfig,
) -> Result<Vec<CandidateSentence>, MiningError> {
    let tagger = RuleTagger;
    let mut out = Vec::new();
    for (idx, (start, end)) in split_sentences(&doc.text).into_iter().enumerate() {
        let sentence = char_slice(&doc.text, start, end)
            .ok_or_else(|| MiningError::Document(format!("bad sentence offsets in {}", doc.id)))?;
        let mut trace = trace_sentence(sentence, &config.filters, &tagger);
        if !trace.iter().all(|s| s.passed) {
            continue;
        }
        let classifier_score = match scorer {
            Some(sc) => {
                let score = sc.score(sentence)?;
                let passed = score > config.threshold;
                trace.push(FilterStep {
                    name: "classifier".into(),
                    passed,
                    detail: Some(format!(
                        "{} score {score} vs threshold {}",
                        sc.name(),
                        config.threshold
                    )),
                });
                if !passed {
                    continue;
                }
                Some(score)
            }
            None => {
                trace.push(FilterStep {
                    name: "classifier".into(),
                    passed: true,
                    detail: Some("skipped: no scorer configured".into()),
                });
                None
            }
        };
        let context = char_slice(&doc.text, 0, start)
            .unwrap_or("")
            .trim()
            .to_string();
        out.push(CandidateSentence {
            document_id: doc.id.clone(),
            sentence_index: idx,
            sentence: sentence.to_string(),
            context,
            classifier_score,
            filter_trace: trace,
        });
    }
    Ok(out)
}

/// Streaming miner over a document iterator.
pub struct Miner<'a> {
    pub config: MiningConfig,
    pub scorer: Option<&'a dyn GenericityScorer>,
}

impl<'a> Miner<'a> {
    pub fn new(config: MiningConfig, scorer: Option<&'a dyn GenericityScorer>) -> Self {
        Self { config, scorer }
    }

    /// Candidates in input order. Documents are processed in batches of
    /// `batch_size` on the configured executor.
    pub fn mine<I>(&'a self, docs: I) -> MineIter<'a, I::IntoIter>
    where
        I: IntoIterator<Item = Document>,
    {
        MineIter {
            miner: self,
            docs: docs.into_iter(),
            buffer: VecDeque::new(),
            seen: HashSet::new(),
            failures: Vec::new(),
        }
    }
}

pub struct MineIter<'a, I> {
    miner: &'a Miner<'a>,
    docs: I,
    buffer: VecDeque<CandidateSentence>,
    seen: HashSet<String>,
    failures: Vec<(String, MiningError)>,
}

impl<I> MineIter<'_, I> {
    /// Documents that failed so far, with their errors.
    pub fn failures(&self) -> &[(String, MiningError)] {
        &self.failures
    }
}

impl<I: Iterator<Item = Document>> Iterator for MineIter<'_, I> {
    type Item = CandidateSentence;

    fn next(&mut self) -> Option<CandidateSentence> {
        loop {
            if let Some(c) = self.buffer.pop_front() {
                return Some(c);
            }
            let batch: Vec<Document> = self
                .docs
                .by_ref()
                .take(self.miner.config.batch_size.max(1))
                .collect();
            if batch.is_empty() {
                return None;
            }
            let cfg = &self.miner.config;
            let scorer = self.miner.scorer;
            let results = cfg
                .executor
                .map(&batch, |_, d| mine_document(d, scorer, cfg));
            for (doc, res) in batch.iter().zip(results) {
                match res {
                    Ok(cands) => {
                        for c in cands {
                            if cfg.dedup && !self.seen.insert(c.sentence.clone()) {
                                continue;
                            }
                            self.buffer.push_back(c);
                        }
                    }
                    Err(e) => {
                        warn!("skipping document {}: {e}", doc.id);
                        self.failures.push((doc.id.clone(), e));
                    }
                }
            }
        }
    }
}

/// congen-jsonl record for a candidate, with the quantifier left empty for
/// annotation. `base` and the span are a tagger-based pre-annotation; the span
/// is `[0, 0)` when no main verb was found.
pub fn candidate_record(c: &CandidateSentence, source: Source) -> Value {
    let base = normalize_initial_case(&c.sentence);
    let span = property_span_after_main_verb(&base, &RuleTagger);
    json!({
        "id": format!("{}-{}", c.document_id, c.sentence_index),
        "source": source,
        "context": c.context,
        "quantifier": "",
        "sentence": c.sentence,
        "base": base,
        "span_start": span.map_or(0, |s| s.start),
        "span_end": span.map_or(0, |s| s.end),
        "metadata": {
            "document_id": c.document_id,
            "classifier_score": c.classifier_score,
            "filter_trace": c.filter_trace,
        }
    })
}
