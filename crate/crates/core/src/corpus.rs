//! Corpus samples and their on-disk formats.
//!
//! Two input layouts are supported:
//!
//! * `congen-jsonl`: one JSON object per line with explicit character spans
//!   (`id, source, context, quantifier, sentence, base, span_start, span_end,
//!   metadata`). Offsets count Unicode scalar values on `base`.
//! * `genericskb-tsv`: the public GenericsKB column layout
//!   (`source, term, quantifier, sentence, score`). The property span is not
//!   part of that layout, so it is derived with the rule-based tagger: the
//!   span starts at the token after the main verb.
//!
//! Records that violate a sample invariant are reported with their line number
//! in [`ReadOutcome::rejected`] instead of being dropped silently.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::mining::tagger::{property_span_after_main_verb, RuleTagger};
use crate::quantifier::Quantifier;
use crate::text::{char_len, char_slice, eq_modulo_initial_case};
use crate::variation::strip_quantifier;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
    #[error("invalid sample {id}: {reason}")]
    Invalid { id: String, reason: String },
}

/// Character span `[start, end)` on the base sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PropertySpan {
    pub start: usize,
    pub end: usize,
}

impl PropertySpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shifted(&self, by: usize) -> Self {
        Self::new(self.start + by, self.end + by)
    }

    /// Check `0 <= start < end <= len(text)` and that the spanned text is not
    /// blank.
    pub fn validate(&self, text: &str) -> Result<(), String> {
        let len = char_len(text);
        if self.start >= self.end {
            return Err(format!("empty span [{}, {})", self.start, self.end));
        }
        if self.end > len {
            return Err(format!(
                "span end {} exceeds sentence length {len}",
                self.end
            ));
        }
        let spanned = char_slice(text, self.start, self.end).unwrap_or("");
        if spanned.trim().is_empty() {
            return Err("span covers only whitespace".into());
        }
        Ok(())
    }

    /// Text covered by the span.
    pub fn extract<'a>(&self, text: &'a str) -> Option<&'a str> {
        char_slice(text, self.start, self.end)
    }
}

/// Where a sample was collected from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Dolma,
    Reddit,
    Genericskb,
    Stereotype,
    Other,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Dolma => "dolma",
            Source::Reddit => "reddit",
            Source::Genericskb => "genericskb",
            Source::Stereotype => "stereotype",
            Source::Other => "other",
        })
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dolma" => Ok(Source::Dolma),
            "reddit" => Ok(Source::Reddit),
            "genericskb" => Ok(Source::Genericskb),
            "stereotype" => Ok(Source::Stereotype),
            "other" => Ok(Source::Other),
            other => Err(format!("unknown source {other:?}")),
        }
    }
}

/// One annotated sentence in context.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSample {
    pub id: String,
    pub source: Source,
    pub context: String,
    pub sentence: String,
    pub original_quantifier: Quantifier,
    /// The sentence with its quantifier removed.
    pub base_sentence: String,
    pub property_span: PropertySpan,
    pub metadata: Map<String, Value>,
}

impl CorpusSample {
    /// Check the sample invariants.
    pub fn validate(&self) -> Result<(), String> {
        let q = self.original_quantifier;
        if q == Quantifier::Gen {
            if !eq_modulo_initial_case(&self.sentence, &self.base_sentence) {
                return Err("generic sample: base differs from sentence".into());
            }
        } else {
            let prefix_len = char_len(q.surface()) + 1;
            let head = char_slice(&self.sentence, 0, prefix_len).unwrap_or("");
            if !head.eq_ignore_ascii_case(&format!("{} ", q.surface())) {
                return Err(format!(
                    "sentence does not start with quantifier {:?}",
                    q.surface()
                ));
            }
            let rest = crate::text::char_suffix(&self.sentence, prefix_len).unwrap_or("");
            if !eq_modulo_initial_case(rest, &self.base_sentence) {
                return Err("base is not the sentence minus its quantifier".into());
            }
        }
        self.property_span.validate(&self.base_sentence)
    }

    /// Property text on the base sentence.
    pub fn property_text(&self) -> &str {
        self.property_span
            .extract(&self.base_sentence)
            .unwrap_or("")
    }

    /// Document identity used to keep random contexts away from the sample's
    /// own document: `metadata.document_id` when present, else the sample id.
    pub fn document_key(&self) -> String {
        match self.metadata.get("document_id") {
            Some(Value::String(s)) => s.clone(),
            Some(other) => other.to_string(),
            None => self.id.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    CongenJsonl,
    GenericskbTsv,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "congen-jsonl" => Ok(InputFormat::CongenJsonl),
            "genericskb-tsv" => Ok(InputFormat::GenericskbTsv),
            other => Err(format!("unknown input format {other:?}")),
        }
    }
}

/// A record that could not be turned into a valid sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineError {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Default)]
pub struct ReadOutcome {
    pub samples: Vec<CorpusSample>,
    pub rejected: Vec<LineError>,
}

/// Wire shape of one congen-jsonl line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct CongenRecord {
    pub id: String,
    pub source: Source,
    #[serde(default)]
    pub context: String,
    pub quantifier: String,
    pub sentence: String,
    pub base: String,
    pub span_start: usize,
    pub span_end: usize,
    #[serde(default)]
    pub metadata: Map<String, Value>,
}

impl From<&CorpusSample> for CongenRecord {
    fn from(s: &CorpusSample) -> Self {
        CongenRecord {
            id: s.id.clone(),
            source: s.source,
            context: s.context.clone(),
            quantifier: s.original_quantifier.label().to_string(),
            sentence: s.sentence.clone(),
            base: s.base_sentence.clone(),
            span_start: s.property_span.start,
            span_end: s.property_span.end,
            metadata: s.metadata.clone(),
        }
    }
}

impl CongenRecord {
    fn into_sample(self) -> Result<CorpusSample, String> {
        if self.quantifier.trim().is_empty() {
            return Err("missing quantifier label".into());
        }
        let q: Quantifier = self.quantifier.parse().map_err(|e| format!("{e}"))?;
        let sample = CorpusSample {
            id: self.id,
            source: self.source,
            context: self.context,
            sentence: self.sentence,
            original_quantifier: q,
            base_sentence: self.base,
            property_span: PropertySpan::new(self.span_start, self.span_end),
            metadata: self.metadata,
        };
        sample.validate()?;
        Ok(sample)
    }
}

fn io_err(path: &Path, source: io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Read samples from `path`.
pub fn read_samples(path: &Path, format: InputFormat) -> Result<ReadOutcome, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_samples_from(BufReader::new(file), format).map_err(|e| io_err(path, e))
}

/// Read samples from any buffered reader.
pub fn read_samples_from<R: BufRead>(reader: R, format: InputFormat) -> io::Result<ReadOutcome> {
    match format {
        InputFormat::CongenJsonl => read_congen(reader),
        InputFormat::GenericskbTsv => read_genericskb(reader),
    }
}

fn read_congen<R: BufRead>(reader: R) -> io::Result<ReadOutcome> {
    let mut out = ReadOutcome::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<CongenRecord>(&line)
            .map_err(|e| format!("malformed record: {e}"))
            .and_then(CongenRecord::into_sample);
        match parsed {
            Ok(s) => out.samples.push(s),
            Err(message) => out.rejected.push(LineError {
                line: i + 1,
                message,
            }),
        }
    }
    Ok(out)
}

fn read_genericskb<R: BufRead>(reader: R) -> io::Result<ReadOutcome> {
    let tagger = RuleTagger;
    let mut out = ReadOutcome::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if lineno == 1 && cols.first().map(|c| c.trim()) == Some("source") {
            continue;
        }
        match genericskb_row(&cols, lineno, &tagger) {
            Ok(s) => out.samples.push(s),
            Err(message) => out.rejected.push(LineError {
                line: lineno,
                message,
            }),
        }
    }
    Ok(out)
}

fn genericskb_row(
    cols: &[&str],
    lineno: usize,
    tagger: &RuleTagger,
) -> Result<CorpusSample, String> {
    if cols.len() != 5 {
        return Err(format!(
            "expected 5 tab-separated columns, found {}",
            cols.len()
        ));
    }
    let (source, term, quant, sentence, score) = (cols[0], cols[1], cols[2], cols[3], cols[4]);
    let q: Quantifier = quant.parse().map_err(|e| format!("{e}"))?;
    let sentence = sentence.trim();
    if sentence.is_empty() {
        return Err("empty sentence".into());
    }
    let (base, _) = strip_quantifier(sentence, q).map_err(|e| e.to_string())?;
    let span = property_span_after_main_verb(&base, tagger)
        .ok_or_else(|| "could not locate property tokens after the main verb".to_string())?;

    let mut metadata = Map::new();
    metadata.insert("kb_source".into(), Value::String(source.to_string()));
    metadata.insert("term".into(), Value::String(term.to_string()));
    if let Ok(score) = score.trim().parse::<f64>() {
        if let Some(n) = serde_json::Number::from_f64(score) {
            metadata.insert("score".into(), Value::Number(n));
        }
    }
    let sample = CorpusSample {
        id: format!("gkb-{lineno}"),
        source: Source::Genericskb,
        context: String::new(),
        sentence: sentence.to_string(),
        original_quantifier: q,
        base_sentence: base,
        property_span: span,
        metadata,
    };
    sample.validate()?;
    Ok(sample)
}

/// Write samples as congen-jsonl.
pub fn write_samples(samples: &[CorpusSample], path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    write_samples_to(samples, &mut w)?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_samples_to<W: Write>(samples: &[CorpusSample], w: &mut W) -> Result<(), CorpusError> {
    for s in samples {
        s.validate().map_err(|reason| CorpusError::Invalid {
            id: s.id.clone(),
            reason,
        })?;
        serde_json::to_writer(&mut *w, &CongenRecord::from(s))?;
        w.write_all(b"\n").map_err(|e| CorpusError::Io {
            path: "<writer>".into(),
            source: e,
        })?;
    }
    Ok(())
}
