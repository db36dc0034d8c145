//! Stereotype seeds and their three surface paraphrases.
//!
//! Only the invented seeds are bundled. Real-group seeds must be supplied by
//! the user as a JSON-lines file (see [`read_seeds`]).

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::corpus::{CorpusError, CorpusSample, LineError, PropertySpan, Source};
use crate::quantifier::Quantifier;
use crate::text::char_len;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Realness {
    Real,
    Invented,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Paraphrase {
    /// `catalans are lovely`
    #[serde(rename = "bp")]
    Bp,
    /// `catalan people are lovely`
    #[serde(rename = "sg_ppl")]
    SgPpl,
    /// `people who are catalan are lovely`
    #[serde(rename = "ppl_who")]
    PplWho,
}

impl Polarity {
    pub const ALL: [Polarity; 2] = [Polarity::Negative, Polarity::Positive];

    pub fn label(self) -> &'static str {
        match self {
            Polarity::Negative => "negative",
            Polarity::Positive => "positive",
        }
    }
}

impl Realness {
    pub const ALL: [Realness; 2] = [Realness::Real, Realness::Invented];

    pub fn label(self) -> &'static str {
        match self {
            Realness::Real => "real",
            Realness::Invented => "invented",
        }
    }
}

impl Paraphrase {
    pub const ALL: [Paraphrase; 3] = [Paraphrase::Bp, Paraphrase::SgPpl, Paraphrase::PplWho];

    pub fn label(self) -> &'static str {
        match self {
            Paraphrase::Bp => "bp",
            Paraphrase::SgPpl => "sg_ppl",
            Paraphrase::PplWho => "ppl_who",
        }
    }

    /// Subject phrase for a group.
    pub fn subject(self, singular: &str, plural: &str) -> String {
        match self {
            Paraphrase::Bp => plural.to_string(),
            Paraphrase::SgPpl => format!("{singular} people"),
            Paraphrase::PplWho => format!("people who are {singular}"),
        }
    }
}

macro_rules! label_impls {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                Self::ALL
                    .into_iter()
                    .find(|v| v.label() == s)
                    .ok_or_else(|| format!("unknown {} {s:?}", stringify!($t).to_lowercase()))
            }
        }
    };
}

label_impls!(Polarity);
label_impls!(Realness);
label_impls!(Paraphrase);

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StereotypeSeed {
    pub group_singular: String,
    pub group_plural: String,
    pub predicate: String,
    pub polarity: Polarity,
    pub realness: Realness,
}

impl StereotypeSeed {
    pub fn validate(&self) -> Result<(), String> {
        if self.group_singular.trim().is_empty() || self.group_plural.trim().is_empty() {
            return Err("empty group name".into());
        }
        if self.group_plural == self.group_singular {
            return Err(format!("plural equals singular: {:?}", self.group_singular));
        }
        let pred = self.predicate.trim();
        if pred.is_empty() {
            return Err("empty predicate".into());
        }
        if pred != self.predicate {
            return Err("predicate has surrounding whitespace".into());
        }
        Ok(())
    }

    /// Surface sentence for one paraphrase.
    pub fn render(&self, paraphrase: Paraphrase) -> String {
        format!(
            "{} {}",
            paraphrase.subject(&self.group_singular, &self.group_plural),
            self.predicate
        )
    }

    /// Property span on [`render`](Self::render)'s output: the predicate
    /// minus its leading verb. Empty for one-word predicates.
    pub fn property_span(&self, paraphrase: Paraphrase) -> PropertySpan {
        let subject_len =
            char_len(&paraphrase.subject(&self.group_singular, &self.group_plural)) + 1;
        let total = subject_len + char_len(&self.predicate);
        match self.predicate.split_once(' ') {
            Some((verb, _)) => PropertySpan::new(subject_len + char_len(verb) + 1, total),
            None => PropertySpan::new(total, total),
        }
    }
}

#[derive(Deserialize)]
struct InventedData {
    demonyms: Vec<(String, String)>,
    positive: Vec<String>,
    negative: Vec<String>,
}

const INVENTED_DATA: &str = include_str!("../data/invented_stereotypes.json");

fn invented_data() -> InventedData {
    serde_json::from_str(INVENTED_DATA).expect("bundled stereotype data parses")
}

/// Bundled invented demonyms as `(singular, plural)`.
pub fn invented_demonyms() -> Vec<(String, String)> {
    invented_data().demonyms
}

/// Bundled predicate list for a polarity.
pub fn invented_predicates(polarity: Polarity) -> Vec<String> {
    let d = invented_data();
    match polarity {
        Polarity::Negative => d.negative,
        Polarity::Positive => d.positive,
    }
}

/// Every demonym crossed with every predicate, negatives first.
pub fn invented_seeds() -> Vec<StereotypeSeed> {
    let d = invented_data();
    let mut out = Vec::with_capacity(2 * d.demonyms.len() * d.negative.len());
    for (polarity, preds) in [
        (Polarity::Negative, &d.negative),
        (Polarity::Positive, &d.positive),
    ] {
        for (sg, pl) in &d.demonyms {
            for p in preds {
                out.push(StereotypeSeed {
                    group_singular: sg.clone(),
                    group_plural: pl.clone(),
                    predicate: p.clone(),
                    polarity,
                    realness: Realness::Invented,
                });
            }
        }
    }
    out
}

/// Seed counts per `(realness, polarity)` cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedCounts {
    pub real_negative: usize,
    pub real_positive: usize,
    pub invented_negative: usize,
    pub invented_positive: usize,
}

impl SeedCounts {
    /// Cell sizes of the full study design.
    pub const DESIGN: SeedCounts = SeedCounts {
        real_negative: 144,
        real_positive: 120,
        invented_negative: 120,
        invented_positive: 120,
    };

    pub fn of(seeds: &[StereotypeSeed]) -> Self {
        let mut c = SeedCounts::default();
        for s in seeds {
            *match (s.realness, s.polarity) {
                (Realness::Real, Polarity::Negative) => &mut c.real_negative,
                (Realness::Real, Polarity::Positive) => &mut c.real_positive,
                (Realness::Invented, Polarity::Negative) => &mut c.invented_negative,
                (Realness::Invented, Polarity::Positive) => &mut c.invented_positive,
            } += 1;
        }
        c
    }

    pub fn total(&self) -> usize {
        self.real_negative + self.real_positive + self.invented_negative + self.invented_positive
    }
}

/// Read seeds from JSON lines. Blank lines are skipped; invalid lines are
/// reported with their 1-based line number.
pub fn read_seeds(path: &Path) -> Result<(Vec<StereotypeSeed>, Vec<LineError>), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut seeds = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<StereotypeSeed>(&line)
            .map_err(|e| e.to_string())
            .and_then(|s| s.validate().map(|_| s));
        match parsed {
            Ok(s) => seeds.push(s),
            Err(message) => errors.push(LineError {
                line: i + 1,
                message,
            }),
        }
    }
    Ok((seeds, errors))
}

pub fn write_seeds(seeds: &[StereotypeSeed], path: &Path) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = std::io::BufWriter::new(File::create(path).map_err(io_err)?);
    for s in seeds {
        let line = serde_json::to_string(s).map_err(CorpusError::Serialize)?;
        writeln!(f, "{line}").map_err(io_err)?;
    }
    f.flush().map_err(io_err)
}

/// Three generic samples per seed, in [`Paraphrase::ALL`] order.
///
/// Ids are `stereo-{seed index}-{paraphrase}`; metadata carries the
/// paraphrase, polarity, realness and group.
pub fn generate_stereotype_dataset(seeds: &[StereotypeSeed]) -> Result<Vec<CorpusSample>, String> {
    let mut out = Vec::with_capacity(seeds.len() * 3);
    for (i, seed) in seeds.iter().enumerate() {
        seed.validate().map_err(|e| format!("seed {i}: {e}"))?;
        for p in Paraphrase::ALL {
            let sentence = seed.render(p);
            let mut metadata = Map::new();
            metadata.insert("paraphrase".into(), Value::from(p.label()));
            metadata.insert("polarity".into(), Value::from(seed.polarity.label()));
            metadata.insert("realness".into(), Value::from(seed.realness.label()));
            metadata.insert("group".into(), Value::from(seed.group_singular.clone()));
            metadata.insert("document_id".into(), Value::from(format!("stereo-{i}")));
            out.push(CorpusSample {
                id: format!("stereo-{i}-{}", p.label()),
                source: Source::Stereotype,
                context: String::new(),
                base_sentence: sentence.clone(),
                sentence,
                original_quantifier: Quantifier::Gen,
                property_span: seed.property_span(p),
                metadata,
            });
        }
    }
    Ok(out)
}

/// Read `(polarity, realness, paraphrase)` back from a generated sample.
pub fn sample_design(sample: &CorpusSample) -> Option<(Polarity, Realness, Paraphrase)> {
    let get = |k: &str| sample.metadata.get(k).and_then(Value::as_str);
    Some((
        get("polarity")?.parse().ok()?,
        get("realness")?.parse().ok()?,
        get("paraphrase")?.parse().ok()?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seed(sg: &str, pl: &str, pred: &str) -> StereotypeSeed {
        StereotypeSeed {
            group_singular: sg.into(),
            group_plural: pl.into(),
            predicate: pred.into(),
            polarity: Polarity::Positive,
            realness: Realness::Real,
        }
    }

    #[test]
    fn templates() {
        let s = seed("catalan", "catalans", "are lovely");
        let out = generate_stereotype_dataset(&[s]).unwrap();
        let texts: Vec<_> = out.iter().map(|x| x.sentence.as_str()).collect();
        assert_eq!(
            texts,
            [
                "catalans are lovely",
                "catalan people are lovely",
                "people who are catalan are lovely"
            ]
        );
        assert!(out.iter().all(|x| x.property_text() == "lovely"));
        assert!(out.iter().all(|x| x.validate().is_ok()));
        assert_eq!(
            sample_design(&out[2]),
            Some((Polarity::Positive, Realness::Real, Paraphrase::PplWho))
        );
    }

    #[test]
    fn bundled_invented_counts() {
        let seeds = invented_seeds();
        let c = SeedCounts::of(&seeds);
        assert_eq!(c.invented_negative, 120);
        assert_eq!(c.invented_positive, 120);
        assert_eq!(c.real_negative + c.real_positive, 0);
        assert!(seeds.iter().all(|s| s.validate().is_ok()));
        assert_eq!(invented_demonyms().len(), 10);
    }

    #[test]
    fn one_word_predicate_has_empty_span() {
        let s = seed("xuni", "xunis", "sing");
        assert!(s.property_span(Paraphrase::Bp).is_empty());
    }

    #[test]
    fn seeds_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seeds.jsonl");
        let seeds = invented_seeds();
        write_seeds(&seeds, &path).unwrap();
        let (back, errs) = read_seeds(&path).unwrap();
        assert!(errs.is_empty());
        assert_eq!(back, seeds);
    }

    #[test]
    fn invalid_seed_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seeds.jsonl");
        std::fs::write(
            &path,
            "{\"group_singular\":\"a\",\"group_plural\":\"a\",\"predicate\":\"are x\",\"polarity\":\"negative\",\"realness\":\"real\"}\n",
        )
        .unwrap();
        let (seeds, errs) = read_seeds(&path).unwrap();
        assert!(seeds.is_empty());
        assert_eq!(errs[0].line, 1);
    }

    proptest! {
        #[test]
        fn span_is_predicate_tail(sg in "[a-z]{2,8}", verb in "[a-z]{2,6}", tail in "[a-z]{1,6}( [a-z]{1,6}){0,3}") {
            let s = seed(&sg, &format!("{sg}s"), &format!("{verb} {tail}"));
            for p in Paraphrase::ALL {
                let text = s.render(p);
                prop_assert_eq!(s.property_span(p).extract(&text), Some(tail.as_str()));
            }
        }
    }
}
