use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Candidate quantifiers. `Gen` is the unpronounced generic operator and has
/// an empty surface form.
///
/// The derived ordering is the canonical order `[GEN, ALL, MOST, SOME]`, used
/// for iteration and tie-breaking everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantifier {
    Gen,
    All,
    Most,
    Some,
}

impl Quantifier {
    pub const CANONICAL: [Quantifier; 4] = [
        Quantifier::Gen,
        Quantifier::All,
        Quantifier::Most,
        Quantifier::Some,
    ];

    /// The explicit quantifiers, i.e. the candidate set with GEN excluded.
    pub const EXPLICIT: [Quantifier; 3] = [Quantifier::All, Quantifier::Most, Quantifier::Some];

    pub fn surface(self) -> &'static str {
        match self {
            Quantifier::Gen => "",
            Quantifier::All => "all",
            Quantifier::Most => "most",
            Quantifier::Some => "some",
        }
    }

    /// Lowercase storage label (`gen`, `all`, `most`, `some`).
    pub fn label(self) -> &'static str {
        match self {
            Quantifier::Gen => "gen",
            other => other.surface(),
        }
    }

    /// Position in canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Quantifier> {
        Self::CANONICAL.get(i).copied()
    }

    /// Sort and deduplicate a candidate list into canonical order, reporting
    /// whether the input had duplicates.
    pub fn canonicalize(candidates: &[Quantifier]) -> (Vec<Quantifier>, bool) {
        let mut seen = [false; 4];
        let mut dup = false;
        for q in candidates {
            dup |= std::mem::replace(&mut seen[q.index()], true);
        }
        let out = Self::CANONICAL
            .iter()
            .copied()
            .filter(|q| seen[q.index()])
            .collect();
        (out, dup)
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Gen => "GEN",
            Quantifier::All => "ALL",
            Quantifier::Most => "MOST",
            Quantifier::Some => "SOME",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown quantifier label {0:?}")]
pub struct UnknownQuantifier(pub String);

impl FromStr for Quantifier {
    type Err = UnknownQuantifier;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gen" | "generic" | "" => Ok(Quantifier::Gen),
            "all" => Ok(Quantifier::All),
            "most" => Ok(Quantifier::Most),
            "some" => Ok(Quantifier::Some),
            _ => Err(UnknownQuantifier(s.to_string())),
        }
    }
}

impl Serialize for Quantifier {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Quantifier {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s.is_empty() {
            return Err(serde::de::Error::custom("empty quantifier label"));
        }
        s.parse().map_err(serde::de::Error::custom)
    }
}
