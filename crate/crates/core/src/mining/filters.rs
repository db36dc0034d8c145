//! Sentence-level heuristics for candidate mining.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::tagger::{looks_plural, Number, Pos, Tagger, Tense};

/// Words that rarely occur in the generic and quantified bare plurals we look
/// for. Matched case-insensitively. Alternatives keep their surrounding
/// spaces exactly.
pub const EXCLUSION_PATTERN: &str = "is | may | can | should | would | must | have to | will | you |^i | were | was | many | we | they | ought | your |^[^ ]+ of | us | \\? | this | that | those | these | all in all |,|^the |^a |than ";

/// The alternatives of [`EXCLUSION_PATTERN`], in order.
pub fn exclusion_alternatives() -> Vec<&'static str> {
    EXCLUSION_PATTERN.split('|').collect()
}

static EXCLUSION_RE: LazyLock<Regex> = LazyLock::new(|| {
    let grouped = exclusion_alternatives()
        .iter()
        .map(|alt| format!("({alt})"))
        .collect::<Vec<_>>()
        .join("|");
    Regex::new(&format!("(?i){grouped}")).expect("exclusion pattern compiles")
});

/// Pass/fail of one filter with an optional explanation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl FilterOutcome {
    fn pass() -> Self {
        Self {
            passed: true,
            detail: None,
        }
    }

    fn fail(detail: impl Into<String>) -> Self {
        Self {
            passed: false,
            detail: Some(detail.into()),
        }
    }
}

/// Rejects sentences matching the exclusion pattern; the detail names the
/// matched alternative verbatim.
pub fn exclusion_filter(sentence: &str) -> FilterOutcome {
    let Some(caps) = EXCLUSION_RE.captures(sentence) else {
        return FilterOutcome::pass();
    };
    let alts = exclusion_alternatives();
    let idx = (1..caps.len())
        .find(|&i| caps.get(i).is_some())
        .expect("a matching alternative");
    FilterOutcome::fail(alts[idx - 1])
}

static BE_FORMS: LazyLock<HashSet<&str>> =
    LazyLock::new(|| ["are", "were", "being", "been", "be"].into_iter().collect());

static IRREGULAR_PARTICIPLES: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    [
        "written",
        "done",
        "made",
        "known",
        "given",
        "taken",
        "seen",
        "eaten",
        "found",
        "built",
        "born",
        "borne",
        "bought",
        "brought",
        "caught",
        "taught",
        "thought",
        "held",
        "kept",
        "left",
        "lost",
        "paid",
        "sold",
        "told",
        "sent",
        "spent",
        "shown",
        "grown",
        "thrown",
        "drawn",
        "driven",
        "spoken",
        "stolen",
        "chosen",
        "frozen",
        "broken",
        "forgotten",
        "hidden",
        "bitten",
        "beaten",
        "worn",
        "torn",
        "sworn",
        "led",
        "fed",
        "bred",
        "hit",
        "hurt",
        "cut",
        "put",
        "set",
        "shut",
        "spread",
        "bound",
        "ground",
        "wound",
        "hung",
        "struck",
        "stuck",
        "said",
        "heard",
        "understood",
        "forbidden",
        "fallen",
        "risen",
        "shaken",
        "ridden",
        "begun",
        "sung",
        "drunk",
        "swum",
        "won",
        "felt",
        "met",
        "read",
        "laid",
        "meant",
        "dealt",
        "sought",
        "fought",
        "bent",
        "lent",
        "burnt",
        "learnt",
        "blown",
        "flown",
        "sewn",
        "sown",
        "slain",
        "sunk",
        "spun",
        "stung",
        "swung",
        "clung",
        "got",
        "gotten",
    ]
    .into_iter()
    .collect()
});

/// -ed / -en words that are not participles.
static NOT_PARTICIPLES: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    [
        "red", "bed", "seed", "need", "speed", "breed", "greed", "weed", "feed", "hundred",
        "sacred", "naked", "wicked", "rugged", "ragged", "kindred", "shed", "sled", "shred",
        "children", "women", "men", "chicken", "kitchen", "garden", "golden", "wooden", "oxygen",
        "hydrogen", "nitrogen", "citizen", "citizens", "specimen", "often", "even", "open",
        "seven", "eleven", "ten", "then", "when", "token", "linen", "heaven", "siren", "pollen",
        "omen", "lichen", "kitten", "dozen", "listen", "happen", "queen", "screen", "green",
        "teen", "keen", "between", "alien", "barren", "sudden", "hidden", "raven", "oven", "haven",
        "woven",
    ]
    .into_iter()
    .collect()
});

static PASSIVE_ADVERBS: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    [
        "not",
        "also",
        "often",
        "always",
        "never",
        "usually",
        "generally",
        "typically",
        "still",
        "only",
        "sometimes",
        "rarely",
        "mostly",
        "largely",
        "widely",
        "commonly",
        "frequently",
    ]
    .into_iter()
    .collect()
});

/// Probable past participle: irregular list, or a regular `-ed` / `-en` form.
pub fn is_participle(word: &str) -> bool {
    let w = word.to_lowercase();
    let w = w.as_str();
    if NOT_PARTICIPLES.contains(w) && !IRREGULAR_PARTICIPLES.contains(w) {
        return false;
    }
    IRREGULAR_PARTICIPLES.contains(w) || (w.len() >= 4 && (w.ends_with("ed") || w.ends_with("en")))
}

fn is_adverb(word: &str) -> bool {
    PASSIVE_ADVERBS.contains(word) || (word.len() > 4 && word.ends_with("ly"))
}

/// Rejects sentences with a plural be-form followed by a past participle,
/// allowing one intervening adverb.
pub fn passive_filter(sentence: &str) -> FilterOutcome {
    let words: Vec<String> = sentence
        .split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                .to_lowercase()
        })
        .filter(|w| !w.is_empty())
        .collect();
    for (i, w) in words.iter().enumerate() {
        if !BE_FORMS.contains(w.as_str()) {
            continue;
        }
        for j in i + 1..(i + 3).min(words.len()) {
            let next = words[j].as_str();
            if is_participle(next) {
                return FilterOutcome::fail(format!("{w} {}", words[i + 1..=j].join(" ")));
            }
            if !is_adverb(next) {
                break;
            }
        }
    }
    FilterOutcome::pass()
}

/// Passes present-tense plural sentences with a bare plural subject.
pub fn bare_plural_filter<T: Tagger + ?Sized>(sentence: &str, tagger: &T) -> FilterOutcome {
    let tokens = match tagger.tag(sentence) {
        Ok(t) => t,
        Err(e) => return FilterOutcome::fail(format!("tagger error: {e}")),
    };
    let Some(verb) = tagger.main_verb(&tokens) else {
        return FilterOutcome::fail("no main verb");
    };
    let v = &tokens[verb];
    if v.tense != Some(Tense::Pres) || v.number != Some(Number::Plur) {
        return FilterOutcome::fail(format!("verb {:?} is not present plural", v.text));
    }
    let subject = &tokens[..verb];
    if let Some(first) = subject.first() {
        if first.pos == Pos::Det || first.pos == Pos::Pron {
            return FilterOutcome::fail(format!("subject starts with {:?}", first.text));
        }
    }
    let head = subject
        .iter()
        .rev()
        .find(|t| t.pos != Pos::Adv && t.pos != Pos::Punct);
    match head {
        Some(h) if looks_plural(&h.text) && h.pos == Pos::Noun => FilterOutcome::pass(),
        Some(h) => FilterOutcome::fail(format!("subject head {:?} is not a plural noun", h.text)),
        None => FilterOutcome::fail("no subject"),
    }
}
