//! A small rule-based part-of-speech tagger.
//!
//! Good enough to find the main verb of short bare plural sentences and to
//! tell whether the last word of a context is a noun. Anything fancier plugs
//! in through [`Tagger`].

use std::collections::HashSet;
use std::sync::LazyLock;

use crate::corpus::PropertySpan;
use crate::text::char_len;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pos {
    Noun,
    Verb,
    Aux,
    Adj,
    Adv,
    Det,
    Pron,
    Adp,
    Conj,
    Num,
    Punct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tense {
    Pres,
    Past,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Number {
    Sing,
    Plur,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub text: String,
    /// Character offsets.
    pub start: usize,
    pub end: usize,
    pub pos: Pos,
    pub tense: Option<Tense>,
    pub number: Option<Number>,
}

impl TaggedToken {
    pub fn is_verbal(&self) -> bool {
        matches!(self.pos, Pos::Verb | Pos::Aux)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("tagger failure: {0}")]
pub struct TaggerError(pub String);

pub trait Tagger: Send + Sync {
    fn tag(&self, text: &str) -> Result<Vec<TaggedToken>, TaggerError>;

    /// Index of the main verb, if any.
    fn main_verb(&self, tokens: &[TaggedToken]) -> Option<usize> {
        default_main_verb(tokens)
    }
}

fn set(words: &'static [&'static str]) -> HashSet<&'static str> {
    words.iter().copied().collect()
}

static DETERMINERS: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    set(&[
        "the", "a", "an", "this", "that", "these", "those", "my", "your", "his", "her", "its",
        "our", "their", "every", "each", "no", "any", "such", "all", "most", "some", "many", "few",
        "several", "both", "another",
    ])
});

static PRONOUNS: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    set(&[
        "i",
        "you",
        "he",
        "she",
        "it",
        "we",
        "they",
        "me",
        "him",
        "us",
        "them",
        "something",
        "someone",
        "everyone",
        "everything",
        "nothing",
        "anyone",
        "anything",
        "who",
        "what",
        "which",
        "there",
    ])
});

static ADPOSITIONS: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    set(&[
        "of", "in", "on", "at", "by", "for", "with", "from", "to", "into", "over", "under",
        "about", "through", "during", "without", "within", "after", "before", "between", "against",
        "like", "as", "per", "than", "toward", "towards", "upon", "along", "across", "around",
        "behind", "beyond", "near", "off", "onto", "among", "via",
    ])
});

static CONJUNCTIONS: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    set(&[
        "and", "or", "but", "nor", "so", "yet", "because", "while", "if", "when", "although",
        "though", "whereas", "unless", "since",
    ])
});

static ADVERBS: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    set(&[
        "not",
        "n't",
        "only",
        "also",
        "often",
        "always",
        "never",
        "sometimes",
        "just",
        "even",
        "still",
        "very",
        "too",
        "quite",
        "rather",
        "almost",
        "already",
        "again",
        "here",
        "then",
        "now",
        "soon",
        "seldom",
        "much",
        "well",
        "ever",
        "once",
        "twice",
        "thus",
        "however",
    ])
});

static ADJECTIVES: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    set(&[
        "good",
        "bad",
        "big",
        "small",
        "new",
        "old",
        "great",
        "little",
        "long",
        "short",
        "high",
        "low",
        "hot",
        "cold",
        "warm",
        "cool",
        "red",
        "blue",
        "green",
        "black",
        "white",
        "brown",
        "young",
        "large",
        "full",
        "free",
        "true",
        "real",
        "smart",
        "lovely",
        "ugly",
        "rich",
        "poor",
        "safe",
        "wild",
        "strong",
        "weak",
        "hard",
        "soft",
        "fast",
        "slow",
        "common",
        "rare",
        "toxic",
        "corrupt",
        "violent",
        "aggressive",
        "dangerous",
        "healthy",
        "flat",
    ])
});

static MODALS: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    set(&[
        "can", "could", "may", "might", "must", "shall", "should", "will", "would", "ought",
    ])
});

static IRREGULAR_PAST: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    set(&[
        "ate",
        "began",
        "bit",
        "broke",
        "brought",
        "built",
        "bought",
        "came",
        "caught",
        "chose",
        "drank",
        "drove",
        "fell",
        "felt",
        "fought",
        "found",
        "flew",
        "forgot",
        "froze",
        "gave",
        "went",
        "grew",
        "heard",
        "hid",
        "held",
        "kept",
        "knew",
        "laid",
        "led",
        "left",
        "lost",
        "made",
        "meant",
        "met",
        "paid",
        "ran",
        "rang",
        "rose",
        "said",
        "saw",
        "sold",
        "sent",
        "shook",
        "sang",
        "sank",
        "sat",
        "slept",
        "spoke",
        "spent",
        "stood",
        "stole",
        "struck",
        "swam",
        "took",
        "taught",
        "tore",
        "told",
        "thought",
        "threw",
        "understood",
        "woke",
        "wore",
        "won",
        "wrote",
    ])
});

static IRREGULAR_PLURALS: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    set(&[
        "people",
        "children",
        "men",
        "women",
        "mice",
        "geese",
        "feet",
        "teeth",
        "cattle",
        "police",
        "sheep",
        "deer",
        "bacteria",
        "fungi",
        "alumni",
        "data",
        "phenomena",
        "criteria",
        "mitochondria",
        "oxen",
        "lice",
        "dice",
        "larvae",
        "alveoli",
        "nuclei",
        "cacti",
        "stimuli",
    ])
});

/// Words ending in `s` that are usually singular.
static S_SINGULARS: LazyLock<HashSet<&str>> = LazyLock::new(|| {
    set(&[
        "this",
        "is",
        "was",
        "his",
        "has",
        "does",
        "us",
        "its",
        "bus",
        "gas",
        "news",
        "lens",
        "species",
        "series",
        "virus",
        "status",
        "class",
        "glass",
        "grass",
        "mass",
        "process",
        "bias",
        "chaos",
        "canvas",
        "atlas",
        "iris",
        "analysis",
        "basis",
        "crisis",
        "less",
        "plus",
        "thus",
        "always",
        "perhaps",
        "sometimes",
        "across",
        "towards",
        "afterwards",
    ])
});

/// (form, tense, number) for be/have/do.
fn auxiliary(word: &str) -> Option<(Option<Tense>, Option<Number>)> {
    use Number::*;
    use Tense::*;
    Some(match word {
        "are" | "aren't" | "have" | "haven't" | "do" | "don't" => (Some(Pres), Some(Plur)),
        "is" | "isn't" | "has" | "hasn't" | "does" | "doesn't" | "am" => (Some(Pres), Some(Sing)),
        "were" | "weren't" => (Some(Past), Some(Plur)),
        "was" | "wasn't" => (Some(Past), Some(Sing)),
        "had" | "hadn't" | "did" | "didn't" => (Some(Past), None),
        "be" | "been" | "being" => (None, None),
        _ => return None,
    })
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '’' || c == '-'
}

/// Word and punctuation tokens with character offsets.
pub fn word_tokens(text: &str) -> Vec<(usize, usize, String)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if is_word_char(chars[i]) {
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
        } else {
            i += 1;
        }
        out.push((start, i, chars[start..i].iter().collect()));
    }
    out
}

/// Plural by irregular list or an `-s` ending that is not a known singular.
pub fn looks_plural(word: &str) -> bool {
    let w = word.to_lowercase();
    if IRREGULAR_PLURALS.contains(w.as_str()) {
        return true;
    }
    w.len() > 2
        && w.ends_with('s')
        && !w.ends_with("ss")
        && !w.ends_with("us")
        && !w.ends_with("is")
        && !S_SINGULARS.contains(w.as_str())
}

fn lexical(word: &str) -> (Pos, Option<Tense>, Option<Number>) {
    let w = word.to_lowercase();
    let w = w.replace('’', "'");
    let w = w.as_str();
    if w.chars().all(|c| !c.is_alphanumeric()) {
        return (Pos::Punct, None, None);
    }
    if w.chars()
        .all(|c| c.is_ascii_digit() || c == '.' || c == ',')
    {
        return (Pos::Num, None, None);
    }
    if let Some((t, n)) = auxiliary(w) {
        return (Pos::Aux, t, n);
    }
    if MODALS.contains(w) {
        return (Pos::Aux, None, None);
    }
    if DETERMINERS.contains(w) {
        return (Pos::Det, None, None);
    }
    if PRONOUNS.contains(w) {
        let n = match w {
            "we" | "they" | "us" | "them" => Some(Number::Plur),
            _ => Some(Number::Sing),
        };
        return (Pos::Pron, None, n);
    }
    if ADPOSITIONS.contains(w) {
        return (Pos::Adp, None, None);
    }
    if CONJUNCTIONS.contains(w) {
        return (Pos::Conj, None, None);
    }
    if ADVERBS.contains(w) || (w.len() > 4 && w.ends_with("ly") && !w.ends_with("ily")) {
        return (Pos::Adv, None, None);
    }
    if IRREGULAR_PAST.contains(w) {
        return (Pos::Verb, Some(Tense::Past), None);
    }
    if ADJECTIVES.contains(w)
        || ["ous", "ful", "ive", "able", "ible", "ical", "less", "ary"]
            .iter()
            .any(|s| w.len() > s.len() + 2 && w.ends_with(s))
    {
        return (Pos::Adj, None, None);
    }
    if w.len() > 4 && w.ends_with("ing") {
        return (Pos::Verb, None, None);
    }
    let n = if looks_plural(w) {
        Number::Plur
    } else {
        Number::Sing
    };
    (Pos::Noun, None, Some(n))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RuleTagger;

impl Tagger for RuleTagger {
    fn tag(&self, text: &str) -> Result<Vec<TaggedToken>, TaggerError> {
        let mut tokens: Vec<TaggedToken> = word_tokens(text)
            .into_iter()
            .map(|(start, end, text)| {
                let (pos, tense, number) = lexical(&text);
                TaggedToken {
                    text,
                    start,
                    end,
                    pos,
                    tense,
                    number,
                }
            })
            .collect();
        if let Some(i) = positional_verb(&tokens, lexical_verb(&tokens)) {
            let t = &mut tokens[i];
            let past = t.text.to_lowercase().ends_with("ed");
            let plural = !t.text.to_lowercase().ends_with('s');
            t.pos = Pos::Verb;
            t.tense = Some(if past { Tense::Past } else { Tense::Pres });
            t.number = match (past, plural) {
                (true, _) => None,
                (false, true) => Some(Number::Plur),
                (false, false) => Some(Number::Sing),
            };
        }
        Ok(tokens)
    }
}

/// First finite verb or auxiliary after the sentence-initial token.
fn lexical_verb(tokens: &[TaggedToken]) -> Option<usize> {
    tokens
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, t)| t.is_verbal() && (t.tense.is_some() || t.pos == Pos::Aux))
        .map(|(i, _)| i)
}

/// A verb recognised by position: an untagged word right after the subject
/// head (adverbs may intervene).
fn positional_verb(tokens: &[TaggedToken], lexical: Option<usize>) -> Option<usize> {
    let limit = lexical.unwrap_or(tokens.len());
    let next_content = |mut j: usize| {
        while j < limit && tokens[j].pos == Pos::Adv {
            j += 1;
        }
        (j < limit).then_some(j)
    };
    // Plural subject head followed by a bare (non -s) form.
    for i in 0..limit {
        let head = &tokens[i];
        let plural_head =
            matches!(head.pos, Pos::Noun | Pos::Pron) && head.number == Some(Number::Plur);
        if !plural_head {
            continue;
        }
        if let Some(j) = next_content(i + 1) {
            let cand = &tokens[j];
            let w = cand.text.to_lowercase();
            if cand.pos == Pos::Noun
                && (!w.ends_with('s') || w.ends_with("ss") || w.ends_with("ed"))
            {
                return Some(j);
            }
        }
    }
    if lexical.is_some() {
        return None;
    }
    // Singular subject head followed by an -s form.
    for i in 0..tokens.len() {
        let head = &tokens[i];
        if head.pos != Pos::Noun || head.number != Some(Number::Sing) {
            continue;
        }
        if let Some(j) = next_content(i + 1) {
            if tokens[j].pos == Pos::Noun && tokens[j].number == Some(Number::Plur) {
                return Some(j);
            }
        }
    }
    None
}

fn default_main_verb(tokens: &[TaggedToken]) -> Option<usize> {
    tokens
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, t)| t.is_verbal() && (t.tense.is_some() || t.pos == Pos::Aux))
        .map(|(i, _)| i)
}

/// Span from the token after the main verb to the end of `sentence`
/// (trailing whitespace excluded).
pub fn property_span_after_main_verb<T: Tagger + ?Sized>(
    sentence: &str,
    tagger: &T,
) -> Option<PropertySpan> {
    let tokens = tagger.tag(sentence).ok()?;
    let verb = tagger.main_verb(&tokens)?;
    let next = tokens[verb + 1..].iter().find(|t| t.pos != Pos::Punct)?;
    let end = char_len(sentence.trim_end());
    (next.start < end).then(|| PropertySpan::new(next.start, end))
}

/// Whether the last alphabetic token of `text` is a noun.
pub fn last_word_is_noun<T: Tagger + ?Sized>(text: &str, tagger: &T) -> Result<bool, TaggerError> {
    let tokens = tagger.tag(text)?;
    Ok(tokens
        .iter()
        .rev()
        .find(|t| t.text.chars().any(char::is_alphabetic))
        .is_some_and(|t| t.pos == Pos::Noun))
}
