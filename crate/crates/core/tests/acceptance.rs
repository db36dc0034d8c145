//! Acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always shown.
//! Exits non-zero when any gating criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use genquant_core::backend::mock_tokenize;
use genquant_core::experiments::{
    run_confusion, run_context_sweep, run_h_vs_hp, run_implicit_quantification, run_stereotypes,
    CandidatesMode, ContextSource, ExperimentConfig, SweepConfig,
};
use genquant_core::mining::{
    exclusion_filter, mine_document, Document, GenericityScorer, KeywordScorer, MiningConfig,
    EXCLUSION_PATTERN,
};
use genquant_core::stereotype::{invented_demonyms, invented_seeds, read_seeds, SeedCounts};
use genquant_core::{
    build_variations, cached, p_acceptable, truncate_context, BackendError, ContextSpec,
    CorpusSample, FileStore, HttpBackend, HttpConfig, MockBackend, MockTable, Paraphrase, Polarity,
    PropertySpan, Quantifier, Realness, ScoredSequence, ScoringBackend, ScoringConfig, Source,
    StereotypeSeed, TokenSpan,
};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map};

const ORACLE_MODELS: usize = 120;
const ORACLE_SENTENCES_PER_MODEL: usize = 5;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(10);
const INVARIANCE_CASES: usize = 1000;
const TIE_EPSILON: f64 = 1e-9;
const SWEEP_MAX_TOKENS: usize = 64;
const SWEEP_POINTS: usize = 17;
const CURVE_TOLERANCE: f64 = 0.0;
const HP_MIN_ACCURACY: f64 = 1.0;
const H_MAX_ACCURACY: f64 = 0.5;

struct Line {
    id: &'static str,
    name: &'static str,
    gating: bool,
    outcome: Outcome,
}

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

// ---------------------------------------------------------------- fixtures

const SUBJECTS: [&str; 8] = [
    "tigers", "dogs", "owls", "bees", "sharks", "cats", "ants", "frogs",
];
const VERBS: [&str; 4] = ["have", "eat", "like", "make"];
const OBJECTS: [&str; 10] = [
    "stripes", "meat", "honey", "noise", "water", "fish", "leaves", "nests", "sugar", "mud",
];
const FILLER: [&str; 12] = [
    "lorem", "ipsum", "dolor", "amet", "velit", "porro", "quia", "nemo", "enim", "magnam",
    "aliquam", "quaerat",
];

fn sample(
    id: &str,
    gold: Quantifier,
    subject: &str,
    verb: &str,
    objects: &[&str],
    context: &str,
    document: &str,
) -> CorpusSample {
    let base = format!("{subject} {verb} {}.", objects.join(" "));
    let start = subject.chars().count() + verb.chars().count() + 2;
    let end = start + objects.join(" ").chars().count();
    let sentence = match gold {
        Quantifier::Gen => upper(&base),
        q => format!("{} {base}", upper(q.surface())),
    };
    let mut metadata = Map::new();
    metadata.insert("document_id".into(), json!(document));
    CorpusSample {
        id: id.into(),
        source: Source::Other,
        context: context.into(),
        sentence,
        original_quantifier: gold,
        base_sentence: base,
        property_span: PropertySpan::new(start, end),
        metadata,
    }
}

fn upper(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs[rng.random_range(0..xs.len())]
}

fn random_gold(rng: &mut ChaCha8Rng) -> Quantifier {
    Quantifier::CANONICAL[rng.random_range(0..4)]
}

fn random_context(rng: &mut ChaCha8Rng, vocab: &[&str], max_words: usize) -> String {
    let n = rng.random_range(0..=max_words);
    let mut words = Vec::with_capacity(n);
    for i in 0..n {
        let w = pick(rng, vocab);
        words.push(if i % 9 == 8 {
            format!("{w}.")
        } else {
            w.to_string()
        });
    }
    words.join(" ")
}

/// Per-model slice of the sentence vocabulary, small enough that table
/// entries actually hit the sentences drawn from it.
struct Vocab {
    subjects: Vec<&'static str>,
    verbs: Vec<&'static str>,
    objects: Vec<&'static str>,
}

impl Vocab {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let mut take = |xs: &[&'static str], n: usize| -> Vec<&'static str> {
            (0..n).map(|_| xs[rng.random_range(0..xs.len())]).collect()
        };
        Self {
            subjects: take(&SUBJECTS, 2),
            verbs: take(&VERBS, 1),
            objects: take(&OBJECTS, 3),
        }
    }
}

/// Random table over `vocab`; prefixes may include filler words when
/// `context_words` is set.
fn random_table(rng: &mut ChaCha8Rng, id: String, vocab: &Vocab, context_words: bool) -> MockTable {
    let mut table = MockTable::uniform(rng.random_range(50..5000));
    table.id = id;
    table.first_token_scored = rng.random_bool(0.3);
    let coarse = rng.random_bool(0.3);
    let heads = ["", "all", "most", "some"];
    for _ in 0..rng.random_range(10..80) {
        let mut prefix: Vec<&str> = Vec::new();
        match rng.random_range(0..5) {
            0 => {}
            1 => prefix.push(pick(rng, &heads)),
            2 | 3 => {
                prefix.push(pick(rng, &heads));
                prefix.push(pick(rng, &vocab.subjects));
                prefix.push(pick(rng, &vocab.verbs));
                for _ in 0..[0, 0, 1, 2][rng.random_range(0..4)] {
                    prefix.push(pick(rng, &vocab.objects));
                }
            }
            _ => {
                if context_words {
                    prefix.push(pick(rng, &FILLER));
                } else {
                    prefix.push(pick(rng, &vocab.verbs));
                }
            }
        }
        prefix.retain(|w| !w.is_empty());
        let token = match rng.random_range(0..6) {
            0 => pick(rng, &vocab.subjects),
            1 => pick(rng, &vocab.verbs),
            2 => ".",
            _ => pick(rng, &vocab.objects),
        };
        let p = if coarse {
            [0.1, 0.2, 0.5][rng.random_range(0..3)]
        } else {
            rng.random_range(0.001..1.0)
        };
        table = table.with_entry(&prefix.join(" "), token, p);
    }
    // Quantifier-specific entries for the first property token.
    for head in heads {
        for subj in &vocab.subjects {
            for verb in &vocab.verbs {
                for obj in &vocab.objects {
                    if rng.random_bool(0.6) {
                        let p = if coarse {
                            [0.1, 0.2, 0.5][rng.random_range(0..3)]
                        } else {
                            rng.random_range(0.001..1.0)
                        };
                        let prefix = format!("{head} {subj} {verb}");
                        table = table.with_entry(prefix.trim(), obj, p);
                    }
                }
            }
        }
    }
    table
}

fn random_sample(
    rng: &mut ChaCha8Rng,
    vocab: &Vocab,
    id: String,
    context: String,
    document: String,
) -> CorpusSample {
    let n_obj = rng.random_range(1..=3);
    let objects: Vec<&str> = (0..n_obj).map(|_| pick(rng, &vocab.objects)).collect();
    sample(
        &id,
        random_gold(rng),
        pick(rng, &vocab.subjects),
        pick(rng, &vocab.verbs),
        &objects,
        &context,
        &document,
    )
}

fn corpus(rng: &mut ChaCha8Rng, n: usize, vocab: &Vocab) -> Vec<CorpusSample> {
    (0..n)
        .map(|i| {
            let ctx = random_context(rng, &FILLER, 90);
            random_sample(rng, vocab, format!("s{i}"), ctx, format!("doc{}", i / 2))
        })
        .collect()
}

// ------------------------------------------------------------------ oracle

/// Independent p-acceptability: build each variation string by hand, score
/// it, average the logprobs of tokens touching the property text, argmin.
fn oracle(
    backend: &MockBackend,
    s: &CorpusSample,
    context: &str,
) -> Result<(Quantifier, bool, Vec<f64>), BackendError> {
    let mut hps = Vec::new();
    for q in Quantifier::CANONICAL {
        let mut text = String::new();
        if !context.is_empty() {
            text.push_str(context);
            text.push(' ');
        }
        if q != Quantifier::Gen {
            text.push_str(q.surface());
            text.push(' ');
        }
        text.push_str(&s.base_sentence);
        if context.is_empty() {
            text = upper(&text);
        }
        let offset = text.chars().count() - s.base_sentence.chars().count();
        let (ps, pe) = (offset + s.property_span.start, offset + s.property_span.end);
        let chars: Vec<char> = text.chars().collect();
        let seq = backend.score_text(&text)?;
        let mut sum = 0.0;
        let mut n = 0usize;
        for t in &seq.tokens {
            let touches =
                (t.char_start.max(ps)..t.char_end.min(pe)).any(|i| !chars[i].is_whitespace());
            if let (true, Some(lp)) = (touches, t.logprob) {
                sum += -lp;
                n += 1;
            }
        }
        assert!(n > 0, "oracle found no property tokens in {text:?}");
        hps.push(sum / n as f64);
    }
    let min = hps.iter().cloned().fold(f64::INFINITY, f64::min);
    let tied: Vec<usize> = (0..4).filter(|&i| hps[i] - min < TIE_EPSILON).collect();
    Ok((Quantifier::CANONICAL[tied[0]], tied.len() > 1, hps))
}

fn c1_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = ScoringConfig::default();
    let (mut cases, mut mismatches, mut ties) = (0, 0, 0);
    for m in 0..ORACLE_MODELS {
        let vocab = Vocab::draw(&mut rng);
        let backend =
            MockBackend::new(random_table(&mut rng, format!("fuzz-{m}"), &vocab, true)).unwrap();
        for j in 0..ORACLE_SENTENCES_PER_MODEL {
            let ctx = if rng.random_bool(0.5) {
                random_context(&mut rng, &FILLER, 20)
            } else {
                String::new()
            };
            let s = random_sample(
                &mut rng,
                &vocab,
                format!("m{m}-{j}"),
                ctx.clone(),
                "d".into(),
            );
            let got = p_acceptable(
                &backend,
                &s,
                &Quantifier::CANONICAL,
                ContextSpec::Full,
                &cfg,
            );
            let want = oracle(&backend, &s, ctx.trim());
            cases += 1;
            match (got, want) {
                (Ok(r), Ok((w, tie, hps))) => {
                    let same_h = Quantifier::CANONICAL
                        .iter()
                        .zip(&hps)
                        .all(|(q, h)| (r.per_quantifier[q].h_p - h).abs() < 1e-12);
                    ties += tie as usize;
                    if r.winner != w || r.tie != tie || !same_h {
                        mismatches += 1;
                    }
                }
                _ => mismatches += 1,
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        mismatches == 0 && elapsed < ORACLE_TIME_LIMIT && ORACLE_MODELS >= 100,
        format!(
            "{ORACLE_MODELS} mocks, {cases} sentences ({ties} ties), {mismatches} mismatches, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

// -------------------------------------------------------------- invariance

/// Multiplies every logprob by a positive factor.
struct Scaled<'a> {
    inner: &'a MockBackend,
    factor: f64,
    id: String,
}

impl ScoringBackend for Scaled<'_> {
    fn backend_id(&self) -> &str {
        &self.id
    }

    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        let mut seq = self.inner.score_text(text)?;
        for t in &mut seq.tokens {
            t.logprob = t.logprob.map(|lp| lp * self.factor);
        }
        Ok(seq)
    }

    fn tokenize(&self, text: &str) -> Result<Vec<TokenSpan>, BackendError> {
        self.inner.tokenize(text)
    }
}

fn c2_invariances() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = ScoringConfig::default();
    let mut violations = 0;
    for i in 0..INVARIANCE_CASES {
        let vocab = Vocab::draw(&mut rng);
        let backend =
            MockBackend::new(random_table(&mut rng, format!("inv-{i}"), &vocab, false)).unwrap();
        let s = random_sample(&mut rng, &vocab, format!("c{i}"), String::new(), "d".into());
        let base = p_acceptable(
            &backend,
            &s,
            &Quantifier::CANONICAL,
            ContextSpec::None,
            &cfg,
        )
        .unwrap();
        let scale = rng.random_range(0.05..20.0);
        let log_base: f64 = [2.0, 10.0, rng.random_range(1.1..100.0)][rng.random_range(0..3)];
        for factor in [scale, 1.0 / log_base.ln()] {
            let wrapped = Scaled {
                inner: &backend,
                factor,
                id: format!("scaled-{factor}"),
            };
            let r = p_acceptable(
                &wrapped,
                &s,
                &Quantifier::CANONICAL,
                ContextSpec::None,
                &cfg,
            )
            .unwrap();
            if r.winner != base.winner || r.tie != base.tie {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0,
        format!("{INVARIANCE_CASES} cases x (scaling, log base), {violations} violations"),
    )
}

// -------------------------------------------------------------- variations

fn c3_tiger_variations() -> Outcome {
    let vs = build_variations(
        "tigers have stripes",
        PropertySpan::new(12, 19),
        "",
        &Quantifier::CANONICAL,
        &Default::default(),
    )
    .unwrap();
    let want = [
        "Tigers have stripes",
        "All tigers have stripes",
        "Most tigers have stripes",
        "Some tigers have stripes",
    ];
    let texts: Vec<&str> = vs.iter().map(|v| v.full_text.as_str()).collect();
    let spans_ok = vs.iter().all(|v| v.property_text() == "stripes");
    verdict(
        texts == want && spans_ok,
        format!("{texts:?}, span tracks \"stripes\": {spans_ok}"),
    )
}

// ------------------------------------------------------------------- sweep

fn c4_sweep_mechanics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let uniform = MockBackend::uniform(100);
    let mut suffix_failures = 0;
    let mut checks = 0;
    for _ in 0..300 {
        let mut vocab: Vec<&str> = FILLER.to_vec();
        vocab.extend(["x,", "\"quoted\"", "?", "naïve", "  spaced"]);
        let text = random_context(&mut rng, &vocab, 40);
        let n = mock_tokenize(&text).len();
        let mut prev = String::new();
        for k in 0..=n + 2 {
            let t = truncate_context(&uniform, &text, k).unwrap();
            checks += 1;
            let ok = text.ends_with(&t)
                && t.ends_with(&prev)
                && (k != 0 || t.is_empty())
                && (k < n || t == text);
            if !ok {
                suffix_failures += 1;
            }
            prev = t;
        }
    }

    let vocab = Vocab::draw(&mut rng);
    let samples = corpus(&mut rng, 40, &vocab);
    let backend = MockBackend::new(random_table(&mut rng, "sweep".into(), &vocab, true)).unwrap();
    let cfg = ExperimentConfig::default();
    let sweep = run_context_sweep(
        &backend,
        &samples,
        &SweepConfig {
            max_tokens: SWEEP_MAX_TOKENS,
            ..Default::default()
        },
        &cfg,
    )
    .unwrap();
    let confusion = run_confusion(&backend, &samples, false, &cfg);
    let by_id: BTreeMap<&str, _> = confusion
        .scored
        .iter()
        .map(|s| (s.sample_id.as_str(), &s.result))
        .collect();
    let k0_equal = sweep.records.len() == by_id.len()
        && sweep
            .records
            .iter()
            .all(|r| by_id.get(r.sample_id.as_str()) == Some(&&r.results[0]));
    let points_ok = sweep.lengths.len() == SWEEP_POINTS
        && sweep
            .records
            .iter()
            .all(|r| r.results.len() == SWEEP_POINTS)
        && sweep
            .curves
            .iter()
            .all(|c| c.accuracy.len() == SWEEP_POINTS);
    verdict(
        suffix_failures == 0 && k0_equal && points_ok,
        format!(
            "suffix {}/{checks} ok, k=0 equals no-context confusion: {k0_equal}, {} points",
            checks - suffix_failures,
            sweep.lengths.len()
        ),
    )
}

fn c5_random_context_control() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let vocab = Vocab::draw(&mut rng);
    let samples = corpus(&mut rng, 48, &vocab);
    // Entries only mention sentence words, contexts only filler words.
    let backend = MockBackend::new(random_table(&mut rng, "blind".into(), &vocab, false)).unwrap();
    let cfg = ExperimentConfig::default();
    let run = |source| {
        run_context_sweep(
            &backend,
            &samples,
            &SweepConfig {
                max_tokens: SWEEP_MAX_TOKENS,
                mode: CandidatesMode::WithGen,
                source,
            },
            &cfg,
        )
        .unwrap()
    };
    let truth = run(ContextSource::True);
    let random = run(ContextSource::Random { seed: 7 });
    let mut max_gap: f64 = 0.0;
    let mut max_slope: f64 = 0.0;
    for (a, b) in truth.curves.iter().zip(&random.curves) {
        for (x, y) in a.accuracy.iter().zip(&b.accuracy) {
            max_gap = max_gap.max((x - y).abs());
        }
        for x in &a.accuracy {
            max_slope = max_slope.max((x - a.accuracy[0]).abs());
        }
    }
    let complete = truth.errors.is_empty() && random.errors.is_empty();
    verdict(
        complete && max_gap <= CURVE_TOLERANCE && max_slope <= CURVE_TOLERANCE,
        format!(
            "max |true - random| = {max_gap}, max drift from k=0 = {max_slope}, {} curves",
            truth.curves.len()
        ),
    )
}

// -------------------------------------------------------------- stereotypes

fn seed(
    sg: &str,
    pl: &str,
    predicate: &str,
    polarity: Polarity,
    realness: Realness,
) -> StereotypeSeed {
    StereotypeSeed {
        group_singular: sg.into(),
        group_plural: pl.into(),
        predicate: predicate.into(),
        polarity,
        realness,
    }
}

fn c6a_templates() -> Outcome {
    use Polarity::*;
    use Realness::*;
    let rows = [
        (
            seed("liberal", "liberals", "are corrupt", Negative, Real),
            [
                "liberals are corrupt",
                "liberal people are corrupt",
                "people who are liberal are corrupt",
            ],
        ),
        (
            seed("slubrack", "slubracks", "smell bad", Negative, Invented),
            [
                "slubracks smell bad",
                "slubrack people smell bad",
                "people who are slubrack smell bad",
            ],
        ),
        (
            seed("craguil", "craguils", "are murderers", Negative, Invented),
            [
                "craguils are murderers",
                "craguil people are murderers",
                "people who are craguil are murderers",
            ],
        ),
        (
            seed(
                "spanish",
                "spaniards",
                "love gazpacho in the summer",
                Positive,
                Real,
            ),
            [
                "spaniards love gazpacho in the summer",
                "spanish people love gazpacho in the summer",
                "people who are spanish love gazpacho in the summer",
            ],
        ),
        (
            seed(
                "german",
                "germans",
                "celebrate with lederhosen and dirndls",
                Positive,
                Real,
            ),
            [
                "germans celebrate with lederhosen and dirndls",
                "german people celebrate with lederhosen and dirndls",
                "people who are german celebrate with lederhosen and dirndls",
            ],
        ),
        (
            seed("flirel", "flirels", "are smart", Positive, Invented),
            [
                "flirels are smart",
                "flirel people are smart",
                "people who are flirel are smart",
            ],
        ),
        (
            seed(
                "corriard",
                "corriards",
                "are warm and hospitable",
                Positive,
                Invented,
            ),
            [
                "corriards are warm and hospitable",
                "corriard people are warm and hospitable",
                "people who are corriard are warm and hospitable",
            ],
        ),
    ];
    let mut bad = Vec::new();
    for (s, want) in &rows {
        for (p, w) in Paraphrase::ALL.iter().zip(want) {
            if s.render(*p) != *w {
                bad.push(s.render(*p));
            }
        }
    }
    let bundled = SeedCounts::of(&invented_seeds());
    let names: Vec<String> = invented_demonyms().into_iter().map(|(_, pl)| pl).collect();
    let has_examples = ["slubracks", "craguils", "flirels", "corriards"]
        .iter()
        .all(|n| names.iter().any(|x| x == n));
    let ok = bad.is_empty()
        && bundled.invented_negative == 120
        && bundled.invented_positive == 120
        && has_examples;
    verdict(
        ok,
        format!(
            "{} rows x 3 templates byte-exact ({} mismatches), invented {}/{}",
            rows.len(),
            bad.len(),
            bundled.invented_negative,
            bundled.invented_positive
        ),
    )
}

fn c6b_seed_counts() -> Outcome {
    let mut seeds = invented_seeds();
    let mut note = "bundled invented seeds only".to_string();
    if let Some(path) = std::env::var_os("GENQUANT_REAL_SEEDS") {
        match read_seeds(Path::new(&path)) {
            Ok((real, errors)) if errors.is_empty() => {
                note = format!("plus {} real seeds from GENQUANT_REAL_SEEDS", real.len());
                seeds.extend(real);
            }
            Ok((_, errors)) => {
                return Outcome::Fail(format!("{} invalid real seed lines", errors.len()))
            }
            Err(e) => return Outcome::Fail(e.to_string()),
        }
    }
    let c = SeedCounts::of(&seeds);
    verdict(
        c == SeedCounts::DESIGN && c.total() == 504,
        format!(
            "real neg/pos {}/{}, invented neg/pos {}/{}, total {} ({note})",
            c.real_negative,
            c.real_positive,
            c.invented_negative,
            c.invented_positive,
            c.total()
        ),
    )
}

// ------------------------------------------------------------------ mining

const EXCLUSION_GOLDEN: [(&str, &str); 29] = [
    ("is ", "Snow is white."),
    (" may ", "Bears may sleep."),
    (" can ", "Birds can fly."),
    (" should ", "Dogs should bark."),
    (" would ", "Cats would purr."),
    (" must ", "Fish must swim."),
    (" have to ", "Cows have to graze."),
    (" will ", "Seeds will grow."),
    (" you ", "Lions eat you quickly."),
    ("^i ", "I like tigers."),
    (" were ", "Dinosaurs were huge."),
    (" was ", "Rome was grand."),
    (" many ", "Foxes eat many mice."),
    (" we ", "Ducks like what we bring."),
    (" they ", "Ducks quack when they swim."),
    (" ought ", "Pilots ought to rest."),
    (" your ", "Owls watch your garden."),
    ("^[^ ]+ of ", "Flocks of birds migrate."),
    (" us ", "Wolves follow us everywhere."),
    (" \\? ", "Frogs jump ? sometimes."),
    (" this ", "Frogs like this pond."),
    (" that ", "Frogs know that ponds dry."),
    (" those ", "Frogs like those ponds."),
    (" these ", "Frogs like these ponds."),
    (" all in all ", "Frogs are fine all in all today."),
    (",", "Frogs jump, mostly."),
    ("^the ", "The frogs jump."),
    ("^a ", "A frog jumps."),
    ("than ", "Frogs jump higher than toads."),
];

fn mined(text: &str, scorer: Option<&dyn GenericityScorer>, threshold: f64) -> Vec<String> {
    let doc = Document {
        id: "d".into(),
        text: text.into(),
    };
    let cfg = MiningConfig {
        threshold,
        ..Default::default()
    };
    mine_document(&doc, scorer, &cfg)
        .unwrap()
        .into_iter()
        .map(|c| c.sentence)
        .collect()
}

fn c7_mining_filters() -> Outcome {
    let alts: Vec<&str> = EXCLUSION_PATTERN.split('|').collect();
    let covered = alts.len() == EXCLUSION_GOLDEN.len()
        && alts.iter().zip(&EXCLUSION_GOLDEN).all(|(a, (g, _))| a == g);
    let golden_bad: Vec<&str> = EXCLUSION_GOLDEN
        .iter()
        .filter(|(alt, s)| exclusion_filter(s).detail.as_deref() != Some(*alt))
        .map(|(_, s)| *s)
        .collect();

    let scorer = KeywordScorer::default();
    let docs = [
        "Tigers have stripes. Most dogs bark loudly. Some owls hunt mice at night.",
        "Bees make honey. Cats chase mice. Sharks eat fish. All whales sing songs.",
        "Ants build nests. Frogs are green. Foxes dig dens. Otters float on rivers.",
    ];
    let mut runner = TestRunner::new(PropConfig {
        cases: 256,
        ..PropConfig::default()
    });
    let monotone = runner
        .run(
            &(0.0f64..1.0, 0.0f64..1.0, 0usize..docs.len()),
            |(a, b, d)| {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let loose = mined(docs[d], Some(&scorer), lo);
                let strict = mined(docs[d], Some(&scorer), hi);
                prop_assert!(strict.iter().all(|s| loose.contains(s)));
                Ok(())
            },
        )
        .is_ok();

    let cat_rejected = mined("This is a cat.", None, 0.7).is_empty();
    let tigers_kept = mined("Tigers have stripes.", None, 0.7) == ["Tigers have stripes."];
    verdict(
        covered && golden_bad.is_empty() && monotone && cat_rejected && tigers_kept,
        format!(
            "{}/29 alternatives golden {golden_bad:?}, monotone: {monotone}, cat rejected: {cat_rejected}, tigers kept: {tigers_kept}",
            29 - golden_bad.len()
        ),
    )
}

// ------------------------------------------------------------------ H vs Hp

fn c8_h_vs_hp() -> Outcome {
    let mut table = MockTable::uniform(1000);
    table.id = "hp-concentrated".into();
    let mut samples = Vec::new();
    for (i, (subj, obj)) in SUBJECTS.iter().zip(OBJECTS).enumerate() {
        let verb = VERBS[i % VERBS.len()];
        table = table
            .with_entry(&format!("{subj} {verb}"), obj, 0.5)
            .with_entry(&format!("all {subj} {verb}"), obj, 0.2)
            .with_entry(&format!("most {subj} {verb}"), obj, 0.2)
            .with_entry(&format!("some {subj} {verb}"), obj, 0.2);
        for q in ["all", "most", "some"] {
            table = table.with_entry(q, subj, 0.9);
        }
        samples.push(sample(
            &format!("g{i}"),
            Quantifier::Gen,
            subj,
            verb,
            &[obj],
            "",
            "d",
        ));
    }
    let backend = MockBackend::new(table).unwrap();
    let report = run_h_vs_hp(&backend, &samples, &[0], &ExperimentConfig::default());
    let row = &report.rows[0];
    verdict(
        report.errors.is_empty()
            && row.hp_accuracy >= HP_MIN_ACCURACY
            && row.h_accuracy < H_MAX_ACCURACY,
        format!(
            "k=0, n={}: H_p accuracy {:.3}, H accuracy {:.3}",
            row.n, row.hp_accuracy, row.h_accuracy
        ),
    )
}

// ------------------------------------------------------------- determinism

fn write_all_experiments(
    backend: &dyn ScoringBackend,
    samples: &[CorpusSample],
    dir: &Path,
) -> Vec<PathBuf> {
    let cfg = ExperimentConfig::default();
    let mut out = Vec::new();
    let sub = |name: &str| {
        let d = dir.join(name);
        fs::create_dir_all(&d).unwrap();
        d
    };
    out.extend(
        run_confusion(backend, samples, true, &cfg)
            .write(&sub("confusion"))
            .unwrap(),
    );
    out.extend(
        run_implicit_quantification(backend, samples, &cfg)
            .write(&sub("implicit"))
            .unwrap(),
    );
    let sweep = SweepConfig {
        source: ContextSource::Random { seed: 3 },
        ..Default::default()
    };
    out.extend(
        run_context_sweep(backend, samples, &sweep, &cfg)
            .unwrap()
            .write(&sub("sweep"))
            .unwrap(),
    );
    out.extend(
        run_h_vs_hp(backend, samples, &[0, 32, 128], &cfg)
            .write(&sub("hvshp"), TIE_EPSILON)
            .unwrap(),
    );
    let seeds: Vec<StereotypeSeed> = invented_seeds().into_iter().step_by(8).collect();
    out.extend(
        run_stereotypes(backend, &seeds, &cfg)
            .unwrap()
            .write(&sub("stereo"))
            .unwrap(),
    );
    out.into_iter()
        .map(|p| p.strip_prefix(dir).unwrap().to_path_buf())
        .collect()
}

fn c9_warm_cache_determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vocab = Vocab::draw(&mut rng);
    let samples = corpus(&mut rng, 24, &vocab);
    let table = random_table(&mut rng, "determinism".into(), &vocab, true);
    let tmp = tempfile::tempdir().unwrap();
    let cache_dir = tmp.path().join("cache");
    let run = |name: &str| {
        let backend = cached(
            MockBackend::new(table.clone()).unwrap(),
            FileStore::open(&cache_dir).unwrap(),
        );
        let dir = tmp.path().join(name);
        let files = write_all_experiments(&backend, &samples, &dir);
        (
            dir,
            files,
            backend.stats(),
            backend.inner().upstream_calls(),
        )
    };
    let _cold = run("cold");
    let (a, files_a, _, _) = run("warm1");
    let (b, files_b, stats_b, calls_b) = run("warm2");
    let identical = files_a == files_b
        && files_a
            .iter()
            .all(|f| fs::read(a.join(f)).unwrap() == fs::read(b.join(f)).unwrap());
    verdict(
        identical && calls_b == 0 && stats_b.misses == 0,
        format!(
            "{} CSV files byte-identical: {identical}, warm upstream calls {calls_b}, hits {}",
            files_a.len(),
            stats_b.hits
        ),
    )
}

// -------------------------------------------------------------------- live

fn c10_live_harness() -> Outcome {
    let (Ok(endpoint), Ok(model), Ok(data)) = (
        std::env::var("GENQUANT_LIVE_ENDPOINT"),
        std::env::var("GENQUANT_LIVE_MODEL"),
        std::env::var("GENQUANT_LIVE_DATA"),
    ) else {
        return Outcome::Skip(
            "set GENQUANT_LIVE_ENDPOINT, GENQUANT_LIVE_MODEL and GENQUANT_LIVE_DATA to run".into(),
        );
    };
    let mut http = HttpConfig::new(endpoint, model);
    http.api_key = std::env::var("GENQUANT_API_KEY").ok();
    let backend = HttpBackend::new(http);
    let samples = match genquant_core::read_samples(
        Path::new(&data),
        genquant_core::InputFormat::CongenJsonl,
    ) {
        Ok(o) => o.samples,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let out = std::env::var("GENQUANT_LIVE_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|_| std::env::temp_dir().join("genquant-live"));
    let cfg = ExperimentConfig::default();
    let confusion = run_confusion(&backend, &samples, true, &cfg);
    let implicit = run_implicit_quantification(&backend, &samples, &cfg);
    let sweep = run_context_sweep(&backend, &samples, &SweepConfig::default(), &cfg);
    let mut written = 0;
    for (name, files) in [
        ("confusion", confusion.write(&out.join("confusion"))),
        ("implicit", implicit.write(&out.join("implicit"))),
    ] {
        match files {
            Ok(f) => written += f.len(),
            Err(e) => return Outcome::Fail(format!("{name}: {e}")),
        }
    }
    if let Ok(s) = sweep {
        written += s.write(&out.join("sweep")).map(|f| f.len()).unwrap_or(0);
    }
    Outcome::Pass(format!(
        "{written} CSVs in {}; diagonal share {:?}, weak share {:?}",
        out.display(),
        confusion.matrix.diagonal_share(),
        implicit.weak_share()
    ))
}

// -------------------------------------------------------------------- main

type Check = (&'static str, &'static str, bool, fn() -> Outcome);

fn main() {
    let checks: [Check; 11] = [
        ("1", "oracle equivalence", true, c1_oracle_equivalence),
        ("2", "argmin invariances", true, c2_invariances),
        ("3", "variation construction", true, c3_tiger_variations),
        ("4", "context sweep mechanics", true, c4_sweep_mechanics),
        (
            "5",
            "random-context control",
            true,
            c5_random_context_control,
        ),
        ("6a", "stereotype templates", true, c6a_templates),
        ("6b", "stereotype seed counts", true, c6b_seed_counts),
        ("7", "mining filters", true, c7_mining_filters),
        ("8", "H vs H_p shape", true, c8_h_vs_hp),
        (
            "9",
            "warm-cache determinism",
            true,
            c9_warm_cache_determinism,
        ),
        ("10", "live harness", false, c10_live_harness),
    ];
    let lines: Vec<Line> = checks
        .into_iter()
        .map(|(id, name, gating, f)| Line {
            id,
            name,
            gating,
            outcome: f(),
        })
        .collect();
    let mut failed = 0;
    for l in &lines {
        let (tag, detail) = match &l.outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                if l.gating {
                    failed += 1;
                }
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        let gate = if l.gating { "" } else { " (non-gating)" };
        println!("acceptance {:>3} {tag} {}{gate}: {detail}", l.id, l.name);
    }
    if failed > 0 {
        println!("acceptance: {failed} gating criteria failed");
        std::process::exit(1);
    }
}
