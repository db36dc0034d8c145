use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use genquant_core::experiments::report::write_minimal;
use genquant_core::experiments::{
    candidate_set, extract_minimal_contexts, feature_table, run_confusion, run_context_sweep,
    run_h_vs_hp, run_implicit_quantification, run_stereotypes, CandidatesMode, ContextSource,
    ExperimentConfig, Manifest, SampleError, SweepConfig,
};
use genquant_core::mining::{
    candidate_record, Document, FilterSet, GenericityScorer, HttpScorer, KeywordScorer, Miner,
    MiningConfig, RuleTagger,
};
use genquant_core::stereotype::{
    invented_seeds, read_seeds, write_seeds, SeedCounts, StereotypeSeed,
};
use genquant_core::{
    generate_stereotype_dataset, p_acceptable, read_samples, write_samples, ContextSpec,
    CorpusSample, Executor, InputFormat, LineError, Parallelism, ScoringBackend, ScoringConfig,
    Source,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Backend, BackendSettings, ConfigFile};
use crate::{
    Cli, Command, DataArgs, ExpArgs, Experiment, GenStereoArgs, MineArgs, Outcome, ScoreArgs,
};

pub fn run(cli: Cli) -> Result<Outcome> {
    let file = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Score(a) => score(a, &file),
        Command::Exp(a) => exp(a, &file),
        Command::Mine(a) => mine(a),
        Command::GenStereo(a) => gen_stereo(a),
    }
}

#[derive(Debug, Default, Serialize)]
struct Failures {
    rejected_lines: Vec<LineError>,
    failed_samples: Vec<SampleError>,
}

impl Failures {
    fn is_empty(&self) -> bool {
        self.rejected_lines.is_empty() && self.failed_samples.is_empty()
    }

    /// Write `failures.json` when something failed and report the outcome.
    fn finish(&self, dir: &Path) -> Result<Outcome> {
        let path = dir.join("failures.json");
        if self.is_empty() {
            if path.exists() {
                fs::remove_file(&path)?;
            }
            return Ok(Outcome::Success);
        }
        write_json(&path, &serde_json::to_value(self)?)?;
        eprintln!(
            "{} rejected lines, {} failed samples; see {}",
            self.rejected_lines.len(),
            self.failed_samples.len(),
            path.display()
        );
        Ok(Outcome::Partial)
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_samples(data: &DataArgs) -> Result<(PathBuf, Vec<CorpusSample>, Vec<LineError>)> {
    let Some(path) = data.data.clone() else {
        bail!("--data is required");
    };
    let format: InputFormat = data.format.parse().map_err(anyhow::Error::msg)?;
    let outcome = read_samples(&path, format)?;
    for e in &outcome.rejected {
        log::warn!("{}: {e}", path.display());
    }
    Ok((path, outcome.samples, outcome.rejected))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_run_stats(dir: &Path, backend: &Backend) -> Result<()> {
    let stats = backend.stats_value();
    if let Some(cache) = stats.get("cache").filter(|c| !c.is_null()) {
        log::info!("cache: {cache}");
    }
    write_json(&dir.join("run_stats.json"), &stats)
}

fn score(args: ScoreArgs, file: &ConfigFile) -> Result<Outcome> {
    let settings = BackendSettings::resolve(&args.backend, file)?;
    let spec: ContextSpec = args.context.parse().map_err(anyhow::Error::msg)?;
    let (data_path, samples, rejected) = load_samples(&args.data)?;
    let backend = settings.build()?;
    prepare_dir(&args.out)?;

    let candidates = candidate_set(!args.no_gen);
    let scoring = ScoringConfig {
        tie_epsilon: settings.tie_epsilon,
        ..Default::default()
    };
    let results = settings.executor().map(&samples, |_, s| {
        p_acceptable(&backend, s, candidates, spec, &scoring)
    });

    let results_path = args.out.join("results.jsonl");
    let mut w = BufWriter::new(File::create(&results_path)?);
    let mut failures = Failures {
        rejected_lines: rejected,
        ..Default::default()
    };
    for (s, r) in samples.iter().zip(results) {
        match r {
            Ok(r) => writeln!(w, "{}", serde_json::to_string(&r)?)?,
            Err(e) => failures.failed_samples.push(SampleError {
                sample_id: s.id.clone(),
                message: e.to_string(),
            }),
        }
    }
    w.flush()?;

    let config = json!({
        "command": "score",
        "data": data_path.display().to_string(),
        "format": args.data.format,
        "backend": settings.manifest_value(),
        "context": spec.to_string(),
        "candidates": candidates.iter().map(|q| q.label()).collect::<Vec<_>>(),
    });
    let mut manifest = Manifest::new("score", backend.backend_id(), None, config)
        .with_outputs(&args.out, &[results_path]);
    manifest.n_samples = samples.len();
    manifest.n_errored = failures.failed_samples.len();
    manifest.write(&args.out)?;
    write_run_stats(&args.out, &backend)?;
    failures.finish(&args.out)
}

fn load_stereo_seeds(real: Option<&Path>) -> Result<(Vec<StereotypeSeed>, Vec<LineError>)> {
    let mut seeds = Vec::new();
    let mut rejected = Vec::new();
    if let Some(path) = real {
        let (real, errs) = read_seeds(path)?;
        seeds.extend(real);
        rejected = errs;
    }
    seeds.extend(invented_seeds());
    Ok((seeds, rejected))
}

fn exp(args: ExpArgs, file: &ConfigFile) -> Result<Outcome> {
    let settings = BackendSettings::resolve(&args.backend, file)?;
    let sweep = SweepConfig {
        max_tokens: args.max_ctx,
        mode: if args.no_gen {
            CandidatesMode::WithoutGen
        } else {
            CandidatesMode::WithGen
        },
        source: if args.random_context {
            ContextSource::Random { seed: args.seed }
        } else {
            ContextSource::True
        },
    };
    if args.experiment == Experiment::Context {
        sweep.validate().map_err(anyhow::Error::msg)?;
    }

    let (data_path, samples, rejected, seeds) = if args.experiment == Experiment::Stereo {
        let (seeds, rejected) = load_stereo_seeds(args.real_seeds.as_deref())?;
        (None, Vec::new(), rejected, seeds)
    } else {
        let (p, s, r) = load_samples(&args.data)?;
        (Some(p), s, r, Vec::new())
    };
    let backend = settings.build()?;
    prepare_dir(&args.out)?;

    let cfg = ExperimentConfig {
        scoring: ScoringConfig {
            tie_epsilon: settings.tie_epsilon,
            ..Default::default()
        },
        executor: settings.executor(),
    };
    let name = format!("{:?}", args.experiment).to_lowercase();
    let mut config = json!({
        "command": "exp",
        "experiment": name,
        "data": data_path.as_ref().map(|p| p.display().to_string()),
        "format": args.data.format,
        "backend": settings.manifest_value(),
    });
    let extra = match args.experiment {
        Experiment::Confusion => json!({"use_context": !args.no_context}),
        Experiment::Implicit => json!({}),
        Experiment::Context => serde_json::to_value(sweep)?,
        Experiment::Stereo => {
            json!({"real_seeds": args.real_seeds.as_ref().map(|p| p.display().to_string())})
        }
        Experiment::Hvshp => json!({"lengths": args.lengths}),
    };
    config["settings"] = extra;

    let mut failures = Failures {
        rejected_lines: rejected,
        ..Default::default()
    };
    let (outputs, n_samples) = match args.experiment {
        Experiment::Confusion => {
            let r = run_confusion(&backend, &samples, !args.no_context, &cfg);
            failures.failed_samples = r.errors.clone();
            (r.write(&args.out)?, samples.len())
        }
        Experiment::Implicit => {
            let r = run_implicit_quantification(&backend, &samples, &cfg);
            failures.failed_samples = r.errors.clone();
            (r.write(&args.out)?, samples.len())
        }
        Experiment::Context => {
            let r =
                run_context_sweep(&backend, &samples, &sweep, &cfg).map_err(anyhow::Error::msg)?;
            failures.failed_samples = r.errors.clone();
            let mut out = r.write(&args.out)?;
            if sweep.source == ContextSource::True {
                let minimal = extract_minimal_contexts(&r, &RuleTagger);
                let table = feature_table(&r, &minimal, &RuleTagger);
                out.extend(write_minimal(&args.out, &minimal, &table)?);
            }
            (out, samples.len())
        }
        Experiment::Stereo => {
            let counts = SeedCounts::of(&seeds);
            if counts != SeedCounts::DESIGN {
                log::warn!(
                    "seed counts {counts:?} differ from the full design {:?}",
                    SeedCounts::DESIGN
                );
            }
            let r = run_stereotypes(&backend, &seeds, &cfg).map_err(anyhow::Error::msg)?;
            failures.failed_samples = r.errors.clone();
            (r.write(&args.out)?, seeds.len() * 3)
        }
        Experiment::Hvshp => {
            if args.lengths.is_empty() {
                bail!("--lengths must not be empty");
            }
            let r = run_h_vs_hp(&backend, &samples, &args.lengths, &cfg);
            failures.failed_samples = r.errors.clone();
            (r.write(&args.out, settings.tie_epsilon)?, samples.len())
        }
    };

    let seed = (args.experiment == Experiment::Context && args.random_context).then_some(args.seed);
    let mut manifest =
        Manifest::new(&name, backend.backend_id(), seed, config).with_outputs(&args.out, &outputs);
    manifest.n_samples = n_samples;
    manifest.n_errored = failures.failed_samples.len();
    manifest.write(&args.out)?;
    write_run_stats(&args.out, &backend)?;
    failures.finish(&args.out)
}

fn read_documents(path: &Path) -> Result<(Vec<Document>, Vec<LineError>)> {
    let reader =
        BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut docs = Vec::new();
    let mut rejected = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Document>(&line) {
            Ok(d) => docs.push(d),
            Err(e) => rejected.push(LineError {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    Ok((docs, rejected))
}

fn mine(args: MineArgs) -> Result<Outcome> {
    if !(0.0..=1.0).contains(&args.threshold) {
        bail!("threshold must lie in [0, 1]");
    }
    if args.batch_size == 0 || args.parallelism == 0 {
        bail!("batch size and parallelism must be at least 1");
    }
    let source: Source = args.source.parse().map_err(anyhow::Error::msg)?;
    let scorer: Option<Box<dyn GenericityScorer>> = match args.scorer.as_str() {
        "none" => None,
        "keyword" => Some(Box::new(KeywordScorer::default())),
        url if url.starts_with("http://") || url.starts_with("https://") => {
            Some(Box::new(HttpScorer::new(url)))
        }
        other => bail!("unknown scorer {other:?} (none | keyword | http(s) URL)"),
    };
    let (docs, rejected) = read_documents(&args.input)?;
    let config = MiningConfig {
        threshold: args.threshold,
        filters: FilterSet {
            exclusion: !args.no_exclusion,
            passive: !args.no_passive,
            plural_present: !args.no_plural_present,
        },
        dedup: !args.no_dedup,
        batch_size: args.batch_size,
        executor: Executor::new(Parallelism::from_count(args.parallelism)),
    };
    let miner = Miner::new(config, scorer.as_deref());
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        prepare_dir(dir)?;
    }
    let mut w = BufWriter::new(
        File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?,
    );
    let mut it = miner.mine(docs);
    let mut n = 0usize;
    for c in it.by_ref() {
        writeln!(
            w,
            "{}",
            serde_json::to_string(&candidate_record(&c, source))?
        )?;
        n += 1;
    }
    w.flush()?;
    eprintln!("{n} candidates written to {}", args.out.display());

    let failures = Failures {
        rejected_lines: rejected,
        failed_samples: it
            .failures()
            .iter()
            .map(|(id, e)| SampleError {
                sample_id: id.clone(),
                message: e.to_string(),
            })
            .collect(),
    };
    let dir = args
        .out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    if failures.is_empty() {
        return Ok(Outcome::Success);
    }
    let path = dir.join(format!(
        "{}.failures.json",
        args.out
            .file_name()
            .map(|s| s.to_string_lossy())
            .unwrap_or_default()
    ));
    write_json(&path, &serde_json::to_value(&failures)?)?;
    eprintln!("some documents failed; see {}", path.display());
    Ok(Outcome::Partial)
}

fn gen_stereo(args: GenStereoArgs) -> Result<Outcome> {
    let (seeds, rejected) = load_stereo_seeds(args.real_seeds.as_deref())?;
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        prepare_dir(dir)?;
    }
    write_seeds(&seeds, &args.out)?;
    let counts = SeedCounts::of(&seeds);
    eprintln!(
        "{} seeds (real negative {}, real positive {}, invented negative {}, invented positive {})",
        counts.total(),
        counts.real_negative,
        counts.real_positive,
        counts.invented_negative,
        counts.invented_positive
    );
    if args.real_seeds.is_none() {
        eprintln!("no real-group seeds supplied (--real-seeds or GENQUANT_REAL_SEEDS); only invented seeds written");
    } else if counts != SeedCounts::DESIGN {
        log::warn!(
            "seed counts differ from the full design {:?}",
            SeedCounts::DESIGN
        );
    }
    if let Some(path) = &args.samples_out {
        let samples = generate_stereotype_dataset(&seeds).map_err(anyhow::Error::msg)?;
        write_samples(&samples, path)?;
    }
    for e in &rejected {
        eprintln!("rejected seed line {e}");
    }
    Ok(if rejected.is_empty() {
        Outcome::Success
    } else {
        Outcome::Partial
    })
}
