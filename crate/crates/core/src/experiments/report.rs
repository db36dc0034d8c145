//! CSV and manifest output for experiment reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a rerun
//! against the same cache yields byte-identical files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::minimal::{ContextFeatures, FeatureTable, MinimalContextRecord};
use super::{
    ConfusionReport, HvsHpReport, ImplicitReport, SampleError, ScoredSample, StereoReport,
    SweepReport,
};
use crate::quantifier::Quantifier;
use crate::scoring::PAcceptabilityResult;

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn write_csv(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn opt_f(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn result_header() -> Vec<String> {
    let mut h = strs(&["winner", "tie", "margin", "context_tokens"]);
    for q in Quantifier::CANONICAL {
        h.push(format!("h_p_{}", q.label()));
    }
    for q in Quantifier::CANONICAL {
        h.push(format!("h_full_{}", q.label()));
    }
    h
}

fn result_cells(r: &PAcceptabilityResult) -> Vec<String> {
    let mut row = vec![
        r.winner.label().to_string(),
        r.tie.to_string(),
        opt_f(r.margin),
        r.context_tokens_used.to_string(),
    ];
    for q in Quantifier::CANONICAL {
        row.push(opt_f(r.per_quantifier.get(&q).map(|s| s.h_p)));
    }
    for q in Quantifier::CANONICAL {
        row.push(opt_f(r.per_quantifier.get(&q).map(|s| s.h_full)));
    }
    row
}

fn pct_header(prefix: &str) -> Vec<String> {
    Quantifier::CANONICAL
        .iter()
        .map(|q| format!("{prefix}_{}", q.label()))
        .collect()
}

/// Per-sample results: id, gold, then the result columns.
pub fn write_scored(path: &Path, scored: &[ScoredSample]) -> io::Result<()> {
    let mut header = strs(&["sample_id", "gold"]);
    header.extend(result_header());
    write_csv(
        path,
        &header,
        scored.iter().map(|s| {
            let mut row = vec![s.sample_id.clone(), s.gold.label().to_string()];
            row.extend(result_cells(&s.result));
            row
        }),
    )
}

pub fn write_errors(path: &Path, errors: &[SampleError]) -> io::Result<()> {
    write_csv(
        path,
        &strs(&["sample_id", "message"]),
        errors
            .iter()
            .map(|e| vec![e.sample_id.clone(), e.message.clone()]),
    )
}

fn counts_and_pcts(counts: &[usize; 4]) -> Vec<String> {
    let pcts = super::percentages(counts);
    let mut row: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
    for i in 0..4 {
        row.push(opt_f(pcts.map(|p| p[i])));
    }
    row
}

impl ConfusionReport {
    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        let per = dir.join("per_sample.csv");
        let agg = dir.join("aggregate.csv");
        let err = dir.join("errors.csv");
        write_scored(&per, &self.scored)?;
        let mut header = strs(&["gold", "n"]);
        header.extend(pct_header("count"));
        header.extend(pct_header("pct"));
        write_csv(
            &agg,
            &header,
            Quantifier::CANONICAL.iter().map(|&q| {
                let mut row = vec![q.label().to_string(), self.matrix.row_total(q).to_string()];
                row.extend(counts_and_pcts(&self.matrix.counts[q.index()]));
                row
            }),
        )?;
        write_errors(&err, &self.errors)?;
        Ok(vec![per, agg, err])
    }
}

impl ImplicitReport {
    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        let per = dir.join("per_sample.csv");
        let agg = dir.join("aggregate.csv");
        let weak = dir.join("weak_generics.csv");
        let err = dir.join("errors.csv");
        write_scored(&per, &self.scored)?;
        let shares = self.shares();
        write_csv(
            &agg,
            &strs(&["quantifier", "count", "pct"]),
            Quantifier::EXPLICIT.iter().enumerate().map(|(i, q)| {
                vec![
                    q.label().to_string(),
                    self.counts[i].to_string(),
                    opt_f(shares.map(|s| s[i])),
                ]
            }),
        )?;
        write_csv(
            &weak,
            &strs(&["sample_id"]),
            self.weak_generics.iter().map(|id| vec![id.clone()]),
        )?;
        write_errors(&err, &self.errors)?;
        Ok(vec![per, agg, weak, err])
    }
}

impl SweepReport {
    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        let per = dir.join("per_sample.csv");
        let agg = dir.join("aggregate.csv");
        let err = dir.join("errors.csv");
        let mut header = strs(&["sample_id", "gold", "context_from", "k", "correct"]);
        header.extend(result_header());
        let rows = self.records.iter().flat_map(|r| {
            self.lengths.iter().enumerate().map(move |(i, k)| {
                let mut row = vec![
                    r.sample_id.clone(),
                    r.gold.label().to_string(),
                    r.context_from.clone().unwrap_or_default(),
                    k.to_string(),
                    r.correct_at(i).to_string(),
                ];
                row.extend(result_cells(&r.results[i]));
                row
            })
        });
        write_csv(&per, &header, rows)?;
        let mut header = strs(&["gold", "k", "n", "accuracy"]);
        header.extend(pct_header("pct"));
        let rows = self.curves.iter().flat_map(|c| {
            c.context_lengths.iter().enumerate().map(move |(i, k)| {
                let mut row = vec![
                    c.gold.label().to_string(),
                    k.to_string(),
                    c.n_samples.to_string(),
                    c.accuracy[i].to_string(),
                ];
                row.extend(c.shares[i].iter().map(|p| p.to_string()));
                row
            })
        });
        write_csv(&agg, &header, rows)?;
        write_errors(&err, &self.errors)?;
        Ok(vec![per, agg, err])
    }
}

/// Minimal-context records and the full-vs-minimal feature table.
pub fn write_minimal(
    dir: &Path,
    records: &[MinimalContextRecord],
    table: &FeatureTable,
) -> io::Result<Vec<PathBuf>> {
    let per = dir.join("minimal_contexts.csv");
    let agg = dir.join("features.csv");
    let mut header = strs(&["sample_id", "gold", "minimal_k", "context"]);
    header.extend(strs(&ContextFeatures::NAMES));
    write_csv(
        &per,
        &header,
        records.iter().map(|r| {
            let mut row = vec![
                r.sample_id.clone(),
                r.gold.label().to_string(),
                r.minimal_k.to_string(),
                r.context.clone(),
            ];
            row.extend(r.features.flags().iter().map(|b| b.to_string()));
            row
        }),
    )?;
    write_csv(
        &agg,
        &strs(&["feature", "full_pct", "minimal_pct", "n_full", "n_minimal"]),
        ContextFeatures::NAMES.iter().enumerate().map(|(i, name)| {
            vec![
                name.to_string(),
                table.full[i].to_string(),
                table.minimal[i].to_string(),
                table.n_full.to_string(),
                table.n_minimal.to_string(),
            ]
        }),
    )?;
    Ok(vec![per, agg])
}

impl StereoReport {
    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        let per = dir.join("per_sample.csv");
        let agg = dir.join("aggregate.csv");
        let err = dir.join("errors.csv");
        write_scored(&per, &self.scored)?;
        let mut header = strs(&["realness", "polarity", "paraphrase", "n"]);
        header.extend(pct_header("count"));
        header.extend(pct_header("pct"));
        write_csv(
            &agg,
            &header,
            self.cells.iter().map(|c| {
                let mut row = vec![
                    c.realness.label().to_string(),
                    c.polarity.label().to_string(),
                    c.paraphrase.label().to_string(),
                    c.n.to_string(),
                ];
                row.extend(counts_and_pcts(&c.counts));
                row
            }),
        )?;
        write_errors(&err, &self.errors)?;
        Ok(vec![per, agg, err])
    }
}

impl HvsHpReport {
    pub fn write(&self, dir: &Path, tie_epsilon: f64) -> io::Result<Vec<PathBuf>> {
        let per = dir.join("per_sample.csv");
        let agg = dir.join("aggregate.csv");
        let err = dir.join("errors.csv");
        let mut header = strs(&["k", "sample_id", "gold", "winner_h"]);
        header.extend(result_header());
        write_csv(
            &per,
            &header,
            self.scored.iter().map(|(k, s)| {
                let mut row = vec![
                    k.to_string(),
                    s.sample_id.clone(),
                    s.gold.label().to_string(),
                    s.result.winner_by_h_full(tie_epsilon).label().to_string(),
                ];
                row.extend(result_cells(&s.result));
                row
            }),
        )?;
        write_csv(
            &agg,
            &strs(&["context_tokens", "n", "h_accuracy", "h_p_accuracy"]),
            self.rows.iter().map(|r| {
                vec![
                    r.context_tokens.to_string(),
                    r.n.to_string(),
                    r.h_accuracy.to_string(),
                    r.hp_accuracy.to_string(),
                ]
            }),
        )?;
        write_errors(&err, &self.errors)?;
        Ok(vec![per, agg, err])
    }
}

/// Hex SHA-256 of the compact JSON form of `config`.
pub fn config_hash(config: &Value) -> String {
    let bytes = serde_json::to_vec(config).expect("JSON values serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// Run description written next to the outputs. Holds no timestamps so it
/// is reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub backend_id: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub config: Value,
    pub n_samples: usize,
    pub n_errored: usize,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(experiment: &str, backend_id: &str, seed: Option<u64>, config: Value) -> Self {
        Self {
            experiment: experiment.to_string(),
            version: format!("v{}", env!("CARGO_PKG_VERSION")),
            backend_id: backend_id.to_string(),
            config_hash: config_hash(&config),
            seed,
            config,
            n_samples: 0,
            n_errored: 0,
            outputs: Vec::new(),
        }
    }

    /// Record output file names (relative to `dir`).
    pub fn with_outputs(mut self, dir: &Path, paths: &[PathBuf]) -> Self {
        self.outputs = paths
            .iter()
            .map(|p| {
                p.strip_prefix(dir)
                    .unwrap_or(p)
                    .to_string_lossy()
                    .into_owned()
            })
            .collect();
        self
    }

    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
