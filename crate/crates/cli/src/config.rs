//! Run configuration: flags, then environment, then a key=value file.
//!
//! Flags and environment variables are merged by clap; values still unset
//! after that are looked up in the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::Args;
use genquant_core::backend::CacheStats;
use genquant_core::{
    cached, BackendError, CachedBackend, Executor, FileStore, HttpBackend, HttpConfig, MockBackend,
    MockTable, Parallelism, ScoredSequence, ScoringBackend, TokenSpan,
};
use serde_json::{json, Value};

/// `key = value` lines; `#` starts a comment.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected key = value", i + 1);
            };
            values.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| anyhow::anyhow!("config key {key}: {e}"))
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    /// Table-driven mock model (JSON) instead of an endpoint.
    #[arg(long, value_name = "TABLE")]
    pub mock: Option<PathBuf>,
    /// Completions endpoint URL.
    #[arg(long, env = "GENQUANT_ENDPOINT")]
    pub endpoint: Option<String>,
    #[arg(long, env = "GENQUANT_MODEL")]
    pub model: Option<String>,
    #[arg(long, env = "GENQUANT_API_KEY", hide_env_values = true)]
    pub api_key: Option<String>,
    /// Tokenize endpoint; without it tokenization reuses echo scoring.
    #[arg(long, env = "GENQUANT_TOKENIZE_ENDPOINT")]
    pub tokenize_endpoint: Option<String>,
    /// Cache identity override (defaults to the model name).
    #[arg(long)]
    pub backend_id: Option<String>,
    /// Response cache directory.
    #[arg(long, env = "GENQUANT_CACHE")]
    pub cache: Option<PathBuf>,
    /// Worker threads (1 = sequential).
    #[arg(long, env = "GENQUANT_PARALLELISM")]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub tie_epsilon: Option<f64>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    /// Request timeout in seconds.
    #[arg(long)]
    pub timeout: Option<u64>,
}

/// Fully resolved backend settings.
#[derive(Debug, Clone)]
pub struct BackendSettings {
    pub mock: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_key: Option<String>,
    pub tokenize_endpoint: Option<String>,
    pub backend_id: Option<String>,
    pub cache: Option<PathBuf>,
    pub parallelism: usize,
    pub tie_epsilon: f64,
    pub max_retries: u32,
    pub timeout: u64,
}

impl BackendSettings {
    pub fn resolve(args: &BackendArgs, file: &ConfigFile) -> Result<Self> {
        let s = |flag: &Option<String>, key: &str| {
            flag.clone().or_else(|| file.get(key).map(String::from))
        };
        let settings = Self {
            mock: args
                .mock
                .clone()
                .or_else(|| file.get("mock").map(PathBuf::from)),
            endpoint: s(&args.endpoint, "endpoint"),
            model: s(&args.model, "model"),
            api_key: s(&args.api_key, "api_key"),
            tokenize_endpoint: s(&args.tokenize_endpoint, "tokenize_endpoint"),
            backend_id: s(&args.backend_id, "backend_id"),
            cache: args
                .cache
                .clone()
                .or_else(|| file.get("cache").map(PathBuf::from)),
            parallelism: match args.parallelism {
                Some(p) => p,
                None => file.parsed("parallelism")?.unwrap_or(1),
            },
            tie_epsilon: match args.tie_epsilon {
                Some(e) => e,
                None => file
                    .parsed("tie_epsilon")?
                    .unwrap_or(genquant_core::scoring::DEFAULT_TIE_EPSILON),
            },
            max_retries: match args.max_retries {
                Some(r) => r,
                None => file.parsed("max_retries")?.unwrap_or(3),
            },
            timeout: match args.timeout {
                Some(t) => t,
                None => file.parsed("timeout")?.unwrap_or(60),
            },
        };
        if settings.parallelism == 0 {
            bail!("parallelism must be at least 1");
        }
        if settings.tie_epsilon.is_nan() || settings.tie_epsilon < 0.0 {
            bail!("tie epsilon must be non-negative");
        }
        if settings.mock.is_none() && settings.endpoint.is_none() {
            bail!("no backend: pass --mock <table.json> or --endpoint <url> (or set GENQUANT_ENDPOINT)");
        }
        if settings.mock.is_none() && settings.model.is_none() {
            bail!("--endpoint needs --model (or GENQUANT_MODEL)");
        }
        Ok(settings)
    }

    pub fn executor(&self) -> Executor {
        Executor::new(Parallelism::from_count(self.parallelism))
    }

    /// Settings that affect results, for the manifest (no secrets, no paths
    /// that only affect speed).
    pub fn manifest_value(&self) -> Value {
        json!({
            "mock": self.mock.as_ref().map(|p| p.display().to_string()),
            "endpoint": self.endpoint,
            "model": self.model,
            "backend_id": self.backend_id,
            "tie_epsilon": self.tie_epsilon,
        })
    }

    pub fn build(&self) -> Result<Backend> {
        let inner: Box<dyn ScoringBackend> = match &self.mock {
            Some(path) => {
                let table = MockTable::from_path(path)?;
                Box::new(MockBackend::new(table)?)
            }
            None => {
                let mut cfg = HttpConfig::new(
                    self.endpoint.clone().expect("checked in resolve"),
                    self.model.clone().expect("checked in resolve"),
                );
                cfg.api_key = self.api_key.clone();
                cfg.backend_id = self.backend_id.clone();
                cfg.tokenize_endpoint = self.tokenize_endpoint.clone();
                cfg.max_retries = self.max_retries;
                cfg.timeout = Duration::from_secs(self.timeout);
                Box::new(HttpBackend::new(cfg))
            }
        };
        Ok(match &self.cache {
            Some(dir) => {
                let store = FileStore::open(dir)
                    .with_context(|| format!("opening cache {}", dir.display()))?;
                Backend::Cached(cached(inner, store))
            }
            None => Backend::Plain(inner),
        })
    }
}

pub enum Backend {
    Plain(Box<dyn ScoringBackend>),
    Cached(CachedBackend<Box<dyn ScoringBackend>, FileStore>),
}

impl Backend {
    pub fn cache_stats(&self) -> Option<CacheStats> {
        match self {
            Backend::Plain(_) => None,
            Backend::Cached(c) => Some(c.stats()),
        }
    }

    /// Run statistics, kept out of the manifest because they change between
    /// cold and warm runs.
    pub fn stats_value(&self) -> Value {
        match self.cache_stats() {
            Some(s) => json!({"cache": {"hits": s.hits, "misses": s.misses, "corrupt": s.corrupt}}),
            None => json!({"cache": null}),
        }
    }
}

impl ScoringBackend for Backend {
    fn backend_id(&self) -> &str {
        match self {
            Backend::Plain(b) => b.backend_id(),
            Backend::Cached(b) => b.backend_id(),
        }
    }

    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        match self {
            Backend::Plain(b) => b.score_text(text),
            Backend::Cached(b) => b.score_text(text),
        }
    }

    fn tokenize(&self, text: &str) -> Result<Vec<TokenSpan>, BackendError> {
        match self {
            Backend::Plain(b) => b.tokenize(text),
            Backend::Cached(b) => b.tokenize(text),
        }
    }
}
