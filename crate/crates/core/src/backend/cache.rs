//! Persistent memoization of backend responses.
//!
//! Keys are the SHA-256 of `backend_id ‖ NUL ‖ text` (tokenization results use
//! a separate `tokenize` namespace); values are JSON. Unreadable or
//! inconsistent entries are treated as misses.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{check_tiling, BackendError, ScoredSequence, ScoringBackend, TokenSpan};

/// Key-value persistence with atomic single-entry writes.
pub trait KeyValueStore: Send + Sync {
    fn get(&self, key: &str) -> io::Result<Option<Vec<u8>>>;
    fn put(&self, key: &str, value: &[u8]) -> io::Result<()>;
}

/// One file per entry under a directory, sharded by the first two hex digits.
#[derive(Debug)]
pub struct FileStore {
    root: PathBuf,
    seq: AtomicU64,
}

impl FileStore {
    pub fn open(root: impl AsRef<Path>) -> io::Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            seq: AtomicU64::new(0),
        })
    }

    fn path_for(&self, key: &str) -> PathBuf {
        let shard = key.get(..2).unwrap_or("xx");
        self.root.join(shard).join(format!("{key}.json"))
    }
}

impl KeyValueStore for FileStore {
    fn get(&self, key: &str) -> io::Result<Option<Vec<u8>>> {
        match fs::read(self.path_for(key)) {
            Ok(bytes) => Ok(Some(bytes)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn put(&self, key: &str, value: &[u8]) -> io::Result<()> {
        let path = self.path_for(key);
        let dir = path.parent().expect("sharded path has a parent");
        fs::create_dir_all(dir)?;
        let n = self.seq.fetch_add(1, Ordering::Relaxed);
        let tmp = dir.join(format!(".{key}.{}.{n}.tmp", std::process::id()));
        fs::write(&tmp, value)?;
        fs::rename(&tmp, &path)
    }
}

/// In-memory store, mostly for tests.
#[derive(Debug, Default)]
pub struct MemoryStore {
    map: RwLock<HashMap<String, Vec<u8>>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Overwrite a raw entry.
    pub fn corrupt(&self, key: &str, bytes: &[u8]) {
        self.map
            .write()
            .unwrap()
            .insert(key.to_string(), bytes.to_vec());
    }

    pub fn keys(&self) -> Vec<String> {
        let mut k: Vec<_> = self.map.read().unwrap().keys().cloned().collect();
        k.sort();
        k
    }
}

impl KeyValueStore for MemoryStore {
    fn get(&self, key: &str) -> io::Result<Option<Vec<u8>>> {
        Ok(self.map.read().unwrap().get(key).cloned())
    }

    fn put(&self, key: &str, value: &[u8]) -> io::Result<()> {
        self.map
            .write()
            .unwrap()
            .insert(key.to_string(), value.to_vec());
        Ok(())
    }
}

impl<S: KeyValueStore + ?Sized> KeyValueStore for std::sync::Arc<S> {
    fn get(&self, key: &str) -> io::Result<Option<Vec<u8>>> {
        (**self).get(key)
    }
    fn put(&self, key: &str, value: &[u8]) -> io::Result<()> {
        (**self).put(key, value)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    /// Requests forwarded to the wrapped backend.
    pub misses: usize,
    pub corrupt: usize,
}

#[derive(Serialize, Deserialize)]
struct CachedTokens {
    backend_id: String,
    text: String,
    spans: Vec<TokenSpan>,
}

const STRIPES: usize = 64;

/// Memoizing wrapper around a backend.
pub struct CachedBackend<B, S> {
    inner: B,
    store: S,
    locks: Vec<Mutex<()>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    corrupt: AtomicUsize,
}

/// Wrap `backend` so identical `(backend_id, text)` requests are served from
/// `store`.
pub fn cached<B: ScoringBackend, S: KeyValueStore>(backend: B, store: S) -> CachedBackend<B, S> {
    CachedBackend {
        inner: backend,
        store,
        locks: (0..STRIPES).map(|_| Mutex::new(())).collect(),
        hits: AtomicUsize::new(0),
        misses: AtomicUsize::new(0),
        corrupt: AtomicUsize::new(0),
    }
}

/// Cache key for a scoring request.
pub fn score_key(backend_id: &str, text: &str) -> String {
    let mut h = Sha256::new();
    h.update(backend_id.as_bytes());
    h.update([0u8]);
    h.update(text.as_bytes());
    hex::encode(h.finalize())
}

fn tokenize_key(backend_id: &str, text: &str) -> String {
    let mut h = Sha256::new();
    h.update(b"tokenize\0");
    h.update(backend_id.as_bytes());
    h.update([0u8]);
    h.update(text.as_bytes());
    hex::encode(h.finalize())
}

impl<B, S> CachedBackend<B, S>
where
    B: ScoringBackend,
    S: KeyValueStore,
{
    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::SeqCst),
            misses: self.misses.load(Ordering::SeqCst),
            corrupt: self.corrupt.load(Ordering::SeqCst),
        }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn store(&self) -> &S {
        &self.store
    }

    fn stripe(&self, key: &str) -> &Mutex<()> {
        let idx = usize::from_str_radix(&key[..2], 16).unwrap_or(0) % STRIPES;
        &self.locks[idx]
    }

    /// `Err(())` marks a corrupt entry.
    fn load<T, F>(&self, key: &str, check: F) -> Result<Option<T>, ()>
    where
        T: for<'de> Deserialize<'de>,
        F: Fn(&T) -> bool,
    {
        let bytes = match self.store.get(key) {
            Ok(Some(b)) => b,
            Ok(None) => return Ok(None),
            Err(e) => {
                warn!("cache read failed for {key}: {e}");
                return Ok(None);
            }
        };
        match serde_json::from_slice::<T>(&bytes) {
            Ok(v) if check(&v) => Ok(Some(v)),
            _ => Err(()),
        }
    }

    fn save<T: Serialize>(&self, key: &str, value: &T) {
        let bytes = serde_json::to_vec(value).expect("cache values serialize");
        if let Err(e) = self.store.put(key, &bytes) {
            warn!("cache write failed for {key}: {e}");
        }
    }

    /// Look up `key`, otherwise compute under the key's stripe lock so each
    /// key reaches the upstream at most once.
    fn memo<T, F, C>(&self, key: &str, check: C, fetch: F) -> Result<T, BackendError>
    where
        T: Serialize + for<'de> Deserialize<'de>,
        F: FnOnce() -> Result<T, BackendError>,
        C: Fn(&T) -> bool,
    {
        let mut corrupt = false;
        for locked in [false, true] {
            let _guard = locked.then(|| self.stripe(key).lock().unwrap_or_else(|p| p.into_inner()));
            match self.load(key, &check) {
                Ok(Some(v)) => {
                    self.hits.fetch_add(1, Ordering::SeqCst);
                    return Ok(v);
                }
                Ok(None) => {}
                Err(()) => corrupt = true,
            }
            if locked {
                if corrupt {
                    warn!("corrupt cache entry {key}; treating as miss");
                    self.corrupt.fetch_add(1, Ordering::SeqCst);
                }
                self.misses.fetch_add(1, Ordering::SeqCst);
                let v = fetch()?;
                self.save(key, &v);
                return Ok(v);
            }
        }
        unreachable!("the locked pass always returns")
    }
}

impl<B, S> ScoringBackend for CachedBackend<B, S>
where
    B: ScoringBackend,
    S: KeyValueStore,
{
    fn backend_id(&self) -> &str {
        self.inner.backend_id()
    }

    fn score_text(&self, text: &str) -> Result<ScoredSequence, BackendError> {
        super::check_scorable(text)?;
        let id = self.inner.backend_id();
        let key = score_key(id, text);
        self.memo(
            &key,
            |seq: &ScoredSequence| {
                seq.backend_id == id && seq.text == text && seq.validate().is_ok()
            },
            || self.inner.score_text(text),
        )
    }

    fn tokenize(&self, text: &str) -> Result<Vec<TokenSpan>, BackendError> {
        let id = self.inner.backend_id();
        let key = tokenize_key(id, text);
        let entry = self.memo(
            &key,
            |t: &CachedTokens| {
                t.backend_id == id
                    && t.text == text
                    && check_tiling(text, t.spans.iter().copied()).is_ok()
            },
            || {
                Ok(CachedTokens {
                    backend_id: id.to_string(),
                    text: text.to_string(),
                    spans: self.inner.tokenize(text)?,
                })
            },
        )?;
        Ok(entry.spans)
    }
}
