//! File-backed document store.
//!
//! Layout under the data directory:
//!
//! ```text
//! tokens.json                      hashes of issued bearer tokens
//! namespaces/<ns>/datasets/<id>.json
//! namespaces/<ns>/scenes/<id>.json
//! namespaces/<ns>/viz/<id>.json
//! ```
//!
//! Every document is written to a temporary file in the same directory,
//! flushed to disk and renamed over the target, so a reader sees either the
//! old document or the new one. Temporary files are never listed and are
//! swept on open.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use holoviz_core::ids::{is_valid_id, new_id};
use rand::Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

const TMP_SUFFIX: &str = ".tmp";
const DOC_SUFFIX: &str = ".json";
const TOKENS_FILE: &str = "tokens.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Dataset,
    Scene,
    Visualization,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Dataset, Kind::Scene, Kind::Visualization];

    fn dir(self) -> &'static str {
        match self {
            Kind::Dataset => "datasets",
            Kind::Scene => "scenes",
            Kind::Visualization => "viz",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Kind::Dataset => "dataset",
            Kind::Scene => "scene",
            Kind::Visualization => "visualization",
        }
    }
}

/// An isolated partition of the store.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Namespace(String);

impl Namespace {
    /// The shared partition used in single-user mode and by the CLI.
    pub fn local() -> Self {
        Namespace("local".into())
    }

    fn for_token(token: &str) -> Self {
        Namespace(token_digest(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn token_digest(token: &str) -> String {
    Sha256::digest(token.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid id {0:?}")]
    InvalidId(String),
    #[error("corrupt token registry: {0}")]
    CorruptTokens(serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    locks: Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>,
}

impl Store {
    /// Open (creating if needed) a store rooted at `root` and sweep any
    /// temporary files left by an interrupted writer.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let namespaces = root.join("namespaces");
        fs::create_dir_all(&namespaces).map_err(io_err(&namespaces))?;
        sweep_temporaries(&root)?;
        for entry in fs::read_dir(&namespaces).map_err(io_err(&namespaces))? {
            let dir = entry.map_err(io_err(&namespaces))?.path();
            for kind in Kind::ALL {
                let sub = dir.join(kind.dir());
                if sub.is_dir() {
                    sweep_temporaries(&sub)?;
                }
            }
        }
        Ok(Self {
            root,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, ns: &Namespace, kind: Kind) -> PathBuf {
        self.root
            .join("namespaces")
            .join(ns.as_str())
            .join(kind.dir())
    }

    fn path(&self, ns: &Namespace, kind: Kind, id: &str) -> Result<PathBuf, StoreError> {
        if !is_valid_id(id) {
            return Err(StoreError::InvalidId(id.to_owned()));
        }
        Ok(self.dir(ns, kind).join(format!("{id}{DOC_SUFFIX}")))
    }

    fn lock_for(&self, path: &Path) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(path.to_owned()).or_default().clone()
    }

    /// Atomically replace the document `id`.
    pub fn put(
        &self,
        ns: &Namespace,
        kind: Kind,
        id: &str,
        bytes: &[u8],
    ) -> Result<(), StoreError> {
        let path = self.path(ns, kind, id)?;
        let lock = self.lock_for(&path);
        let _guard = lock.lock().expect("writer poisoned");
        write_atomic(&path, bytes)
    }

    /// Read-modify-write under the document's write lock. `update` gets the
    /// current bytes, if any.
    pub fn update<T, E>(
        &self,
        ns: &Namespace,
        kind: Kind,
        id: &str,
        update: impl FnOnce(Option<Vec<u8>>) -> Result<(Vec<u8>, T), E>,
    ) -> Result<T, E>
    where
        E: From<StoreError>,
    {
        let path = self.path(ns, kind, id)?;
        let lock = self.lock_for(&path);
        let _guard = lock.lock().expect("writer poisoned");
        let current = read_optional(&path)?;
        let (bytes, out) = update(current)?;
        write_atomic(&path, &bytes)?;
        Ok(out)
    }

    pub fn get(&self, ns: &Namespace, kind: Kind, id: &str) -> Result<Option<Vec<u8>>, StoreError> {
        match self.path(ns, kind, id) {
            Ok(path) => read_optional(&path),
            // A malformed id can never name a stored document.
            Err(StoreError::InvalidId(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Ids of every document of `kind`, sorted.
    pub fn list(&self, ns: &Namespace, kind: Kind) -> Result<Vec<String>, StoreError> {
        let dir = self.dir(ns, kind);
        let entries = match fs::read_dir(&dir) {
            Ok(entries) => entries,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(io_err(&dir)(e)),
        };
        let mut ids = Vec::new();
        for entry in entries {
            let name = entry.map_err(io_err(&dir))?.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(id) = name.strip_suffix(DOC_SUFFIX) {
                if is_valid_id(id) {
                    ids.push(id.to_owned());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Issue a new bearer token. Only its hash is kept.
    pub fn create_token(&self) -> Result<String, StoreError> {
        let token: String = rand::rng()
            .random::<[u8; 32]>()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        let path = self.root.join(TOKENS_FILE);
        let lock = self.lock_for(&path);
        let _guard = lock.lock().expect("writer poisoned");
        let mut hashes = self.token_hashes()?;
        hashes.push(token_digest(&token));
        hashes.sort();
        let bytes = serde_json::to_vec_pretty(&hashes).expect("strings serialize");
        write_atomic(&path, &bytes)?;
        Ok(token)
    }

    fn token_hashes(&self) -> Result<Vec<String>, StoreError> {
        match read_optional(&self.root.join(TOKENS_FILE))? {
            None => Ok(Vec::new()),
            Some(bytes) => serde_json::from_slice(&bytes).map_err(StoreError::CorruptTokens),
        }
    }

    /// The namespace a token opens, if it was issued by this store.
    pub fn resolve_token(&self, token: &str) -> Result<Option<Namespace>, StoreError> {
        let digest = token_digest(token);
        Ok(self
            .token_hashes()?
            .binary_search(&digest)
            .is_ok()
            .then(|| Namespace::for_token(token)))
    }
}

/// A fresh document id.
pub fn fresh_id() -> String {
    new_id()
}

fn read_optional(path: &Path) -> Result<Option<Vec<u8>>, StoreError> {
    match fs::read(path) {
        Ok(bytes) => Ok(Some(bytes)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(io_err(path)(e)),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().expect("documents live in a directory");
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let stem = path.file_name().and_then(|n| n.to_str()).unwrap_or("doc");
    let tmp = dir.join(format!(".{stem}.{}{TMP_SUFFIX}", new_id()));
    let result = (|| {
        let mut file = File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)?;
        // Persist the rename itself.
        File::open(dir)?.sync_all()
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err(path))
}

fn sweep_temporaries(dir: &Path) -> Result<(), StoreError> {
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let is_tmp = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with(TMP_SUFFIX));
        if is_tmp && path.is_file() {
            fs::remove_file(&path).map_err(io_err(&path))?;
        }
    }
    Ok(())
}
