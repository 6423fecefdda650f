use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the JSON encoding of `value`.
pub fn digest_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(digest_bytes(&serde_json::to_vec(value)?))
}

/// Write to a temporary file in the target directory, then rename over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub stage: String,
    /// Digest of the stage inputs and configuration; names the artifact.
    pub key: String,
    /// Digest of the artifact bytes.
    pub artifact: String,
    pub path: PathBuf,
    pub hit: bool,
}

/// Content-addressed artifact store: `<root>/<stage>/<key>.<ext>` with a
/// `.sha256` sidecar holding the artifact digest.
#[derive(Debug)]
pub struct Cache {
    root: PathBuf,
    log: Mutex<Vec<CacheEntry>>,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into(), log: Mutex::new(Vec::new()) }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn paths(&self, stage: &str, key: &str, ext: &str) -> (PathBuf, PathBuf) {
        let p = self.root.join(stage).join(format!("{key}.{ext}"));
        let side = p.with_extension(format!("{ext}.sha256"));
        (p, side)
    }

    /// The entry for `key` if both artifact and sidecar exist. Bytes are not
    /// verified here; [`Cache::load`] does that.
    pub fn peek(&self, stage: &str, key: &str, ext: &str) -> Option<CacheEntry> {
        let (path, side) = self.paths(stage, key, ext);
        let artifact = fs::read_to_string(&side).ok()?.trim().to_string();
        path.is_file().then(|| CacheEntry { stage: stage.into(), key: key.into(), artifact, path, hit: true })
    }

    /// Artifact bytes, checked against the sidecar digest.
    pub fn load(&self, entry: &CacheEntry) -> Result<Vec<u8>> {
        let bytes = fs::read(&entry.path).map_err(|e| Error::io(&entry.path, e))?;
        let actual = digest_bytes(&bytes);
        if actual != entry.artifact {
            return Err(Error::format(
                entry.path.display().to_string(),
                format!("cached artifact is corrupt: digest {actual}, recorded {}", entry.artifact),
            ));
        }
        Ok(bytes)
    }

    pub fn store(&self, stage: &str, key: &str, ext: &str, bytes: &[u8]) -> Result<CacheEntry> {
        let (path, side) = self.paths(stage, key, ext);
        let artifact = digest_bytes(bytes);
        atomic_write(&path, bytes)?;
        atomic_write(&side, artifact.as_bytes())?;
        Ok(CacheEntry { stage: stage.into(), key: key.into(), artifact, path, hit: false })
    }

    /// Cached bytes for `key`, or the output of `compute` stored under it.
    pub fn get_or_compute(
        &self,
        stage: &str,
        key: &str,
        ext: &str,
        compute: impl FnOnce() -> Result<Vec<u8>>,
    ) -> Result<(CacheEntry, Vec<u8>)> {
        let (entry, bytes) = match self.peek(stage, key, ext) {
            Some(e) => {
                let b = self.load(&e)?;
                (e, b)
            }
            None => {
                let b = compute()?;
                (self.store(stage, key, ext, &b)?, b)
            }
        };
        self.record(&entry);
        Ok((entry, bytes))
    }

    pub fn record(&self, entry: &CacheEntry) {
        self.log.lock().expect("cache log poisoned").push(entry.clone());
    }

    /// Every entry served or written so far, in completion order.
    pub fn entries(&self) -> Vec<CacheEntry> {
        self.log.lock().expect("cache log poisoned").clone()
    }
}
