//! On-disk response cache: one file per entry, named by request hash.
//!
//! File layout: a single JSON header line (`key`, `stored_at`, `bytes`)
//! followed by the raw response bytes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub key: String,
    pub response: String,
    pub stored_at: DateTime<Utc>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    key: String,
    stored_at: DateTime<Utc>,
    bytes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheStats {
    pub entries: usize,
    pub bytes: u64,
}

#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ResponseCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, key: &str) -> io::Result<PathBuf> {
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(invalid(format!("cache key `{key}` is not a hex digest")));
        }
        Ok(self.dir.join(key))
    }

    pub fn get(&self, key: &str) -> io::Result<Option<CacheEntry>> {
        let path = self.entry_path(key)?;
        let raw = match fs::read(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        let split = raw
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| invalid("cache entry lacks a header line"))?;
        let header: Header = serde_json::from_slice(&raw[..split]).map_err(|e| invalid(e.to_string()))?;
        let body = &raw[split + 1..];
        if header.key != key || header.bytes != body.len() {
            return Err(invalid(format!("cache entry {key} is corrupt")));
        }
        let response = String::from_utf8(body.to_vec()).map_err(|e| invalid(e.to_string()))?;
        Ok(Some(CacheEntry {
            key: header.key,
            response,
            stored_at: header.stored_at,
        }))
    }

    /// Stores an entry atomically (write to a temporary file, then rename),
    /// so concurrent writers of one key never expose a partial file.
    pub fn put(&self, key: &str, response: &str) -> io::Result<CacheEntry> {
        let path = self.entry_path(key)?;
        let stored_at = Utc::now();
        let header = Header {
            key: key.to_string(),
            stored_at,
            bytes: response.len(),
        };
        let mut content = serde_json::to_vec(&header).map_err(|e| invalid(e.to_string()))?;
        content.push(b'\n');
        content.extend_from_slice(response.as_bytes());
        let tmp = tempfile_in(&self.dir, key)?;
        fs::write(&tmp, &content)?;
        fs::rename(&tmp, &path)?;
        Ok(CacheEntry {
            key: key.to_string(),
            response: response.to_string(),
            stored_at,
        })
    }

    pub fn stats(&self) -> io::Result<CacheStats> {
        let mut stats = CacheStats::default();
        for entry in fs::read_dir(&self.dir)? {
            let entry = entry?;
            let meta = entry.metadata()?;
            if meta.is_file() && !entry.file_name().to_string_lossy().starts_with('.') {
                stats.entries += 1;
                stats.bytes += meta.len();
            }
        }
        Ok(stats)
    }

    pub fn clear(&self) -> io::Result<usize> {
        let mut removed = 0;
        for entry in fs::read_dir(&self.dir)? {
            let entry = entry?;
            if entry.metadata()?.is_file() {
                fs::remove_file(entry.path())?;
                removed += 1;
            }
        }
        Ok(removed)
    }
}

fn tempfile_in(dir: &Path, key: &str) -> io::Result<PathBuf> {
    Ok(dir.join(format!(".{key}.{}.tmp", uuid::Uuid::new_v4().simple())))
}
