use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::record::CompletionRecord;

/// Content-addressed completion store: one `<prompt_hash>.json` per record.
///
/// Writes go through a temp file in the same directory and a rename, so a
/// reader never sees a partial record and concurrent writers of the same key
/// leave one complete file behind.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub entries: usize,
    pub bytes: u64,
}

fn is_hash(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_hexdigit())
}

impl Cache {
    /// Opens `dir`, creating it if needed.
    pub fn create(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    /// Opens an existing directory without creating it.
    pub fn open_existing(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(io::Error::new(io::ErrorKind::NotFound, format!("cache directory {} does not exist", dir.display())));
        }
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    pub fn get(&self, hash: &str) -> io::Result<Option<CompletionRecord>> {
        if !is_hash(hash) {
            return Ok(None);
        }
        match fs::read_to_string(self.path_for(hash)) {
            Ok(s) => serde_json::from_str(&s)
                .map(Some)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("corrupt cache entry {hash}: {e}"))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn put(&self, record: &CompletionRecord) -> io::Result<()> {
        if !is_hash(&record.prompt_hash) {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "prompt_hash must be hex"));
        }
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer_pretty(&mut tmp, record)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path_for(&record.prompt_hash)).map_err(|e| e.error)?;
        Ok(())
    }

    fn entries(&self) -> io::Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            let stem_ok = path.file_stem().and_then(|s| s.to_str()).is_some_and(is_hash);
            if stem_ok && path.extension().is_some_and(|e| e == "json") {
                out.push(path);
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn stats(&self) -> io::Result<CacheStats> {
        let entries = self.entries()?;
        let bytes = entries.iter().map(|p| fs::metadata(p).map(|m| m.len())).sum::<io::Result<u64>>()?;
        Ok(CacheStats { entries: entries.len(), bytes })
    }

    /// Removes every record and returns how many were deleted.
    pub fn clear(&self) -> io::Result<usize> {
        let entries = self.entries()?;
        for p in &entries {
            fs::remove_file(p)?;
        }
        Ok(entries.len())
    }
}
