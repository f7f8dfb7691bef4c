//! Output directory bookkeeping and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl FileDigest {
    fn of(path: String, bytes: &[u8]) -> Self {
        FileDigest {
            path,
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        }
    }
}

/// Writes files into one directory and remembers their digests.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<FileDigest>,
}

impl Outputs {
    pub fn new(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileDigest::of(name.to_owned(), bytes));
        Ok(())
    }

    /// Runs a core CSV writer into memory, then to `name`.
    pub fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> kflow::Result<()>,
    ) -> anyhow::Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write_bytes(name, &buf)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut buf = serde_json::to_vec_pretty(value)?;
        buf.push(b'\n');
        self.write_bytes(name, &buf)
    }

    pub fn files(&self) -> &[FileDigest] {
        &self.files
    }
}

/// Reproducibility record written next to the exports. Carries digests, not
/// timestamps, so identical runs produce identical manifests.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub config_sha256: String,
    pub inputs: Vec<FileDigest>,
    pub counts: &'a BTreeMap<String, u64>,
    pub warnings: &'a [String],
    pub outputs: Vec<FileDigest>,
}

pub fn config_hash(config: &RunConfig) -> anyhow::Result<String> {
    Ok(sha256_hex(&serde_json::to_vec(config)?))
}

pub fn digest_inputs(paths: &[&Path]) -> anyhow::Result<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| {
            let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(FileDigest::of(p.display().to_string(), &bytes))
        })
        .collect()
}
