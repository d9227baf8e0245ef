//! Record of completed stages, kept as `manifest.json` in the output dir.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::PipelineError;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOCK_FILE: &str = ".lock";

/// SHA-256 of a file's contents, hex encoded.
pub fn file_digest(path: &Path) -> io::Result<String> {
    let mut f = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// SHA-256 of a value's JSON serialization.
pub fn value_digest<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(&json))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Input path to content digest.
    pub inputs: BTreeMap<String, String>,
    pub config_digest: String,
    /// Output path (relative to the output dir) to content digest.
    pub outputs: BTreeMap<String, String>,
    pub completed_at: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub format_version: u32,
    #[serde(default)]
    pub stages: BTreeMap<String, StageRecord>,
}

impl Default for PipelineManifest {
    fn default() -> Self {
        PipelineManifest {
            format_version: FORMAT_VERSION,
            stages: BTreeMap::new(),
        }
    }
}

impl PipelineManifest {
    /// Loads the manifest in `dir`; a missing file gives an empty manifest.
    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let path = dir.join(MANIFEST_FILE);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Self::default()),
            Err(e) => return Err(e.into()),
        };
        let manifest: Self = serde_json::from_str(&text).map_err(|_| PipelineError::ManifestUnreadable(path.clone()))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(PipelineError::ManifestUnreadable(path));
        }
        Ok(manifest)
    }

    /// Writes to a temporary file and renames it over the manifest.
    pub fn save(&self, dir: &Path) -> Result<(), PipelineError> {
        let path = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
        let mut f = File::create(&tmp)?;
        let mut json = serde_json::to_string_pretty(self).expect("manifest serializes");
        json.push('\n');
        f.write_all(json.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self, PipelineError> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(PipelineError::Locked(path)),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
