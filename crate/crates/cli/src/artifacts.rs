use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use carpet_core::format::fmt_f64;
use carpet_core::spectrum::write_atomic;
use carpet_core::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Serialize, Deserialize)]
struct Entry {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    stage: &'a str,
    provenance: &'a Value,
    files: &'a [Entry],
}

#[derive(Deserialize)]
struct StoredManifest {
    provenance: Value,
    files: Vec<Entry>,
}

/// Files emitted by one stage, recorded with their hashes in
/// `<stage>.manifest.json`.
pub struct Artifacts {
    dir: PathBuf,
    stage: &'static str,
    provenance: Value,
    files: Vec<Entry>,
}

impl Artifacts {
    /// Entries of an earlier run with the same provenance are kept, so
    /// commands sharing a stage directory extend one manifest.
    pub fn new(dir: &Path, stage: &'static str, provenance: Value) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let files = std::fs::read_to_string(Self::manifest_path(dir, stage))
            .ok()
            .and_then(|t| serde_json::from_str::<StoredManifest>(&t).ok())
            .filter(|m| m.provenance == provenance)
            .map(|m| m.files.into_iter().filter(|e| dir.join(&e.name).is_file()).collect())
            .unwrap_or_default();
        Ok(Artifacts { dir: dir.to_path_buf(), stage, provenance, files })
    }

    fn manifest_path(dir: &Path, stage: &str) -> PathBuf {
        dir.join(format!("{stage}.manifest.json"))
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.retain(|e| e.name != name);
        self.files.push(Entry { name: name.into(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(mut self) -> Result<()> {
        self.files.sort_by(|a, b| a.name.cmp(&b.name));
        let m = Manifest { stage: self.stage, provenance: &self.provenance, files: &self.files };
        let mut text = serde_json::to_string_pretty(&m)?;
        text.push('\n');
        write_atomic(&Self::manifest_path(&self.dir, self.stage), text.as_bytes())
    }
}

/// CSV with a header row; integer columns first, then fixed 17-digit floats.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = (Vec<i64>, Vec<f64>)>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for (ints, floats) in rows {
        let cells: Vec<String> =
            ints.iter().map(i64::to_string).chain(floats.iter().map(|&v| fmt_f64(v))).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}
