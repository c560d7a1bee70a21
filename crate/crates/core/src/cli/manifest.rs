//! `manifest.json`: what a command read, what it wrote, and with which
//! configuration, with SHA-256 digests so tampering can be detected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// Digest of the canonical JSON of `config`.
    pub config_sha256: String,
    /// Effective configuration after defaults and flag overrides.
    pub config: serde_json::Value,
    /// Input paths as given on the command line.
    pub inputs: Vec<FileDigest>,
    /// Output paths relative to the output directory.
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path, recorded_as: String) -> Result<FileDigest> {
    Ok(FileDigest {
        path: recorded_as,
        sha256: sha256_hex(&fs::read(path)?),
    })
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Result<Self> {
        let config_sha256 = sha256_hex(&serde_json::to_vec(&config)?);
        Ok(Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            seed,
            config_sha256,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(file_digest(path, path.display().to_string())?);
        Ok(())
    }

    /// Records `dir/name`, which must already be written.
    pub fn add_output(&mut self, dir: &Path, name: &str) -> Result<()> {
        self.outputs.push(file_digest(&dir.join(name), name.to_string())?);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Re-hashes the configuration, every input (relative paths resolved
    /// against `cwd`) and every output (against the manifest's directory).
    /// Returns one message per mismatch.
    pub fn verify(&self, manifest_dir: &Path, cwd: &Path) -> Result<Vec<String>> {
        let mut problems = Vec::new();
        if sha256_hex(&serde_json::to_vec(&self.config)?) != self.config_sha256 {
            problems.push("config digest does not match the recorded configuration".to_string());
        }
        let mut check = |d: &FileDigest, path: PathBuf, kind: &str| match fs::read(&path) {
            Ok(bytes) if sha256_hex(&bytes) == d.sha256 => {}
            Ok(_) => problems.push(format!("{kind} `{}` has changed", d.path)),
            Err(e) => problems.push(format!("{kind} `{}` unreadable: {e}", d.path)),
        };
        for d in &self.inputs {
            check(d, cwd.join(&d.path), "input");
        }
        for d in &self.outputs {
            check(d, manifest_dir.join(&d.path), "output");
        }
        Ok(problems)
    }

    /// Like [`RunManifest::verify`] but fails on the first report.
    pub fn verify_strict(&self, manifest_dir: &Path, cwd: &Path) -> Result<()> {
        let problems = self.verify(manifest_dir, cwd)?;
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Manifest(problems.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        fs::write(&input, "x").unwrap();
        fs::write(dir.path().join("out.txt"), "y").unwrap();
        let mut m = RunManifest::new("test", Some(1), serde_json::json!({"a": 1})).unwrap();
        m.add_input(&input).unwrap();
        m.add_output(dir.path(), "out.txt").unwrap();
        m.write(dir.path()).unwrap();
        let back = RunManifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(back, m);
        assert!(back.verify(dir.path(), Path::new("/")).unwrap().is_empty());
        fs::write(&input, "z").unwrap();
        let problems = back.verify(dir.path(), Path::new("/")).unwrap();
        assert_eq!(problems.len(), 1);
        assert!(back.verify_strict(dir.path(), Path::new("/")).is_err());
    }
}
