use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spectral_gate::Tolerances;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileHash {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
        Ok(Self {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub spectral_gate: String,
    pub core: String,
}

/// Provenance record of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub inputs: Vec<FileHash>,
    pub tolerances: Tolerances,
    pub versions: Versions,
    pub wall_time_s: f64,
    pub outputs: Vec<FileHash>,
    pub pass: bool,
}

impl RunManifest {
    pub fn build(
        command_line: Vec<String>,
        inputs: &[PathBuf],
        outputs: &[PathBuf],
        tolerances: Tolerances,
        wall: Duration,
        pass: bool,
    ) -> Result<Self> {
        Ok(Self {
            command_line,
            inputs: inputs.iter().map(|p| FileHash::of(p)).collect::<Result<_>>()?,
            outputs: outputs.iter().map(|p| FileHash::of(p)).collect::<Result<_>>()?,
            tolerances,
            versions: Versions {
                spectral_gate: env!("CARGO_PKG_VERSION").into(),
                core: spectral_gate::VERSION.into(),
            },
            wall_time_s: wall.as_secs_f64(),
            pass,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Every referenced input and output exists and still matches its hash.
    pub fn verify(&self) -> Result<()> {
        for f in self.inputs.iter().chain(&self.outputs) {
            let now = FileHash::of(&f.path)?;
            if now.sha256 != f.sha256 {
                bail!("{} changed since the run", f.path.display());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_modified_output() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o.txt");
        fs::write(&out, "abc").unwrap();
        let m = RunManifest::build(vec!["x".into()], &[], &[out.clone()], Tolerances::default(), Duration::ZERO, true)
            .unwrap();
        assert_eq!(
            m.outputs[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        m.verify().unwrap();
        fs::write(&out, "abd").unwrap();
        assert!(m.verify().is_err());
    }
}
