//! Timestamped run directories.
//!
//! Artifacts are staged in a hidden temporary directory next to the final
//! location and the whole directory is renamed into place once the config
//! snapshot and manifest are written, so a run directory either exists
//! complete or not at all.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Command;
use crate::error::{Error, Result};

/// Version of the artifact layouts written by this crate.
pub const FORMAT_VERSION: u32 = 1;

pub const CONFIG_SNAPSHOT: &str = "config.toml";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub zakharov: &'static str,
    pub zakharov_core: &'static str,
    pub format: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            zakharov: env!("CARGO_PKG_VERSION"),
            zakharov_core: zakharov_core::VERSION,
            format: FORMAT_VERSION,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub subcommand: &'static str,
    pub created: String,
    pub versions: Versions,
    pub threads: usize,
    pub argv: Vec<String>,
    pub config: &'static str,
    pub artifacts: Vec<Artifact>,
}

pub struct RunDir {
    staging: tempfile::TempDir,
    parent: PathBuf,
    name: String,
    created: String,
    cmd: Command,
    artifacts: Vec<Artifact>,
}

impl RunDir {
    pub fn create(output_dir: &Path, cmd: Command) -> Result<Self> {
        std::fs::create_dir_all(output_dir)?;
        let now = chrono::Utc::now();
        let stamp = now.format("%Y%m%dT%H%M%S%.6fZ").to_string();
        let staging = tempfile::Builder::new().prefix(".tmp-").tempdir_in(output_dir)?;
        Ok(RunDir {
            staging,
            parent: output_dir.to_path_buf(),
            name: format!("{}-{stamp}", cmd.name()),
            created: now.to_rfc3339_opts(chrono::SecondsFormat::Micros, true),
            cmd,
            artifacts: Vec::new(),
        })
    }

    /// Staging path; artifacts move with it on [`RunDir::finish`].
    pub fn path(&self) -> &Path {
        self.staging.path()
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if name.contains(['/', '\\']) || name == CONFIG_SNAPSHOT || name == MANIFEST {
            return Err(Error::validation(format!("bad artifact name `{name}`")));
        }
        let mut f = std::fs::File::create(self.path().join(name))?;
        f.write_all(bytes)?;
        f.sync_all()?;
        self.artifacts.push(Artifact {
            name: name.to_owned(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    /// Renders an artifact into memory and writes it.
    pub fn write_with(&mut self, name: &str, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn artifact_names(&self) -> impl Iterator<Item = &str> {
        self.artifacts.iter().map(|a| a.name.as_str())
    }

    /// Writes the config snapshot and manifest and moves the directory into
    /// place. Returns the final path.
    pub fn finish(self, config: &toml::Table, argv: &[String]) -> Result<PathBuf> {
        let snapshot = toml::to_string(config).map_err(|e| Error::validation(e.to_string()))?;
        std::fs::write(self.path().join(CONFIG_SNAPSHOT), snapshot)?;
        let manifest = Manifest {
            subcommand: self.cmd.name(),
            created: self.created.clone(),
            versions: Versions::default(),
            threads: rayon::current_num_threads(),
            argv: argv.to_vec(),
            config: CONFIG_SNAPSHOT,
            artifacts: self.artifacts.clone(),
        };
        std::fs::write(self.path().join(MANIFEST), crate::formats::to_json(&manifest)?)?;
        let mut target = self.parent.join(&self.name);
        let mut bump = 1;
        while target.exists() {
            target = self.parent.join(format!("{}-{bump}", self.name));
            bump += 1;
        }
        let staged = self.staging.keep();
        std::fs::rename(&staged, &target)?;
        Ok(target)
    }
}
