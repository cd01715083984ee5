//! Run directories.
//!
//! Each command that produces artifacts gets a fresh directory named
//! `<command>-<epoch seconds>-<config hash>`, bumped with an ordinal on
//! collision so no run ever overwrites another. While the command works the
//! directory holds a LOCK file; `finalize` replaces it with a manifest
//! listing every artifact's size and digest, which `verify` re-checks.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use chunkflow_core::error::{Error, Result};
use chunkflow_core::numerics::rng::fnv1a64;

pub const LOCK_FILE: &str = "LOCK";
pub const MANIFEST_FILE: &str = "run_manifest.tsv";

#[derive(Debug)]
pub struct RunDir {
    path: PathBuf,
}

impl RunDir {
    /// Create a fresh, locked run directory under `parent`.
    pub fn create(parent: &Path, command: &str, config_hash: u64) -> Result<Self> {
        fs::create_dir_all(parent)?;
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let stem = format!("{command}-{secs}-{:08x}", config_hash & 0xffff_ffff);
        for ordinal in 0u32.. {
            let name = if ordinal == 0 {
                stem.clone()
            } else {
                format!("{stem}-{ordinal}")
            };
            let path = parent.join(&name);
            match fs::create_dir(&path) {
                Ok(()) => return Self::claim_created(path),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e.into()),
            }
        }
        unreachable!("u32 ordinal space exhausted");
    }

    /// Use `dir` itself as the run directory. It must not already contain
    /// anything; datasets get stable paths this way without ever clobbering
    /// an existing one.
    pub fn claim(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        if fs::read_dir(dir)?.next().is_some() {
            return Err(Error::Config(format!(
                "directory {} is not empty; refusing to overwrite it",
                dir.display()
            )));
        }
        Self::claim_created(dir.to_path_buf())
    }

    fn claim_created(path: PathBuf) -> Result<Self> {
        fs::write(path.join(LOCK_FILE), format!("{}\n", std::process::id()))?;
        Ok(Self { path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Absolute path for a relative artifact, parent directories created.
    pub fn file(&self, rel: &str) -> Result<PathBuf> {
        let p = self.path.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        Ok(p)
    }

    pub fn write_text(&self, rel: &str, text: &str) -> Result<()> {
        fs::write(self.file(rel)?, text)?;
        Ok(())
    }

    /// Hash every artifact into the manifest and drop the lock. Returns the
    /// run directory path.
    pub fn finalize(self) -> Result<PathBuf> {
        let mut files = Vec::new();
        walk(&self.path, &self.path, &mut files)?;
        files.sort();
        let mut manifest = String::new();
        for rel in &files {
            let bytes = fs::read(self.path.join(rel))?;
            let _ = writeln!(manifest, "{rel}\t{}\t{:016x}", bytes.len(), fnv1a64(&bytes));
        }
        fs::write(self.path.join(MANIFEST_FILE), manifest)?;
        fs::remove_file(self.path.join(LOCK_FILE))?;
        Ok(self.path)
    }
}

/// Collect slash-separated relative paths of every file under `dir`,
/// skipping the lock and the manifest itself.
fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            walk(root, &path, out)?;
            continue;
        }
        let rel: Vec<String> = path
            .strip_prefix(root)
            .expect("walk stays under root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        let rel = rel.join("/");
        if rel != LOCK_FILE && rel != MANIFEST_FILE {
            out.push(rel);
        }
    }
    Ok(())
}

pub struct VerifyOutcome {
    /// Files that matched their manifest entry.
    pub intact: usize,
    /// Human-readable problems; empty means the run checks out.
    pub issues: Vec<String>,
}

/// Re-hash a finalized run directory against its manifest.
pub fn verify_dir(dir: &Path) -> Result<VerifyOutcome> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| {
        Error::Format(format!("{}: no readable manifest: {e}", dir.display()))
    })?;
    let mut outcome = VerifyOutcome {
        intact: 0,
        issues: Vec::new(),
    };
    if dir.join(LOCK_FILE).exists() {
        outcome.issues.push("LOCK present: run never finalized".into());
    }
    for (idx, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Format(format!(
                "{}: manifest line {}: expected 3 fields, got {}",
                dir.display(),
                idx + 1,
                fields.len()
            )));
        }
        let (rel, size, digest) = (fields[0], fields[1], fields[2]);
        let want_size: u64 = size.parse().map_err(|_| {
            Error::Format(format!("{}: manifest line {}: bad size", dir.display(), idx + 1))
        })?;
        let want_digest = u64::from_str_radix(digest, 16).map_err(|_| {
            Error::Format(format!("{}: manifest line {}: bad digest", dir.display(), idx + 1))
        })?;
        match fs::read(dir.join(rel)) {
            Err(_) => outcome.issues.push(format!("missing: {rel}")),
            Ok(bytes) => {
                if bytes.len() as u64 != want_size || fnv1a64(&bytes) != want_digest {
                    outcome.issues.push(format!("changed: {rel}"));
                } else {
                    outcome.intact += 1;
                }
            }
        }
    }
    Ok(outcome)
}
