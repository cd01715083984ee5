//! Re-hash finalized run directories against their manifests.

use std::path::{Path, PathBuf};

use chunkflow_core::error::{Error, Result};

use crate::commands::Ctx;
use crate::dataset::dataset_dir;
use crate::rundir::{verify_dir, MANIFEST_FILE};

pub fn run(ctx: &Ctx, target: Option<&Path>) -> Result<()> {
    let mut dirs: Vec<PathBuf> = Vec::new();
    match target {
        Some(dir) => dirs.push(dir.to_path_buf()),
        None => {
            // No explicit target: sweep every finalized run under the output
            // root, plus the dataset directory when it has a manifest.
            if let Ok(entries) = std::fs::read_dir(&ctx.out_root) {
                for e in entries.flatten() {
                    let p = e.path();
                    if p.is_dir() && p.join(MANIFEST_FILE).is_file() {
                        dirs.push(p);
                    }
                }
            }
            dirs.sort();
            let data = dataset_dir(&ctx.cfg);
            if data.join(MANIFEST_FILE).is_file() {
                dirs.push(data);
            }
            if dirs.is_empty() {
                return Err(Error::Config(format!(
                    "nothing to verify: no run directories under {} and no dataset manifest",
                    ctx.out_root.display()
                )));
            }
        }
    }

    let mut bad = 0usize;
    for dir in &dirs {
        let outcome = verify_dir(dir)?;
        if outcome.issues.is_empty() {
            println!("ok {} ({} files)", dir.display(), outcome.intact);
        } else {
            bad += 1;
            for issue in &outcome.issues {
                println!("{}: {issue}", dir.display());
            }
        }
    }
    if bad > 0 {
        return Err(Error::Format(format!(
            "{bad} of {} directories failed verification",
            dirs.len()
        )));
    }
    Ok(())
}
