//! Dataset manifests: line-oriented, tab-separated, human-diffable.
//!
//! Three header lines (format version, chunk length, frame shape) followed
//! by one record per pair file: path, video id, pair index, motion class,
//! camera class. Parse errors carry 1-based line numbers.

use std::fs;
use std::path::Path;

use crate::datagen::{CameraClass, MotionClass};
use crate::error::{Error, Result};
use crate::numerics::io::load_tensor;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path of the pair tensor, relative to the manifest's directory.
    pub path: String,
    pub video: u32,
    pub pair_index: u32,
    pub motion: MotionClass,
    pub camera: CameraClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub version: u32,
    pub chunk_len: usize,
    pub frame_h: usize,
    pub frame_w: usize,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(chunk_len: usize, frame_h: usize, frame_w: usize) -> Self {
        Self {
            version: MANIFEST_VERSION,
            chunk_len,
            frame_h,
            frame_w,
            entries: Vec::new(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("version\t{}\n", self.version));
        s.push_str(&format!("chunk_len\t{}\n", self.chunk_len));
        s.push_str(&format!("frame_shape\t{}\t{}\n", self.frame_h, self.frame_w));
        for e in &self.entries {
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                e.path,
                e.video,
                e.pair_index,
                e.motion.name(),
                e.camera.name()
            ));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let fail = |line: usize, msg: String| Error::Format(format!("manifest line {line}: {msg}"));
        let mut lines = text.lines().enumerate();

        let mut header = |key: &str| -> Result<(usize, Vec<String>)> {
            let (i, line) = lines
                .next()
                .ok_or_else(|| Error::Format(format!("manifest truncated before '{key}' header")))?;
            let fields: Vec<&str> = line.split('\t').collect();
            if fields[0] != key {
                return Err(fail(i + 1, format!("expected '{key}' header, got '{}'", fields[0])));
            }
            Ok((i + 1, fields[1..].iter().map(|s| s.to_string()).collect()))
        };

        let (ln, v) = header("version")?;
        let version: u32 = v
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail(ln, "bad version value".into()))?;
        if version != MANIFEST_VERSION {
            return Err(fail(ln, format!("unsupported manifest version {version}")));
        }
        let (ln, v) = header("chunk_len")?;
        let chunk_len: usize = v
            .first()
            .and_then(|s| s.parse().ok())
            .filter(|&l| l > 0)
            .ok_or_else(|| fail(ln, "bad chunk_len value".into()))?;
        let (ln, v) = header("frame_shape")?;
        if v.len() != 2 {
            return Err(fail(ln, format!("frame_shape needs 2 fields, got {}", v.len())));
        }
        let frame_h: usize = v[0].parse().map_err(|_| fail(ln, "bad frame height".into()))?;
        let frame_w: usize = v[1].parse().map_err(|_| fail(ln, "bad frame width".into()))?;

        let mut entries = Vec::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(fail(i + 1, format!("expected 5 fields, got {}", f.len())));
            }
            entries.push(ManifestEntry {
                path: f[0].to_string(),
                video: f[1].parse().map_err(|_| fail(i + 1, "bad video id".into()))?,
                pair_index: f[2].parse().map_err(|_| fail(i + 1, "bad pair index".into()))?,
                motion: MotionClass::parse(f[3]).map_err(|e| fail(i + 1, e.to_string()))?,
                camera: CameraClass::parse(f[4]).map_err(|e| fail(i + 1, e.to_string()))?,
            });
        }
        Ok(Self {
            version,
            chunk_len,
            frame_h,
            frame_w,
            entries,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Format(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Every referenced tensor exists under `base` and has shape
    /// [2, L, H, W]. Errors name the offending entry.
    pub fn validate_files(&self, base: &Path) -> Result<()> {
        let expect = vec![2, self.chunk_len, self.frame_h, self.frame_w];
        for e in &self.entries {
            let p = base.join(&e.path);
            let t = load_tensor(&p).map_err(|err| {
                Error::Format(format!("pair file {} unreadable: {err}", e.path))
            })?;
            if t.shape() != expect.as_slice() {
                return Err(Error::Format(format!(
                    "pair file {} has shape {:?}, expected {:?}",
                    e.path,
                    t.shape(),
                    expect
                )));
            }
        }
        Ok(())
    }
}
