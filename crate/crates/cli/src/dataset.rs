//! Reading a generated dataset back into memory.

use std::path::{Path, PathBuf};

use chunkflow_core::datagen::chunks::ChunkPair;
use chunkflow_core::datagen::manifest::DatasetManifest;
use chunkflow_core::datagen::{CameraClass, MotionClass};
use chunkflow_core::error::{Error, Result};
use chunkflow_core::numerics::io::load_tensor;
use chunkflow_core::numerics::tensor::Tensor;

use crate::config::Config;

/// File names written by gen-data next to the pair tensors.
pub const FULL_MANIFEST: &str = "manifest.tsv";
pub const TRAIN_MANIFEST: &str = "split_train.tsv";
pub const EVAL_MANIFEST: &str = "split_eval.tsv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    All,
    Train,
    Eval,
}

impl Split {
    pub fn manifest_file(self) -> &'static str {
        match self {
            Self::All => FULL_MANIFEST,
            Self::Train => TRAIN_MANIFEST,
            Self::Eval => EVAL_MANIFEST,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Self::All => "dataset",
            Self::Train => "train split",
            Self::Eval => "eval split",
        }
    }
}

/// Pairs plus the manifest they came from; `pairs[i]` matches
/// `manifest.entries[i]`, so class labels stay addressable by index.
#[derive(Debug)]
pub struct LoadedDataset {
    pub manifest: DatasetManifest,
    pub pairs: Vec<ChunkPair>,
}

impl LoadedDataset {
    pub fn class_of(&self, i: usize) -> (MotionClass, CameraClass) {
        let e = &self.manifest.entries[i];
        (e.motion, e.camera)
    }

    pub fn find_pair(&self, video: u32, pair_index: u32) -> Option<&ChunkPair> {
        self.pairs
            .iter()
            .find(|p| p.video == video && p.pair_index == pair_index)
    }

    /// d = L*H*W of every chunk.
    pub fn flat_dim(&self) -> usize {
        self.manifest.chunk_len * self.manifest.frame_h * self.manifest.frame_w
    }
}

pub fn dataset_dir(cfg: &Config) -> PathBuf {
    PathBuf::from(cfg.text("data.dir"))
}

/// Load every pair listed by the split's manifest. Pair files live relative
/// to the dataset directory and must match the manifest's chunk geometry.
pub fn load_split(cfg: &Config, split: Split) -> Result<LoadedDataset> {
    let dir = dataset_dir(cfg);
    let manifest = DatasetManifest::load(&dir.join(split.manifest_file())).map_err(|e| {
        Error::Config(format!(
            "cannot load the {} from {}: {e} (run gen-data first)",
            split.describe(),
            dir.display()
        ))
    })?;
    if manifest.entries.is_empty() {
        return Err(Error::Degenerate(format!(
            "the {} in {} lists no pairs",
            split.describe(),
            dir.display()
        )));
    }
    let l = manifest.chunk_len;
    let expect = [2, l, manifest.frame_h, manifest.frame_w];
    let mut pairs = Vec::with_capacity(manifest.entries.len());
    for e in &manifest.entries {
        let t = load_tensor(&dir.join(&e.path))
            .map_err(|err| Error::Format(format!("pair file {}: {err}", e.path)))?;
        if t.shape() != expect {
            return Err(Error::Format(format!(
                "pair file {} has shape {:?}, expected {:?}",
                e.path,
                t.shape(),
                expect
            )));
        }
        pairs.push(ChunkPair {
            video: e.video,
            pair_index: e.pair_index,
            // Pairs tile cut-free videos at stride 2L, so the start frame
            // is recoverable from the ordinal.
            start_frame: 2 * l * e.pair_index as usize,
            x0: t.index_leading(0)?,
            x1: t.index_leading(1)?,
        });
    }
    Ok(LoadedDataset { manifest, pairs })
}

/// Ground-truth chunk chains for rollout scoring: per video, the flattened
/// chunks x0(p), x1(p), x0(p+1), ... across consecutively indexed pairs,
/// clipped to `len` chunks. Videos whose first run of pairs is too short
/// are skipped.
pub fn chunk_chains(ds: &LoadedDataset, len: usize) -> Vec<(u32, Vec<Tensor>)> {
    let mut videos: Vec<u32> = Vec::new();
    for p in &ds.pairs {
        if !videos.contains(&p.video) {
            videos.push(p.video);
        }
    }
    let mut chains = Vec::new();
    for v in videos {
        let mut pairs: Vec<&ChunkPair> = ds.pairs.iter().filter(|p| p.video == v).collect();
        pairs.sort_by_key(|p| p.pair_index);
        let mut chunks: Vec<Tensor> = Vec::new();
        let mut expected = None;
        for p in pairs {
            match expected {
                Some(next) if p.pair_index != next => break,
                _ => {}
            }
            expected = Some(p.pair_index + 1);
            chunks.push(p.x0_flat());
            chunks.push(p.x1_flat());
            if chunks.len() >= len {
                break;
            }
        }
        if chunks.len() >= len {
            chunks.truncate(len);
            chains.push((v, chunks));
        }
    }
    chains
}

/// Shared guard for checkpoint paths coming out of the config.
pub fn require_path(cfg: &Config, key: &str) -> Result<PathBuf> {
    let raw = cfg.text(key);
    if raw.is_empty() {
        return Err(Error::Config(format!("config key '{key}' must name a file")));
    }
    let path = Path::new(raw);
    if !path.exists() {
        return Err(Error::Config(format!("{key} = {raw}: file does not exist")));
    }
    Ok(path.to_path_buf())
}
