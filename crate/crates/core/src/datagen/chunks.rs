//! Chunk tiling and training-pair extraction.
//!
//! Videos are split at scene cuts into segments; within each segment,
//! [`tile_chunks`] tiles consecutive L-frame chunks (stride L) and
//! [`chunk_video`] extracts disjoint (current, succeeding) pairs at stride
//! 2L. No chunk ever spans a cut, and no frame appears in two pairs.

use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;

/// One L-frame chunk with its provenance.
#[derive(Debug, Clone)]
pub struct Chunk {
    pub video: u32,
    /// Ordinal of this chunk within its video (not within its segment).
    pub index: u32,
    pub start_frame: usize,
    /// [L, H, W].
    pub data: Tensor,
}

/// A training pair: x1 is the chunk that immediately follows x0 in time.
#[derive(Debug, Clone)]
pub struct ChunkPair {
    pub video: u32,
    /// Ordinal of this pair within its video.
    pub pair_index: u32,
    /// Frame index where x0 begins.
    pub start_frame: usize,
    /// [L, H, W] each.
    pub x0: Tensor,
    pub x1: Tensor,
}

impl ChunkPair {
    pub fn chunk_len(&self) -> usize {
        self.x0.shape()[0]
    }

    /// Flattened chunk size d = L*H*W.
    pub fn flat_dim(&self) -> usize {
        self.x0.len()
    }

    pub fn x0_flat(&self) -> Tensor {
        self.x0.clone().flattened()
    }

    pub fn x1_flat(&self) -> Tensor {
        self.x1.clone().flattened()
    }
}

/// Sorted, deduplicated in-range cut indices -> segment [start, end) bounds.
fn segments(f: usize, cuts: &[usize]) -> Result<Vec<(usize, usize)>> {
    let mut cs: Vec<usize> = cuts.to_vec();
    cs.sort_unstable();
    cs.dedup();
    if let Some(&bad) = cs.iter().find(|&&c| c == 0 || c >= f) {
        return Err(Error::Config(format!(
            "cut index {bad} outside the valid range 1..{f}"
        )));
    }
    let mut bounds = Vec::with_capacity(cs.len() + 1);
    let mut start = 0;
    for c in cs {
        bounds.push((start, c));
        start = c;
    }
    bounds.push((start, f));
    Ok(bounds)
}

fn check_video(frames: &Tensor, l: usize) -> Result<usize> {
    if frames.rank() != 3 {
        return Err(Error::Shape(format!(
            "chunking needs a [F,H,W] tensor, got rank {}",
            frames.rank()
        )));
    }
    if l == 0 {
        return Err(Error::Config("chunk length must be positive".into()));
    }
    Ok(frames.shape()[0])
}

/// Consecutive L-frame chunks at stride L within each cut-free segment.
/// Chunks that would span a cut or run past a segment end are dropped.
pub fn tile_chunks(video: u32, frames: &Tensor, l: usize, cuts: &[usize]) -> Result<Vec<Chunk>> {
    let f = check_video(frames, l)?;
    let mut out = Vec::new();
    let mut index = 0u32;
    for (s, e) in segments(f, cuts)? {
        let n = (e - s) / l;
        for j in 0..n {
            let start = s + j * l;
            out.push(Chunk {
                video,
                index,
                start_frame: start,
                data: frames.slice_leading(start, l)?,
            });
            index += 1;
        }
    }
    Ok(out)
}

/// Disjoint (x0, x1) pairs at stride 2L within each cut-free segment.
pub fn chunk_video(video: u32, frames: &Tensor, l: usize, cuts: &[usize]) -> Result<Vec<ChunkPair>> {
    let f = check_video(frames, l)?;
    let mut out = Vec::new();
    let mut pair_index = 0u32;
    for (s, e) in segments(f, cuts)? {
        let n = (e - s) / (2 * l);
        for j in 0..n {
            let start = s + j * 2 * l;
            out.push(ChunkPair {
                video,
                pair_index,
                start_frame: start,
                x0: frames.slice_leading(start, l)?,
                x1: frames.slice_leading(start + l, l)?,
            });
            pair_index += 1;
        }
    }
    Ok(out)
}
