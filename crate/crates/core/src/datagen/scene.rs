//! Histogram scene-cut detection.
//!
//! Per-frame intensity histograms (equal-width bins over [0, 1], L1
//! normalized) are compared between consecutive frames; an L1 distance above
//! the threshold marks a cut at the index of the second frame.

use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;

/// L1-normalized intensity histogram of one frame's pixels. Values are
/// clamped into [0, 1] before binning, so 1.0 lands in the last bin.
pub fn frame_histogram(pixels: &[f64], bins: usize) -> Result<Vec<f64>> {
    if bins < 2 {
        return Err(Error::Config(format!("need at least 2 bins, got {bins}")));
    }
    if pixels.is_empty() {
        return Err(Error::Degenerate("empty frame has no histogram".into()));
    }
    let mut h = vec![0.0f64; bins];
    for &v in pixels {
        let idx = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        h[idx] += 1.0;
    }
    let total = pixels.len() as f64;
    for b in h.iter_mut() {
        *b /= total;
    }
    Ok(h)
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Cut indices in ascending order; index i means the distance between the
/// histograms of frames i-1 and i exceeded the threshold.
pub fn detect_scene_cuts(frames: &Tensor, bins: usize, threshold: f64) -> Result<Vec<usize>> {
    if frames.rank() != 3 {
        return Err(Error::Shape(format!(
            "cut detection needs a [F,H,W] tensor, got rank {}",
            frames.rank()
        )));
    }
    if !(threshold > 0.0) {
        return Err(Error::Config(format!("threshold must be positive, got {threshold}")));
    }
    let f = frames.shape()[0];
    let px = frames.shape()[1] * frames.shape()[2];
    let data = frames.data();
    let mut cuts = Vec::new();
    let mut prev = frame_histogram(&data[0..px], bins)?;
    for i in 1..f {
        let cur = frame_histogram(&data[i * px..(i + 1) * px], bins)?;
        if l1(&prev, &cur) > threshold {
            cuts.push(i);
        }
        prev = cur;
    }
    Ok(cuts)
}
