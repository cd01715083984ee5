//! Binary PGM (P5, 8-bit) export for frames and plan heatmaps.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;

/// P5 header followed by one byte per pixel, row-major.
pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    if pixels.len() != width * height {
        return Err(Error::Shape(format!(
            "{}x{} image needs {} pixels, got {}",
            width,
            height,
            width * height,
            pixels.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    Ok(out)
}

/// Map unit-interval intensities to 0..=255 with round-to-nearest; values are
/// clamped so callers can pass raw model output.
pub fn gray_from_unit(values: &[f64]) -> Vec<u8> {
    values
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}

/// Write a rank-2 tensor as a PGM image, mapping [lo, hi] onto [0, 255].
pub fn write_frame_pgm(path: &Path, frame: &Tensor, lo: f64, hi: f64) -> Result<()> {
    if frame.rank() != 2 {
        return Err(Error::Shape(format!(
            "PGM export needs a rank-2 tensor, got rank {}",
            frame.rank()
        )));
    }
    if !(hi > lo) {
        return Err(Error::Config(format!("bad intensity range [{lo}, {hi}]")));
    }
    let (h, w) = (frame.shape()[0], frame.shape()[1]);
    let unit: Vec<f64> = frame.data().iter().map(|v| (v - lo) / (hi - lo)).collect();
    let bytes = encode_pgm(w, h, &gray_from_unit(&unit))?;
    fs::write(path, bytes)?;
    Ok(())
}
