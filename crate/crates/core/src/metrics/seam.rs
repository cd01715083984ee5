//! Smoothness across the boundary between the input chunk and its
//! generated continuation.

use crate::datagen::blob::blob_centroid;
use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;

fn check_chunks(x0: &Tensor, generated: &Tensor, min_input_frames: usize) -> Result<()> {
    if x0.shape().len() != 3 || generated.shape().len() != 3 {
        return Err(Error::Shape(format!(
            "seam metrics need [frames, h, w] chunks, got ranks {} and {}",
            x0.shape().len(),
            generated.shape().len()
        )));
    }
    if x0.shape()[1..] != generated.shape()[1..] {
        return Err(Error::Shape(format!(
            "frame shapes differ: {:?} vs {:?}",
            &x0.shape()[1..],
            &generated.shape()[1..]
        )));
    }
    if x0.shape()[0] < min_input_frames {
        return Err(Error::Degenerate(format!(
            "input chunk needs at least {min_input_frames} frames, got {}",
            x0.shape()[0]
        )));
    }
    if generated.shape()[0] == 0 {
        return Err(Error::Degenerate("empty generated chunk".into()));
    }
    Ok(())
}

fn frame_mse(a: &Tensor, b: &Tensor) -> Result<f64> {
    let diff = a.sub(b)?;
    Ok(diff.norm_sq() / diff.data().len() as f64)
}

/// (jump, accel) at the seam. Jump is the MSE between the last input frame
/// and the first generated frame; accel is the mean squared second
/// difference across the boundary, per pixel:
/// mean((g0 - 2*x_last + x_prev)^2).
pub fn seam_metrics(x0: &Tensor, generated: &Tensor) -> Result<(f64, f64)> {
    check_chunks(x0, generated, 2)?;
    let l = x0.shape()[0];
    let x_prev = x0.index_leading(l - 2)?;
    let x_last = x0.index_leading(l - 1)?;
    let g0 = generated.index_leading(0)?;
    let jump = frame_mse(&x_last, &g0)?;
    let second = g0.sub(&x_last)?.sub(&x_last.sub(&x_prev)?)?;
    let accel = second.norm_sq() / second.data().len() as f64;
    Ok((jump, accel))
}

/// Mean squared second difference of the blob-centroid track, over every
/// triple that touches the seam or lies inside the generated chunk. For an
/// input of L frames the window covers track centers L-1 through the
/// second-to-last generated frame.
pub fn motion_continuity(x0: &Tensor, generated: &Tensor) -> Result<f64> {
    check_chunks(x0, generated, 2)?;
    let mut track = Vec::new();
    for chunk in [x0, generated] {
        for k in 0..chunk.shape()[0] {
            track.push(blob_centroid(&chunk.index_leading(k)?)?);
        }
    }
    let l = x0.shape()[0];
    if track.len() < l + 1 {
        return Err(Error::Degenerate(
            "generated chunk too short for a second difference".into(),
        ));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for i in (l - 1)..(track.len() - 1) {
        let dr = track[i + 1].0 - 2.0 * track[i].0 + track[i - 1].0;
        let dc = track[i + 1].1 - 2.0 * track[i].1 + track[i - 1].1;
        total += dr * dr + dc * dc;
        count += 1;
    }
    Ok(total / count as f64)
}
