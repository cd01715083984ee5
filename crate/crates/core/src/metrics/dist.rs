//! Exact transport distance between equally sized chunk sets.

use crate::coupling::solve::{make_mask, solve_ot_exact, MaskKind, OtOptions};
use crate::coupling::{cost_matrix_between, ChunkLabel};
use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;

/// Square root of the summed matched squared distances under the optimal
/// assignment, i.e. sqrt(n * plan objective). Zero exactly when the two
/// sets agree as multisets.
pub fn batch_w2(set_a: &[Tensor], set_b: &[Tensor]) -> Result<f64> {
    if set_a.len() != set_b.len() {
        return Err(Error::Shape(format!(
            "set sizes differ: {} vs {}",
            set_a.len(),
            set_b.len()
        )));
    }
    if set_a.is_empty() {
        return Err(Error::Degenerate("empty chunk sets".into()));
    }
    let label = |i: usize| ChunkLabel {
        video: 0,
        index: i as u32,
    };
    let rows: Vec<(ChunkLabel, &Tensor)> =
        set_a.iter().enumerate().map(|(i, t)| (label(i), t)).collect();
    let cols: Vec<(ChunkLabel, &Tensor)> =
        set_b.iter().enumerate().map(|(i, t)| (label(i), t)).collect();
    let cm = cost_matrix_between(&rows, &cols)?;
    let mask = make_mask(&cm.rows, &cm.cols, MaskKind::None);
    let plan = solve_ot_exact(&cm, &mask, &OtOptions::default())?;
    Ok((set_a.len() as f64 * plan.objective).sqrt())
}
