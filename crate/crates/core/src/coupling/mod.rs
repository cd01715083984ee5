//! Pairwise costs, exact optimal transport between chunk batches, masking,
//! and the coupled-batch sampler used by training.
//!
//! With uniform marginals 1/n on both sides, the discrete transport problem
//! has a permutation optimum, so the solver returns an assignment; the plan
//! matrix is (1/n) times a permutation matrix. Masks restrict admissible
//! matches; an infeasible mask either errors or, with fallback enabled, is
//! replaced by a large finite penalty on forbidden entries so the spurious
//! matches are visible in the diagnostics.

pub mod assignment;
pub mod batch;
pub mod export;
pub mod solve;

pub use batch::{draw_coupled_batch, BatchPair, CoupledBatch, CouplingStrategy};
pub use solve::{adjacency_mass, make_mask, solve_ot_exact, Mask, MaskKind, OtOptions, TransportPlan};

use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;

/// Identity of one chunk inside a batch: which video, which ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChunkLabel {
    pub video: u32,
    pub index: u32,
}

/// Pairwise squared Euclidean costs with row/column labels.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    /// [rows, cols].
    pub m: Tensor,
    pub rows: Vec<ChunkLabel>,
    pub cols: Vec<ChunkLabel>,
}

impl CostMatrix {
    pub fn n_rows(&self) -> usize {
        self.m.shape()[0]
    }

    pub fn n_cols(&self) -> usize {
        self.m.shape()[1]
    }
}

fn flat_views(chunks: &[(ChunkLabel, &Tensor)]) -> Result<(Vec<ChunkLabel>, Vec<Vec<f64>>)> {
    if chunks.is_empty() {
        return Err(Error::Degenerate("cost matrix needs at least one chunk".into()));
    }
    let d = chunks[0].1.len();
    let mut labels = Vec::with_capacity(chunks.len());
    let mut vecs = Vec::with_capacity(chunks.len());
    for (i, (label, t)) in chunks.iter().enumerate() {
        if t.len() != d {
            return Err(Error::Shape(format!(
                "chunk {i} has {} elements, expected {d}",
                t.len()
            )));
        }
        labels.push(*label);
        vecs.push(t.data().to_vec());
    }
    Ok((labels, vecs))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Squared-distance cost matrix between two chunk lists (rows x cols).
pub fn cost_matrix_between(
    rows: &[(ChunkLabel, &Tensor)],
    cols: &[(ChunkLabel, &Tensor)],
) -> Result<CostMatrix> {
    let (row_labels, row_vecs) = flat_views(rows)?;
    let (col_labels, col_vecs) = flat_views(cols)?;
    if row_vecs[0].len() != col_vecs[0].len() {
        return Err(Error::Shape(format!(
            "row chunks have {} elements, column chunks {}",
            row_vecs[0].len(),
            col_vecs[0].len()
        )));
    }
    let (nr, nc) = (row_vecs.len(), col_vecs.len());
    let mut data = Vec::with_capacity(nr * nc);
    for r in &row_vecs {
        for c in &col_vecs {
            data.push(sq_dist(r, c));
        }
    }
    Ok(CostMatrix {
        m: Tensor::from_parts(vec![nr, nc], data),
        rows: row_labels,
        cols: col_labels,
    })
}

/// Square cost matrix of one chunk set against itself.
pub fn cost_matrix(chunks: &[(ChunkLabel, &Tensor)]) -> Result<CostMatrix> {
    cost_matrix_between(chunks, chunks)
}
