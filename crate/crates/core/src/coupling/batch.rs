//! Training-batch construction under the three coupling strategies.

use crate::coupling::solve::{make_mask, solve_ot_exact, MaskKind, OtOptions};
use crate::coupling::{cost_matrix_between, ChunkLabel};
use crate::datagen::chunks::ChunkPair;
use crate::error::{Error, Result};
use crate::numerics::rng::Rng;
use crate::numerics::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingStrategy {
    /// x0 and x1 come from different randomly drawn pairs.
    Independent,
    /// Stored same-video consecutive pairs, drawn without replacement when
    /// the dataset allows it.
    Inherent,
    /// Independent draws re-matched by an exact transport plan on the batch.
    MinibatchOt,
}

impl CouplingStrategy {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Self::Independent),
            "inherent" => Ok(Self::Inherent),
            "minibatch_ot" => Ok(Self::MinibatchOt),
            other => Err(Error::Config(format!(
                "unknown coupling strategy '{other}' (expected independent|inherent|minibatch_ot)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Independent => "independent",
            Self::Inherent => "inherent",
            Self::MinibatchOt => "minibatch_ot",
        }
    }
}

/// One training pair of flattened chunks.
#[derive(Debug, Clone)]
pub struct BatchPair {
    pub x0: Tensor,
    pub x1: Tensor,
    /// (video, pair index) when both chunks come from one stored pair.
    pub source: Option<(u32, u32)>,
}

#[derive(Debug, Clone)]
pub struct CoupledBatch {
    pub pairs: Vec<BatchPair>,
    /// Set when an inherent draw exceeded the dataset and fell back to
    /// sampling with replacement.
    pub with_replacement: bool,
}

/// Match two equally sized pools by exact transport (no mask) and return,
/// per x0 slot, the index of its matched x1.
pub fn match_pools(x0s: &[&Tensor], x1s: &[&Tensor], opts: &OtOptions) -> Result<Vec<usize>> {
    if x0s.len() != x1s.len() {
        return Err(Error::Shape(format!(
            "pool sizes differ: {} vs {}",
            x0s.len(),
            x1s.len()
        )));
    }
    let label = |i: usize| ChunkLabel {
        video: 0,
        index: i as u32,
    };
    let rows: Vec<(ChunkLabel, &Tensor)> = x0s.iter().enumerate().map(|(i, t)| (label(i), *t)).collect();
    let cols: Vec<(ChunkLabel, &Tensor)> = x1s.iter().enumerate().map(|(i, t)| (label(i), *t)).collect();
    let cm = cost_matrix_between(&rows, &cols)?;
    let mask = make_mask(&cm.rows, &cm.cols, MaskKind::None);
    Ok(solve_ot_exact(&cm, &mask, opts)?.assignment)
}

/// Draw one coupled batch. Index draws happen in a fixed order (all x0
/// indices, then all x1 indices where the strategy needs them) so that
/// strategies sharing a seed see identical pools.
pub fn draw_coupled_batch(
    strategy: CouplingStrategy,
    dataset: &[ChunkPair],
    rng: &mut Rng,
    batch_size: usize,
    ot_opts: &OtOptions,
) -> Result<CoupledBatch> {
    if dataset.is_empty() {
        return Err(Error::Degenerate("empty chunk-pair dataset".into()));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let n = dataset.len();
    match strategy {
        CouplingStrategy::Inherent => {
            let (indices, with_replacement) = if batch_size <= n {
                (rng.distinct_indices(n, batch_size), false)
            } else {
                ((0..batch_size).map(|_| rng.below(n)).collect(), true)
            };
            let pairs = indices
                .into_iter()
                .map(|i| {
                    let p = &dataset[i];
                    BatchPair {
                        x0: p.x0_flat(),
                        x1: p.x1_flat(),
                        source: Some((p.video, p.pair_index)),
                    }
                })
                .collect();
            Ok(CoupledBatch {
                pairs,
                with_replacement,
            })
        }
        CouplingStrategy::Independent => {
            let i0: Vec<usize> = (0..batch_size).map(|_| rng.below(n)).collect();
            let i1: Vec<usize> = (0..batch_size).map(|_| rng.below(n)).collect();
            let pairs = i0
                .into_iter()
                .zip(i1)
                .map(|(a, b)| BatchPair {
                    x0: dataset[a].x0_flat(),
                    x1: dataset[b].x1_flat(),
                    source: None,
                })
                .collect();
            Ok(CoupledBatch {
                pairs,
                with_replacement: false,
            })
        }
        CouplingStrategy::MinibatchOt => {
            let i0: Vec<usize> = (0..batch_size).map(|_| rng.below(n)).collect();
            let i1: Vec<usize> = (0..batch_size).map(|_| rng.below(n)).collect();
            let x0s: Vec<Tensor> = i0.iter().map(|&i| dataset[i].x0_flat()).collect();
            let x1s: Vec<Tensor> = i1.iter().map(|&i| dataset[i].x1_flat()).collect();
            let x0_refs: Vec<&Tensor> = x0s.iter().collect();
            let x1_refs: Vec<&Tensor> = x1s.iter().collect();
            let matching = match_pools(&x0_refs, &x1_refs, ot_opts)?;
            let pairs = x0s
                .iter()
                .zip(&matching)
                .map(|(x0, &j)| BatchPair {
                    x0: x0.clone(),
                    x1: x1s[j].clone(),
                    source: None,
                })
                .collect();
            Ok(CoupledBatch {
                pairs,
                with_replacement: false,
            })
        }
    }
}
