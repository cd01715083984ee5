//! Masked exact transport plans over chunk batches.

use crate::coupling::assignment::{solve_assignment, unmatched_rows};
use crate::coupling::{ChunkLabel, CostMatrix};
use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    /// Every match admissible.
    None,
    /// A chunk may not match itself (same video and same chunk index).
    NoSelf,
    /// Only columns whose chunk index is the row's index + 1, any video.
    NextOnly,
}

impl MaskKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "no_self" => Ok(Self::NoSelf),
            "next_only" => Ok(Self::NextOnly),
            other => Err(Error::Config(format!(
                "unknown mask kind '{other}' (expected none|no_self|next_only)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::NoSelf => "no_self",
            Self::NextOnly => "next_only",
        }
    }
}

/// Admissibility per (row, col), row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub kind: MaskKind,
    n_rows: usize,
    n_cols: usize,
    allowed: Vec<bool>,
}

impl Mask {
    pub fn allowed(&self, row: usize, col: usize) -> bool {
        self.allowed[row * self.n_cols + col]
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub(crate) fn flags(&self) -> &[bool] {
        &self.allowed
    }
}

/// Build the admissibility mask for the given labels.
pub fn make_mask(rows: &[ChunkLabel], cols: &[ChunkLabel], kind: MaskKind) -> Mask {
    let (nr, nc) = (rows.len(), cols.len());
    let mut allowed = vec![true; nr * nc];
    match kind {
        MaskKind::None => {}
        MaskKind::NoSelf => {
            for (r, rl) in rows.iter().enumerate() {
                for (c, cl) in cols.iter().enumerate() {
                    if rl == cl {
                        allowed[r * nc + c] = false;
                    }
                }
            }
        }
        MaskKind::NextOnly => {
            for (r, rl) in rows.iter().enumerate() {
                for (c, cl) in cols.iter().enumerate() {
                    allowed[r * nc + c] = cl.index == rl.index + 1;
                }
            }
        }
    }
    Mask {
        kind,
        n_rows: nr,
        n_cols: nc,
        allowed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtOptions {
    /// Replace an infeasible mask's forbidden entries with a finite penalty
    /// instead of erroring.
    pub infeasible_fallback: bool,
    /// Penalty = factor * max finite cost (+1 so all-zero matrices still
    /// separate forbidden entries).
    pub penalty_factor: f64,
    /// Refuse instances larger than this (the solver is cubic).
    pub max_n: usize,
}

impl Default for OtOptions {
    fn default() -> Self {
        Self {
            infeasible_fallback: true,
            penalty_factor: 1e6,
            max_n: 512,
        }
    }
}

/// An optimal plan with uniform 1/n marginals: (1/n) times a permutation.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    /// Row -> column.
    pub assignment: Vec<usize>,
    pub rows: Vec<ChunkLabel>,
    pub cols: Vec<ChunkLabel>,
    pub mask_kind: MaskKind,
    /// Sum of cost * mass over admissible matched entries only.
    pub objective: f64,
    /// Number of matched entries the mask forbids (nonzero only when the
    /// penalty fallback engaged).
    pub penalty_matches: usize,
}

impl TransportPlan {
    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// Per-entry transported mass.
    pub fn mass(&self) -> f64 {
        1.0 / self.n() as f64
    }

    /// Dense [n, n] plan matrix.
    pub fn matrix(&self) -> Tensor {
        let n = self.n();
        let mut data = vec![0.0; n * n];
        for (r, &c) in self.assignment.iter().enumerate() {
            data[r * n + c] = self.mass();
        }
        Tensor::from_parts(vec![n, n], data)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        vec![self.mass(); self.n()]
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let n = self.n();
        let mut sums = vec![0.0; n];
        for &c in &self.assignment {
            sums[c] += self.mass();
        }
        sums
    }
}

/// Exact masked transport with uniform marginals.
///
/// Feasibility is checked by maximum bipartite matching first. An infeasible
/// mask errors with the unmatched rows unless fallback is enabled, in which
/// case forbidden entries cost `penalty_factor * max_cost + 1` and matched
/// forbidden entries are counted in `penalty_matches` and excluded from the
/// reported objective.
pub fn solve_ot_exact(cm: &CostMatrix, mask: &Mask, opts: &OtOptions) -> Result<TransportPlan> {
    let n = cm.n_rows();
    if cm.n_cols() != n {
        return Err(Error::Shape(format!(
            "transport needs a square cost matrix, got {}x{}",
            n,
            cm.n_cols()
        )));
    }
    if n == 0 {
        return Err(Error::Degenerate("empty cost matrix".into()));
    }
    if n > opts.max_n {
        return Err(Error::Config(format!(
            "instance size {n} exceeds the exact-solver cap {}",
            opts.max_n
        )));
    }
    if mask.n_rows() != n || mask.n_cols() != n {
        return Err(Error::Shape(format!(
            "mask is {}x{}, cost matrix is {n}x{n}",
            mask.n_rows(),
            mask.n_cols()
        )));
    }

    let unmatched = unmatched_rows(mask.flags(), n);
    if !unmatched.is_empty() && !opts.infeasible_fallback {
        return Err(Error::InfeasibleMask { rows: unmatched });
    }

    let costs = cm.m.data();
    let max_cost = costs.iter().cloned().fold(0.0f64, f64::max);
    let penalty = opts.penalty_factor * max_cost + 1.0;
    let effective: Vec<f64> = costs
        .iter()
        .zip(mask.flags())
        .map(|(&c, &ok)| if ok { c } else { penalty })
        .collect();

    let assignment = solve_assignment(&effective, n);
    let mass = 1.0 / n as f64;
    let mut objective = 0.0;
    let mut penalty_matches = 0;
    for (r, &c) in assignment.iter().enumerate() {
        if mask.allowed(r, c) {
            objective += mass * costs[r * n + c];
        } else {
            penalty_matches += 1;
        }
    }
    Ok(TransportPlan {
        assignment,
        rows: cm.rows.clone(),
        cols: cm.cols.clone(),
        mask_kind: mask.kind,
        objective,
        penalty_matches,
    })
}

/// Total plan mass on entries whose column chunk is the same-video immediate
/// successor of the row chunk. Labels are passed explicitly so permuted
/// controls can be evaluated against the same plan.
pub fn adjacency_mass(plan: &TransportPlan, rows: &[ChunkLabel], cols: &[ChunkLabel]) -> f64 {
    let mut mass = 0.0;
    for (r, &c) in plan.assignment.iter().enumerate() {
        let (rl, cl) = (rows[r], cols[c]);
        if rl.video == cl.video && cl.index == rl.index + 1 {
            mass += plan.mass();
        }
    }
    mass
}
