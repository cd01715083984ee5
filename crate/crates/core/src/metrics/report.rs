//! Evaluation drivers: NFE sweeps, rollout degradation, and report plumbing.

use std::fmt::Write as _;

use crate::datagen::chunks::ChunkPair;
use crate::error::{Error, Result};
use crate::flow::sample::{rollout, sample_continuation_traced};
use crate::metrics::dist::batch_w2;
use crate::metrics::seam::seam_metrics;
use crate::metrics::trajectory::{endpoint_mse, path_curvature};
use crate::numerics::net::VectorFieldNet;
use crate::numerics::tensor::Tensor;

/// Named scalar results of one evaluation pass.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub entries: Vec<(String, f64)>,
    pub config_hash: u64,
    pub sample_count: usize,
}

impl EvalReport {
    pub fn new(entries: Vec<(String, f64)>, config_hash: u64, sample_count: usize) -> Result<Self> {
        if sample_count == 0 {
            return Err(Error::Degenerate("report over zero samples".into()));
        }
        for (name, v) in &entries {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("metric '{name}' is {v}")));
            }
        }
        Ok(Self {
            entries,
            config_hash,
            sample_count,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        let _ = writeln!(out, "config_hash,{:016x}", self.config_hash);
        let _ = writeln!(out, "sample_count,{}", self.sample_count);
        for (name, v) in &self.entries {
            let _ = writeln!(out, "{name},{v}");
        }
        out
    }
}

/// One row of an NFE sweep; every field is a mean over the eval set except
/// `w2`, which compares the generated set against the ground-truth set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NfeRow {
    pub nfe: usize,
    pub endpoint_mse: f64,
    pub w2: f64,
    pub curvature: f64,
    pub seam_jump: f64,
    pub seam_accel: f64,
}

/// Sample every pair at each step count and collect the metric row.
pub fn nfe_sweep(
    net: &VectorFieldNet,
    eval_set: &[ChunkPair],
    nfe_list: &[usize],
) -> Result<Vec<NfeRow>> {
    if nfe_list.is_empty() {
        return Err(Error::Config("empty NFE list".into()));
    }
    if eval_set.is_empty() {
        return Err(Error::Degenerate("empty eval set".into()));
    }
    let mut rows = Vec::with_capacity(nfe_list.len());
    for &nfe in nfe_list {
        let mut mse = 0.0;
        let mut curvature = 0.0;
        let mut jump = 0.0;
        let mut accel = 0.0;
        let mut generated = Vec::with_capacity(eval_set.len());
        let mut truth = Vec::with_capacity(eval_set.len());
        for pair in eval_set {
            let traj = sample_continuation_traced(net, &pair.x0_flat(), nfe)?;
            let gen_flat = traj.endpoint().clone();
            mse += endpoint_mse(&gen_flat, &pair.x1_flat())?;
            curvature += path_curvature(&traj);
            let gen_chunk = gen_flat.clone().reshape(pair.x1.shape().to_vec())?;
            let (j, a) = seam_metrics(&pair.x0, &gen_chunk)?;
            jump += j;
            accel += a;
            generated.push(gen_flat);
            truth.push(pair.x1_flat());
        }
        let n = eval_set.len() as f64;
        rows.push(NfeRow {
            nfe,
            endpoint_mse: mse / n,
            w2: batch_w2(&generated, &truth)?,
            curvature: curvature / n,
            seam_jump: jump / n,
            seam_accel: accel / n,
        });
    }
    Ok(rows)
}

pub fn nfe_sweep_csv(rows: &[NfeRow]) -> String {
    let mut out = String::from("nfe,endpoint_mse,w2,curvature,seam_jump,seam_accel\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.nfe, r.endpoint_mse, r.w2, r.curvature, r.seam_jump, r.seam_accel
        );
    }
    out
}

/// Per-chunk endpoint error of an autoregressive continuation against the
/// ground-truth chunk sequence. `truth[0]` seeds the rollout; the returned
/// errors compare generated chunk i against `truth[i]`.
pub fn rollout_errors(net: &VectorFieldNet, truth: &[Tensor], nfe: usize) -> Result<Vec<f64>> {
    if truth.len() < 2 {
        return Err(Error::Degenerate(
            "rollout evaluation needs the input chunk plus at least one target".into(),
        ));
    }
    let flat: Vec<Tensor> = truth.iter().map(|t| t.clone().flattened()).collect();
    let generated = rollout(net, &flat[0], truth.len() - 1, nfe)?;
    generated
        .iter()
        .zip(&flat[1..])
        .map(|(g, t)| endpoint_mse(g, t))
        .collect()
}
