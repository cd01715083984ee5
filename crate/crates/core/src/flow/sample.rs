//! Forward Euler sampling: one chunk ahead, and autoregressive rollouts.

use crate::error::{Error, Result};
use crate::metrics::TrajectoryRecord;
use crate::numerics::net::VectorFieldNet;
use crate::numerics::tensor::Tensor;

/// Integrate dx/dt = field(x, t) from t=0 to t=1 with `nfe` uniform Euler
/// steps; returns all nfe+1 states in order.
pub fn euler_integrate<F>(field: F, x0: &Tensor, nfe: usize, context: &str) -> Result<Vec<Tensor>>
where
    F: Fn(&Tensor, f64) -> Result<Tensor>,
{
    if nfe == 0 {
        return Err(Error::Config("sampling needs at least one step".into()));
    }
    let dt = 1.0 / nfe as f64;
    let mut states = Vec::with_capacity(nfe + 1);
    states.push(x0.clone());
    for k in 0..nfe {
        let t = k as f64 * dt;
        let v = field(states.last().unwrap(), t)?;
        let next = states.last().unwrap().add_scaled(&v, dt)?;
        if next.data().iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence {
                step: k,
                context: format!("{context}: sampling state became non-finite"),
            });
        }
        states.push(next);
    }
    Ok(states)
}

/// One generated chunk: Euler from the current chunk's latent at t=0 to the
/// succeeding chunk's latent at t=1.
pub fn sample_continuation(net: &VectorFieldNet, x0: &Tensor, nfe: usize) -> Result<Tensor> {
    let states = euler_integrate(|x, t| net.forward(x, t), x0, nfe, "continuation")?;
    Ok(states.into_iter().next_back().unwrap())
}

/// As `sample_continuation`, but keeps the whole path for trajectory
/// metrics.
pub fn sample_continuation_traced(
    net: &VectorFieldNet,
    x0: &Tensor,
    nfe: usize,
) -> Result<TrajectoryRecord> {
    let states = euler_integrate(|x, t| net.forward(x, t), x0, nfe, "continuation")?;
    let ts = (0..=nfe).map(|k| k as f64 / nfe as f64).collect();
    TrajectoryRecord::new(states, ts)
}

/// Baseline sampling for the wide conditional net: the integrated state is
/// the noisy target half; the conditioning chunk rides along unchanged and
/// only the target half of the predicted velocity is applied.
pub fn sample_conditional(
    net: &VectorFieldNet,
    cond: &Tensor,
    noise: &Tensor,
    nfe: usize,
) -> Result<Tensor> {
    let d = cond.data().len();
    if net.data_input_dim() != 2 * d || net.output_dim() != 2 * d {
        return Err(Error::Shape(format!(
            "baseline net must map 2d -> 2d for d = {d}, got {} -> {}",
            net.data_input_dim(),
            net.output_dim()
        )));
    }
    let field = |z: &Tensor, t: f64| {
        let full = net.forward(&Tensor::concat(cond, z), t)?;
        full.slice_leading(d, d)
    };
    let states = euler_integrate(field, noise, nfe, "conditional continuation")?;
    Ok(states.into_iter().next_back().unwrap())
}

/// Autoregressive continuation: each generated chunk becomes the next
/// input. Divergence errors carry the failing chunk's position.
pub fn rollout(
    net: &VectorFieldNet,
    x0: &Tensor,
    n_chunks: usize,
    nfe: usize,
) -> Result<Vec<Tensor>> {
    if n_chunks == 0 {
        return Err(Error::Config("rollout needs at least one chunk".into()));
    }
    let mut out = Vec::with_capacity(n_chunks);
    let mut current = x0.clone();
    for i in 0..n_chunks {
        let next = sample_continuation(net, &current, nfe).map_err(|e| match e {
            Error::Divergence { step, context } => Error::Divergence {
                step,
                context: format!("rollout chunk {i}: {context}"),
            },
            other => other,
        })?;
        out.push(next.clone());
        current = next;
    }
    Ok(out)
}
