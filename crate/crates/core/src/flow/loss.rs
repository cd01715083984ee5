//! Straight-line interpolants and the conditional flow-matching loss.

use crate::error::{Error, Result};
use crate::numerics::net::{Gradients, VectorFieldNet};
use crate::numerics::tensor::Tensor;

/// (1-t)*x0 + t*x1 elementwise; t must lie in [0,1].
pub fn interpolate(x0: &Tensor, x1: &Tensor, t: f64) -> Result<Tensor> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Config(format!(
            "interpolation time must lie in [0,1], got {t}"
        )));
    }
    x0.scale(1.0 - t).add(&x1.scale(t))
}

/// Loss and parameter gradients for one training pair: squared error of the
/// predicted velocity against the straight-line velocity x1 - x0, summed
/// over dimensions.
pub fn cfm_loss(
    net: &VectorFieldNet,
    x0: &Tensor,
    x1: &Tensor,
    t: f64,
) -> Result<(f64, Gradients)> {
    cfm_loss_batch(net, &[(x0, x1, t)])
}

/// Batch loss: mean over the batch of per-pair sums over dimensions.
/// Accumulation is in batch order so replays are bit-exact.
pub fn cfm_loss_batch(
    net: &VectorFieldNet,
    batch: &[(&Tensor, &Tensor, f64)],
) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::Degenerate("empty loss batch".into()));
    }
    let inv_b = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    let mut grads = Gradients::zeros_like(net);
    for (x0, x1, t) in batch {
        let x = interpolate(x0, x1, *t)?;
        let target = x1.sub(x0)?;
        let pred = net.forward(&x, *t)?;
        let resid = pred.sub(&target)?;
        total += resid.norm_sq();
        let grad_out = resid.scale(2.0 * inv_b);
        grads.add_assign(&net.backward(&x, *t, &grad_out)?)?;
    }
    Ok((total * inv_b, grads))
}

/// Baseline loss for the wide net that sees the conditioning chunk and the
/// noised target side by side: input concat(x0, (1-t)*eps + t*x1), output
/// width 2d, loss on the target half only against x1 - eps. The
/// conditioning half's output carries zero gradient.
pub fn conditional_cfm_loss_batch(
    net: &VectorFieldNet,
    batch: &[(&Tensor, &Tensor, &Tensor, f64)],
) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::Degenerate("empty loss batch".into()));
    }
    let inv_b = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    let mut grads = Gradients::zeros_like(net);
    for (cond, eps, x1, t) in batch {
        let d = cond.data().len();
        if net.data_input_dim() != 2 * d || net.output_dim() != 2 * d {
            return Err(Error::Shape(format!(
                "baseline net must map 2d -> 2d for d = {d}, got {} -> {}",
                net.data_input_dim(),
                net.output_dim()
            )));
        }
        let noisy = interpolate(eps, x1, *t)?;
        let x = Tensor::concat(cond, &noisy);
        let target = x1.sub(eps)?;
        let pred = net.forward(&x, *t)?;
        let pred_half = pred.slice_leading(d, d)?;
        let resid = pred_half.sub(&target)?;
        total += resid.norm_sq();
        let mut grad_out = vec![0.0; 2 * d];
        for (i, r) in resid.data().iter().enumerate() {
            grad_out[d + i] = 2.0 * inv_b * r;
        }
        let grad_out = Tensor::from_parts(vec![2 * d], grad_out);
        grads.add_assign(&net.backward(&x, *t, &grad_out)?)?;
    }
    Ok((total * inv_b, grads))
}
