//! Activation-count proxy for memory use and its scaling regression.

use crate::error::{Error, Result};
use crate::numerics::net::VectorFieldNet;

/// Activation units held live in one forward pass at batch size one: the
/// input plus every layer output.
pub fn activation_cost(input_width: usize, layer_outputs: &[usize]) -> usize {
    input_width + layer_outputs.iter().sum::<usize>()
}

/// The proxy for a concrete net; the constant-width time embedding is
/// excluded so the count tracks the data path.
pub fn net_activation_cost(net: &VectorFieldNet) -> usize {
    activation_cost(net.data_input_dim(), &net.widths()[1..])
}

/// Least-squares line cost = k * (volume / 1e6) + b.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub points: Vec<(f64, f64)>,
    pub k: f64,
    pub b: f64,
    pub residual_norm: f64,
}

/// Simple linear regression of cost on volume scaled to millions of units.
pub fn ols_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least two points to fit a line, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(v, _)| v / 1e6).collect();
    let ys: Vec<f64> = points.iter().map(|(_, c)| *c).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate(
            "all volumes are equal; the slope is unidentifiable".into(),
        ));
    }
    let k = sxy / sxx;
    let b = mean_y - k * mean_x;
    let residual_norm = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (k * x + b);
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(ScalingFit {
        points: points.to_vec(),
        k,
        b,
        residual_norm,
    })
}
