//! Sampled ODE paths and pointwise fidelity.

use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;

/// The state sequence of one Euler integration, including both endpoints.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub states: Vec<Tensor>,
    pub ts: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn new(states: Vec<Tensor>, ts: Vec<f64>) -> Result<Self> {
        if states.len() != ts.len() {
            return Err(Error::Shape(format!(
                "{} states but {} grid points",
                states.len(),
                ts.len()
            )));
        }
        if states.len() < 2 {
            return Err(Error::Degenerate(
                "a trajectory needs at least two states".into(),
            ));
        }
        if states.windows(2).any(|w| w[0].shape() != w[1].shape()) {
            return Err(Error::Shape("trajectory states change shape".into()));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "trajectory grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { states, ts })
    }

    pub fn nfe(&self) -> usize {
        self.states.len() - 1
    }

    pub fn endpoint(&self) -> &Tensor {
        self.states.last().unwrap()
    }
}

/// Polyline length over chord length, minus one. Zero exactly when the
/// discrete path never leaves the straight line from start to end (and
/// moves monotonically along it); by convention zero when the chord is
/// degenerate (length below 1e-12).
pub fn path_curvature(traj: &TrajectoryRecord) -> f64 {
    let chord = traj
        .endpoint()
        .sub(&traj.states[0])
        .expect("validated shapes")
        .norm();
    if chord < 1e-12 {
        return 0.0;
    }
    let polyline: f64 = traj
        .states
        .windows(2)
        .map(|w| w[1].sub(&w[0]).expect("validated shapes").norm())
        .sum();
    polyline / chord - 1.0
}

/// Mean squared error over all entries.
pub fn endpoint_mse(generated: &Tensor, ground_truth: &Tensor) -> Result<f64> {
    let diff = generated.sub(ground_truth)?;
    Ok(diff.norm_sq() / diff.data().len() as f64)
}
