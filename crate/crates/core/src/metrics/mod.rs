//! Quantitative evaluation: path straightness, endpoint fidelity, exact
//! transport distance between sets, seam smoothness, motion continuity,
//! NFE sweeps, and the activation-memory scaling regression.

pub mod dist;
pub mod report;
pub mod scaling;
pub mod seam;
pub mod trajectory;

pub use dist::batch_w2;
pub use report::{nfe_sweep, nfe_sweep_csv, rollout_errors, EvalReport, NfeRow};
pub use scaling::{activation_cost, net_activation_cost, ols_fit, ScalingFit};
pub use seam::{motion_continuity, seam_metrics};
pub use trajectory::{endpoint_mse, path_curvature, TrajectoryRecord};
