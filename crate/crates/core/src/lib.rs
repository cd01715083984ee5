//! A desk-scale laboratory for flow matching between consecutive video chunks.
//!
//! The crate is organized as a stack: [`numerics`] supplies the tensor,
//! network, optimizer, and RNG substrate; [`datagen`] produces synthetic
//! videos and chunk pairs; [`coupling`] builds cost matrices and exact
//! transport plans between chunk batches; [`flow`] implements interpolation,
//! the matching loss, ODE inversion, sampling, and the training loops; and
//! [`metrics`] measures path straightness, endpoint error, batch transport
//! distance, seam quality, and activation-memory scaling.
//!
//! Everything is deterministic given a seed: random draws come from a
//! counter-based generator, reductions run in a fixed order, and no code in
//! this crate spawns threads.

pub mod coupling;
pub mod datagen;
pub mod error;
pub mod flow;
pub mod metrics;
pub mod numerics;
pub mod pgm;

pub use error::{Error, Result};
