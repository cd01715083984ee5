//! Flow-matching training, sampling, and ODE inversion.
//!
//! The model is a learned velocity field between a current chunk and its
//! succeeding chunk. Training minimizes the conditional flow-matching loss
//! on straight-line interpolants; sampling integrates the field forward
//! with Euler steps; inversion integrates it backward to recover a source
//! latent for a given target.

pub mod checkpoint;
pub mod codec;
pub mod invert;
pub mod loss;
pub mod sample;
pub mod sampler;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, InversionCache};
pub use codec::{LatentCodec, Sigma0};
pub use invert::{invert_field, invert_target, InversionOrder};
pub use loss::{cfm_loss, cfm_loss_batch, conditional_cfm_loss_batch, interpolate};
pub use sample::{
    euler_integrate, rollout, sample_conditional, sample_continuation, sample_continuation_traced,
};
pub use sampler::TimestepSampler;
pub use train::{
    pretrain_noise_to_data, train, train_conventional_baseline, Algorithm, LossRecord,
    TrainOutput, TrainRecipe,
};
