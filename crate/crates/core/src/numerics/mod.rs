//! Dense-tensor arithmetic, the velocity-field network, the optimizer, and
//! the deterministic RNG. This is the substrate every other module uses.

pub mod io;
pub mod net;
pub mod optim;
pub mod rng;
pub mod tensor;

pub use net::{time_embed, Gradients, Layer, NetConfig, VectorFieldNet};
pub use optim::{lr_schedule, AdamW, AdamWConfig, ScheduleKind};
pub use rng::{fnv1a64, Rng};
pub use tensor::Tensor;
