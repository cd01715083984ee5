//! Latent codec: chunk <-> model state.
//!
//! The only codec is the identity; it exists so the source-latent scale
//! sigma0 has a home and callers can swap in a learned codec later without
//! touching the training loop.

use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;

/// Scale applied to an inverted latent when it replaces plain noise.
#[derive(Debug, Clone, PartialEq)]
pub enum Sigma0 {
    Scalar(f64),
    PerDim(Tensor),
}

impl Sigma0 {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Scalar(s) => {
                if !(*s >= 0.0) || !s.is_finite() {
                    return Err(Error::Config(format!(
                        "sigma0 must be finite and >= 0, got {s}"
                    )));
                }
            }
            Self::PerDim(t) => {
                if t.shape().len() != 1 {
                    return Err(Error::Shape(format!(
                        "per-dimension sigma0 must be rank 1, got rank {}",
                        t.shape().len()
                    )));
                }
                if t.data().iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::Config(
                        "per-dimension sigma0 entries must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// sigma0 ⊙ x, broadcasting the scalar form.
    pub fn scale(&self, x: &Tensor) -> Result<Tensor> {
        self.validate()?;
        match self {
            Self::Scalar(s) => Ok(x.scale(*s)),
            Self::PerDim(t) => x.mul(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentCodec {
    pub sigma0: Sigma0,
}

impl Default for LatentCodec {
    fn default() -> Self {
        Self {
            sigma0: Sigma0::Scalar(0.3),
        }
    }
}

impl LatentCodec {
    pub fn new(sigma0: Sigma0) -> Result<Self> {
        sigma0.validate()?;
        Ok(Self { sigma0 })
    }

    /// (mu, sigma) of the latent for a chunk; identity codec returns the
    /// chunk itself as mu.
    pub fn encode(&self, chunk: &Tensor) -> Result<(Tensor, Sigma0)> {
        Ok((chunk.clone(), self.sigma0.clone()))
    }

    pub fn decode(&self, latent: &Tensor) -> Tensor {
        latent.clone()
    }
}
