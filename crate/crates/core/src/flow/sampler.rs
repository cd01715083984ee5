//! Training timestep distributions.

use crate::error::{Error, Result};
use crate::numerics::rng::Rng;

/// Draws the interpolation time for each training example. Both kinds
/// produce t strictly inside (0,1); an optional shift factor warps the
/// distribution toward 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimestepSampler {
    Uniform { shift: f64 },
    LogitNormal { location: f64, scale: f64, shift: f64 },
}

impl TimestepSampler {
    pub fn uniform() -> Self {
        Self::Uniform { shift: 1.0 }
    }

    pub fn logit_normal(location: f64, scale: f64) -> Self {
        Self::LogitNormal {
            location,
            scale,
            shift: 1.0,
        }
    }

    pub fn with_shift(self, shift: f64) -> Self {
        match self {
            Self::Uniform { .. } => Self::Uniform { shift },
            Self::LogitNormal {
                location, scale, ..
            } => Self::LogitNormal {
                location,
                scale,
                shift,
            },
        }
    }

    pub fn shift(&self) -> f64 {
        match self {
            Self::Uniform { shift } | Self::LogitNormal { shift, .. } => *shift,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::LogitNormal { scale, .. } = self {
            if !(*scale > 0.0) {
                return Err(Error::Config(format!(
                    "logit-normal scale must be positive, got {scale}"
                )));
            }
        }
        let s = self.shift();
        if !(s >= 1.0) || !s.is_finite() {
            return Err(Error::Config(format!(
                "timestep shift must be a finite value >= 1, got {s}"
            )));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut Rng) -> Result<f64> {
        self.validate()?;
        let raw = match self {
            Self::Uniform { .. } => rng.uniform(),
            Self::LogitNormal {
                location, scale, ..
            } => {
                let z = rng.normal();
                sigmoid(location + scale * z)
            }
        };
        Ok(shift_time(raw, self.shift()))
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Warp t toward 1: t -> s*t / (1 + (s-1)*t). s = 1 is the identity.
pub fn shift_time(t: f64, s: f64) -> f64 {
    s * t / (1.0 + (s - 1.0) * t)
}
