//! Decoupled-weight-decay Adam and the learning-rate schedules.

use crate::error::{Error, Result};
use crate::numerics::net::{Gradients, Layer, VectorFieldNet};
use crate::numerics::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    Linear,
    Cosine,
}

impl ScheduleKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "linear" => Ok(Self::Linear),
            "cosine" => Ok(Self::Cosine),
            other => Err(Error::Config(format!(
                "unknown lr schedule '{other}' (expected constant|linear|cosine)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::Linear => "linear",
            Self::Cosine => "cosine",
        }
    }
}

/// Learning rate at `step` of `total_steps`.
/// constant: base; linear: base*(1 - step/total); cosine: base*0.5*(1 + cos(pi*step/total)).
pub fn lr_schedule(kind: ScheduleKind, step: u64, total_steps: u64, base_lr: f64) -> Result<f64> {
    if total_steps == 0 {
        return Err(Error::Config("total_steps must be positive".into()));
    }
    if step > total_steps {
        return Err(Error::Config(format!(
            "step {step} exceeds total_steps {total_steps}"
        )));
    }
    if !(base_lr >= 0.0) || !base_lr.is_finite() {
        return Err(Error::Config(format!(
            "base_lr must be finite and non-negative, got {base_lr}"
        )));
    }
    let frac = step as f64 / total_steps as f64;
    Ok(match kind {
        ScheduleKind::Constant => base_lr,
        ScheduleKind::Linear => base_lr * (1.0 - frac),
        ScheduleKind::Cosine => base_lr * 0.5 * (1.0 + (std::f64::consts::PI * frac).cos()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamWConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.99,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

impl AdamWConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v, lo, hi) in [
            ("beta1", self.beta1, 0.0, 1.0),
            ("beta2", self.beta2, 0.0, 1.0),
        ] {
            if !(lo..hi).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [{lo}, {hi}), got {v}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::Config(format!(
                "weight_decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// Adam with decoupled weight decay. First and second moments share the
/// parameter layout; bias correction uses the post-increment step count.
#[derive(Debug, Clone)]
pub struct AdamW {
    cfg: AdamWConfig,
    step: u64,
    m: Vec<Layer>,
    v: Vec<Layer>,
}

impl AdamW {
    pub fn new(net: &VectorFieldNet, cfg: AdamWConfig) -> Result<Self> {
        cfg.validate()?;
        let zero = |l: &Layer| Layer {
            weight: Tensor::zeros(l.weight.shape().to_vec()),
            bias: Tensor::zeros(l.bias.shape().to_vec()),
        };
        Ok(Self {
            cfg,
            step: 0,
            m: net.layers().iter().map(zero).collect(),
            v: net.layers().iter().map(zero).collect(),
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update. Any NaN gradient aborts with the parameter's name before
    /// any state is touched.
    pub fn apply(&mut self, net: &mut VectorFieldNet, grads: &Gradients, lr: f64) -> Result<()> {
        if !(lr >= 0.0) || !lr.is_finite() {
            return Err(Error::Config(format!(
                "learning rate must be finite and non-negative, got {lr}"
            )));
        }
        if grads.layers.len() != net.layers().len() {
            return Err(Error::Shape("gradient/net layer count mismatch".into()));
        }
        for (li, gl) in grads.layers.iter().enumerate() {
            for (tag, t) in [("weight", &gl.weight), ("bias", &gl.bias)] {
                if let Some(i) = t.data().iter().position(|v| v.is_nan()) {
                    return Err(Error::NanGradient(format!("layer{li}.{tag}[{i}]")));
                }
            }
        }
        self.step += 1;
        let c1 = 1.0 - self.cfg.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.cfg.beta2.powi(self.step as i32);
        for (li, gl) in grads.layers.iter().enumerate() {
            let net_layer = &mut net.layers_mut()[li];
            for which in 0..2 {
                let (p, g, m, v) = if which == 0 {
                    (
                        net_layer.weight.data_mut(),
                        gl.weight.data(),
                        self.m[li].weight.data_mut(),
                        self.v[li].weight.data_mut(),
                    )
                } else {
                    (
                        net_layer.bias.data_mut(),
                        gl.bias.data(),
                        self.m[li].bias.data_mut(),
                        self.v[li].bias.data_mut(),
                    )
                };
                for i in 0..p.len() {
                    m[i] = self.cfg.beta1 * m[i] + (1.0 - self.cfg.beta1) * g[i];
                    v[i] = self.cfg.beta2 * v[i] + (1.0 - self.cfg.beta2) * g[i] * g[i];
                    let m_hat = m[i] / c1;
                    let v_hat = v[i] / c2;
                    p[i] -= lr * (m_hat / (v_hat.sqrt() + self.cfg.epsilon)
                        + self.cfg.weight_decay * p[i]);
                }
            }
        }
        Ok(())
    }
}
