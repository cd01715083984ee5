//! The velocity-field network: an MLP with tanh hidden layers and an
//! identity output layer. The timestep enters as a sinusoidal embedding
//! concatenated onto the data input.
//!
//! `backward` returns analytic parameter gradients of `<grad_out, forward>`;
//! composite losses chain through by passing their output gradient. The
//! gradient check against central finite differences lives in the tests and
//! again, at acceptance strength, in the integration suite.

use crate::error::{Error, Result};
use crate::numerics::rng::{fnv1a64, Rng};
use crate::numerics::tensor::Tensor;

/// Sinusoidal timestep features: entry 2k is sin(t*w_k), entry 2k+1 is
/// cos(t*w_k), with w_k = 10000^(-2k/width). Requires an even width >= 2
/// and t in [0, 1].
pub fn time_embed(t: f64, width: usize) -> Result<Tensor> {
    if width < 2 || width % 2 != 0 {
        return Err(Error::Config(format!(
            "time embedding width must be even and >= 2, got {width}"
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Config(format!("timestep {t} outside [0, 1]")));
    }
    let mut data = vec![0.0; width];
    for k in 0..width / 2 {
        let omega = 10000f64.powf(-2.0 * k as f64 / width as f64);
        data[2 * k] = (t * omega).sin();
        data[2 * k + 1] = (t * omega).cos();
    }
    Ok(Tensor::from_parts(vec![width], data))
}

/// One affine layer: `weight` is [out, in] row-major, `bias` is [out].
/// Also reused as the per-layer gradient / moment container.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Layer {
    pub fn out_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn in_dim(&self) -> usize {
        self.weight.shape()[1]
    }

    fn zeros(out: usize, inp: usize) -> Self {
        Self {
            weight: Tensor::zeros(vec![out, inp]),
            bias: Tensor::zeros(vec![out]),
        }
    }

    /// y = W x + b.
    fn affine(&self, x: &[f64]) -> Vec<f64> {
        let (out, inp) = (self.out_dim(), self.in_dim());
        debug_assert_eq!(x.len(), inp);
        let w = self.weight.data();
        let b = self.bias.data();
        let mut y = vec![0.0; out];
        for o in 0..out {
            let row = &w[o * inp..(o + 1) * inp];
            let mut acc = 0.0;
            for (wi, xi) in row.iter().zip(x) {
                acc += wi * xi;
            }
            y[o] = acc + b[o];
        }
        y
    }

    /// x_grad = W^T delta.
    fn backprop_input(&self, delta: &[f64]) -> Vec<f64> {
        let (out, inp) = (self.out_dim(), self.in_dim());
        let w = self.weight.data();
        let mut xg = vec![0.0; inp];
        for o in 0..out {
            let row = &w[o * inp..(o + 1) * inp];
            let d = delta[o];
            for (xgi, wi) in xg.iter_mut().zip(row) {
                *xgi += wi * d;
            }
        }
        xg
    }
}

/// Architecture knobs that do not depend on the data dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct NetConfig {
    pub hidden: Vec<usize>,
    pub time_embed_width: usize,
}

impl NetConfig {
    pub fn build(&self, d_in: usize, d_out: usize, rng: &mut Rng) -> Result<VectorFieldNet> {
        VectorFieldNet::init(d_in, &self.hidden, d_out, self.time_embed_width, rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldNet {
    /// Full width chain: [data_in + embed, hidden..., out].
    widths: Vec<usize>,
    time_embed_width: usize,
    layers: Vec<Layer>,
}

impl VectorFieldNet {
    /// Weights ~ N(0, 1/fan_in), biases zero.
    pub fn init(
        d_in: usize,
        hidden: &[usize],
        d_out: usize,
        time_embed_width: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::Config("net data widths must be positive".into()));
        }
        if hidden.contains(&0) {
            return Err(Error::Config("hidden widths must be positive".into()));
        }
        time_embed(0.0, time_embed_width)?; // validates the embed width
        let mut widths = Vec::with_capacity(hidden.len() + 2);
        widths.push(d_in + time_embed_width);
        widths.extend_from_slice(hidden);
        widths.push(d_out);
        let mut layers = Vec::with_capacity(widths.len() - 1);
        for w in widths.windows(2) {
            let (inp, out) = (w[0], w[1]);
            let std = (1.0 / inp as f64).sqrt();
            let weight =
                Tensor::from_parts(vec![out, inp], (0..out * inp).map(|_| rng.normal() * std).collect());
            layers.push(Layer {
                weight,
                bias: Tensor::zeros(vec![out]),
            });
        }
        Ok(Self {
            widths,
            time_embed_width,
            layers,
        })
    }

    /// Assemble a net from explicit layers (tests, checkpoint loading).
    pub fn from_layers(layers: Vec<Layer>, time_embed_width: usize) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("net needs at least one layer".into()));
        }
        time_embed(0.0, time_embed_width)?;
        let mut widths = vec![layers[0].in_dim()];
        for (i, l) in layers.iter().enumerate() {
            if l.in_dim() != *widths.last().unwrap() {
                return Err(Error::Shape(format!(
                    "layer {i} input width {} does not chain onto {}",
                    l.in_dim(),
                    widths.last().unwrap()
                )));
            }
            if l.bias.len() != l.out_dim() {
                return Err(Error::Shape(format!(
                    "layer {i} bias length {} != output width {}",
                    l.bias.len(),
                    l.out_dim()
                )));
            }
            widths.push(l.out_dim());
        }
        if widths[0] <= time_embed_width {
            return Err(Error::Config(format!(
                "input width {} leaves no room for data after a {}-wide time embedding",
                widths[0], time_embed_width
            )));
        }
        Ok(Self {
            widths,
            time_embed_width,
            layers,
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn time_embed_width(&self) -> usize {
        self.time_embed_width
    }

    /// Width of the data part of the input (total input minus embedding).
    pub fn data_input_dim(&self) -> usize {
        self.widths[0] - self.time_embed_width
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    /// Content hash of architecture and parameters; keys inversion caches.
    pub fn param_hash(&self) -> u64 {
        let mut bytes = Vec::new();
        for &w in &self.widths {
            bytes.extend_from_slice(&(w as u64).to_le_bytes());
        }
        bytes.extend_from_slice(&(self.time_embed_width as u64).to_le_bytes());
        for l in &self.layers {
            for &v in l.weight.data().iter().chain(l.bias.data()) {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        fnv1a64(&bytes)
    }

    fn check_input(&self, x: &Tensor, t: f64) -> Result<()> {
        if x.len() != self.data_input_dim() {
            return Err(Error::Shape(format!(
                "net expects {} data inputs, got {}",
                self.data_input_dim(),
                x.len()
            )));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Config(format!("timestep {t} outside [0, 1]")));
        }
        Ok(())
    }

    /// Activations a_0..a_L where a_0 = concat(x, embed(t)); tanh after every
    /// layer except the last, which is identity.
    fn forward_all(&self, x: &Tensor, t: f64) -> Result<Vec<Vec<f64>>> {
        self.check_input(x, t)?;
        let embed = time_embed(t, self.time_embed_width)?;
        let mut a0 = Vec::with_capacity(self.widths[0]);
        a0.extend_from_slice(x.data());
        a0.extend_from_slice(embed.data());
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(a0);
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.affine(acts.last().unwrap());
            if i != last {
                for v in z.iter_mut() {
                    *v = v.tanh();
                }
            }
            acts.push(z);
        }
        Ok(acts)
    }

    pub fn forward(&self, x: &Tensor, t: f64) -> Result<Tensor> {
        let acts = self.forward_all(x, t)?;
        let out = acts.into_iter().next_back().unwrap();
        Ok(Tensor::from_parts(vec![self.output_dim()], out))
    }

    /// Gradients of `<grad_out, forward(x, t)>` with respect to every
    /// weight and bias.
    pub fn backward(&self, x: &Tensor, t: f64, grad_out: &Tensor) -> Result<Gradients> {
        if grad_out.len() != self.output_dim() {
            return Err(Error::Shape(format!(
                "grad_out has {} entries, net output has {}",
                grad_out.len(),
                self.output_dim()
            )));
        }
        let acts = self.forward_all(x, t)?;
        let mut grads = Gradients::zeros_like(self);
        let mut delta = grad_out.data().to_vec();
        for l in (0..self.layers.len()).rev() {
            // delta is d(loss)/d(z_l) where z_l is this layer's pre-identity
            // output; for hidden layers the tanh was already folded in below.
            let a_in = &acts[l];
            let g = &mut grads.layers[l];
            let inp = a_in.len();
            let wg = g.weight.data_mut();
            for (o, d) in delta.iter().enumerate() {
                let row = &mut wg[o * inp..(o + 1) * inp];
                for (wgi, ai) in row.iter_mut().zip(a_in) {
                    *wgi += d * ai;
                }
            }
            for (bg, d) in g.bias.data_mut().iter_mut().zip(&delta) {
                *bg += d;
            }
            if l > 0 {
                let mut xg = self.layers[l].backprop_input(&delta);
                // a_in = tanh(z_{l-1}), so tanh'(z) = 1 - a_in^2.
                for (x, a) in xg.iter_mut().zip(a_in) {
                    *x *= 1.0 - a * a;
                }
                delta = xg;
            }
        }
        Ok(grads)
    }
}

/// Same layout as the net's parameters; accumulated across a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(net: &VectorFieldNet) -> Self {
        let layers = net
            .layers
            .iter()
            .map(|l| Layer::zeros(l.out_dim(), l.in_dim()))
            .collect();
        Self { layers }
    }

    pub fn add_assign(&mut self, other: &Gradients) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::Shape("gradient layer counts differ".into()));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weight = a.weight.add(&b.weight)?;
            a.bias = a.bias.add(&b.bias)?;
        }
        Ok(())
    }
}
