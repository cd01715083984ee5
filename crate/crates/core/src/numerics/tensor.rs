//! A minimal dense tensor: explicit shape, row-major `Vec<f64>` storage.
//!
//! Construction through [`Tensor::new`] rejects non-finite entries and shape
//! mismatches. Arithmetic on already-validated tensors does not re-validate;
//! long-running loops (training, ODE integration) call [`Tensor::validate`]
//! at their own checkpoints to detect divergence.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Validating constructor: every axis positive, element count matches,
    /// every entry finite.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::Shape("tensor rank must be at least 1".into()));
        }
        if let Some(axis) = shape.iter().position(|&d| d == 0) {
            return Err(Error::Shape(format!(
                "axis {axis} has extent 0; all axes must be positive"
            )));
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Shape(format!(
                "shape {:?} implies {} elements but {} were provided",
                shape,
                n,
                data.len()
            )));
        }
        let t = Self { shape, data };
        t.validate()?;
        Ok(t)
    }

    /// Internal constructor for values produced by our own arithmetic.
    pub(crate) fn from_parts(shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self::from_parts(shape, vec![0.0; n])
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Result<Self> {
        let n = shape.iter().product();
        Self::new(shape, vec![value; n])
    }

    /// Rank-1 tensor from a plain vector.
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        let n = data.len();
        Self::new(vec![n], data)
    }

    /// Errors with the flat index of the first non-finite entry.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "entry {i} of tensor with shape {:?} is {v}",
                    self.shape
                )));
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Same storage, new shape; element counts must agree.
    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != self.data.len() || shape.is_empty() || shape.contains(&0) {
            return Err(Error::Shape(format!(
                "cannot reshape {} elements into {:?}",
                self.data.len(),
                shape
            )));
        }
        Ok(Self::from_parts(shape, self.data))
    }

    pub fn flattened(self) -> Self {
        let n = self.data.len();
        Self::from_parts(vec![n], self.data)
    }

    fn check_same_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "{op}: shapes {:?} and {:?} differ",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_parts(self.shape.clone(), data))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::from_parts(self.shape.clone(), data))
    }

    /// Hadamard product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "mul")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self::from_parts(self.shape.clone(), data))
    }

    pub fn scale(&self, c: f64) -> Self {
        let data = self.data.iter().map(|a| a * c).collect();
        Self::from_parts(self.shape.clone(), data)
    }

    /// `self + c * other`, the shape-checked axpy.
    pub fn add_scaled(&self, other: &Self, c: f64) -> Result<Self> {
        self.check_same_shape(other, "add_scaled")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Self::from_parts(self.shape.clone(), data))
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other, "dot")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Concatenate two rank-1 tensors.
    pub fn concat(a: &Self, b: &Self) -> Self {
        let mut data = Vec::with_capacity(a.len() + b.len());
        data.extend_from_slice(&a.data);
        data.extend_from_slice(&b.data);
        Self::from_parts(vec![a.len() + b.len()], data)
    }

    /// Copy of `count` consecutive slices along the leading axis.
    pub fn slice_leading(&self, start: usize, count: usize) -> Result<Self> {
        let lead = self.shape[0];
        if start + count > lead || count == 0 {
            return Err(Error::Shape(format!(
                "slice [{start}, {}) out of leading axis {lead}",
                start + count
            )));
        }
        let stride: usize = self.shape[1..].iter().product::<usize>().max(1);
        let data = self.data[start * stride..(start + count) * stride].to_vec();
        let mut shape = self.shape.clone();
        shape[0] = count;
        Ok(Self::from_parts(shape, data))
    }

    /// Copy of one slice along the leading axis, with that axis dropped.
    /// For rank-1 tensors the result is a single-element rank-1 tensor.
    pub fn index_leading(&self, i: usize) -> Result<Self> {
        let sliced = self.slice_leading(i, 1)?;
        if sliced.rank() == 1 {
            return Ok(sliced);
        }
        let shape = sliced.shape[1..].to_vec();
        Ok(Self::from_parts(shape, sliced.data))
    }

    /// Element access for rank-2 tensors, row-major.
    pub fn at2(&self, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.rank(), 2);
        self.data[i * self.shape[1] + j]
    }

    pub fn set2(&mut self, i: usize, j: usize, v: f64) {
        debug_assert_eq!(self.rank(), 2);
        let cols = self.shape[1];
        self.data[i * cols + j] = v;
    }
}
