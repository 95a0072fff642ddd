use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major tensor of up to two dimensions.
///
/// The graph works on `[rows, cols]` matrices; a vector is stored as a
/// single row.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S> {
    shape: Vec<usize>,
    values: Vec<S>,
    pub requires_grad: bool,
}

impl<S: Scalar> Tensor<S> {
    pub fn new(shape: Vec<usize>, values: Vec<S>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != values.len() {
            return Err(Error::shape(
                "tensor",
                format!("shape {shape:?} holds {n} values, got {}", values.len()),
            ));
        }
        if shape.len() > 2 {
            return Err(Error::shape("tensor", "at most two dimensions supported"));
        }
        Ok(Tensor {
            shape,
            values,
            requires_grad: false,
        })
    }

    pub fn vector(values: Vec<S>) -> Self {
        Tensor {
            shape: vec![values.len()],
            values,
            requires_grad: false,
        }
    }

    pub fn scalar(v: S) -> Self {
        Tensor {
            shape: vec![1, 1],
            values: vec![v],
            requires_grad: false,
        }
    }

    pub fn with_grad(mut self) -> Self {
        self.requires_grad = true;
        self
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Matrix view: vectors become a single row.
    pub fn to_matrix(&self) -> Array2<S> {
        let (r, c) = match self.shape.as_slice() {
            [] => (1, 1),
            [n] => (1, *n),
            [r, c] => (*r, *c),
            _ => unreachable!("validated on construction"),
        };
        Array2::from_shape_vec((r, c), self.values.clone()).expect("shape validated")
    }

    pub fn from_matrix(m: &Array2<S>) -> Self {
        Tensor {
            shape: vec![m.nrows(), m.ncols()],
            values: m.iter().copied().collect(),
            requires_grad: false,
        }
    }
}
