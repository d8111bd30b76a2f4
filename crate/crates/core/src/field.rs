//! Functions on a finite point set with values in `R^d`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};

/// A function `E -> R^d`, stored row-major as `len x dim` values.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    len: usize,
    dim: usize,
    values: Vec<f64>,
}

impl VectorField {
    pub fn zeros(len: usize, dim: usize) -> Self {
        Self {
            len,
            dim,
            values: vec![0.0; len * dim],
        }
    }

    pub fn from_values(len: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("inner dimension must be at least 1".into()));
        }
        check_dim(len * dim, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("vector field entries must be finite".into()));
        }
        Ok(Self { len, dim, values })
    }

    /// Scalar field (`dim = 1`).
    pub fn from_scalar(values: Vec<f64>) -> Self {
        Self {
            len: values.len(),
            dim: 1,
            values,
        }
    }

    /// The field that takes the value `c` at every point.
    pub fn constant(len: usize, c: &[f64]) -> Self {
        let mut values = Vec::with_capacity(len * c.len());
        for _ in 0..len {
            values.extend_from_slice(c);
        }
        Self {
            len,
            dim: c.len(),
            values,
        }
    }

    /// Independent standard normal entries.
    pub fn gaussian<R: Rng + ?Sized>(len: usize, dim: usize, rng: &mut R) -> Self {
        let values = (0..len * dim).map(|_| rng.sample(StandardNormal)).collect();
        Self { len, dim, values }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, u: usize) -> &[f64] {
        &self.values[u * self.dim..(u + 1) * self.dim]
    }

    pub fn at_mut(&mut self, u: usize) -> &mut [f64] {
        &mut self.values[u * self.dim..(u + 1) * self.dim]
    }

    /// The values of a scalar field; `None` when `dim > 1`.
    pub fn as_scalar(&self) -> Option<&[f64]> {
        (self.dim == 1).then_some(&self.values[..])
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        check_dim(self.len, other.len)?;
        check_dim(self.dim, other.dim)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            len: self.len,
            dim: self.dim,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Self {
            len: self.len,
            dim: self.dim,
            values,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(1.0, other)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise Euclidean norms.
    pub fn pointwise_euclidean(&self) -> Vec<f64> {
        (0..self.len)
            .map(|u| self.at(u).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    /// Pairing `sum_u mu_u f(u) . g(u)` with the inner index contracted by the plain dot product.
    pub fn pairing(&self, other: &Self, weights: &[f64]) -> Result<f64> {
        self.same_shape(other)?;
        check_dim(self.len, weights.len())?;
        let d = self.dim;
        Ok(weights
            .iter()
            .enumerate()
            .map(|(u, w)| {
                let a = &self.values[u * d..(u + 1) * d];
                let b = &other.values[u * d..(u + 1) * d];
                w * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
            })
            .sum())
    }

    /// Multiplies every vector `f(u)` by the scalar `s(u)`.
    pub fn mul_scalar_field(&self, s: &[f64]) -> Result<Self> {
        check_dim(self.len, s.len())?;
        let mut out = self.clone();
        for (u, su) in s.iter().enumerate() {
            out.at_mut(u).iter_mut().for_each(|x| *x *= su);
        }
        Ok(out)
    }
}

/// `sum_u mu_u a(u) b(u)` for scalar fields.
pub fn scalar_pairing(a: &[f64], b: &[f64], weights: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| w * x * y)
        .sum()
}
