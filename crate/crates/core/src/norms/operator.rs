use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{check_dim, domain, Result};
use crate::field::VectorField;
use crate::kernel::TruncatedKernel;
use crate::rng;

/// A linear map on `R^d`-valued functions over a weighted finite set.
pub trait LinearOperator {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn weights(&self) -> &[f64];

    /// Whether the operator acts on `R^d`-valued fields.
    fn supports_dim(&self, d: usize) -> bool;

    fn apply(&self, f: &VectorField) -> Result<VectorField>;

    /// Adjoint for the pairing `sum_u mu_u f(u) . g(u)`.
    fn apply_adjoint(&self, g: &VectorField) -> Result<VectorField>;

    /// Matrix of the operator on fields of dimension `d`, rows and columns indexed by `u * d + i`.
    fn to_dense(&self, d: usize) -> Result<DenseOperator>;
}

impl LinearOperator for TruncatedKernel {
    fn len(&self) -> usize {
        TruncatedKernel::len(self)
    }

    fn weights(&self) -> &[f64] {
        self.space().weights()
    }

    fn supports_dim(&self, _d: usize) -> bool {
        true
    }

    fn apply(&self, f: &VectorField) -> Result<VectorField> {
        TruncatedKernel::apply(self, f)
    }

    fn apply_adjoint(&self, g: &VectorField) -> Result<VectorField> {
        TruncatedKernel::apply_adjoint(self, g)
    }

    fn to_dense(&self, d: usize) -> Result<DenseOperator> {
        let n = TruncatedKernel::len(self);
        let w = self.space().weights();
        let size = n * d;
        let mut m = DMatrix::zeros(size, size);
        for u in 0..n {
            for v in 0..n {
                let k = self.get(u, v);
                if k != 0.0 {
                    for i in 0..d {
                        m[(u * d + i, v * d + i)] = k * w[v];
                    }
                }
            }
        }
        DenseOperator::new(m, d, w.to_vec())
    }
}

/// `(T f)(u)_i = sum_{v, j} M[(u, i), (v, j)] f(v)_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    d: usize,
    weights: Vec<f64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<f64>, d: usize, weights: Vec<f64>) -> Result<Self> {
        if d == 0 || weights.is_empty() {
            return Err(domain("an operator needs at least one point and one component"));
        }
        let size = weights.len() * d;
        if matrix.nrows() != size || matrix.ncols() != size {
            return Err(domain(format!("matrix must be {size} x {size}")));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) || matrix.iter().any(|x| !x.is_finite()) {
            return Err(domain("weights must be positive and entries finite"));
        }
        Ok(Self { matrix, d, weights })
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)), 1, vec![1.0; entries.len()])
    }

    pub fn identity(n: usize, d: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n * d, n * d), d, vec![1.0; n])
    }

    /// Standard Gaussian entries and unit weights.
    pub fn random(n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut r = rng::stream(seed, 0);
        let size = n * d;
        let m = DMatrix::from_fn(size, size, |_, _| r.sample::<f64, _>(rand_distr::StandardNormal));
        Self::new(m, d, vec![1.0; n])
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    fn check(&self, f: &VectorField) -> Result<()> {
        check_dim(self.weights.len(), f.len())?;
        check_dim(self.d, f.dim())
    }
}

impl LinearOperator for DenseOperator {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn supports_dim(&self, d: usize) -> bool {
        d == self.d
    }

    fn apply(&self, f: &VectorField) -> Result<VectorField> {
        self.check(f)?;
        let x = nalgebra::DVector::from_column_slice(f.values());
        VectorField::from_values(f.len(), self.d, (&self.matrix * x).as_slice().to_vec())
    }

    fn apply_adjoint(&self, g: &VectorField) -> Result<VectorField> {
        self.check(g)?;
        let d = self.d;
        let weighted: Vec<f64> = g.values().iter().enumerate().map(|(k, x)| x * self.weights[k / d]).collect();
        let y = self.matrix.tr_mul(&nalgebra::DVector::from_column_slice(&weighted));
        let out: Vec<f64> = y.iter().enumerate().map(|(k, x)| x / self.weights[k / d]).collect();
        VectorField::from_values(g.len(), d, out)
    }

    fn to_dense(&self, d: usize) -> Result<DenseOperator> {
        if d != self.d {
            return Err(domain(format!("operator acts on dimension {}, not {d}", self.d)));
        }
        Ok(self.clone())
    }
}
