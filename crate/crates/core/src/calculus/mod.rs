//! Bilinear-form calculus of a truncated kernel relative to a dyadic system:
//! the telescoping decomposition of `<Tf, g>`, Haar coefficients, testing
//! quantities, paraproducts and stopping families, and the banded block
//! operators.
//!
//! Pairings contract the inner index with the plain dot product:
//! `<f, g> = sum_u mu_u f(u) . g(u)`.

pub mod blocks;
mod coefficients;
mod ledger;
mod paraproduct;
mod sparse;
mod testing;

use serde::Serialize;

pub use blocks::{
    block_operator, blocks, split_difference, AncestorModel, BlockDecomposition, BlockOperator, BlockSpec, Flavor,
};
pub use coefficients::{
    haar_coefficient, haar_coefficient_by_children, verify_haar_bounds, BandRatio, HaarBoundReport, LevelCoefficients,
};
pub use ledger::{expand_pairing, TermLedger};
pub use paraproduct::{
    bmo_norm, doob_maximal, extract_symbol, extraction, paraproduct, paraproduct_bmo_constant, paraproduct_dual_form,
    square_function, truncated_square, Extraction,
};
pub use sparse::{paraproduct_stopping_bound, stopping_family, SparseFamily, StopKind, StoppingBound, StoppingCube};
pub use testing::{ball_testing, cube_testing, weak_boundedness};

use crate::dyadic::probability::m0;

/// One named quantity of a verification: its value, the bound it is compared with and the
/// achieved constant `value / bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub constant: Option<f64>,
}

impl Record {
    pub fn value(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, bound: None, constant: None }
    }

    pub fn bounded(name: impl Into<String>, value: f64, bound: f64) -> Self {
        let constant = if bound != 0.0 { Some(value / bound) } else { None };
        Self { name: name.into(), value, bound: Some(bound), constant }
    }
}

/// Separation bands of same-generation pairs.
///
/// Band `m0` holds `d(x_P, x_Q) <= eps delta^{-m0} l / 2`; band `m > m0` holds
/// `eps delta^{1-m} l / 2 < d <= eps delta^{-m} l / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bands {
    pub eps: f64,
    pub delta: f64,
    pub m0: usize,
}

impl Bands {
    pub fn new(eps: f64, delta: f64) -> Self {
        Self { eps, delta, m0: m0(eps, delta) }
    }

    pub fn upper(&self, m: usize, side: f64) -> f64 {
        0.5 * self.eps * self.delta.powi(-(m as i32)) * side
    }

    pub fn band(&self, d: f64, side: f64) -> usize {
        let mut m = self.m0;
        while d > self.upper(m, side) {
            m += 1;
        }
        m
    }
}
