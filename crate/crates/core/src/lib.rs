//! Truncated Calderón–Zygmund operators on finite doubling metric measure spaces.
//!
//! The crate instantiates, on desk-scale finite spaces, the machinery used to
//! bound finitely truncated singular integrals acting on vector-valued
//! functions: ball geometry ([`space`]), truncated standard kernels
//! ([`kernel`]), random dyadic systems with Haar bases ([`dyadic`]), the
//! martingale calculus of the bilinear form, paraproducts, sparse stopping
//! families and block operators ([`calculus`]), mixed `L_s(l_p^d)` norms with
//! operator-norm estimation ([`norms`]), and reporting of scaling studies
//! ([`experiments`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::needless_range_loop)]

pub mod calculus;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod field;
pub mod format;
pub mod kernel;
pub mod norms;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
pub use field::VectorField;
pub use kernel::{Modulus, TruncatedKernel};
pub use space::FiniteMetricMeasureSpace;
