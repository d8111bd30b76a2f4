use rayon::prelude::*;
use serde::Serialize;

use super::{duality_map, mixed_norm, LinearOperator, MixedNormDescriptor};
use crate::error::{domain, Result};
use crate::field::VectorField;
use crate::rng;

pub const DEFAULT_RESTARTS: usize = 8;

/// Relative change between consecutive iterates below which a run counts as converged.
pub const DEFAULT_TOLERANCE: f64 = 1e-13;

/// Best lower bound found and the field attaining it.
#[derive(Clone, Debug, Serialize)]
pub struct NormEstimate {
    pub estimate: f64,
    #[serde(skip)]
    pub certificate: VectorField,
    pub converged: bool,
    /// Per-iteration values of the winning restart.
    pub history: Vec<f64>,
    pub restart: usize,
}

/// Nonlinear power iteration `x <- J'(T* J(T x))` from `restarts` starting fields.
///
/// `J` and `J'` are the duality maps of the norm and its dual. Each step satisfies
/// `|T x_new| >= <x_new, T* J(T x)> = |T* J(T x)|_dual >= |T x|`, so the values never decrease.
/// Restart 0 is constant, restart 1 a spike at the middle point, the rest Gaussian.
pub fn operator_norm_lower_bound<T: LinearOperator + Sync>(
    op: &T,
    desc: &MixedNormDescriptor,
    restarts: usize,
    iterations: usize,
    seed: u64,
) -> Result<NormEstimate> {
    operator_norm_lower_bound_with_tolerance(op, desc, restarts, iterations, DEFAULT_TOLERANCE, seed)
}

/// As [`operator_norm_lower_bound`], declaring convergence once the relative change
/// between consecutive values is at most `tolerance`.
pub fn operator_norm_lower_bound_with_tolerance<T: LinearOperator + Sync>(
    op: &T,
    desc: &MixedNormDescriptor,
    restarts: usize,
    iterations: usize,
    tolerance: f64,
    seed: u64,
) -> Result<NormEstimate> {
    if !(tolerance >= 0.0) {
        return Err(domain(format!("tolerance must be non-negative, got {tolerance}")));
    }
    if !(desc.p > 1.0 && desc.p.is_finite()) {
        return Err(domain(format!(
            "power iteration needs 1 < p < inf (got p = {}); use the grid oracle",
            desc.p
        )));
    }
    if !op.supports_dim(desc.d) {
        return Err(domain(format!("operator does not act on dimension {}", desc.d)));
    }
    if restarts == 0 || iterations == 0 {
        return Err(domain("need at least one restart and one iteration"));
    }
    let runs: Vec<Result<NormEstimate>> = (0..restarts)
        .into_par_iter()
        .map(|r| iterate(op, desc, start(op.len(), desc.d, r, seed), iterations, tolerance, r))
        .collect();
    let mut best: Option<NormEstimate> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.estimate > b.estimate) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn start(n: usize, d: usize, restart: usize, seed: u64) -> VectorField {
    match restart {
        0 => VectorField::constant(n, &vec![1.0; d]),
        1 => {
            let mut f = VectorField::zeros(n, d);
            f.at_mut(n / 2)[0] = 1.0;
            f
        }
        r => VectorField::gaussian(n, d, &mut rng::stream(seed, r as u64)),
    }
}

fn iterate<T: LinearOperator>(
    op: &T,
    desc: &MixedNormDescriptor,
    mut x: VectorField,
    iterations: usize,
    tolerance: f64,
    restart: usize,
) -> Result<NormEstimate> {
    let w = op.weights();
    let dual = desc.dual();
    let norm = mixed_norm(&x, desc, w)?;
    x = x.scaled(1.0 / norm);
    let mut history = Vec::new();
    let mut best = (0.0, x.clone());
    let mut converged = false;
    for _ in 0..iterations {
        let tx = op.apply(&x)?;
        let value = mixed_norm(&tx, desc, w)? / mixed_norm(&x, desc, w)?;
        if value > best.0 {
            best = (value, x.clone());
        }
        let previous = history.last().copied();
        history.push(value);
        if value == 0.0 {
            converged = true;
            break;
        }
        if let Some(prev) = previous {
            if (value - prev).abs() <= tolerance * value {
                converged = true;
                break;
            }
        }
        let z = op.apply_adjoint(&duality_map(&tx, desc, w)?)?;
        if mixed_norm(&z, &dual, w)? == 0.0 {
            converged = true;
            break;
        }
        x = duality_map(&z, &dual, w)?;
    }
    Ok(NormEstimate { estimate: best.0, certificate: best.1, converged, history, restart })
}
