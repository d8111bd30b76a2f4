use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{mixed_norm, LinearOperator, MixedNormDescriptor};
use crate::error::{domain, Result};
use crate::field::VectorField;

/// Largest `N * d` accepted by the grid oracle.
pub const MAX_ORACLE_DIMENSION: usize = 6;

const REFINED_CANDIDATES: usize = 8;

/// Brute-force `sup |T f| / |f|` over the unit sphere of `R^{N d}`.
///
/// The sphere is swept in hyperspherical angles with `resolution` steps per `pi`
/// (the last angle only over `[0, pi)` since `f` and `-f` agree), and the best
/// grid points are then polished by a compass search in angle space.
pub fn operator_norm_oracle_small<T: LinearOperator>(
    op: &T,
    desc: &MixedNormDescriptor,
    resolution: usize,
) -> Result<f64> {
    let n = op.len() * desc.d;
    if n > MAX_ORACLE_DIMENSION {
        return Err(domain(format!("grid oracle handles N*d <= {MAX_ORACLE_DIMENSION}, got {n}")));
    }
    if resolution == 0 {
        return Err(domain("resolution must be positive"));
    }
    if !op.supports_dim(desc.d) {
        return Err(domain(format!("operator does not act on dimension {}", desc.d)));
    }
    let ratio = |angles: &[f64]| -> Result<f64> {
        let f = VectorField::from_values(op.len(), desc.d, sphere_point(angles))?;
        let w = op.weights();
        Ok(mixed_norm(&op.apply(&f)?, desc, w)? / mixed_norm(&f, desc, w)?)
    };
    if n == 1 {
        return ratio(&[]);
    }
    let m = n - 1;
    let mut counts = vec![resolution + 1; m];
    counts[m - 1] = resolution;
    let step = PI / resolution as f64;
    let mut top: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut index = vec![0usize; m];
    loop {
        let angles: Vec<f64> = index.iter().map(|&i| i as f64 * step).collect();
        let value = ratio(&angles)?;
        if top.len() < REFINED_CANDIDATES || value > top[top.len() - 1].0 {
            top.push((value, angles));
            top.sort_by(|a, b| b.0.total_cmp(&a.0));
            top.truncate(REFINED_CANDIDATES);
        }
        let mut k = 0;
        loop {
            if k == m {
                let mut best = 0.0f64;
                for (value, angles) in top {
                    best = best.max(compass_search(&ratio, angles, value, step)?);
                }
                return Ok(best);
            }
            index[k] += 1;
            if index[k] < counts[k] {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut sines = 1.0;
    for a in angles {
        out.push(sines * a.cos());
        sines *= a.sin();
    }
    out.push(sines);
    out
}

fn compass_search(
    ratio: &impl Fn(&[f64]) -> Result<f64>,
    mut x: Vec<f64>,
    mut value: f64,
    mut step: f64,
) -> Result<f64> {
    while step > 1e-10 {
        let mut improved = false;
        for k in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] += sign * step;
                let v = ratio(&y)?;
                if v > value {
                    value = v;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok(value)
}

/// Exact norm for `s = p = 2`: the top singular value of `W^{1/2} M W^{-1/2}`.
pub fn spectral_norm_oracle<T: LinearOperator>(op: &T, d: usize) -> Result<f64> {
    let dense = op.to_dense(d)?;
    let w = op.weights();
    let size = w.len() * d;
    let root: Vec<f64> = (0..size).map(|k| w[k / d].sqrt()).collect();
    let m = dense.matrix();
    let conj = DMatrix::from_fn(size, size, |i, j| root[i] * m[(i, j)] / root[j]);
    if conj.iter().all(|x| *x == 0.0) {
        return Ok(0.0);
    }
    Ok(conj.singular_values().iter().fold(0.0, |a, b| a.max(*b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::TruncatedKernel;
    use crate::norms::{operator_norm_lower_bound, DenseOperator};

    #[test]
    fn sphere_points_are_unit() {
        let x = sphere_point(&[0.3, 1.2, 2.9]);
        assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_and_rotation() {
        let id = DenseOperator::identity(2, 2).unwrap();
        let desc = MixedNormDescriptor::new(3.0, 1.5, 2).unwrap();
        let v = operator_norm_oracle_small(&id, &desc, 12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let rot = DenseOperator::new(DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]), 2, vec![1.0]).unwrap();
        let d2 = MixedNormDescriptor::new(2.0, 2.0, 2).unwrap();
        assert!((operator_norm_oracle_small(&rot, &d2, 10).unwrap() - 1.0).abs() < 1e-12);
        assert!(operator_norm_oracle_small(&DenseOperator::identity(7, 1).unwrap(), &d2, 4).is_err());
    }

    #[test]
    fn endpoint_exponents_via_grid() {
        // Max row sum and max column sum are both 2.
        let op = DenseOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]), 2, vec![1.0]).unwrap();
        let inf = MixedNormDescriptor::new(2.0, f64::INFINITY, 2).unwrap();
        assert!((operator_norm_oracle_small(&op, &inf, 40).unwrap() - 2.0).abs() < 1e-8);
        let one = MixedNormDescriptor::new(2.0, 1.0, 2).unwrap();
        assert!((operator_norm_oracle_small(&op, &one, 40).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn random_three_by_three_agrees_with_power_method() {
        let op = DenseOperator::random(3, 1, 11).unwrap();
        let desc = MixedNormDescriptor::new(4.0, 2.0, 1).unwrap();
        let grid = operator_norm_oracle_small(&op, &desc, 60).unwrap();
        let power = operator_norm_lower_bound(&op, &desc, 8, 5000, 11).unwrap().estimate;
        assert!((grid - power).abs() < 1e-3 * grid, "{grid} {power}");
    }

    #[test]
    fn hilbert_spectra() {
        let two = TruncatedKernel::finite_hilbert(2).unwrap();
        assert!((spectral_norm_oracle(&two, 1).unwrap() - 1.0).abs() < 1e-14);
        let mut last = 0.0;
        for n in [2, 4, 8, 16, 32, 64, 128] {
            let v = spectral_norm_oracle(&TruncatedKernel::finite_hilbert(n).unwrap(), 1).unwrap();
            assert!(v >= last - 1e-12 && v <= PI + 0.01);
            last = v;
        }
        assert_eq!(spectral_norm_oracle(&DenseOperator::diagonal(&[0.0; 3]).unwrap(), 1).unwrap(), 0.0);
    }
}
