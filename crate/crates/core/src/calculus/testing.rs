//! Weak boundedness and the cube and ball testing quantities.

use super::coefficients::{block_matrix, row_aggregates};
use crate::dyadic::DyadicSystem;
use crate::error::{domain, Result};
use crate::kernel::TruncatedKernel;

fn check_exponent(s: f64) -> Result<()> {
    if s > 1.0 && s.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("testing exponent must lie in (1, inf), got {s}")))
    }
}

/// `sup_Q |<T 1_Q, 1_Q>| / mu(Q)` over all cubes of the system.
pub fn weak_boundedness(kernel: &TruncatedKernel, sys: &DyadicSystem) -> f64 {
    let mut best: f64 = 0.0;
    for level in 0..=sys.depth() {
        let m = block_matrix(kernel, sys, level);
        let ids = sys.level(level);
        let n = ids.len();
        for (a, &q) in ids.iter().enumerate() {
            best = best.max(m[a * n + a].abs() / sys.cube(q).mass);
        }
    }
    best
}

/// `sup_Q ||T 1_Q||_{L_s} / mu(Q)^{1/s}` over all cubes of the system.
pub fn cube_testing(kernel: &TruncatedKernel, sys: &DyadicSystem, s: f64) -> Result<f64> {
    check_exponent(s)?;
    let w = kernel.space().weights();
    let mut best: f64 = 0.0;
    for level in 0..=sys.depth() {
        let rows = row_aggregates(kernel, sys, level);
        let ids = sys.level(level);
        let n = ids.len();
        for (b, &q) in ids.iter().enumerate() {
            let norm = (0..w.len()).map(|u| w[u] * rows[u * n + b].abs().powf(s)).sum::<f64>().powf(1.0 / s);
            best = best.max(norm / sys.cube(q).mass.powf(1.0 / s));
        }
    }
    Ok(best)
}

/// `sup_B ||T 1_B||_{L_s} / mu(B)^{1/s}` over every distinct open ball `B(u, t)`.
///
/// Balls around each centre are grown one distance shell at a time, updating `T 1_B`
/// incrementally, so the cost is `O(N^3)`.
pub fn ball_testing(kernel: &TruncatedKernel, s: f64) -> Result<f64> {
    check_exponent(s)?;
    let space = kernel.space();
    let n = space.len();
    let w = space.weights();
    let mut best: f64 = 0.0;
    let mut image = vec![0.0; n];
    for c in 0..n {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| space.dist(c, a).total_cmp(&space.dist(c, b)));
        image.iter_mut().for_each(|x| *x = 0.0);
        let mut mass = 0.0;
        let mut i = 0;
        while i < n {
            let shell = space.dist(c, order[i]);
            while i < n && space.dist(c, order[i]) == shell {
                let v = order[i];
                mass += w[v];
                for (u, x) in image.iter_mut().enumerate() {
                    *x += kernel.get(u, v) * w[v];
                }
                i += 1;
            }
            let norm = image.iter().zip(w).map(|(x, w)| w * x.abs().powf(s)).sum::<f64>().powf(1.0 / s);
            best = best.max(norm / mass.powf(1.0 / s));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dyadic::build_shifted_integer_grid;
    use crate::kernel::Modulus;
    use crate::space::FiniteMetricMeasureSpace;

    #[test]
    fn zero_kernel() {
        let space = Arc::new(FiniteMetricMeasureSpace::path(8).unwrap());
        let k = TruncatedKernel::zero(Arc::clone(&space), 1.0, 8.0, Modulus::lipschitz()).unwrap();
        let sys = build_shifted_integer_grid(space, 0, 3).unwrap();
        assert_eq!(weak_boundedness(&k, &sys), 0.0);
        assert_eq!(cube_testing(&k, &sys, 2.0).unwrap(), 0.0);
        assert_eq!(ball_testing(&k, 2.0).unwrap(), 0.0);
        assert!(cube_testing(&k, &sys, 1.0).is_err());
    }

    #[test]
    fn single_pair_kernel() {
        // K(0, 1) = 0.5 only: <T1_Q, 1_Q> = 0.5 mu_0 mu_1 for Q containing both points
        let space = Arc::new(FiniteMetricMeasureSpace::path_weighted(vec![2.0, 3.0, 1.0, 1.0]).unwrap());
        let k = TruncatedKernel::zero(Arc::clone(&space), 1.0, 4.0, Modulus::lipschitz())
            .unwrap()
            .with_entry(0, 1, 0.5)
            .unwrap();
        let sys = build_shifted_integer_grid(space, 0, 2).unwrap();
        // the pair {0, 1} has mass 5, the root 7
        assert!((weak_boundedness(&k, &sys) - 0.5 * 6.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn wbp_below_testing() {
        let k = TruncatedKernel::finite_hilbert(32).unwrap();
        for bits in 0..4 {
            let sys = build_shifted_integer_grid(Arc::clone(k.space()), bits, 5).unwrap();
            let wbp = weak_boundedness(&k, &sys);
            // |<T1_Q, 1_Q>| <= ||T1_Q||_s mu(Q)^{1/s'} by Hoelder
            for s in [1.5, 2.0, 4.0] {
                assert!(wbp <= cube_testing(&k, &sys, s).unwrap() + 1e-12);
            }
        }
    }
}
