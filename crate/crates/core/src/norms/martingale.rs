use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Pareto, StandardNormal};

use super::{lp_norm, mixed_norm, MixedNormDescriptor};
use crate::dyadic::build_shifted_integer_grid;
use crate::dyadic::shifted::default_depth;
use crate::error::{domain, Result};
use crate::field::VectorField;
use crate::rng;
use crate::space::FiniteMetricMeasureSpace;

const SPIKE_PROBABILITY: f64 = 0.05;
const SPIKE_SCALE: f64 = 10.0;

/// Coordinates are `N(0, 1)`, plus with probability 0.05 a spike `+-10 P` where `P` is
/// Pareto with scale 1 and shape 1.5.
pub fn sample_heavy_tailed<R: Rng + ?Sized>(len: usize, dim: usize, rng: &mut R) -> VectorField {
    let pareto = Pareto::new(1.0, 1.5).expect("valid Pareto parameters");
    let values = (0..len * dim)
        .map(|_| {
            let mut x: f64 = rng.sample(StandardNormal);
            if rng.random::<f64>() < SPIKE_PROBABILITY {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                x += sign * SPIKE_SCALE * pareto.sample(rng);
            }
            x
        })
        .collect();
    VectorField::from_values(len, dim, values).expect("shape matches")
}

/// Per-trial `(type ratio at p_mart, cotype ratio at q_mart)`.
///
/// Each trial draws a shifted grid on the path of `n` points and a heavy-tailed `f`;
/// the martingale is `f_k = E_k f`, `k = 0..depth`, ending at `f` itself. With
/// `S_r(u) = (|f_0(u)|^r + sum_k |f_k(u) - f_{k-1}(u)|^r)^{1/r}` in the `l_p^d` norm, the type
/// ratio is `|f|_{L_s} / |S_p|_{L_s}` and the cotype ratio `|S_q|_{L_s} / |f|_{L_s}`.
pub fn martingale_ratios(
    desc: &MixedNormDescriptor,
    p_mart: f64,
    q_mart: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if !(p_mart > 1.0 && p_mart <= 2.0) {
        return Err(domain(format!("type exponent must lie in (1, 2], got {p_mart}")));
    }
    if !(q_mart >= 2.0 && q_mart.is_finite()) {
        return Err(domain(format!("cotype exponent must lie in [2, inf), got {q_mart}")));
    }
    if n < 2 {
        return Err(domain("martingales need at least two points"));
    }
    let space = Arc::new(FiniteMetricMeasureSpace::path(n)?);
    let depth = default_depth(n);
    let w = space.weights().to_vec();
    let scalar = MixedNormDescriptor { s: desc.s, p: 2.0, d: 1 };
    (0..trials)
        .map(|t| {
            let mut r = rng::stream(seed, t as u64);
            let sys = build_shifted_integer_grid(Arc::clone(&space), r.random::<u64>(), depth)?;
            let f = sample_heavy_tailed(n, desc.d, &mut r);
            let levels: Vec<VectorField> =
                (0..=depth).map(|k| sys.average_op(k, &f)).collect::<Result<_>>()?;
            let mut sum_p = vec![0.0; n];
            let mut sum_q = vec![0.0; n];
            for u in 0..n {
                let mut add = |x: f64| {
                    sum_p[u] += x.powf(p_mart);
                    sum_q[u] += x.powf(q_mart);
                };
                add(desc.inner_norm(levels[0].at(u)));
                for k in 1..=depth {
                    let diff: Vec<f64> = levels[k].at(u).iter().zip(levels[k - 1].at(u)).map(|(a, b)| a - b).collect();
                    add(lp_norm(&diff, desc.p));
                }
            }
            let square = |sums: Vec<f64>, r: f64| {
                VectorField::from_scalar(sums.into_iter().map(|x| x.powf(1.0 / r)).collect())
            };
            let whole = mixed_norm(&f, desc, &w)?;
            let s_p = mixed_norm(&square(sum_p, p_mart), &scalar, &w)?;
            let s_q = mixed_norm(&square(sum_q, q_mart), &scalar, &w)?;
            Ok((whole / s_p, s_q / whole))
        })
        .collect()
}

/// Largest observed ratio in the martingale type `p_mart` inequality, a lower bound
/// for the true constant.
pub fn martingale_type_constant(
    desc: &MixedNormDescriptor,
    p_mart: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let ratios = martingale_ratios(desc, p_mart, 2.0, n, trials, seed)?;
    Ok(ratios.iter().fold(0.0, |m, r| m.max(r.0)))
}

/// Largest observed ratio in the martingale cotype `q_mart` inequality.
pub fn martingale_cotype_constant(
    desc: &MixedNormDescriptor,
    q_mart: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let ratios = martingale_ratios(desc, 2.0, q_mart, n, trials, seed)?;
    Ok(ratios.iter().fold(0.0, |m, r| m.max(r.1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pythagoras_in_l2() {
        let desc = MixedNormDescriptor::new(2.0, 2.0, 1).unwrap();
        for (a, b) in martingale_ratios(&desc, 2.0, 2.0, 50, 10, 3).unwrap() {
            assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
        }
        let vector = MixedNormDescriptor::new(2.0, 2.0, 3).unwrap();
        assert!((martingale_type_constant(&vector, 2.0, 40, 5, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_cotype_exponent_sits_below_inverse_type() {
        let desc = MixedNormDescriptor::new(3.0, 1.5, 4).unwrap();
        for (t, c) in martingale_ratios(&desc, 1.5, 64.0, 64, 20, 8).unwrap() {
            assert!(t * c <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn exponent_validation() {
        let desc = MixedNormDescriptor::new(2.0, 2.0, 1).unwrap();
        assert!(martingale_type_constant(&desc, 2.5, 16, 1, 0).is_err());
        assert!(martingale_cotype_constant(&desc, 1.5, 16, 1, 0).is_err());
        assert!(martingale_type_constant(&desc, 2.0, 1, 1, 0).is_err());
    }
}
