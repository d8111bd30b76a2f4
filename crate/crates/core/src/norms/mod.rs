//! Mixed norms `L_s(mu; l_p^d)`, their duality maps, operator-norm lower
//! bounds with independent oracles, and empirical martingale type and cotype
//! constants.

mod martingale;
mod operator;
mod oracle;
mod power;

use serde::{Deserialize, Serialize};

pub use martingale::{martingale_cotype_constant, martingale_ratios, martingale_type_constant, sample_heavy_tailed};
pub use operator::{DenseOperator, LinearOperator};
pub use oracle::{operator_norm_oracle_small, spectral_norm_oracle, MAX_ORACLE_DIMENSION};
pub use power::{
    operator_norm_lower_bound, operator_norm_lower_bound_with_tolerance, NormEstimate, DEFAULT_RESTARTS, DEFAULT_TOLERANCE,
};

use crate::error::{check_dim, domain, Result};
use crate::field::VectorField;

/// The norm of `L_s(mu; l_p^d)`: `s` in `(1, inf)`, `p` in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedNormDescriptor {
    pub s: f64,
    pub p: f64,
    pub d: usize,
}

/// `x / (x - 1)`, with `1 <-> inf`.
pub fn conjugate(x: f64) -> f64 {
    if x == 1.0 {
        f64::INFINITY
    } else if x.is_infinite() {
        1.0
    } else {
        x / (x - 1.0)
    }
}

impl MixedNormDescriptor {
    pub fn new(s: f64, p: f64, d: usize) -> Result<Self> {
        if !(s > 1.0 && s.is_finite()) {
            return Err(domain(format!("outer exponent s must lie in (1, inf), got {s}")));
        }
        if !(p >= 1.0) {
            return Err(domain(format!("inner exponent p must lie in [1, inf], got {p}")));
        }
        if d == 0 {
            return Err(domain("inner dimension must be at least 1"));
        }
        Ok(Self { s, p, d })
    }

    pub fn s_conjugate(&self) -> f64 {
        conjugate(self.s)
    }

    pub fn p_conjugate(&self) -> f64 {
        conjugate(self.p)
    }

    /// `L_{s'}(mu; l_{p'}^d)`.
    pub fn dual(&self) -> Self {
        Self { s: self.s_conjugate(), p: self.p_conjugate(), d: self.d }
    }

    /// `l_p` norm of one value.
    pub fn inner_norm(&self, x: &[f64]) -> f64 {
        lp_norm(x, self.p)
    }

    fn check(&self, f: &VectorField, weights: &[f64]) -> Result<()> {
        check_dim(self.d, f.dim())?;
        check_dim(f.len(), weights.len())
    }
}

pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        scale * x.iter().map(|v| (v.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// `(sum_u mu_u |f(u)|_p^s)^{1/s}`.
pub fn mixed_norm(f: &VectorField, desc: &MixedNormDescriptor, weights: &[f64]) -> Result<f64> {
    desc.check(f, weights)?;
    let inner: Vec<f64> = (0..f.len()).map(|u| desc.inner_norm(f.at(u))).collect();
    let scale = inner.iter().fold(0.0f64, |m, v| m.max(*v));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = inner.iter().zip(weights).map(|(x, w)| w * (x / scale).powf(desc.s)).sum();
    Ok(scale * sum.powf(1.0 / desc.s))
}

/// Norming functional of `f`: `<f, g> = |f|` and `|g|_dual = 1`.
///
/// For `1 < p < inf`, `g_j(u) = sign(f_j) |f_j|^{p-1} |f(u)|_p^{s-p} / |f|^{s-1}`. For `p = 1` the
/// inner subgradient is `sign(f_j)` (zero on zero coordinates); for `p = inf` it puts mass
/// `sign(f_j) / k` on each of the `k` coordinates attaining the maximum.
pub fn duality_map(f: &VectorField, desc: &MixedNormDescriptor, weights: &[f64]) -> Result<VectorField> {
    let total = mixed_norm(f, desc, weights)?;
    if total == 0.0 {
        return Err(domain("the duality map is undefined at f = 0"));
    }
    let s = desc.s;
    let p = desc.p;
    let mut g = VectorField::zeros(f.len(), f.dim());
    for u in 0..f.len() {
        let x = f.at(u);
        let local = desc.inner_norm(x);
        if local == 0.0 {
            continue;
        }
        let out = g.at_mut(u);
        if p.is_infinite() {
            let ties: Vec<usize> = (0..x.len()).filter(|&j| x[j].abs() == local).collect();
            let factor = (local / total).powf(s - 1.0) / ties.len() as f64;
            for j in ties {
                out[j] = x[j].signum() * factor;
            }
        } else if p == 1.0 {
            let factor = (local / total).powf(s - 1.0);
            for (o, v) in out.iter_mut().zip(x) {
                if *v != 0.0 {
                    *o = v.signum() * factor;
                }
            }
        } else {
            // |f_j|^{p-1} |f(u)|^{s-p} / |f|^{s-1} = (|f_j| / |f(u)|)^{p-1} (|f(u)| / |f|)^{s-1}
            let factor = (local / total).powf(s - 1.0);
            for (o, v) in out.iter_mut().zip(x) {
                *o = v.signum() * (v.abs() / local).powf(p - 1.0) * factor;
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn descriptor_validation() {
        assert!(MixedNormDescriptor::new(1.0, 2.0, 1).is_err());
        assert!(MixedNormDescriptor::new(f64::INFINITY, 2.0, 1).is_err());
        assert!(MixedNormDescriptor::new(2.0, 0.5, 1).is_err());
        assert!(MixedNormDescriptor::new(2.0, 2.0, 0).is_err());
        let d = MixedNormDescriptor::new(3.0, f64::INFINITY, 2).unwrap();
        assert_eq!(d.dual().p, 1.0);
        assert!((d.dual().s - 1.5).abs() < 1e-15);
        assert_eq!(conjugate(1.0), f64::INFINITY);
    }

    #[test]
    fn small_norms() {
        let w = [1.0, 2.0];
        let f = VectorField::from_values(2, 2, vec![3.0, 4.0, 0.0, 1.0]).unwrap();
        let d = MixedNormDescriptor::new(2.0, 2.0, 2).unwrap();
        assert!((mixed_norm(&f, &d, &w).unwrap() - 27f64.sqrt()).abs() < 1e-14);
        let d1 = MixedNormDescriptor::new(3.0, 1.0, 2).unwrap();
        assert!((mixed_norm(&f, &d1, &w).unwrap() - (343f64 + 2.0).cbrt()).abs() < 1e-12);
        let dinf = MixedNormDescriptor::new(2.0, f64::INFINITY, 2).unwrap();
        assert!((mixed_norm(&f, &dinf, &w).unwrap() - 18f64.sqrt()).abs() < 1e-14);
        let scalar = VectorField::from_scalar(vec![1.0, -2.0]);
        let ds = MixedNormDescriptor::new(4.0, 3.0, 1).unwrap();
        assert!((mixed_norm(&scalar, &ds, &w).unwrap() - 33f64.powf(0.25)).abs() < 1e-14);
        assert_eq!(mixed_norm(&VectorField::zeros(2, 1), &ds, &w).unwrap(), 0.0);
    }

    #[test]
    fn duality_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w: Vec<f64> = (0..10).map(|i| 0.5 + i as f64 / 10.0).collect();
        for p in [1.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY] {
            for s in [1.5, 2.0, 3.0, 4.0] {
                let desc = MixedNormDescriptor::new(s, p, 3).unwrap();
                let f = VectorField::gaussian(10, 3, &mut rng);
                let g = duality_map(&f, &desc, &w).unwrap();
                let norm = mixed_norm(&f, &desc, &w).unwrap();
                assert!((f.pairing(&g, &w).unwrap() - norm).abs() < 1e-10 * norm);
                assert!((mixed_norm(&g, &desc.dual(), &w).unwrap() - 1.0).abs() < 1e-10);
            }
        }
        let desc = MixedNormDescriptor::new(2.0, 2.0, 1).unwrap();
        assert!(duality_map(&VectorField::zeros(3, 1), &desc, &[1.0; 3]).is_err());
    }

    #[test]
    fn hilbertian_and_scalar_maps() {
        let w = [1.0; 4];
        let f = VectorField::from_scalar(vec![1.0, -2.0, 0.5, 3.0]);
        let d2 = MixedNormDescriptor::new(2.0, 2.0, 1).unwrap();
        let norm = mixed_norm(&f, &d2, &w).unwrap();
        let g = duality_map(&f, &d2, &w).unwrap();
        for u in 0..4 {
            assert!((g.at(u)[0] - f.at(u)[0] / norm).abs() < 1e-15);
        }
        let d4 = MixedNormDescriptor::new(4.0, 2.0, 1).unwrap();
        let g = duality_map(&f, &d4, &w).unwrap();
        let ratio = g.at(3)[0] / 27.0;
        for u in 0..4 {
            let x = f.at(u)[0];
            assert!((g.at(u)[0] - ratio * x.signum() * x.abs().powi(3)).abs() < 1e-14);
        }
    }

    #[test]
    fn ties_split_for_sup_norm() {
        let f = VectorField::from_values(1, 3, vec![2.0, -2.0, 1.0]).unwrap();
        let desc = MixedNormDescriptor::new(2.0, f64::INFINITY, 3).unwrap();
        let g = duality_map(&f, &desc, &[1.0]).unwrap();
        assert_eq!(g.at(0), &[0.5, -0.5, 0.0]);
    }
}
