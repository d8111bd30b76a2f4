//! The symbol `b = T1`, dyadic paraproducts, BMO, square functions and the
//! dyadic maximal function.

use serde::Serialize;

use super::coefficients::row_aggregates;
use crate::dyadic::{CubeId, DyadicSystem};
use crate::error::{check_dim, domain, Result};
use crate::field::VectorField;
use crate::kernel::TruncatedKernel;

/// `b = T1`.
pub fn extract_symbol(kernel: &TruncatedKernel) -> Vec<f64> {
    kernel.symbol()
}

fn check_range(sys: &DyadicSystem, sigma: usize, tau: usize) -> Result<()> {
    if sigma > tau || tau > sys.depth() {
        return Err(domain(format!("need sigma <= tau <= {}, got {sigma}, {tau}", sys.depth())));
    }
    Ok(())
}

/// Scalar averages `<b>_Q` for every cube.
fn scalar_averages(sys: &DyadicSystem, b: &[f64]) -> Vec<f64> {
    sys.all_averages(&VectorField::from_scalar(b.to_vec())).into_iter().map(|a| a[0]).collect()
}

/// `D_i b(u) = <b>_{Q_{i+1}(u)} - <b>_{Q_i(u)}`, zero at the finest generation.
fn level_difference(sys: &DyadicSystem, averages: &[f64], level: usize, u: usize) -> f64 {
    if level >= sys.depth() {
        0.0
    } else {
        averages[sys.cube_of(level + 1, u)] - averages[sys.cube_of(level, u)]
    }
}

/// `Pi_b f = sum_{i = sigma}^{tau} D_i b E_i f`.
pub fn paraproduct(sys: &DyadicSystem, b: &[f64], f: &VectorField, sigma: usize, tau: usize) -> Result<VectorField> {
    let n = sys.space().len();
    check_dim(n, b.len())?;
    check_dim(n, f.len())?;
    check_range(sys, sigma, tau)?;
    let bav = scalar_averages(sys, b);
    let fav = sys.all_averages(f);
    let mut out = VectorField::zeros(n, f.dim());
    for u in 0..n {
        for i in sigma..=tau {
            let db = level_difference(sys, &bav, i, u);
            if db == 0.0 {
                continue;
            }
            for (o, x) in out.at_mut(u).iter_mut().zip(&fav[sys.cube_of(i, u)]) {
                *o += db * x;
            }
        }
    }
    Ok(out)
}

/// `sum_{i, Q in D_i} <b, D_Q g> . <f>_Q`, which equals `<Pi_b f, g>`.
pub fn paraproduct_dual_form(
    sys: &DyadicSystem,
    b: &[f64],
    f: &VectorField,
    g: &VectorField,
    sigma: usize,
    tau: usize,
) -> Result<f64> {
    let n = sys.space().len();
    check_dim(n, b.len())?;
    f.same_shape(g)?;
    check_range(sys, sigma, tau)?;
    let w = sys.space().weights();
    let mut total = 0.0;
    for i in sigma..=tau {
        for &q in sys.level(i) {
            let dg = sys.cube_difference(q, g);
            let favg = sys.cube_average(q, f);
            for &u in &sys.cube(q).points {
                let dot: f64 = dg.at(u).iter().zip(&favg).map(|(a, c)| a * c).sum();
                total += w[u] * b[u] * dot;
            }
        }
    }
    Ok(total)
}

/// The split `<f>_P = (<f>_P - <f>_Q) + <f>_Q` applied to `sum_i <T E_i f, D_i g>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extraction {
    /// `sum_i <T E_i f, D_i g>`.
    pub direct: f64,
    /// `sum_i sum_{P, Q in D_i} (<f>_P - <f>_Q) . <T 1_P, D_Q g>`.
    pub cancellative: f64,
    /// `<Pi_b f, g>` with `b = T1`.
    pub paraproduct: f64,
}

impl Extraction {
    pub fn relative_residual(&self) -> f64 {
        let scale = self.direct.abs().max(self.cancellative.abs() + self.paraproduct.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.direct - self.cancellative - self.paraproduct).abs() / scale
        }
    }
}

/// Evaluates the three parts of the extraction independently. The symmetric sum
/// `sum_i <T D_i f, E_i g>` is the same computation for the transposed kernel with `f` and
/// `g` exchanged.
pub fn extraction(
    kernel: &TruncatedKernel,
    sys: &DyadicSystem,
    f: &VectorField,
    g: &VectorField,
    sigma: usize,
    tau: usize,
) -> Result<Extraction> {
    let n = kernel.len();
    check_dim(n, f.len())?;
    f.same_shape(g)?;
    check_range(sys, sigma, tau)?;
    let w = kernel.space().weights();
    let fav = sys.all_averages(f);
    let mut direct = 0.0;
    let mut cancellative = 0.0;
    for i in sigma..=tau {
        let dg = sys.difference_op(i, g)?;
        direct += kernel.apply(&sys.average_op(i, f)?)?.pairing(&dg, w)?;
        let rows = row_aggregates(kernel, sys, i);
        let ids = sys.level(i);
        let m = ids.len();
        for u in 0..n {
            let q = sys.cube_of(i, u);
            let mut acc = vec![0.0; f.dim()];
            for (pi, &p) in ids.iter().enumerate() {
                let t = rows[u * m + pi];
                if t == 0.0 || p == q {
                    continue;
                }
                for ((a, fp), fq) in acc.iter_mut().zip(&fav[p]).zip(&fav[q]) {
                    *a += t * (fp - fq);
                }
            }
            cancellative += w[u] * acc.iter().zip(dg.at(u)).map(|(a, d)| a * d).sum::<f64>();
        }
    }
    let b = extract_symbol(kernel);
    let paraproduct = paraproduct(sys, &b, f, sigma, tau)?.pairing(g, w)?;
    Ok(Extraction { direct, cancellative, paraproduct })
}

/// Dyadic BMO norm with `L_2` averages: `sup_Q (mu(Q)^{-1} int_Q |b - <b>_Q|^2)^{1/2}`.
pub fn bmo_norm(sys: &DyadicSystem, b: &[f64]) -> f64 {
    let bav = scalar_averages(sys, b);
    let w = sys.space().weights();
    sys.cubes()
        .iter()
        .zip(&bav)
        .map(|(q, avg)| {
            let osc: f64 = q.points.iter().map(|&u| w[u] * (b[u] - avg).powi(2)).sum();
            (osc / q.mass).sqrt()
        })
        .fold(0.0, f64::max)
}

/// `(sum_Q |D_Q b|^2)^{1/2}` pointwise.
pub fn square_function(sys: &DyadicSystem, b: &[f64]) -> Vec<f64> {
    let bav = scalar_averages(sys, b);
    (0..b.len())
        .map(|u| (0..sys.depth()).map(|i| level_difference(sys, &bav, i, u).powi(2)).sum::<f64>().sqrt())
        .collect()
}

/// `(sum_{Q subset P} |D_Q b|^2)^{1/2}`, supported on `P`.
pub fn truncated_square(sys: &DyadicSystem, b: &[f64], p: CubeId) -> Vec<f64> {
    let bav = scalar_averages(sys, b);
    let level = sys.cube(p).level;
    let mut out = vec![0.0; b.len()];
    for &u in &sys.cube(p).points {
        out[u] = (level..sys.depth()).map(|i| level_difference(sys, &bav, i, u).powi(2)).sum::<f64>().sqrt();
    }
    out
}

/// `M phi(u) = max_{Q containing u} <|phi|>_Q`.
pub fn doob_maximal(sys: &DyadicSystem, phi: &[f64]) -> Vec<f64> {
    let abs: Vec<f64> = phi.iter().map(|x| x.abs()).collect();
    let avg = scalar_averages(sys, &abs);
    (0..phi.len())
        .map(|u| (0..=sys.depth()).map(|k| avg[sys.cube_of(k, u)]).fold(0.0, f64::max))
        .collect()
}

/// `||Pi_b f||_2 / (||b||_BMO ||f||_2)` in `L_2(mu; l_2^d)`; zero when `b` has no oscillation.
pub fn paraproduct_bmo_constant(
    sys: &DyadicSystem,
    b: &[f64],
    f: &VectorField,
    sigma: usize,
    tau: usize,
) -> Result<f64> {
    let w = sys.space().weights();
    let pi = paraproduct(sys, b, f, sigma, tau)?;
    let l2 = |v: &VectorField| v.pairing(v, w).map(f64::sqrt);
    let bmo = bmo_norm(sys, b);
    let fnorm = l2(f)?;
    if bmo == 0.0 || fnorm == 0.0 {
        return Ok(0.0);
    }
    Ok(l2(&pi)? / (bmo * fnorm))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    use super::*;
    use crate::dyadic::build_shifted_integer_grid;
    use crate::space::FiniteMetricMeasureSpace;

    fn system(n: usize, bits: u64) -> DyadicSystem {
        let w: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7) % 5) as f64 / 4.0).collect();
        let space = Arc::new(FiniteMetricMeasureSpace::path_weighted(w).unwrap());
        build_shifted_integer_grid(space, bits, crate::dyadic::shifted::default_depth(n)).unwrap()
    }

    fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    }

    #[test]
    fn symbol_of_small_hilbert() {
        let b = extract_symbol(&TruncatedKernel::finite_hilbert(4).unwrap());
        assert!((b[0] + 11.0 / 6.0).abs() < 1e-15);
        assert!(b.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn constant_inputs() {
        let sys = system(16, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = VectorField::gaussian(16, 2, &mut rng);
        let pi = paraproduct(&sys, &[2.5; 16], &f, 0, 4).unwrap();
        assert_eq!(pi.max_abs(), 0.0);
        assert_eq!(bmo_norm(&sys, &[2.5; 16]), 0.0);
        assert!(square_function(&sys, &[2.5; 16]).iter().all(|x| x.abs() < 1e-15));

        // f = c telescopes to (E_{tau+1} b - E_sigma b) c
        let b = gaussian(16, &mut rng);
        let c = VectorField::constant(16, &[1.5, -2.0]);
        let bf = VectorField::from_scalar(b.clone());
        for (s, t) in [(0, 4), (1, 2)] {
            let pi = paraproduct(&sys, &b, &c, s, t).unwrap();
            let tele = sys.average_op(t + 1, &bf).unwrap().sub(&sys.average_op(s, &bf).unwrap()).unwrap();
            for u in 0..16 {
                assert!((pi.at(u)[0] - 1.5 * tele.at(u)[0]).abs() < 1e-12);
                assert!((pi.at(u)[1] + 2.0 * tele.at(u)[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn duality_and_extraction() {
        let k = TruncatedKernel::finite_hilbert(32).unwrap();
        let sys = build_shifted_integer_grid(Arc::clone(k.space()), 9, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = gaussian(32, &mut rng);
        let f = VectorField::gaussian(32, 2, &mut rng);
        let g = VectorField::gaussian(32, 2, &mut rng);
        let lhs = paraproduct_dual_form(&sys, &b, &f, &g, 1, 4).unwrap();
        let rhs = paraproduct(&sys, &b, &f, 1, 4).unwrap().pairing(&g, k.space().weights()).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0));
        let e = extraction(&k, &sys, &f, &g, 0, 5).unwrap();
        assert!(e.relative_residual() < 1e-12, "{e:?}");
        let kt = k.transpose();
        let dual = extraction(&kt, &sys, &g, &f, 1, 3).unwrap();
        assert!(dual.relative_residual() < 1e-12);
    }

    #[test]
    fn square_function_identity() {
        let sys = system(32, 21);
        let w = sys.space().weights().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = gaussian(32, &mut rng);
        for &s in sys.cubes().iter().enumerate().map(|(i, _)| i).collect::<Vec<_>>().iter() {
            let sq = truncated_square(&sys, &b, s);
            let lhs: f64 = sq.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            let q = sys.cube(s);
            let avg = q.points.iter().map(|&u| w[u] * b[u]).sum::<f64>() / q.mass;
            let rhs: f64 = q.points.iter().map(|&u| w[u] * (b[u] - avg).powi(2)).sum();
            assert!((lhs - rhs).abs() < 1e-10 * rhs.max(1.0));
        }
    }

    #[test]
    fn single_haar_symbol() {
        let sys = system(16, 0);
        let q = sys.level(1)[0];
        let h = sys.haar_function(q, 1);
        let sq = square_function(&sys, &h);
        for u in 0..16 {
            assert!((sq[u] - h[u].abs()).abs() < 1e-12);
        }
        let direct = {
            let c = sys.cube(q);
            let w = sys.space().weights();
            (c.points.iter().map(|&u| w[u] * h[u] * h[u]).sum::<f64>() / c.mass).sqrt()
        };
        assert!(bmo_norm(&sys, &h) >= direct - 1e-12);
        assert!((direct - sys.cube(q).mass.powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn maximal_function() {
        let space = Arc::new(FiniteMetricMeasureSpace::path(2).unwrap());
        let sys = build_shifted_integer_grid(space, 0, 1).unwrap();
        assert_eq!(doob_maximal(&sys, &[1.0, 0.0]), vec![1.0, 0.5]);
        let sys = system(16, 5);
        let m = doob_maximal(&sys, &[0.75; 16]);
        assert!(m.iter().all(|x| (x - 0.75).abs() < 1e-15));
    }
}
