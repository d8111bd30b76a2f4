//! Stopping families and the sparse bound for paraproducts.

use serde::Serialize;

use super::paraproduct::bmo_norm;
use crate::dyadic::{CubeId, DyadicSystem};
use crate::error::{check_dim, domain, Result};
use crate::field::VectorField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StopKind {
    /// A generation-`sigma` cube.
    Initial,
    /// `<|f|>_{S'} > 4 <|f|>_S`.
    First,
    /// `sum_{S' < Q <= S} |D_Q b|^2 > lambda^2` on `S'`.
    Second,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StoppingCube {
    pub cube: CubeId,
    pub kind: StopKind,
    /// Index of the stopping parent inside the family.
    pub parent: Option<usize>,
    /// `E_S`: the points of `S` outside every stopping child.
    pub major: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseFamily {
    pub sigma: usize,
    pub lambda: f64,
    pub cubes: Vec<StoppingCube>,
}

impl SparseFamily {
    fn ratio_of_children(&self, sys: &DyadicSystem, kind: Option<StopKind>) -> f64 {
        let mut mass = vec![0.0; self.cubes.len()];
        for c in &self.cubes {
            if let Some(p) = c.parent {
                if kind.is_none_or(|k| k == c.kind) {
                    mass[p] += sys.cube(c.cube).mass;
                }
            }
        }
        self.cubes.iter().zip(&mass).map(|(c, m)| m / sys.cube(c.cube).mass).fold(0.0, f64::max)
    }

    /// `max_S sum_{first-kind children S'} mu(S') / mu(S)`.
    pub fn first_kind_ratio(&self, sys: &DyadicSystem) -> f64 {
        self.ratio_of_children(sys, Some(StopKind::First))
    }

    /// `max_S sum_{second-kind children S'} mu(S') / mu(S)`.
    pub fn second_kind_ratio(&self, sys: &DyadicSystem) -> f64 {
        self.ratio_of_children(sys, Some(StopKind::Second))
    }

    /// `min_S mu(E_S) / mu(S)`.
    pub fn major_ratio(&self, sys: &DyadicSystem) -> f64 {
        let w = sys.space().weights();
        self.cubes
            .iter()
            .map(|c| c.major.iter().map(|&u| w[u]).sum::<f64>() / sys.cube(c.cube).mass)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn majors_disjoint(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for c in &self.cubes {
            for &u in &c.major {
                if std::mem::replace(&mut seen[u], true) {
                    return false;
                }
            }
        }
        true
    }

    pub fn majors_inside(&self, sys: &DyadicSystem) -> bool {
        self.cubes
            .iter()
            .all(|c| c.major.iter().all(|u| sys.cube(c.cube).points.binary_search(u).is_ok()))
    }
}

/// Stopping cubes for the pointwise norms `f_norm = |f(u)|` and the symbol `b`, starting from
/// every generation-`sigma` cube. `lambda = 0` is accepted (it stops wherever `b` oscillates).
pub fn stopping_family(
    sys: &DyadicSystem,
    f_norm: &[f64],
    b: &[f64],
    lambda: f64,
    sigma: usize,
) -> Result<SparseFamily> {
    let n = sys.space().len();
    check_dim(n, f_norm.len())?;
    check_dim(n, b.len())?;
    sys.check_level(sigma)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(domain(format!("lambda must be a finite non-negative number, got {lambda}")));
    }
    let fav: Vec<f64> = sys.all_averages(&VectorField::from_scalar(f_norm.to_vec())).into_iter().map(|a| a[0]).collect();
    let bav: Vec<f64> = sys.all_averages(&VectorField::from_scalar(b.to_vec())).into_iter().map(|a| a[0]).collect();
    let mut cubes: Vec<StoppingCube> = sys
        .level(sigma)
        .iter()
        .map(|&q| StoppingCube { cube: q, kind: StopKind::Initial, parent: None, major: Vec::new() })
        .collect();
    let mut next = 0;
    while next < cubes.len() {
        let s = cubes[next].cube;
        let threshold = 4.0 * fav[s];
        let mut stopped: Vec<usize> = Vec::new();
        let mut stack: Vec<(CubeId, f64)> = vec![(s, 0.0)];
        while let Some((q, acc)) = stack.pop() {
            for &c in &sys.cube(q).children {
                let acc_c = acc + (bav[c] - bav[q]).powi(2);
                let kind = if fav[c] > threshold {
                    Some(StopKind::First)
                } else if acc_c > lambda * lambda {
                    Some(StopKind::Second)
                } else {
                    None
                };
                match kind {
                    Some(kind) => {
                        stopped.push(cubes.len());
                        cubes.push(StoppingCube { cube: c, kind, parent: Some(next), major: Vec::new() });
                    }
                    None => stack.push((c, acc_c)),
                }
            }
        }
        let mut covered = vec![false; n];
        for &i in &stopped {
            for &u in &sys.cube(cubes[i].cube).points {
                covered[u] = true;
            }
        }
        cubes[next].major = sys.cube(s).points.iter().copied().filter(|&u| !covered[u]).collect();
        next += 1;
    }
    Ok(SparseFamily { sigma, lambda, cubes })
}

/// Both sides of the regrouped square-function bound and the sparse-sum norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StoppingBound {
    /// `||(sum_{i, Q} |D_Q b|^2 <|f|>_Q^2)^{1/2}||_{L_s}`.
    pub lhs: f64,
    /// `||b||_BMO ||(sum_S 1_S <|f|>_S^2)^{1/2}||_{L_s}`.
    pub rhs: f64,
    pub constant: f64,
    /// `||sum_S 1_S <|f|>_S||_{L_s}`.
    pub sparse_norm: f64,
    /// `sparse_norm / ||f||_{L_s}`.
    pub sparse_constant: f64,
    pub family_size: usize,
}

/// Evaluates the sparse bound with the family built at `lambda = 2 ||b||_BMO`.
pub fn paraproduct_stopping_bound(
    sys: &DyadicSystem,
    b: &[f64],
    f_norm: &[f64],
    s: f64,
    sigma: usize,
    tau: usize,
) -> Result<StoppingBound> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(domain(format!("s must lie in (1, inf), got {s}")));
    }
    if sigma > tau || tau > sys.depth() {
        return Err(domain("need sigma <= tau <= depth"));
    }
    let bmo = bmo_norm(sys, b);
    let family = stopping_family(sys, f_norm, b, 2.0 * bmo, sigma)?;
    let n = sys.space().len();
    let w = sys.space().weights();
    let fav: Vec<f64> = sys.all_averages(&VectorField::from_scalar(f_norm.to_vec())).into_iter().map(|a| a[0]).collect();
    let bav: Vec<f64> = sys.all_averages(&VectorField::from_scalar(b.to_vec())).into_iter().map(|a| a[0]).collect();
    let ls = |v: &[f64]| v.iter().zip(w).map(|(x, w)| w * x.abs().powf(s)).sum::<f64>().powf(1.0 / s);

    let mut square = vec![0.0; n];
    for (u, sq) in square.iter_mut().enumerate() {
        for i in (sigma..=tau).filter(|&i| i < sys.depth()) {
            let q = sys.cube_of(i, u);
            let db = bav[sys.cube_of(i + 1, u)] - bav[q];
            *sq += db * db * fav[q] * fav[q];
        }
    }
    let lhs = ls(&square.iter().map(|x| x.sqrt()).collect::<Vec<_>>());

    let mut sparse_sq = vec![0.0; n];
    let mut sparse = vec![0.0; n];
    for c in &family.cubes {
        let a = fav[c.cube];
        for &u in &sys.cube(c.cube).points {
            sparse_sq[u] += a * a;
            sparse[u] += a;
        }
    }
    let rhs = bmo * ls(&sparse_sq.iter().map(|x| x.sqrt()).collect::<Vec<_>>());
    let sparse_norm = ls(&sparse);
    let fnorm = ls(f_norm);
    Ok(StoppingBound {
        lhs,
        rhs,
        constant: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        sparse_norm,
        sparse_constant: if fnorm > 0.0 { sparse_norm / fnorm } else { 0.0 },
        family_size: family.cubes.len(),
    })
}
