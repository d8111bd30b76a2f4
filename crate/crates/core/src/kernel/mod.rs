//! Finitely truncated standard kernels and the integral operators they define.

mod dini;
mod omega;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use dini::dini_norm;
pub use omega::Modulus;

use crate::error::{check_dim, domain, Result};
use crate::field::VectorField;
use crate::space::FiniteMetricMeasureSpace;

/// Where a kernel came from; closed forms serialize as short tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelTag {
    /// `K(i, j) = 1 / (i - j)` on the path space, `r = 1`, `R = N`.
    Hilbert,
    /// `1 / (i - j)` restricted to `r <= |i - j| < R` on the path space.
    TruncatedHilbert,
    Explicit,
}

/// A kernel `K(u, v)` on a finite space, nominally supported in the annulus
/// `r <= d(u, v) < R`.
///
/// The support condition is not enforced on construction so that corrupted
/// kernels can be built and detected by [`TruncatedKernel::verify_standard_estimates`].
#[derive(Clone, Debug)]
pub struct TruncatedKernel {
    space: Arc<FiniteMetricMeasureSpace>,
    values: Vec<f64>,
    inner: f64,
    outer: f64,
    omega: Modulus,
    tag: KernelTag,
}

/// Measured constants of the standard estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardEstimates {
    /// `max_{u != v} |K(u, v)| V(u, v)`.
    pub c_size: f64,
    /// Smoothness constant over triples with `d(v, w) <= d(u, v) / 2`.
    pub c_smooth: f64,
    /// Doubling constant of the modulus.
    pub c_omega: f64,
    pub truncation_ok: bool,
    pub truncation_violations: usize,
}

impl StandardEstimates {
    pub fn is_standard(&self) -> bool {
        self.truncation_ok && self.c_size.is_finite() && self.c_smooth.is_finite() && self.c_omega.is_finite()
    }
}

/// Row and column Schur sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchurBound {
    /// `max_u sum_v |K(u, v)| mu_v`.
    pub max_row_sum: f64,
    /// `max_v sum_u |K(u, v)| mu_u`.
    pub max_col_sum: f64,
}

impl SchurBound {
    /// Schur-test bound for the operator norm on `L_s`: `row^{1/s'} col^{1/s}`.
    pub fn lp_bound(&self, s: f64) -> f64 {
        if s.is_infinite() {
            return self.max_row_sum;
        }
        self.max_row_sum.powf(1.0 - 1.0 / s) * self.max_col_sum.powf(1.0 / s)
    }
}

impl TruncatedKernel {
    pub fn new(
        space: Arc<FiniteMetricMeasureSpace>,
        values: Vec<f64>,
        inner: f64,
        outer: f64,
        omega: Modulus,
    ) -> Result<Self> {
        let n = space.len();
        check_dim(n * n, values.len())?;
        check_radii(inner, outer)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("kernel entries must be finite"));
        }
        Ok(Self {
            space,
            values,
            inner,
            outer,
            omega,
            tag: KernelTag::Explicit,
        })
    }

    pub fn zero(space: Arc<FiniteMetricMeasureSpace>, inner: f64, outer: f64, omega: Modulus) -> Result<Self> {
        let n = space.len();
        Self::new(space, vec![0.0; n * n], inner, outer, omega)
    }

    /// Finite Hilbert kernel `1 / (i - j)` on `{1, ..., N}`.
    pub fn finite_hilbert(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("finite Hilbert kernel needs N >= 2, got {n}")));
        }
        let mut k = Self::truncated_hilbert(n, 1.0, n as f64)?;
        k.tag = KernelTag::Hilbert;
        Ok(k)
    }

    /// `1 / (i - j)` for `inner <= |i - j| < outer`, zero elsewhere.
    pub fn truncated_hilbert(n: usize, inner: f64, outer: f64) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("Hilbert-type kernel needs N >= 2, got {n}")));
        }
        check_radii(inner, outer)?;
        let space = Arc::new(FiniteMetricMeasureSpace::path(n)?);
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = i.abs_diff(j) as f64;
                if d >= inner && d < outer {
                    values[i * n + j] = 1.0 / (i as f64 - j as f64);
                }
            }
        }
        Ok(Self {
            space,
            values,
            inner,
            outer,
            omega: Modulus::lipschitz(),
            tag: KernelTag::TruncatedHilbert,
        })
    }

    /// Random test kernel `K(u, v) = phi(d(u, v)) g(u, v) / V(u, v)`.
    ///
    /// `phi(t) = 1 - ((t - r) / (R - r))^2` on `[r, R)` and zero elsewhere;
    /// `g` is a bounded product of cosines of distances to random anchor
    /// points, so it is Lipschitz in each variable at the scale of the diameter.
    pub fn random(
        space: Arc<FiniteMetricMeasureSpace>,
        inner: f64,
        outer: f64,
        seed: u64,
        omega: Modulus,
    ) -> Result<Self> {
        check_radii(inner, outer)?;
        let n = space.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = space.diameter().max(1.0);
        const MODES: usize = 3;
        struct Mode {
            amp: f64,
            anchors: [usize; 2],
            freq: [f64; 2],
            phase: [f64; 2],
        }
        let modes: Vec<Mode> = (0..MODES)
            .map(|_| Mode {
                amp: rng.random_range(-1.0..1.0),
                anchors: [rng.random_range(0..n), rng.random_range(0..n)],
                freq: [rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)],
                phase: [rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.0..std::f64::consts::TAU)],
            })
            .collect();
        let base: f64 = rng.random_range(1.25..2.0);
        let g = |u: usize, v: usize| {
            base + modes
                .iter()
                .map(|m| {
                    let a = (m.freq[0] * space.dist(m.anchors[0], u) / scale + m.phase[0]).cos();
                    let b = (m.freq[1] * space.dist(m.anchors[1], v) / scale + m.phase[1]).cos();
                    m.amp * a * b / MODES as f64
                })
                .sum::<f64>()
        };
        let vols = space.pair_volumes();
        let mut values = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                let d = space.dist(u, v);
                if d >= inner && d < outer {
                    let x = (d - inner) / (outer - inner);
                    values[u * n + v] = (1.0 - x * x) * g(u, v) / vols[u * n + v];
                }
            }
        }
        Self::new(space, values, inner, outer, omega)
    }

    pub fn space(&self) -> &Arc<FiniteMetricMeasureSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn tag(&self) -> KernelTag {
        self.tag
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer
    }

    pub fn omega(&self) -> &Modulus {
        &self.omega
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[u * self.space.len() + v]
    }

    /// A copy with one entry overwritten; the result is tagged explicit.
    pub fn with_entry(&self, u: usize, v: usize, value: f64) -> Result<Self> {
        let n = self.len();
        if u >= n || v >= n {
            return Err(domain(format!("entry ({u},{v}) outside a {n}-point kernel")));
        }
        let mut out = self.clone();
        out.values[u * n + v] = value;
        out.tag = KernelTag::Explicit;
        Ok(out)
    }

    /// `n = 1 + ln(R / r)`.
    pub fn truncation_index(&self) -> f64 {
        1.0 + (self.outer / self.inner).ln()
    }

    /// Number of entries that are nonzero outside `r <= d < R`.
    pub fn truncation_violations(&self) -> usize {
        let n = self.len();
        (0..n * n)
            .filter(|&k| {
                let d = self.space.dist(k / n, k % n);
                self.values[k] != 0.0 && !(d >= self.inner && d < self.outer)
            })
            .count()
    }

    /// Exhaustive scan of the size, smoothness and support conditions.
    ///
    /// A triple with a nonzero difference but `omega(d(v,w)/d(u,v)) = 0`
    /// yields an infinite smoothness constant.
    pub fn verify_standard_estimates(&self) -> StandardEstimates {
        let n = self.len();
        let space = &*self.space;
        let vols = space.pair_volumes();
        let c_size = (0..n * n)
            .filter(|k| k / n != k % n)
            .map(|k| self.values[k].abs() * vols[k])
            .fold(0.0, f64::max);
        let c_smooth = (0..n)
            .into_par_iter()
            .map(|u| {
                let mut best: f64 = 0.0;
                for v in 0..n {
                    let duv = space.dist(u, v);
                    if v == u {
                        continue;
                    }
                    for w in 0..n {
                        let dvw = space.dist(v, w);
                        if w == v || dvw > 0.5 * duv {
                            continue;
                        }
                        let diff = (self.get(u, v) - self.get(u, w)).abs() + (self.get(v, u) - self.get(w, u)).abs();
                        if diff == 0.0 {
                            continue;
                        }
                        let om = self.omega.eval(dvw / duv);
                        let ratio = if om > 0.0 { diff * vols[u * n + v] / om } else { f64::INFINITY };
                        best = best.max(ratio);
                    }
                }
                best
            })
            .reduce(|| 0.0, f64::max);
        let truncation_violations = self.truncation_violations();
        StandardEstimates {
            c_size,
            c_smooth,
            c_omega: self.omega.doubling_constant(),
            truncation_ok: truncation_violations == 0,
            truncation_violations,
        }
    }

    /// Per-row sums `sum_v |K(u, v)| mu_v`.
    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.len();
        let w = self.space.weights();
        (0..n)
            .map(|u| self.values[u * n..(u + 1) * n].iter().zip(w).map(|(k, m)| k.abs() * m).sum())
            .collect()
    }

    /// Per-column sums `sum_u |K(u, v)| mu_u`.
    pub fn col_sums(&self) -> Vec<f64> {
        let n = self.len();
        let w = self.space.weights();
        let mut out = vec![0.0; n];
        for (u, wu) in w.iter().enumerate() {
            for (v, o) in out.iter_mut().enumerate() {
                *o += self.values[u * n + v].abs() * wu;
            }
        }
        out
    }

    pub fn schur_row_bound(&self) -> SchurBound {
        SchurBound {
            max_row_sum: self.row_sums().into_iter().fold(0.0, f64::max),
            max_col_sum: self.col_sums().into_iter().fold(0.0, f64::max),
        }
    }

    /// `(T f)(u) = sum_v K(u, v) f(v) mu_v`, componentwise.
    pub fn apply(&self, f: &VectorField) -> Result<VectorField> {
        let n = self.len();
        check_dim(n, f.len())?;
        let d = f.dim();
        let w = self.space.weights();
        let mut weighted = f.clone();
        for (u, m) in w.iter().enumerate() {
            weighted.at_mut(u).iter_mut().for_each(|x| *x *= m);
        }
        let src = weighted.values();
        let mut out = vec![0.0; n * d];
        out.par_chunks_mut(d).enumerate().for_each(|(u, row_out)| {
            let row = &self.values[u * n..(u + 1) * n];
            if d == 1 {
                row_out[0] = row.iter().zip(src).map(|(k, x)| k * x).sum();
            } else {
                for (v, k) in row.iter().enumerate() {
                    if *k != 0.0 {
                        for (o, x) in row_out.iter_mut().zip(&src[v * d..(v + 1) * d]) {
                            *o += k * x;
                        }
                    }
                }
            }
        });
        VectorField::from_values(n, d, out)
    }

    /// `(T* g)(v) = sum_u K(u, v) g(u) mu_u`, the adjoint for the `mu`-pairing.
    pub fn apply_adjoint(&self, g: &VectorField) -> Result<VectorField> {
        self.transpose().apply(g)
    }

    /// The kernel `K*(u, v) = K(v, u)`.
    pub fn transpose(&self) -> Self {
        let n = self.len();
        let mut values = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                values[v * n + u] = self.values[u * n + v];
            }
        }
        Self {
            space: Arc::clone(&self.space),
            values,
            inner: self.inner,
            outer: self.outer,
            omega: self.omega.clone(),
            tag: if self.tag == KernelTag::Explicit { KernelTag::Explicit } else { self.tag },
        }
    }

    /// `T 1`.
    pub fn symbol(&self) -> Vec<f64> {
        let ones = VectorField::constant(self.len(), &[1.0]);
        self.apply(&ones).expect("shapes agree").into_values()
    }
}

fn check_radii(inner: f64, outer: f64) -> Result<()> {
    if !(inner > 0.0 && inner.is_finite() && outer.is_finite() && inner < outer) {
        return Err(domain(format!("truncation radii need 0 < r < R < inf, got r = {inner}, R = {outer}")));
    }
    Ok(())
}
