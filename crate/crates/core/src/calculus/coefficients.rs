//! Haar coefficients `<T h_P^a, h_Q^b>` of a kernel relative to a dyadic system.

use serde::Serialize;

use super::Bands;
use crate::dyadic::{CubeId, DyadicSystem};
use crate::error::{domain, Result};
use crate::field::scalar_pairing;
use crate::kernel::TruncatedKernel;

/// `out[u * n + b] = T 1_{Q_b}(u)` for the generation-`level` cubes `Q_b`.
pub(crate) fn row_aggregates(kernel: &TruncatedKernel, sys: &DyadicSystem, level: usize) -> Vec<f64> {
    let space = kernel.space();
    let len = space.len();
    let n = sys.level(level).len();
    let mut out = vec![0.0; len * n];
    for u in 0..len {
        let row = &mut out[u * n..(u + 1) * n];
        for v in 0..len {
            let k = kernel.get(u, v);
            if k != 0.0 {
                row[sys.position(sys.cube_of(level, v))] += k * space.weight(v);
            }
        }
    }
    out
}

/// `out[a * n + b] = <T 1_{Q_b}, 1_{Q_a}>` for the generation-`level` cubes.
pub(crate) fn block_matrix(kernel: &TruncatedKernel, sys: &DyadicSystem, level: usize) -> Vec<f64> {
    let rows = row_aggregates(kernel, sys, level);
    let space = kernel.space();
    let n = sys.level(level).len();
    let mut out = vec![0.0; n * n];
    for u in 0..space.len() {
        let a = sys.position(sys.cube_of(level, u));
        let w = space.weight(u);
        for b in 0..n {
            out[a * n + b] += w * rows[u * n + b];
        }
    }
    out
}

/// Value of `h_Q^alpha` on the `j`-th child of `Q`, with `h^0 = mu(Q)^{-1/2}`.
pub(crate) fn haar_value(sys: &DyadicSystem, q: CubeId, alpha: usize, j: usize) -> f64 {
    let h = sys.haar(q);
    if alpha == 0 {
        h.h0
    } else {
        h.vectors[alpha - 1][j]
    }
}

/// All coefficients `<T h_P^a, h_Q^b>`, `a, b >= 0`, between cubes of one generation.
#[derive(Clone, Debug)]
pub struct LevelCoefficients {
    pub level: usize,
    /// Number of cubes in the generation.
    pub count: usize,
    /// Largest child count; indices `a, b` run below it.
    pub width: usize,
    values: Vec<f64>,
}

impl LevelCoefficients {
    /// Computed from the child-generation block matrix. The finest generation has no Haar
    /// functions and gets `width = 0`.
    pub fn new(kernel: &TruncatedKernel, sys: &DyadicSystem, level: usize) -> Self {
        let ids = sys.level(level);
        let count = ids.len();
        if level == sys.depth() {
            return Self { level, count, width: 0, values: Vec::new() };
        }
        let width = ids.iter().map(|&q| sys.cube(q).child_count()).max().unwrap_or(0);
        let blocks = block_matrix(kernel, sys, level + 1);
        let nc = sys.level(level + 1).len();
        let mut values = vec![0.0; count * count * width * width];
        for (qi, &q) in ids.iter().enumerate() {
            let qc = &sys.cube(q).children;
            for (pi, &p) in ids.iter().enumerate() {
                let pc = &sys.cube(p).children;
                let base = (qi * count + pi) * width * width;
                for beta in 0..qc.len() {
                    for alpha in 0..pc.len() {
                        let mut acc = 0.0;
                        for (jq, &q1) in qc.iter().enumerate() {
                            let hq = haar_value(sys, q, beta, jq);
                            let row = sys.position(q1) * nc;
                            for (jp, &p1) in pc.iter().enumerate() {
                                acc += blocks[row + sys.position(p1)] * hq * haar_value(sys, p, alpha, jp);
                            }
                        }
                        values[base + beta * width + alpha] = acc;
                    }
                }
            }
        }
        Self { level, count, width, values }
    }

    /// `<T h_P^alpha, h_Q^beta>` for cubes at positions `q`, `p`; zero when an index exceeds
    /// the cube's child count.
    pub fn get(&self, q: usize, p: usize, beta: usize, alpha: usize) -> f64 {
        if beta >= self.width || alpha >= self.width {
            return 0.0;
        }
        self.values[(q * self.count + p) * self.width * self.width + beta * self.width + alpha]
    }
}

fn check_pair(sys: &DyadicSystem, p: CubeId, alpha: usize, q: CubeId, beta: usize) -> Result<()> {
    let (cp, cq) = (sys.cube(p), sys.cube(q));
    if cp.level != cq.level {
        return Err(domain("Haar coefficients pair cubes of one generation"));
    }
    if alpha == 0 && beta == 0 {
        return Err(domain("(alpha, beta) = (0, 0) is not a Haar coefficient"));
    }
    if alpha > sys.haar(p).len() || beta > sys.haar(q).len() {
        return Err(domain("Haar index exceeds the child count"));
    }
    Ok(())
}

fn haar_or_indicator(sys: &DyadicSystem, q: CubeId, alpha: usize) -> Vec<f64> {
    if alpha > 0 {
        return sys.haar_function(q, alpha);
    }
    let mut out = vec![0.0; sys.space().len()];
    let h0 = sys.haar(q).h0;
    for &u in &sys.cube(q).points {
        out[u] = h0;
    }
    out
}

/// `<T h_P^alpha, h_Q^beta>` by applying the kernel to `h_P^alpha`.
pub fn haar_coefficient(
    kernel: &TruncatedKernel,
    sys: &DyadicSystem,
    p: CubeId,
    alpha: usize,
    q: CubeId,
    beta: usize,
) -> Result<f64> {
    check_pair(sys, p, alpha, q, beta)?;
    let hp = crate::field::VectorField::from_scalar(haar_or_indicator(sys, p, alpha));
    let thp = kernel.apply(&hp)?;
    Ok(scalar_pairing(thp.values(), &haar_or_indicator(sys, q, beta), kernel.space().weights()))
}

/// The same coefficient as `sum <T 1_P', 1_Q'> <h_P^alpha>_P' <h_Q^beta>_Q'` over children.
pub fn haar_coefficient_by_children(
    kernel: &TruncatedKernel,
    sys: &DyadicSystem,
    p: CubeId,
    alpha: usize,
    q: CubeId,
    beta: usize,
) -> Result<f64> {
    check_pair(sys, p, alpha, q, beta)?;
    let space = kernel.space();
    let mut acc = 0.0;
    for (jp, &p1) in sys.cube(p).children.iter().enumerate() {
        for (jq, &q1) in sys.cube(q).children.iter().enumerate() {
            let mut t = 0.0;
            for &u in &sys.cube(q1).points {
                for &v in &sys.cube(p1).points {
                    t += kernel.get(u, v) * space.weight(u) * space.weight(v);
                }
            }
            acc += t * haar_value(sys, p, alpha, jp) * haar_value(sys, q, beta, jq);
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandRatio {
    pub band: usize,
    pub pairs: usize,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HaarBoundReport {
    pub eps: f64,
    pub m0: usize,
    /// Largest `|<T h_P^a, h_Q^b>|` over all same-generation pairs.
    pub max_abs: f64,
    /// Ratios to `omega(delta^m) sqrt(mu(P) mu(Q)) / V(z_P, delta^-m l(P))`, per band.
    pub bands: Vec<BandRatio>,
    pub max_ratio: f64,
    /// Pairs with `d(P, Q) >= R`, and the largest coefficient among them.
    pub beyond_truncation: usize,
    pub beyond_truncation_max: f64,
}

/// Scans every same-generation pair and every `(a, b) != (0, 0)`.
pub fn verify_haar_bounds(kernel: &TruncatedKernel, sys: &DyadicSystem, bands: &Bands) -> HaarBoundReport {
    let space = kernel.space();
    let mut per_band: std::collections::BTreeMap<usize, BandRatio> = Default::default();
    let mut max_abs: f64 = 0.0;
    let mut beyond = 0;
    let mut beyond_max: f64 = 0.0;
    for level in 0..sys.depth() {
        let coeffs = LevelCoefficients::new(kernel, sys, level);
        let ids = sys.level(level);
        for (qi, &q) in ids.iter().enumerate() {
            let cq = sys.cube(q);
            for (pi, &p) in ids.iter().enumerate() {
                let cp = sys.cube(p);
                let m = bands.band(space.dist(cp.reference, cq.reference), cp.side);
                let radius = bands.delta.powi(-(m as i32)) * cp.side;
                let bound = kernel.omega().eval(bands.delta.powi(m as i32)) * (cp.mass * cq.mass).sqrt()
                    / space.volume_unchecked(cp.center, radius);
                let separated = cp
                    .points
                    .iter()
                    .all(|&u| cq.points.iter().all(|&v| space.dist(u, v) >= kernel.outer_radius()));
                let mut largest: f64 = 0.0;
                for beta in 0..cq.child_count() {
                    for alpha in 0..cp.child_count() {
                        if alpha + beta > 0 {
                            largest = largest.max(coeffs.get(qi, pi, beta, alpha).abs());
                        }
                    }
                }
                if cq.child_count() <= 1 && cp.child_count() <= 1 {
                    continue;
                }
                max_abs = max_abs.max(largest);
                if separated {
                    beyond += 1;
                    beyond_max = beyond_max.max(largest);
                }
                let entry = per_band.entry(m).or_insert(BandRatio { band: m, pairs: 0, max_ratio: 0.0 });
                entry.pairs += 1;
                let ratio = if largest == 0.0 { 0.0 } else { largest / bound };
                entry.max_ratio = entry.max_ratio.max(ratio);
            }
        }
    }
    let bands_out: Vec<BandRatio> = per_band.into_values().collect();
    let max_ratio = bands_out.iter().map(|b| b.max_ratio).fold(0.0, f64::max);
    HaarBoundReport {
        eps: bands.eps,
        m0: bands.m0,
        max_abs,
        bands: bands_out,
        max_ratio,
        beyond_truncation: beyond,
        beyond_truncation_max: beyond_max,
    }
}
