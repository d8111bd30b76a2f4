//! Banded block operators `A^m_S`.
//!
//! Every same-generation pair `(P, Q)` at generation `i` falls in a separation band `m`
//! (see [`Bands`]). Pairs with `m <= i` belong to the block of their generation-`(i - m)`
//! ancestor `S` provided both cubes share it, and are weighted by `1 / P(A_m(P, Q))`, the
//! inverse probability of that event. Pairs with `m > i` have no such ancestor; they stay
//! with the root at weight `1`.

use std::collections::BTreeSet;

use serde::Serialize;

use super::coefficients::LevelCoefficients;
use super::paraproduct::extraction;
use super::Bands;
use crate::dyadic::{CubeId, DyadicSystem, GridFamily, GridKind};
use crate::error::{check_dim, domain, Result};
use crate::field::VectorField;
use crate::kernel::TruncatedKernel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// `<T D_P f, D_Q g>`.
    Cancellative,
    /// `(<f>_P - <f>_Q) . <T 1_P, D_Q g>`.
    ParaLeft,
    /// `<T D_P f, 1_Q> . (<g>_Q - <g>_P)`.
    ParaRight,
}

impl Flavor {
    pub const ALL: [Flavor; 3] = [Flavor::Cancellative, Flavor::ParaLeft, Flavor::ParaRight];
}

/// How `P(A_m(P, Q))` is obtained.
#[derive(Clone, Copy, Debug)]
pub enum AncestorModel<'a> {
    /// Closed form for shifted grids: `max(0, 1 - |a_P - a_Q| / 2^m)` from the grid indices.
    Exact,
    /// Frequency with which `x_P` and `x_Q` share a generation-`(i - m)` cube in the samples.
    Sampled(&'a [DyadicSystem]),
}

/// A block: the ancestor `S`, the band and the generation of its pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BlockSpec {
    pub cube: CubeId,
    pub band: usize,
    pub level: usize,
}

struct LevelPairs {
    coeffs: LevelCoefficients,
    band: Vec<usize>,
    probability: Vec<f64>,
}

/// Haar coefficients, bands and ancestor probabilities of every same-generation pair.
pub struct BlockDecomposition<'a> {
    kernel: &'a TruncatedKernel,
    sys: &'a DyadicSystem,
    bands: Bands,
    levels: Vec<LevelPairs>,
    /// Pairs whose ancestor probability fell below `1/2`; their weight is clamped to `2`.
    pub violations: usize,
    pub min_probability: f64,
}

impl<'a> BlockDecomposition<'a> {
    pub fn new(
        kernel: &'a TruncatedKernel,
        sys: &'a DyadicSystem,
        bands: Bands,
        model: AncestorModel<'_>,
    ) -> Result<Self> {
        check_dim(kernel.len(), sys.space().len())?;
        if matches!(model, AncestorModel::Exact) && !matches!(sys.kind(), GridKind::ShiftedInteger { .. }) {
            return Err(domain("exact ancestor probabilities need a shifted grid"));
        }
        if let AncestorModel::Sampled(samples) = model {
            if samples.is_empty() || samples.iter().any(|s| s.depth() != sys.depth()) {
                return Err(domain("sampled systems must be nonempty and of the same depth"));
            }
        }
        let space = kernel.space();
        let mut levels = Vec::with_capacity(sys.depth());
        let mut violations = 0;
        let mut min_probability: f64 = 1.0;
        for i in 0..sys.depth() {
            let ids = sys.level(i);
            let n = ids.len();
            let mut band = vec![0; n * n];
            let mut probability = vec![1.0; n * n];
            for (qi, &q) in ids.iter().enumerate() {
                let cq = sys.cube(q);
                for (pi, &p) in ids.iter().enumerate() {
                    let cp = sys.cube(p);
                    let m = bands.band(space.dist(cp.reference, cq.reference), cp.side);
                    band[qi * n + pi] = m;
                    if m > i || i == m {
                        continue;
                    }
                    let prob = match model {
                        AncestorModel::Exact => {
                            let gap = (cp.grid_index.unwrap_or(0) - cq.grid_index.unwrap_or(0)).unsigned_abs() as f64;
                            (1.0 - gap / 2f64.powi(m as i32)).max(0.0)
                        }
                        AncestorModel::Sampled(samples) => {
                            let hits = samples
                                .iter()
                                .filter(|s| s.cube_of(i - m, cp.reference) == s.cube_of(i - m, cq.reference))
                                .count();
                            hits as f64 / samples.len() as f64
                        }
                    };
                    if prob < 0.5 {
                        violations += 1;
                    }
                    min_probability = min_probability.min(prob);
                    probability[qi * n + pi] = prob;
                }
            }
            levels.push(LevelPairs { coeffs: LevelCoefficients::new(kernel, sys, i), band, probability });
        }
        Ok(Self { kernel, sys, bands, levels, violations, min_probability })
    }

    pub fn bands(&self) -> &Bands {
        &self.bands
    }

    pub fn system(&self) -> &DyadicSystem {
        self.sys
    }

    /// `1 / P(A)` clamped to `[1, 2]`.
    fn weight(&self, level: usize, idx: usize) -> f64 {
        let p = self.levels[level].probability[idx];
        if p <= 0.0 {
            2.0
        } else {
            (1.0 / p).clamp(1.0, 2.0)
        }
    }

    /// The block a pair belongs to, or `None` when the pair fails the ancestor event.
    fn block_of(&self, level: usize, q: CubeId, p: CubeId, m: usize) -> Option<BlockSpec> {
        if m > level {
            return Some(BlockSpec { cube: self.sys.level(0)[0], band: m, level });
        }
        let s = self.sys.ancestor(p, level - m);
        (self.sys.ancestor(q, level - m) == s).then_some(BlockSpec { cube: s, band: m, level })
    }

    /// Every block holding at least one pair.
    pub fn blocks(&self) -> Vec<BlockSpec> {
        let mut out = BTreeSet::new();
        for (i, lp) in self.levels.iter().enumerate() {
            let ids = self.sys.level(i);
            let n = ids.len();
            for (qi, &q) in ids.iter().enumerate() {
                for (pi, &p) in ids.iter().enumerate() {
                    if let Some(spec) = self.block_of(i, q, p, lp.band[qi * n + pi]) {
                        out.insert(spec);
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// `T(P, Q)` for every pair of generation `level`, row-major in `(Q, P)` positions.
    fn pair_values(&self, level: usize, flavor: Flavor, f: &VectorField, g: &VectorField) -> Vec<f64> {
        let sys = self.sys;
        let ids = sys.level(level);
        let n = ids.len();
        let lc = &self.levels[level].coeffs;
        let fc: Vec<Vec<Vec<f64>>> = ids.iter().map(|&p| sys.haar_coefficients(p, f)).collect();
        let gc: Vec<Vec<Vec<f64>>> = ids.iter().map(|&q| sys.haar_coefficients(q, g)).collect();
        let fa: Vec<Vec<f64>> = ids.iter().map(|&p| sys.cube_average(p, f)).collect();
        let ga: Vec<Vec<f64>> = ids.iter().map(|&q| sys.cube_average(q, g)).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut out = vec![0.0; n * n];
        for (qi, &q) in ids.iter().enumerate() {
            let mq = sys.cube(q).mass;
            for (pi, &p) in ids.iter().enumerate() {
                let mp = sys.cube(p).mass;
                let value = match flavor {
                    Flavor::Cancellative => {
                        let mut acc = 0.0;
                        for (b, cg) in gc[qi].iter().enumerate() {
                            for (a, cf) in fc[pi].iter().enumerate() {
                                acc += lc.get(qi, pi, b + 1, a + 1) * dot(cf, cg);
                            }
                        }
                        acc
                    }
                    Flavor::ParaLeft => {
                        if pi == qi {
                            0.0
                        } else {
                            let diff: Vec<f64> = fa[pi].iter().zip(&fa[qi]).map(|(x, y)| x - y).collect();
                            gc[qi]
                                .iter()
                                .enumerate()
                                .map(|(b, cg)| mp.sqrt() * lc.get(qi, pi, b + 1, 0) * dot(&diff, cg))
                                .sum()
                        }
                    }
                    Flavor::ParaRight => {
                        if pi == qi {
                            0.0
                        } else {
                            let diff: Vec<f64> = ga[qi].iter().zip(&ga[pi]).map(|(x, y)| x - y).collect();
                            fc[pi]
                                .iter()
                                .enumerate()
                                .map(|(a, cf)| mq.sqrt() * lc.get(qi, pi, 0, a + 1) * dot(cf, &diff))
                                .sum()
                        }
                    }
                };
                out[qi * n + pi] = value;
            }
        }
        out
    }

    /// `sum_i sum_{P, Q in D_i} 1_A(P, Q) T(P, Q) / P(A(P, Q))`, the quantity whose expectation
    /// over systems equals that of [`Self::direct_sum`].
    pub fn reorganized_sum(&self, flavor: Flavor, f: &VectorField, g: &VectorField) -> Result<f64> {
        self.check_fields(f, g)?;
        let mut total = 0.0;
        for i in 0..self.levels.len() {
            let values = self.pair_values(i, flavor, f, g);
            let ids = self.sys.level(i);
            let n = ids.len();
            for (qi, &q) in ids.iter().enumerate() {
                for (pi, &p) in ids.iter().enumerate() {
                    let idx = qi * n + pi;
                    if self.block_of(i, q, p, self.levels[i].band[idx]).is_some() {
                        total += self.weight(i, idx) * values[idx];
                    }
                }
            }
        }
        Ok(total)
    }

    /// `sum_i sum_{P, Q in D_i} T(P, Q)` by operator evaluation: `sum_i <T D_i f, D_i g>`, or the
    /// cancellative part of the paraproduct extraction (transposed kernel for `ParaRight`).
    pub fn direct_sum(&self, flavor: Flavor, f: &VectorField, g: &VectorField) -> Result<f64> {
        self.check_fields(f, g)?;
        let depth = self.sys.depth();
        match flavor {
            Flavor::Cancellative => {
                let w = self.kernel.space().weights();
                let mut total = 0.0;
                for i in 0..depth {
                    let tdf = self.kernel.apply(&self.sys.difference_op(i, f)?)?;
                    total += tdf.pairing(&self.sys.difference_op(i, g)?, w)?;
                }
                Ok(total)
            }
            Flavor::ParaLeft => Ok(extraction(self.kernel, self.sys, f, g, 0, depth)?.cancellative),
            Flavor::ParaRight => Ok(extraction(&self.kernel.transpose(), self.sys, g, f, 0, depth)?.cancellative),
        }
    }

    fn check_fields(&self, f: &VectorField, g: &VectorField) -> Result<()> {
        check_dim(self.kernel.len(), f.len())?;
        f.same_shape(g)
    }

    /// Largest coefficient among pairs in bands with `delta^{-m} r > c R`, which the truncation
    /// makes irrelevant. Returns `(pairs, max |coefficient|)`.
    pub fn skipped_band_check(&self, c: f64) -> (usize, f64) {
        let (r, big_r) = (self.kernel.inner_radius(), self.kernel.outer_radius());
        let mut pairs = 0;
        let mut largest: f64 = 0.0;
        for lp in &self.levels {
            let n = lp.coeffs.count;
            for idx in 0..n * n {
                let m = lp.band[idx];
                if self.bands.delta.powi(-(m as i32)) * r <= c * big_r {
                    continue;
                }
                pairs += 1;
                let (qi, pi) = (idx / n, idx % n);
                for b in 0..lp.coeffs.width {
                    for a in 0..lp.coeffs.width {
                        if a + b > 0 {
                            largest = largest.max(lp.coeffs.get(qi, pi, b, a).abs());
                        }
                    }
                }
            }
        }
        (pairs, largest)
    }
}

/// Every block holding at least one pair.
pub fn blocks(dec: &BlockDecomposition<'_>) -> Vec<BlockSpec> {
    dec.blocks()
}

/// The assembled kernel `a^m_S(u, v)` of one block and flavor.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    pub spec: BlockSpec,
    pub flavor: Flavor,
    /// `omega(delta^m)`.
    pub omega: f64,
    n: usize,
    kernel: Vec<f64>,
    weights: Vec<f64>,
}

impl BlockOperator {
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.kernel[u * self.n + v]
    }

    pub fn max_abs(&self) -> f64 {
        self.kernel.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `(A f)(u) = sum_v a(u, v) f(v) mu_v`.
    pub fn apply(&self, f: &VectorField) -> Result<VectorField> {
        check_dim(self.n, f.len())?;
        let mut out = VectorField::zeros(self.n, f.dim());
        for u in 0..self.n {
            let row = &self.kernel[u * self.n..(u + 1) * self.n];
            let o = out.at_mut(u);
            for (v, a) in row.iter().enumerate() {
                if *a != 0.0 {
                    for (x, y) in o.iter_mut().zip(f.at(v)) {
                        *x += a * self.weights[v] * y;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `<A f, g>`.
    pub fn bilinear(&self, f: &VectorField, g: &VectorField) -> Result<f64> {
        self.apply(f)?.pairing(g, &self.weights)
    }

    /// `max |a(u, v)| / (omega(delta^m) (1/mu(S) + 1_{Q x Q}(u, v) / mu(Q)))` over `S x S`, with
    /// `Q` the generation-`level` cubes.
    pub fn size_constant(&self, sys: &DyadicSystem) -> f64 {
        let s = sys.cube(self.spec.cube);
        let mut best: f64 = 0.0;
        for &u in &s.points {
            let qu = sys.cube_of(self.spec.level, u);
            for &v in &s.points {
                let a = self.get(u, v).abs();
                if a == 0.0 {
                    continue;
                }
                let mut bound = 1.0 / s.mass;
                if sys.cube_of(self.spec.level, v) == qu {
                    bound += 1.0 / sys.cube(qu).mass;
                }
                best = best.max(a / (self.omega * bound));
            }
        }
        best
    }

    /// `max_u |A f(u)| / (omega(delta^m) (E_S |f| + E^m_S |f|)(u))`, Euclidean norms.
    pub fn domination_constant(&self, sys: &DyadicSystem, f: &VectorField) -> Result<f64> {
        let af = self.apply(f)?;
        let norms = VectorField::from_scalar(f.pointwise_euclidean());
        let s = sys.cube(self.spec.cube);
        let avg_s = sys.cube_average(self.spec.cube, &norms)[0];
        let mut best: f64 = 0.0;
        for &u in &s.points {
            let value: f64 = af.at(u).iter().map(|x| x * x).sum::<f64>().sqrt();
            if value == 0.0 {
                continue;
            }
            let avg_q = sys.cube_average(sys.cube_of(self.spec.level, u), &norms)[0];
            best = best.max(value / (self.omega * (avg_s + avg_q)));
        }
        Ok(best)
    }
}

/// Assembles `a^m_S` for one block.
pub fn block_operator(dec: &BlockDecomposition<'_>, spec: BlockSpec, flavor: Flavor) -> Result<BlockOperator> {
    let sys = dec.sys;
    let level = spec.level;
    if level >= dec.levels.len() || sys.cube(spec.cube).level > level {
        return Err(domain("block generation out of range"));
    }
    let n = sys.space().len();
    let ids = sys.level(level);
    let count = ids.len();
    let lp = &dec.levels[level];
    let mut kernel = vec![0.0; n * n];
    for (qi, &q) in ids.iter().enumerate() {
        for (pi, &p) in ids.iter().enumerate() {
            let idx = qi * count + pi;
            if dec.block_of(level, q, p, lp.band[idx]) != Some(spec) {
                continue;
            }
            let w = dec.weight(level, idx);
            let (cp, cq) = (sys.cube(p), sys.cube(q));
            match flavor {
                Flavor::Cancellative => {
                    for b in 1..cq.child_count() {
                        let hq = sys.haar_function(q, b);
                        for a in 1..cp.child_count() {
                            let c = w * lp.coeffs.get(qi, pi, b, a);
                            if c == 0.0 {
                                continue;
                            }
                            let hp = sys.haar_function(p, a);
                            for &u in &cq.points {
                                for &v in &cp.points {
                                    kernel[u * n + v] += c * hp[v] * hq[u];
                                }
                            }
                        }
                    }
                }
                Flavor::ParaLeft => {
                    if p == q {
                        continue;
                    }
                    for b in 1..cq.child_count() {
                        let c = w * cp.mass.sqrt() * lp.coeffs.get(qi, pi, b, 0);
                        if c == 0.0 {
                            continue;
                        }
                        let hq = sys.haar_function(q, b);
                        for &u in &cq.points {
                            for &v in &cp.points {
                                kernel[u * n + v] += c * hq[u] / cp.mass;
                            }
                            for &v in &cq.points {
                                kernel[u * n + v] -= c * hq[u] / cq.mass;
                            }
                        }
                    }
                }
                Flavor::ParaRight => {
                    if p == q {
                        continue;
                    }
                    for a in 1..cp.child_count() {
                        let c = w * cq.mass.sqrt() * lp.coeffs.get(qi, pi, 0, a);
                        if c == 0.0 {
                            continue;
                        }
                        let hp = sys.haar_function(p, a);
                        for &v in &cp.points {
                            for &u in &cq.points {
                                kernel[u * n + v] += c * hp[v] / cq.mass;
                            }
                            for &u in &cp.points {
                                kernel[u * n + v] -= c * hp[v] / cp.mass;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(BlockOperator {
        spec,
        flavor,
        omega: dec.kernel.omega().eval(dec.bands.delta.powi(spec.band as i32)),
        n,
        kernel,
        weights: sys.space().weights().to_vec(),
    })
}

/// `(D^m_S f, D^{[0,m)}_S f)`: the differences of the descendants of `S` at relative depth
/// exactly `m`, and at relative depths `0..m`.
pub fn split_difference(sys: &DyadicSystem, s: CubeId, m: usize, f: &VectorField) -> Result<(VectorField, VectorField)> {
    check_dim(sys.space().len(), f.len())?;
    let level = sys.cube(s).level;
    if m == 0 || level + m > sys.depth() {
        return Err(domain(format!("relative depth {m} out of range below generation {level}")));
    }
    let mut exact = VectorField::zeros(f.len(), f.dim());
    let mut above = VectorField::zeros(f.len(), f.dim());
    for k in 0..=m {
        for q in sys.descendants(s, k) {
            let d = sys.cube_difference(q, f);
            if k == m {
                exact = exact.add(&d)?;
            } else {
                above = above.add(&d)?;
            }
        }
    }
    Ok((exact, above))
}

/// Mean of `reorganized - direct` over sampled systems, with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityEstimate {
    pub flavor: Flavor,
    pub systems: u64,
    pub mean_reorganized: f64,
    pub mean_direct: f64,
    pub mean_difference: f64,
    pub standard_error: f64,
    pub violations: usize,
}

impl IdentityEstimate {
    /// `|mean difference| <= z * standard error + abs_tol`.
    pub fn within(&self, z: f64, abs_tol: f64) -> bool {
        self.mean_difference.abs() <= z * self.standard_error + abs_tol
    }
}

/// Monte-Carlo check of `E reorganized = E direct` over `systems` shifted grids.
pub fn reorganized_identity_monte_carlo(
    kernel: &TruncatedKernel,
    family: &GridFamily,
    bands: Bands,
    flavor: Flavor,
    f: &VectorField,
    g: &VectorField,
    systems: u64,
    seed: u64,
) -> Result<IdentityEstimate> {
    if !matches!(family, GridFamily::ShiftedInteger { .. }) {
        return Err(domain("the reorganized identity is checked on shifted grids"));
    }
    if systems < 2 {
        return Err(domain("at least two systems are needed"));
    }
    let mut diffs = Vec::with_capacity(systems as usize);
    let (mut sum_r, mut sum_d) = (0.0, 0.0);
    let mut violations = 0;
    for t in 0..systems {
        let sys = family.sample(seed, t)?;
        let dec = BlockDecomposition::new(kernel, &sys, bands, AncestorModel::Exact)?;
        violations += dec.violations;
        let r = dec.reorganized_sum(flavor, f, g)?;
        let d = dec.direct_sum(flavor, f, g)?;
        sum_r += r;
        sum_d += d;
        diffs.push(r - d);
    }
    let k = systems as f64;
    let mean = diffs.iter().sum::<f64>() / k;
    let var = diffs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(IdentityEstimate {
        flavor,
        systems,
        mean_reorganized: sum_r / k,
        mean_direct: sum_d / k,
        mean_difference: mean,
        standard_error: (var / k).sqrt(),
        violations,
    })
}

/// Exact expectations `(E reorganized, E direct)` over every shift of a shifted grid of the
/// given depth (the shifts that matter are the low `depth - 1` bits).
pub fn reorganized_identity_exact(
    kernel: &TruncatedKernel,
    depth: usize,
    bands: Bands,
    flavor: Flavor,
    f: &VectorField,
    g: &VectorField,
) -> Result<(f64, f64)> {
    let bits = depth.saturating_sub(1);
    if bits > 16 {
        return Err(domain("too many shifts to enumerate"));
    }
    let count = 1u64 << bits;
    let (mut r, mut d) = (0.0, 0.0);
    for shift in 0..count {
        let sys = crate::dyadic::build_shifted_integer_grid(std::sync::Arc::clone(kernel.space()), shift, depth)?;
        let dec = BlockDecomposition::new(kernel, &sys, bands, AncestorModel::Exact)?;
        r += dec.reorganized_sum(flavor, f, g)?;
        d += dec.direct_sum(flavor, f, g)?;
    }
    Ok((r / count as f64, d / count as f64))
}
