//! Finite metric measure spaces and their ball geometry.

use crate::error::{domain, Error, Result};

/// Up to this size the triangle inequality is checked over every triple.
const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 256;
const TRIANGLE_SAMPLES: usize = 2_000_000;
const METRIC_TOL: f64 = 1e-12;

/// How the distance matrix was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    /// `{1, ..., N}` with `d(i, j) = |i - j|`.
    Path,
    /// An arbitrary user-supplied metric.
    Explicit,
}

/// A finite metric space `E = {0, ..., N-1}` with positive point masses.
///
/// Distances are kept as a dense row-major `N x N` matrix. Balls are open:
/// `B(u, t) = {v : d(u, v) < t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricMeasureSpace {
    n: usize,
    dist: Vec<f64>,
    weights: Vec<f64>,
    geometry: Geometry,
}

impl FiniteMetricMeasureSpace {
    /// Builds a space from an explicit distance matrix, validating the metric axioms.
    pub fn new(dist: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(domain("a space needs at least one point"));
        }
        if dist.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                found: dist.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(domain(format!("weights must be positive and finite, got {w}")));
        }
        for u in 0..n {
            if dist[u * n + u] != 0.0 {
                return Err(domain(format!("d({u},{u}) must vanish")));
            }
            for v in 0..n {
                let d = dist[u * n + v];
                if !(d.is_finite() && d >= 0.0) {
                    return Err(domain(format!("d({u},{v}) = {d} is not a finite nonnegative length")));
                }
                if d != dist[v * n + u] {
                    return Err(domain(format!("distance matrix is not symmetric at ({u},{v})")));
                }
                if u != v && d == 0.0 {
                    return Err(domain(format!("distinct points {u} and {v} at distance 0")));
                }
            }
        }
        let space = Self {
            n,
            dist,
            weights,
            geometry: Geometry::Explicit,
        };
        if let Some((u, v, w)) = space.triangle_violation() {
            return Err(domain(format!("triangle inequality fails for ({u},{v},{w})")));
        }
        Ok(space)
    }

    /// The path space `{1, ..., N}` with counting measure.
    pub fn path(n: usize) -> Result<Self> {
        Self::path_weighted(vec![1.0; n])
    }

    /// The path space with arbitrary positive weights.
    pub fn path_weighted(weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(domain("path space needs N >= 1"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(domain("weights must be positive and finite"));
        }
        let mut dist = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                dist[u * n + v] = u.abs_diff(v) as f64;
            }
        }
        Ok(Self {
            n,
            dist,
            weights,
            geometry: Geometry::Path,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn is_path(&self) -> bool {
        self.geometry == Geometry::Path
    }

    #[inline]
    pub fn dist(&self, u: usize, v: usize) -> f64 {
        self.dist[u * self.n + v]
    }

    pub fn dist_row(&self, u: usize) -> &[f64] {
        &self.dist[u * self.n..(u + 1) * self.n]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, u: usize) -> f64 {
        self.weights[u]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mass(&self, points: &[usize]) -> f64 {
        points.iter().map(|&u| self.weights[u]).sum()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest positive distance; `None` for a one-point space.
    pub fn min_gap(&self) -> Option<f64> {
        self.dist
            .iter()
            .copied()
            .filter(|d| *d > 0.0)
            .min_by(f64::total_cmp)
    }

    fn check_point(&self, u: usize) -> Result<()> {
        if u < self.n {
            Ok(())
        } else {
            Err(domain(format!("point {u} out of range for a space of {} points", self.n)))
        }
    }

    /// The open ball `{v : d(u, v) < t}`, sorted by point id.
    pub fn ball(&self, u: usize, t: f64) -> Result<Vec<usize>> {
        self.check_point(u)?;
        if !(t > 0.0) {
            return Err(domain(format!("ball radius must be positive, got {t}")));
        }
        Ok((0..self.n).filter(|&v| self.dist(u, v) < t).collect())
    }

    /// `V(u, t) = mu(B(u, t))`.
    pub fn volume(&self, u: usize, t: f64) -> Result<f64> {
        self.check_point(u)?;
        if !(t > 0.0) {
            return Err(domain(format!("ball radius must be positive, got {t}")));
        }
        Ok(self.volume_unchecked(u, t))
    }

    #[inline]
    pub(crate) fn volume_unchecked(&self, u: usize, t: f64) -> f64 {
        self.dist_row(u)
            .iter()
            .zip(&self.weights)
            .filter(|(d, _)| **d < t)
            .map(|(_, w)| w)
            .sum()
    }

    /// `V(u, v) = V(u, d(u, v))`; equals `mu_u` when `u = v`.
    pub fn pair_volume(&self, u: usize, v: usize) -> f64 {
        if u == v {
            self.weights[u]
        } else {
            self.volume_unchecked(u, self.dist(u, v))
        }
    }

    /// Table of `V(u, d(u, v))` for all pairs, row-major.
    pub fn pair_volumes(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for u in 0..n {
            let profile = RadialProfile::new(self, u);
            for v in 0..n {
                out[u * n + v] = if u == v {
                    self.weights[u]
                } else {
                    profile.mass_below(self.dist(u, v))
                };
            }
        }
        out
    }

    /// `C_D = sup_{u, t} V(u, 2t) / V(u, t)`.
    ///
    /// `V(u, .)` is a left-continuous step function, so the supremum is
    /// attained just above one of the radii `d(u, v) / 2` or `d(u, v)`,
    /// where `V(u, a+) = mu{d(u, .) <= a}`.
    pub fn doubling_constant(&self) -> f64 {
        let mut best: f64 = 1.0;
        for u in 0..self.n {
            let profile = RadialProfile::new(self, u);
            for &d in &profile.dists {
                for a in [0.5 * d, d] {
                    let ratio = profile.mass_at_most(2.0 * a) / profile.mass_at_most(a);
                    best = best.max(ratio);
                }
            }
        }
        best
    }

    /// First violated triple `(u, v, w)` with `d(u,w) > d(u,v) + d(v,w)`.
    ///
    /// Exhaustive up to 256 points, a deterministic sample of triples above.
    pub fn triangle_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        let bad = |u: usize, v: usize, w: usize| {
            let lhs = self.dist(u, w);
            lhs > self.dist(u, v) + self.dist(v, w) + METRIC_TOL * lhs.max(1.0)
        };
        if n <= EXHAUSTIVE_TRIANGLE_LIMIT {
            for u in 0..n {
                for v in 0..n {
                    for w in 0..n {
                        if bad(u, v, w) {
                            return Some((u, v, w));
                        }
                    }
                }
            }
            None
        } else {
            // splitmix64 stream; independent of the rand crate so it stays fixed.
            let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
            let mut next = || {
                state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
                ((z ^ (z >> 31)) % n as u64) as usize
            };
            (0..TRIANGLE_SAMPLES)
                .map(|_| (next(), next(), next()))
                .find(|&(u, v, w)| bad(u, v, w))
        }
    }
}

/// Sorted distances from one centre with cumulative masses.
pub(crate) struct RadialProfile {
    dists: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RadialProfile {
    pub(crate) fn new(space: &FiniteMetricMeasureSpace, u: usize) -> Self {
        let mut pairs: Vec<(f64, f64)> = space
            .dist_row(u)
            .iter()
            .copied()
            .zip(space.weights.iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let mut dists = Vec::with_capacity(pairs.len());
        let mut cumulative = Vec::with_capacity(pairs.len());
        for (d, w) in pairs {
            acc += w;
            dists.push(d);
            cumulative.push(acc);
        }
        Self { dists, cumulative }
    }

    /// `mu{v : d(u, v) < t}`.
    pub(crate) fn mass_below(&self, t: f64) -> f64 {
        let k = self.dists.partition_point(|d| *d < t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// `mu{v : d(u, v) <= t}`.
    pub(crate) fn mass_at_most(&self, t: f64) -> f64 {
        let k = self.dists.partition_point(|d| *d <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_ball_examples() {
        let s = FiniteMetricMeasureSpace::path(4).unwrap();
        assert_eq!(s.ball(1, 1.5).unwrap(), vec![0, 1, 2]);
        assert_eq!(s.volume(1, 1.5).unwrap(), 3.0);
        assert_eq!(s.ball(2, 1.0).unwrap(), vec![2]);
        assert_eq!(s.volume(2, 0.5).unwrap(), 1.0);
        assert_eq!(s.dist(0, 3), 3.0);
        let big = FiniteMetricMeasureSpace::path(64).unwrap();
        assert_eq!(big.ball(10, 100.0).unwrap().len(), 64);
    }

    #[test]
    fn ball_errors() {
        let s = FiniteMetricMeasureSpace::path(4).unwrap();
        assert!(matches!(s.ball(4, 1.0), Err(Error::Domain(_))));
        assert!(s.ball(0, 0.0).is_err());
        assert!(FiniteMetricMeasureSpace::path(0).is_err());
    }

    #[test]
    fn single_point_space() {
        let s = FiniteMetricMeasureSpace::path(1).unwrap();
        assert_eq!(s.diameter(), 0.0);
        assert_eq!(s.doubling_constant(), 1.0);
        assert_eq!(s.min_gap(), None);
    }

    #[test]
    fn two_points_double() {
        let s = FiniteMetricMeasureSpace::new(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(s.doubling_constant(), 2.0);
    }

    #[test]
    fn rejects_non_metrics() {
        let asym = vec![0.0, 1.0, 2.0, 0.0];
        assert!(FiniteMetricMeasureSpace::new(asym, vec![1.0, 1.0]).is_err());
        let tri = vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0];
        assert!(FiniteMetricMeasureSpace::new(tri, vec![1.0; 3]).is_err());
        let zero_mass = vec![0.0, 1.0, 1.0, 0.0];
        assert!(FiniteMetricMeasureSpace::new(zero_mass, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn path_doubling_is_three() {
        // brute force over every (u, t) with t on a fine grid
        let s = FiniteMetricMeasureSpace::path(64).unwrap();
        let mut brute: f64 = 1.0;
        for u in 0..64 {
            for k in 1..=400 {
                let t = k as f64 * 0.25 + 1e-9;
                let r = s.volume(u, 2.0 * t).unwrap() / s.volume(u, t).unwrap();
                brute = brute.max(r);
            }
        }
        let c = s.doubling_constant();
        assert_eq!(c, brute);
        assert!((2.0..=3.0).contains(&c));
    }

    #[test]
    fn pair_volume_comparability() {
        let s = FiniteMetricMeasureSpace::path(16).unwrap();
        let c = s.doubling_constant();
        for u in 0..16 {
            for v in 0..16 {
                if u != v {
                    assert!(s.pair_volume(u, v) <= c * c * s.pair_volume(v, u));
                }
            }
        }
    }

    #[test]
    fn pair_volume_table_matches_direct() {
        let s = FiniteMetricMeasureSpace::path_weighted((0..20).map(|i| 1.0 + (i % 3) as f64).collect()).unwrap();
        let table = s.pair_volumes();
        for u in 0..20 {
            for v in 0..20 {
                assert_eq!(table[u * 20 + v], s.pair_volume(u, v));
            }
        }
    }
}
