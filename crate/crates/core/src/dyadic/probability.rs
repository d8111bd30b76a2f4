//! Probabilities over random dyadic systems: boundary layers and common
//! ancestors, by Monte Carlo with Wilson intervals or by exact enumeration
//! of the shifts of a shifted grid.

use std::sync::Arc;

use rand::Rng;

use super::net::{build_net_grid, net_depth};
use super::shifted::{build_shifted_integer_grid, grid_index, MAX_DEPTH};
use super::DyadicSystem;
use crate::error::{domain, Result};
use crate::rng;
use crate::space::FiniteMetricMeasureSpace;

/// Largest number of shifts enumerated exactly.
const MAX_ENUMERATION_BITS: usize = 24;

/// A random dyadic system distribution.
#[derive(Clone, Debug)]
pub enum GridFamily {
    ShiftedInteger { space: Arc<FiniteMetricMeasureSpace>, depth: usize },
    Net { space: Arc<FiniteMetricMeasureSpace>, delta: f64 },
}

impl GridFamily {
    pub fn shifted(space: Arc<FiniteMetricMeasureSpace>, depth: usize) -> Result<Self> {
        if !space.is_path() {
            return Err(domain("shifted integer grids need a path space"));
        }
        if depth > MAX_DEPTH || (depth == 0 && space.len() > 1) {
            return Err(domain(format!("unusable depth {depth}")));
        }
        Ok(Self::ShiftedInteger { space, depth })
    }

    pub fn net(space: Arc<FiniteMetricMeasureSpace>, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(domain(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(Self::Net { space, delta })
    }

    pub fn space(&self) -> &Arc<FiniteMetricMeasureSpace> {
        match self {
            Self::ShiftedInteger { space, .. } | Self::Net { space, .. } => space,
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            Self::ShiftedInteger { .. } => 0.5,
            Self::Net { delta, .. } => *delta,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::ShiftedInteger { depth, .. } => *depth,
            Self::Net { space, delta } => net_depth(space, *delta),
        }
    }

    /// Side length of generation `level`.
    pub fn side(&self, level: usize) -> f64 {
        match self {
            Self::ShiftedInteger { depth, .. } => 2f64.powi(*depth as i32 - level as i32),
            Self::Net { space, delta } => {
                let scale = if space.diameter() > 0.0 { space.diameter() } else { 1.0 };
                delta.powi(level as i32) * scale
            }
        }
    }

    /// The `index`-th system of the stream determined by `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> Result<DyadicSystem> {
        match self {
            Self::ShiftedInteger { space, depth } => {
                let bits = rng::stream(seed, index).random::<u64>();
                build_shifted_integer_grid(Arc::clone(space), bits, *depth)
            }
            Self::Net { space, delta } => {
                let sub = rng::stream(seed, index).random::<u64>();
                build_net_grid(Arc::clone(space), *delta, sub)
            }
        }
    }

    /// Generation-`level` labels of the `index`-th sample, without building the whole system
    /// when the grid is shifted.
    fn labels(&self, seed: u64, index: u64, level: usize) -> Result<Vec<i64>> {
        match self {
            Self::ShiftedInteger { space, depth } => {
                let bits = rng::stream(seed, index).random::<u64>();
                Ok(shifted_labels(space.len(), bits, *depth, level))
            }
            Self::Net { .. } => {
                let sys = self.sample(seed, index)?;
                Ok((0..sys.space().len()).map(|u| sys.cube_of(level, u) as i64).collect())
            }
        }
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level > self.depth() {
            Err(domain(format!("level {level} outside 0..={}", self.depth())))
        } else {
            Ok(())
        }
    }
}

fn shifted_labels(n: usize, bits: u64, depth: usize, level: usize) -> Vec<i64> {
    (0..n).map(|i| if level == 0 { 0 } else { grid_index(i, bits, depth, level) }).collect()
}

fn distance_to_other_label(space: &FiniteMetricMeasureSpace, labels: &[i64], u: usize) -> f64 {
    (0..labels.len())
        .filter(|&v| labels[v] != labels[u])
        .map(|v| space.dist(u, v))
        .fold(f64::INFINITY, f64::min)
}

/// Binomial proportion with its 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wilson {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Wilson {
    pub fn new(successes: u64, trials: u64) -> Self {
        let z = 1.959_963_984_540_054;
        let n = trials as f64;
        let p = successes as f64 / n;
        let denom = 1.0 + z * z / n;
        let centre = (p + z * z / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
        Self {
            successes,
            trials,
            estimate: p,
            lower: if successes == 0 { 0.0 } else { (centre - half).max(0.0) },
            upper: if successes == trials { 1.0 } else { (centre + half).min(1.0) },
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }
}

/// Per point, the frequency of `d(u, E \ Q_k(u)) < eps * l_k` over `trials` samples.
pub fn boundary_layer_probability(
    family: &GridFamily,
    level: usize,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<Wilson>> {
    family.check_level(level)?;
    check_eps(eps)?;
    if trials == 0 {
        return Err(domain("at least one trial is needed"));
    }
    let space = family.space();
    let threshold = eps * family.side(level);
    let mut counts = vec![0u64; space.len()];
    for t in 0..trials {
        let labels = family.labels(seed, t, level)?;
        for (u, c) in counts.iter_mut().enumerate() {
            if distance_to_other_label(space, &labels, u) < threshold {
                *c += 1;
            }
        }
    }
    Ok(counts.into_iter().map(|c| Wilson::new(c, trials)).collect())
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("eps must lie in (0, 1], got {eps}")))
    }
}

fn shift_count(depth: usize, level: usize) -> Result<u64> {
    let width = depth - level;
    if width > MAX_ENUMERATION_BITS {
        return Err(domain(format!("2^{width} shifts are too many to enumerate")));
    }
    Ok(1u64 << width)
}

/// Exact boundary-layer probability of point `u` at generation `level >= 1` of a shifted grid.
///
/// Generation `level` only depends on the low `depth - level` shift bits, all of which are
/// enumerated.
pub fn exact_boundary_probability(family: &GridFamily, level: usize, eps: f64, u: usize) -> Result<f64> {
    let GridFamily::ShiftedInteger { space, depth } = family else {
        return Err(domain("exact enumeration needs a shifted grid"));
    };
    family.check_level(level)?;
    check_eps(eps)?;
    let count = shift_count(*depth, level)?;
    let threshold = eps * family.side(level);
    let hits = (0..count)
        .filter(|&bits| {
            let labels = shifted_labels(space.len(), bits, *depth, level);
            distance_to_other_label(space, &labels, u) < threshold
        })
        .count();
    Ok(hits as f64 / count as f64)
}

fn check_ancestor_hypothesis(family: &GridFamily, u: usize, v: usize, level: usize, m: usize, eps: f64) -> Result<()> {
    family.check_level(level)?;
    check_eps(eps)?;
    if m > level {
        return Err(domain(format!("m = {m} exceeds the generation {level}")));
    }
    let space = family.space();
    if u >= space.len() || v >= space.len() {
        return Err(domain("point outside the space"));
    }
    let limit = 0.5 * eps * family.side(level);
    if space.dist(u, v) > limit {
        return Err(domain(format!("d(u, v) = {} exceeds eps l / 2 = {limit}", space.dist(u, v))));
    }
    Ok(())
}

/// Frequency with which `u` and `v` share their generation-`(level - m)` cube, given
/// `d(u, v) <= eps l_level / 2`.
pub fn common_ancestor_probability(
    family: &GridFamily,
    u: usize,
    v: usize,
    level: usize,
    m: usize,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<Wilson> {
    check_ancestor_hypothesis(family, u, v, level, m, eps)?;
    if trials == 0 {
        return Err(domain("at least one trial is needed"));
    }
    let coarse = level - m;
    let mut hits = 0;
    for t in 0..trials {
        let labels = family.labels(seed, t, coarse)?;
        if labels[u] == labels[v] {
            hits += 1;
        }
    }
    Ok(Wilson::new(hits, trials))
}

/// Exact probability that `u` and `v` share their generation-`level` cube in a shifted grid.
pub fn exact_same_cube_probability(family: &GridFamily, u: usize, v: usize, level: usize) -> Result<f64> {
    let GridFamily::ShiftedInteger { space, depth } = family else {
        return Err(domain("exact enumeration needs a shifted grid"));
    };
    family.check_level(level)?;
    if level == 0 {
        return Ok(1.0);
    }
    let count = shift_count(*depth, level)?;
    let hits = (0..count)
        .filter(|&bits| grid_index(u, bits, *depth, level) == grid_index(v, bits, *depth, level))
        .count();
    let _ = space;
    Ok(hits as f64 / count as f64)
}

/// `m_0 = ceil(log_{1/delta}(2 / eps)) + 1`.
pub fn m0(eps: f64, delta: f64) -> usize {
    ((2.0 / eps).ln() / (1.0 / delta).ln() - 1e-12).ceil().max(0.0) as usize + 1
}

/// Largest `eps = 2^{-j}` whose boundary probability is at most `1/2` at every point and
/// every generation `1..=depth`, computed exactly on shifted grids and from `trials`
/// samples otherwise.
pub fn choose_epsilon(family: &GridFamily, trials: u64, seed: u64) -> Result<f64> {
    let depth = family.depth();
    let n = family.space().len();
    for j in 1..=30 {
        let eps = 0.5f64.powi(j);
        let mut worst: f64 = 0.0;
        for level in 1..=depth {
            match family {
                GridFamily::ShiftedInteger { .. } => {
                    for u in 0..n {
                        worst = worst.max(exact_boundary_probability(family, level, eps, u)?);
                    }
                }
                GridFamily::Net { .. } => {
                    for w in boundary_layer_probability(family, level, eps, trials, seed)? {
                        worst = worst.max(w.estimate);
                    }
                }
            }
        }
        if worst <= 0.5 {
            return Ok(eps);
        }
    }
    Err(domain("no eps down to 2^-30 keeps the boundary probability below 1/2"))
}
