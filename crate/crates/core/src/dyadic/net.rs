//! Randomized nested nets on arbitrary finite metric spaces.
//!
//! `X^0` is a single random point. For `k >= 1`, `X^k` extends `X^{k-1}`
//! greedily, in a seed-dependent order, to a maximal `delta^k * diam`
//! separated set. Points of `X^k \ X^{k-1}` attach to a nearest point of
//! `X^{k-1}` (ties broken at random) and the cube of a net point is the set
//! of its leaf descendants.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{CubeMeta, DyadicSystem, GridKind};
use crate::error::{domain, Result};
use crate::rng;
use crate::space::FiniteMetricMeasureSpace;

/// Number of generations below the root: `ceil(log_{1/delta}(diam / min_gap)) + 1`.
pub fn net_depth(space: &FiniteMetricMeasureSpace, delta: f64) -> usize {
    match space.min_gap() {
        None => 0,
        Some(gap) => ((space.diameter() / gap).ln() / (1.0 / delta).ln()).ceil().max(0.0) as usize + 1,
    }
}

pub fn build_net_grid(space: Arc<FiniteMetricMeasureSpace>, delta: f64, seed: u64) -> Result<DyadicSystem> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let n = space.len();
    let depth = net_depth(&space, delta);
    let scale = if space.diameter() > 0.0 { space.diameter() } else { 1.0 };
    let mut rng = rng::stream(seed, 0);

    // parent[u] = the coarser net point u attaches to; born[u] = first generation containing u
    let mut born = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let root = rng.random_range(0..n);
    born[root] = 0;
    let mut net = vec![root];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 1..=depth {
        let sep = delta.powi(k as i32) * scale;
        order.shuffle(&mut rng);
        let coarse = net.clone();
        for &u in &order {
            if born[u] != usize::MAX {
                continue;
            }
            if net.iter().all(|&x| space.dist(u, x) >= sep) {
                born[u] = k;
                net.push(u);
                let best = coarse.iter().map(|&x| space.dist(u, x)).fold(f64::INFINITY, f64::min);
                let ties: Vec<usize> = coarse.iter().copied().filter(|&x| space.dist(u, x) == best).collect();
                parent[u] = ties[rng.random_range(0..ties.len())];
            }
        }
    }
    if net.len() != n {
        return Err(domain("net construction did not reach singletons"));
    }

    // labels[k][u] = generation-k ancestor net point of u
    let mut labels = vec![vec![0i64; n]; depth + 1];
    for u in 0..n {
        let mut x = u;
        for k in (0..=depth).rev() {
            while born[x] > k {
                x = parent[x];
            }
            labels[k][u] = x as i64;
        }
    }
    DyadicSystem::from_labels(space, delta, scale, GridKind::Net { seed }, &labels, |_, _, label| CubeMeta {
        center: label as usize,
        reference: label as usize,
        grid_index: None,
    })
}
