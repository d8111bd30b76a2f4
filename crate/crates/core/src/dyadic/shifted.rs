//! Shifted binary grids on path spaces.
//!
//! Generation `k >= 1` consists of the intervals
//! `[a 2^{L-k} - s_k, (a + 1) 2^{L-k} - s_k)` (zero-based positions)
//! intersected with the space, where `s_k = sum_{j < L-k} w_j 2^j` and `w_j`
//! is bit `j` of the shift word. Since `s_{k} - s_{k+1}` is a multiple of
//! `2^{L-k-1}`, generations are nested. Generation `0` is the whole space.

use std::sync::Arc;

use super::{CubeMeta, DyadicSystem, GridKind};
use crate::error::{domain, Result};
use crate::space::FiniteMetricMeasureSpace;

/// Largest supported depth; positions and shifts stay inside `i64`.
pub const MAX_DEPTH: usize = 62;

/// Shift `s_k` of generation `k` in a depth-`depth` grid.
pub fn level_shift(shift_bits: u64, depth: usize, level: usize) -> i64 {
    let width = depth.saturating_sub(level);
    let mask = if width >= 64 { u64::MAX } else { (1u64 << width) - 1 };
    (shift_bits & mask) as i64
}

/// Grid index of zero-based position `i` at generation `level >= 1`.
pub fn grid_index(i: usize, shift_bits: u64, depth: usize, level: usize) -> i64 {
    let side = 1i64 << (depth - level);
    (i as i64 + level_shift(shift_bits, depth, level)).div_euclid(side)
}

/// Builds the shifted grid of depth `depth` on a path space.
pub fn build_shifted_integer_grid(
    space: Arc<FiniteMetricMeasureSpace>,
    shift_bits: u64,
    depth: usize,
) -> Result<DyadicSystem> {
    if !space.is_path() {
        return Err(domain("shifted integer grids need a path space"));
    }
    if depth > MAX_DEPTH {
        return Err(domain(format!("depth {depth} exceeds the representable range (max {MAX_DEPTH})")));
    }
    let n = space.len();
    if n > 1 && depth == 0 {
        return Err(domain("depth 0 only fits a one-point space"));
    }
    let labels: Vec<Vec<i64>> = (0..=depth)
        .map(|k| {
            (0..n)
                .map(|i| if k == 0 { 0 } else { grid_index(i, shift_bits, depth, k) })
                .collect()
        })
        .collect();
    DyadicSystem::from_labels(
        space,
        0.5,
        (1u64 << depth) as f64,
        GridKind::ShiftedInteger { shift_bits },
        &labels,
        |k, pts, label| {
            let midpoint = if k == 0 {
                (n as f64 - 1.0) / 2.0
            } else {
                let side = (1i64 << (depth - k)) as f64;
                label as f64 * side - level_shift(shift_bits, depth, k) as f64 + (side - 1.0) / 2.0
            };
            let center = nearest(pts, midpoint);
            CubeMeta {
                center,
                reference: center,
                grid_index: Some(label),
            }
        },
    )
}

/// Member closest to `x`, ties to the smaller id.
fn nearest(pts: &[usize], x: f64) -> usize {
    let mut best = pts[0];
    for &p in pts {
        if (p as f64 - x).abs() < (best as f64 - x).abs() {
            best = p;
        }
    }
    best
}

/// Default depth `ceil(log2 N)` for a path space of `n` points.
pub fn default_depth(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(sys: &DyadicSystem, k: usize) -> Vec<Vec<usize>> {
        sys.level(k).iter().map(|&c| sys.cube(c).points.clone()).collect()
    }

    #[test]
    fn unshifted_four_points() {
        let space = Arc::new(FiniteMetricMeasureSpace::path(4).unwrap());
        let sys = build_shifted_integer_grid(space, 0, 2).unwrap();
        assert_eq!(sets(&sys, 0), vec![vec![0, 1, 2, 3]]);
        assert_eq!(sets(&sys, 1), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(sets(&sys, 2), vec![vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(sys.side(1), 2.0);
    }

    #[test]
    fn deterministic_in_bits() {
        let space = Arc::new(FiniteMetricMeasureSpace::path(16).unwrap());
        let a = build_shifted_integer_grid(Arc::clone(&space), 0b101, 4).unwrap();
        let b = build_shifted_integer_grid(space, 0b101, 4).unwrap();
        for k in 0..=4 {
            assert_eq!(sets(&a, k), sets(&b, k));
        }
    }

    #[test]
    fn every_shift_partitions() {
        let space = Arc::new(FiniteMetricMeasureSpace::path(8).unwrap());
        for bits in 0..8u64 {
            let sys = build_shifted_integer_grid(Arc::clone(&space), bits, 3).unwrap();
            sys.check_invariants().unwrap();
        }
    }

    #[test]
    fn shifted_level_one() {
        let space = Arc::new(FiniteMetricMeasureSpace::path(4).unwrap());
        // s_1 = bit0 = 1 shifts the pairs to {0}, {1,2}, {3}
        let sys = build_shifted_integer_grid(space, 1, 2).unwrap();
        assert_eq!(sets(&sys, 1), vec![vec![0], vec![1, 2], vec![3]]);
    }

    #[test]
    fn depth_limits() {
        let space = Arc::new(FiniteMetricMeasureSpace::path(4).unwrap());
        assert!(build_shifted_integer_grid(Arc::clone(&space), 0, 63).is_err());
        assert!(build_shifted_integer_grid(Arc::clone(&space), 0, 0).is_err());
        let general = Arc::new(FiniteMetricMeasureSpace::new(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0]).unwrap());
        assert!(build_shifted_integer_grid(general, 0, 1).is_err());
        assert_eq!(default_depth(64), 6);
        assert_eq!(default_depth(65), 7);
        assert_eq!(default_depth(1), 0);
    }
}
