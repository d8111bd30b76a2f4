//! Ball geometry of finite metric measure spaces.
//!
//! `cargo run --example spaces`

use finite_cz::error::Result;
use finite_cz::format::{space_from_str, space_to_string};
use finite_cz::space::FiniteMetricMeasureSpace;

fn main() -> Result<()> {
    let path = FiniteMetricMeasureSpace::path(16)?;
    println!("path of {} points, diameter {}, mass {}", path.len(), path.diameter(), path.total_mass());
    println!("B(5, 2.5) = {:?}", path.ball(5, 2.5)?);
    println!("V(5, 2.5) = {}, V(0, 15) = {}", path.volume(5, 2.5)?, path.pair_volume(0, 15));
    println!("doubling constant {}", path.doubling_constant());

    // A weighted path: heavy points in the middle make the doubling constant larger.
    let weights: Vec<f64> = (0..16).map(|i| 1.0 + (i as f64 - 7.5).abs().recip()).collect();
    let weighted = FiniteMetricMeasureSpace::path_weighted(weights)?;
    println!("weighted path doubling constant {:.4}", weighted.doubling_constant());

    // Four points on a cycle with the shortest-arc metric.
    let n: usize = 4;
    let arc = |i: usize, j: usize| i.abs_diff(j).min(n - i.abs_diff(j)) as f64;
    let dist: Vec<f64> = (0..n * n).map(|k| arc(k / n, k % n)).collect();
    let cycle = FiniteMetricMeasureSpace::new(dist, vec![1.0, 2.0, 1.0, 2.0])?;
    println!("cycle: B(0, 1.5) = {:?}, min gap {:?}", cycle.ball(0, 1.5)?, cycle.min_gap());

    let text = space_to_string(&cycle);
    assert_eq!(space_from_str(&text)?, cycle);
    println!("saved form round-trips ({} bytes)", text.len());
    Ok(())
}
