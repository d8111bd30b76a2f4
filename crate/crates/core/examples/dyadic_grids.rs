//! Random dyadic systems: shifted integer grids and nested nets, Haar bases, averaging
//! operators and boundary-layer probabilities.
//!
//! `cargo run --example dyadic_grids`

use std::sync::Arc;

use finite_cz::dyadic::probability::{
    boundary_layer_probability, choose_epsilon, common_ancestor_probability, exact_boundary_probability,
    exact_same_cube_probability, m0,
};
use finite_cz::dyadic::{build_net_grid, build_shifted_integer_grid, dump, GridFamily};
use finite_cz::error::Result;
use finite_cz::field::VectorField;
use finite_cz::space::FiniteMetricMeasureSpace;

fn main() -> Result<()> {
    let space = Arc::new(FiniteMetricMeasureSpace::path(8)?);
    let sys = build_shifted_integer_grid(Arc::clone(&space), 0b101, 3)?;
    print!("{}", dump(&sys));
    let c = sys.containment();
    println!("containment: outer {:.3}, inner {:.3}, max children {}", c.outer, c.inner, sys.max_children());

    let f = VectorField::from_scalar((0..8).map(|i| (i * i) as f64).collect());
    for level in 0..=sys.depth() {
        println!("E_{level} f = {:?}", sys.average_op(level, &f)?.values());
    }
    let root = sys.level(0)[0];
    println!("Haar coefficients of f on the root: {:?}", sys.haar_coefficients(root, &f));

    // Nets on a non-path space: points on a circle of 24 with chordal distances.
    let n = 24;
    let dist: Vec<f64> = (0..n * n)
        .map(|k| {
            let a = std::f64::consts::TAU * (k / n) as f64 / n as f64;
            let b = std::f64::consts::TAU * (k % n) as f64 / n as f64;
            2.0 * ((a - b) / 2.0).sin().abs()
        })
        .collect();
    let circle = Arc::new(FiniteMetricMeasureSpace::new(dist, vec![1.0; n])?);
    let net = build_net_grid(circle, 0.5, 3)?;
    net.check_invariants()?;
    let c = net.containment();
    println!("net grid: depth {}, {} cubes, containment outer {:.3} inner {:.3}", net.depth(), net.cubes().len(), c.outer, c.inner);

    let path = Arc::new(FiniteMetricMeasureSpace::path(64)?);
    let family = GridFamily::shifted(path, 6)?;
    let eps = choose_epsilon(&family, 0, 0)?;
    println!("eps = {eps}, m0 = {}", m0(eps, 0.5));
    let mc = boundary_layer_probability(&family, 2, eps, 4000, 1)?;
    println!(
        "boundary layer at u=32, level 2: exact {:.4}, sampled {:.4} [{:.4}, {:.4}]",
        exact_boundary_probability(&family, 2, eps, 32)?,
        mc[32].estimate,
        mc[32].lower,
        mc[32].upper
    );
    // Pairs with d(u, v) <= eps l / 2 at a generation at least m0 only exist on longer paths.
    let long = GridFamily::shifted(Arc::new(FiniteMetricMeasureSpace::path(1024)?), 10)?;
    let w = common_ancestor_probability(&long, 500, 502, 6, 4, eps, 4000, 2)?;
    println!(
        "u=500, v=502 share their generation-2 cube with frequency {:.4} (exact {:.4})",
        w.estimate,
        exact_same_cube_probability(&long, 500, 502, 2)?
    );
    Ok(())
}
