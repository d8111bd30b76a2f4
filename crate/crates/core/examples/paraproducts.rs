//! Paraproducts with symbol `b = T1`, dyadic BMO, square functions and the sparse stopping
//! family that dominates the paraproduct.
//!
//! `cargo run --example paraproducts`

use std::sync::Arc;

use finite_cz::calculus::{
    bmo_norm, extract_symbol, extraction, paraproduct_bmo_constant, paraproduct_stopping_bound, stopping_family,
    StopKind,
};
use finite_cz::dyadic::build_shifted_integer_grid;
use finite_cz::error::Result;
use finite_cz::field::VectorField;
use finite_cz::kernel::TruncatedKernel;
use finite_cz::rng;

fn main() -> Result<()> {
    let n = 256;
    let kernel = TruncatedKernel::finite_hilbert(n)?;
    let sys = build_shifted_integer_grid(Arc::clone(kernel.space()), 12345, 8)?;
    let b = extract_symbol(&kernel);
    let bmo = bmo_norm(&sys, &b);
    println!("b = T1: |b|_BMO = {bmo:.4}, max |b| = {:.4}", b.iter().fold(0.0f64, |m, x| m.max(x.abs())));

    let mut r = rng::stream(5, 0);
    let f = VectorField::gaussian(n, 1, &mut r);
    let g = VectorField::gaussian(n, 1, &mut r);
    let ext = extraction(&kernel, &sys, &f, &g, 0, sys.depth())?;
    println!(
        "sum <T E_i f, D_i g> = {:+.8} = cancellative {:+.8} + paraproduct {:+.8} (residual {:.1e})",
        ext.direct,
        ext.cancellative,
        ext.paraproduct,
        ext.relative_residual()
    );
    println!("|Pi_b f| / (|b|_BMO |f|) = {:.4}", paraproduct_bmo_constant(&sys, &b, &f, 0, sys.depth())?);

    // A bump on [40, 48) makes the first-kind stopping rule fire.
    let fnorm: Vec<f64> = f.pointwise_euclidean().iter().enumerate().map(|(u, x)| if (40..48).contains(&u) { x + 40.0 } else { *x }).collect();
    for lambda in [2.0 * bmo, 0.5 * bmo] {
        let family = stopping_family(&sys, &fnorm, &b, lambda, 0)?;
        let count = |k: StopKind| family.cubes.iter().filter(|c| c.kind == k).count();
        println!(
            "lambda {lambda:.3}: {} stopping cubes ({} first kind, {} second kind); min mu(E_S)/mu(S) {:.3}; first-kind ratio {:.3}; disjoint {}",
            family.cubes.len(),
            count(StopKind::First),
            count(StopKind::Second),
            family.major_ratio(&sys),
            family.first_kind_ratio(&sys),
            family.majors_disjoint(n)
        );
    }
    let bound = paraproduct_stopping_bound(&sys, &b, &fnorm, 3.0, 0, sys.depth())?;
    println!("L_3 square-function bound: {:.4} <= C * {:.4}, C = {:.4}; sparse constant {:.4}", bound.lhs, bound.rhs, bound.constant, bound.sparse_constant);
    Ok(())
}
