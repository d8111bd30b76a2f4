//! The telescoping expansion of `<Tf, g>` into coarse, tail, diagonal and mixed terms.
//!
//! `cargo run --example ledger`

use std::sync::Arc;

use finite_cz::calculus::{expand_pairing, weak_boundedness, cube_testing};
use finite_cz::dyadic::build_shifted_integer_grid;
use finite_cz::error::Result;
use finite_cz::field::VectorField;
use finite_cz::kernel::TruncatedKernel;
use finite_cz::rng;

fn main() -> Result<()> {
    let kernel = TruncatedKernel::finite_hilbert(64)?;
    let sys = build_shifted_integer_grid(Arc::clone(kernel.space()), 0x2a, 6)?;
    let mut r = rng::stream(1, 0);
    let f = VectorField::gaussian(64, 4, &mut r);
    let g = VectorField::gaussian(64, 4, &mut r);

    let ledger = expand_pairing(&kernel, &sys, &f, &g, 1, 5)?;
    for rec in ledger.records() {
        println!("{:>24} {:+.10e}", rec.name, rec.value);
    }
    println!("reconstructed {:+.10e}, whole {:+.10e}, residual {:.2e}", ledger.reconstruct(), ledger.whole, ledger.relative_residual());

    println!("weak boundedness {:.4}", weak_boundedness(&kernel, &sys));
    println!("cube testing (s = 2) {:.4}", cube_testing(&kernel, &sys, 2.0)?);
    Ok(())
}
