//! Banded block operators `a^m_S` and the reorganized sum, whose expectation over random
//! shifts equals the direct sum.
//!
//! `cargo run --example blocks`

use finite_cz::calculus::blocks::reorganized_identity_exact;
use finite_cz::calculus::{block_operator, AncestorModel, Bands, BlockDecomposition, Flavor};
use finite_cz::dyadic::build_shifted_integer_grid;
use finite_cz::error::Result;
use finite_cz::field::VectorField;
use finite_cz::kernel::TruncatedKernel;
use finite_cz::rng;

fn main() -> Result<()> {
    let kernel = TruncatedKernel::truncated_hilbert(32, 1.0, 8.0)?;
    let bands = Bands::new(0.25, 0.5);
    let sys = build_shifted_integer_grid(std::sync::Arc::clone(kernel.space()), 9, 5)?;
    let dec = BlockDecomposition::new(&kernel, &sys, bands, AncestorModel::Exact)?;
    println!("m0 = {}, {} blocks, min ancestor probability {:.3}", bands.m0, dec.blocks().len(), dec.min_probability);

    let mut size: f64 = 0.0;
    for spec in dec.blocks() {
        for flavor in Flavor::ALL {
            size = size.max(block_operator(&dec, spec, flavor)?.size_constant(&sys));
        }
    }
    println!("largest block size constant {size:.4}");
    let (pairs, largest) = dec.skipped_band_check(4.0);
    println!("{pairs} pairs in bands with delta^-m r > 4R, largest coefficient {largest}");

    let mut r = rng::stream(3, 0);
    let f = VectorField::gaussian(32, 1, &mut r);
    let g = VectorField::gaussian(32, 1, &mut r);
    for flavor in Flavor::ALL {
        let (reorganized, direct) = reorganized_identity_exact(&kernel, 5, bands, flavor, &f, &g)?;
        println!("{flavor:?}: E reorganized {reorganized:+.12}, E direct {direct:+.12}");
    }
    Ok(())
}
