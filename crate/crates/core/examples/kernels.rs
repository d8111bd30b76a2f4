//! Truncated kernels: the finite Hilbert transform, random standard kernels, measured
//! constants, Schur sums and Dini norms. Saves a kernel for `finite-cz norms --file`.
//!
//! `cargo run --example kernels [-- OUT.json]`

use std::sync::Arc;

use finite_cz::error::Result;
use finite_cz::format::save_kernel;
use finite_cz::kernel::{dini_norm, Modulus, TruncatedKernel};
use finite_cz::space::FiniteMetricMeasureSpace;

fn main() -> Result<()> {
    let hilbert = TruncatedKernel::finite_hilbert(64)?;
    let est = hilbert.verify_standard_estimates();
    println!("finite Hilbert N=64: C_size {:.4}, C_smooth {:.4}, standard {}", est.c_size, est.c_smooth, est.is_standard());
    for n in [4, 64, 1024] {
        let k = TruncatedKernel::finite_hilbert(n)?;
        let schur = k.schur_row_bound();
        println!("  N={n:5}: max row sum {:.4}, n = 1 + ln N = {:.4}", schur.max_row_sum, k.truncation_index());
    }

    let band = TruncatedKernel::truncated_hilbert(64, 2.0, 16.0)?;
    println!("truncated to 2 <= |i-j| < 16: violations {}, n = {:.4}", band.truncation_violations(), band.truncation_index());

    let space = Arc::new(FiniteMetricMeasureSpace::path(48)?);
    let omega = Modulus::power(0.5)?;
    for nu in [0.0, 0.5, 1.0] {
        println!("Dini norm of t^0.5, order {nu}: {:.6}", dini_norm(&omega, nu)?);
    }
    let random = TruncatedKernel::random(space, 1.0, 24.0, 7, omega)?;
    let est = random.verify_standard_estimates();
    println!("random kernel: C_size {:.4}, C_smooth {:.4}, C_omega {:.4}", est.c_size, est.c_smooth, est.c_omega);

    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("hilbert-16.json").display().to_string());
    save_kernel(&TruncatedKernel::finite_hilbert(16)?, out.as_ref())?;
    println!("saved the N=16 Hilbert kernel to {out}");
    Ok(())
}
