//! Mixed `L_s(l_p^d)` norms, duality maps and operator-norm lower bounds checked against
//! the spectral and grid-search oracles.
//!
//! `cargo run --example operator_norms`

use finite_cz::error::Result;
use finite_cz::kernel::TruncatedKernel;
use finite_cz::norms::{
    duality_map, mixed_norm, operator_norm_lower_bound, operator_norm_oracle_small, spectral_norm_oracle,
    DenseOperator, LinearOperator, MixedNormDescriptor,
};
use finite_cz::field::VectorField;
use finite_cz::rng;

fn main() -> Result<()> {
    let desc = MixedNormDescriptor::new(3.0, 1.5, 2)?;
    let f = VectorField::gaussian(5, 2, &mut rng::stream(0, 0));
    let w = [1.0; 5];
    let g = duality_map(&f, &desc, &w)?;
    println!("|f| = {:.6}, <f, J f> = {:.6}, |J f|_dual = {:.6}", mixed_norm(&f, &desc, &w)?, f.pairing(&g, &w)?, mixed_norm(&g, &desc.dual(), &w)?);

    let kernel = TruncatedKernel::finite_hilbert(128)?;
    for (s, p) in [(2.0, 2.0), (3.0, 2.0), (3.0, 1.5), (1.5, 4.0)] {
        let desc = MixedNormDescriptor::new(s, p, 2)?;
        let est = operator_norm_lower_bound(&kernel, &desc, 8, 3000, 1)?;
        println!("H_128 on L_{s}(l_{p}^2): >= {:.6} (restart {}, converged {})", est.estimate, est.restart, est.converged);
    }
    println!("spectral norm of H_128: {:.6}", spectral_norm_oracle(&kernel, 1)?);

    let op = DenseOperator::random(2, 2, 4)?;
    for (s, p) in [(1.5, 4.0), (4.0, 1.5)] {
        let desc = MixedNormDescriptor::new(s, p, 2)?;
        let power = operator_norm_lower_bound(&op, &desc, 8, 5000, 4)?.estimate;
        let grid = operator_norm_oracle_small(&op, &desc, 40)?;
        println!("random 4x4 on L_{s}(l_{p}^2): power {power:.8}, grid {grid:.8}");
    }
    let endpoint = MixedNormDescriptor::new(2.0, f64::INFINITY, 2)?;
    println!("same operator on L_2(l_inf^2), grid only: {:.6}", operator_norm_oracle_small(&op, &endpoint, 40)?);
    println!("dense form of H_4 on l^2-valued fields is {0}x{0}", kernel_dense_size()?);
    Ok(())
}

fn kernel_dense_size() -> Result<usize> {
    let k = TruncatedKernel::finite_hilbert(4)?;
    Ok(k.to_dense(2)?.matrix().nrows())
}
