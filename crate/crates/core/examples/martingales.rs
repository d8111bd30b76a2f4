//! Empirical martingale type and cotype constants of `l_p^d` along shifted dyadic filtrations.
//!
//! `cargo run --example martingales`

use finite_cz::error::Result;
use finite_cz::norms::{martingale_cotype_constant, martingale_type_constant, MixedNormDescriptor};

fn main() -> Result<()> {
    let trials = 40;
    println!("{:>6} {:>3} {:>14} {:>14}", "p", "d", "type-2 ratio", "cotype-2 ratio");
    for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
        for d in [2, 4, 8] {
            let desc = MixedNormDescriptor::new(2.0, p, d)?;
            let t = martingale_type_constant(&desc, 2.0, 128, trials, 1)?;
            let c = martingale_cotype_constant(&desc, 2.0, 128, trials, 1)?;
            println!("{p:>6} {d:>3} {t:>14.4} {c:>14.4}");
        }
    }
    let l1 = MixedNormDescriptor::new(2.0, 1.0, 8)?;
    println!("l_1^8 type 1.5: {:.4}", martingale_type_constant(&l1, 1.5, 128, trials, 2)?);
    Ok(())
}
