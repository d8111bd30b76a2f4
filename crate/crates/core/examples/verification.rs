//! The verification suite on a random kernel, printed as a table.
//!
//! `cargo run --example verification`

use finite_cz::error::Result;
use finite_cz::experiments::{run_verification_suite, ExperimentConfig};

fn main() -> Result<()> {
    let config = ExperimentConfig::parse("seed = 11\nfamily = \"random-kernel\"\nsizes = [32]\nsystems = 3\n[truncation]\nouter = 12.0\n")?;
    let report = run_verification_suite(&config)?;
    for e in &report.entries {
        println!("{:5} {:12} {:55} {:.4e}", if e.pass { "ok" } else { "FAIL" }, e.suite, e.name, e.achieved);
    }
    println!("{} of {} checks passed", report.entries.iter().filter(|e| e.pass).count(), report.entries.len());
    Ok(())
}
