//! A scaling study run from code: norm lower bounds across sizes, fitted exponents and the
//! three report formats.
//!
//! `cargo run --example scaling [-- OUT_DIR]`

use std::path::PathBuf;

use finite_cz::error::Result;
use finite_cz::experiments::{emit_report, run_scaling, ExperimentConfig, ReportFormat};

fn main() -> Result<()> {
    let config = ExperimentConfig::parse(
        r#"
        seed = 4
        family = "random-kernel"
        sizes = [32, 64, 128, 256]
        systems = 1
        restarts = 4
        iterations = 1500
        tolerance = 1e-10

        [[norms]]
        s = 2.0
        p = 2.0
        d = 1

        [[norms]]
        s = 4.0
        p = 2.0
        d = 2
        "#,
    )?;
    let report = run_scaling(&config)?;
    for r in &report.rows {
        println!("N={:4} s={} p={} d={} n={:.3} norm {:.6} trivial {:.4}", r.n_points, r.s, r.p, r.d, r.truncation_index, r.norm, r.trivial_bound);
    }
    for fit in &report.fits {
        println!("s={} p={}: theta {:?}, row-sum slope {:?}", fit.spec.s, fit.spec.p, fit.norm.theta, fit.row_sum.theta);
    }
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    for format in [ReportFormat::Csv, ReportFormat::Jsonl, ReportFormat::Plot] {
        let path = dir.join(format!("scaling-example.{}", format.extension()));
        emit_report(&report, format, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
