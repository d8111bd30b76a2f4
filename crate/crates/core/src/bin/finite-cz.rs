use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use finite_cz::dyadic::probability::{boundary_layer_probability, exact_boundary_probability, m0};
use finite_cz::dyadic::shifted::default_depth;
use finite_cz::dyadic::GridFamily;
use finite_cz::error::Error;
use finite_cz::experiments::{
    emit_report, run_scaling, run_verification_suite, ExperimentConfig, Relation, Render, ReportFormat,
};
use finite_cz::format::load_kernel;
use finite_cz::norms::{
    operator_norm_lower_bound, operator_norm_oracle_small, spectral_norm_oracle, MixedNormDescriptor,
    DEFAULT_RESTARTS, MAX_ORACLE_DIMENSION,
};
use finite_cz::space::FiniteMetricMeasureSpace;

#[derive(Parser)]
#[command(name = "finite-cz", version, about = "Truncated singular integrals on finite metric measure spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites described by a config file.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate mixed-norm operator norms across sizes and fit the growth exponent.
    Scaling {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Boundary-layer probabilities of shifted grids on the path of N points.
    Grids {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Lower bound for the L_s(l_p^d) norm of a saved kernel.
    Norms {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 2000)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Verification,
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Library(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify { config, seed } => verify(&config, seed),
        Command::Scaling { config, seed } => scaling(&config, seed),
        Command::Grids { n, eps, trials, seed } => grids(n, eps, trials, seed),
        Command::Norms { file, s, p, d, iterations, seed } => norms(&file, s, p, d, iterations, seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Library(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io { .. } => 3,
                _ => 2,
            })
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn write_outputs(config: &ExperimentConfig, stem: &str, report: &dyn Render) -> Result<(), Failure> {
    let Some(out) = &config.output else { return Ok(()) };
    std::fs::create_dir_all(&out.dir).map_err(|source| Error::Io { path: out.dir.clone(), source })?;
    for &format in &out.formats {
        if stem == "verify" && format == ReportFormat::Plot {
            continue;
        }
        let path = out.dir.join(format!("{stem}.{}", format.extension()));
        emit_report(report, format, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn verify(path: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let config = load(path, seed)?;
    let report = run_verification_suite(&config)?;
    for e in &report.entries {
        let bound = match e.relation {
            Relation::Finite => "finite".to_string(),
            r => format!("{} {:.3e}", r.symbol(), e.tolerance),
        };
        println!("{} [{}] {}: {:.6e} ({bound})", if e.pass { "PASS" } else { "FAIL" }, e.suite, e.name, e.achieved);
    }
    write_outputs(&config, "verify", &report)?;
    let failed = report.failures().count();
    println!("{} checks, {failed} failed", report.entries.len());
    if failed > 0 {
        return Err(Failure::Verification);
    }
    Ok(())
}

fn scaling(path: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let config = load(path, seed)?;
    let report = run_scaling(&config)?;
    println!("{:>6} {:>5} {:>5} {:>4} {:>8} {:>12} {:>12} {:>12} conv", "N", "s", "p", "d", "n", "norm", "oracle", "trivial");
    for r in &report.rows {
        let oracle = r.oracle.map_or("-".to_string(), |x| format!("{x:.6}"));
        println!(
            "{:>6} {:>5} {:>5} {:>4} {:>8.4} {:>12.6} {:>12} {:>12.4} {}",
            r.n_points, r.s, r.p, r.d, r.truncation_index, r.norm, oracle, r.trivial_bound, r.converged
        );
    }
    for f in &report.fits {
        let show = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{v:.4}"));
        println!(
            "s={} p={} d={} ({:?}): theta = {} (residual {}), row-sum slope = {}, excluded {:?}",
            f.spec.s,
            f.spec.p,
            f.spec.d,
            f.spec.growth,
            show(f.norm.theta),
            show(f.norm.residual),
            show(f.row_sum.theta),
            f.excluded
        );
    }
    write_outputs(&config, "scaling", &report)
}

fn grids(n: usize, eps: f64, trials: u64, seed: u64) -> Result<(), Failure> {
    if n < 2 {
        return Err(Error::Config("n must be at least 2".into()).into());
    }
    let space = Arc::new(FiniteMetricMeasureSpace::path(n)?);
    let depth = default_depth(n);
    let family = GridFamily::shifted(space, depth)?;
    println!("shifted grids on {n} points, depth {depth}, eps {eps}, m0 = {}", m0(eps, 0.5));
    println!("{:>5} {:>8} {:>12} {:>12} {:>10}", "level", "side", "exact max", "mc max", "covered");
    let mut ok = true;
    for level in 1..=depth {
        let side = family.side(level);
        let mc = boundary_layer_probability(&family, level, eps, trials.max(1), seed)?;
        let mut exact_max: f64 = 0.0;
        let mut covered = 0;
        for (u, w) in mc.iter().enumerate() {
            let exact = exact_boundary_probability(&family, level, eps, u)?;
            exact_max = exact_max.max(exact);
            covered += w.contains(exact) as usize;
        }
        let mc_max = mc.iter().map(|w| w.estimate).fold(0.0, f64::max);
        ok &= exact_max <= 2.0 * eps;
        println!("{level:>5} {side:>8} {exact_max:>12.6} {mc_max:>12.6} {:>5}/{n}", covered);
    }
    println!("boundary probability <= 2 eps: {}", if ok { "yes" } else { "no" });
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn norms(file: &Path, s: f64, p: f64, d: usize, iterations: usize, seed: u64) -> Result<(), Failure> {
    let kernel = load_kernel(file)?;
    let desc = MixedNormDescriptor::new(s, p, d).map_err(|e| Error::Config(e.to_string()))?;
    let n = kernel.len();
    println!("kernel on {n} points, r = {}, R = {}, n = {:.6}", kernel.inner_radius(), kernel.outer_radius(), kernel.truncation_index());
    let schur = kernel.schur_row_bound();
    println!("Schur bound      {:.10}", schur.lp_bound(s));
    if p > 1.0 && p.is_finite() {
        let est = operator_norm_lower_bound(&kernel, &desc, DEFAULT_RESTARTS, iterations, seed)?;
        println!("lower bound      {:.10} (converged: {}, restart {})", est.estimate, est.converged, est.restart);
    }
    if s == 2.0 && p == 2.0 {
        println!("spectral norm    {:.10}", spectral_norm_oracle(&kernel, 1)?);
    }
    if n * d <= MAX_ORACLE_DIMENSION {
        println!("grid search      {:.10}", operator_norm_oracle_small(&kernel, &desc, 40)?);
    } else if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Config(format!("p = {p} needs the grid oracle, which handles N*d <= {MAX_ORACLE_DIMENSION}")).into());
    }
    Ok(())
}
