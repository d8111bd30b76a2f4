use std::sync::Arc;

use serde::Serialize;

use super::ExperimentConfig;
use crate::calculus::blocks::{reorganized_identity_exact, reorganized_identity_monte_carlo};
use crate::calculus::{
    block_operator, bmo_norm, expand_pairing, extract_symbol, extraction, paraproduct_bmo_constant,
    paraproduct_stopping_bound, stopping_family, verify_haar_bounds, AncestorModel, Bands, BlockDecomposition, Flavor,
};
use crate::dyadic::probability::{
    boundary_layer_probability, common_ancestor_probability, exact_boundary_probability, exact_same_cube_probability,
    m0,
};
use crate::dyadic::{shifted::default_depth, GridFamily};
use crate::error::Result;
use crate::field::VectorField;
use crate::kernel::TruncatedKernel;
use crate::norms::{
    operator_norm_lower_bound, operator_norm_oracle_small, spectral_norm_oracle, DenseOperator, MixedNormDescriptor,
};
use crate::rng;

const IDENTITY_TOLERANCE: f64 = 1e-9;
const ORACLE_SPECTRAL_TOLERANCE: f64 = 1e-6;
const ORACLE_GRID_TOLERANCE: f64 = 1e-3;
const GRID_TRIALS: u64 = 2000;
const WILSON_COVERAGE: f64 = 0.9;
const EXACT_BLOCK_DEPTH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Finite,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Self::AtMost => "<=",
            Self::AtLeast => ">=",
            Self::Finite => "finite",
        }
    }
}

/// One check: `achieved` compared with `tolerance` by `relation`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckEntry {
    pub suite: String,
    pub name: String,
    pub pass: bool,
    pub achieved: f64,
    pub relation: Relation,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    fn push(&mut self, suite: &str, name: String, achieved: f64, relation: Relation, tolerance: f64) {
        let pass = match relation {
            Relation::AtMost => achieved <= tolerance,
            Relation::AtLeast => achieved >= tolerance,
            Relation::Finite => achieved.is_finite(),
        };
        self.entries.push(CheckEntry { suite: suite.into(), name, pass, achieved, relation, tolerance });
    }
}

/// Runs every suite at every configured size.
pub fn run_verification_suite(config: &ExperimentConfig) -> Result<VerificationReport> {
    config.validate()?;
    let mut report = VerificationReport { seed: config.seed, entries: Vec::new() };
    for &n in &config.sizes {
        let kernel = config.kernel(n)?;
        let depth = default_depth(n);
        let family = GridFamily::shifted(Arc::clone(kernel.space()), depth)?;
        let systems: Vec<_> =
            (0..config.systems as u64).map(|t| family.sample(config.seed, t)).collect::<Result<_>>()?;
        let ctx = Context { config, n, kernel: &kernel, family: &family, systems: &systems };
        ctx.kernel_suite(&mut report);
        ctx.decomposition_suite(&mut report)?;
        ctx.haar_suite(&mut report);
        ctx.sparse_suite(&mut report)?;
        ctx.paraproduct_suite(&mut report)?;
        ctx.block_suite(&mut report)?;
        ctx.grid_suite(&mut report)?;
        ctx.oracle_suite(&mut report)?;
    }
    Ok(report)
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    n: usize,
    kernel: &'a TruncatedKernel,
    family: &'a GridFamily,
    systems: &'a [crate::dyadic::DyadicSystem],
}

impl Context<'_> {
    fn name(&self, what: &str) -> String {
        format!("N={} {what}", self.n)
    }

    fn fields(&self, index: u64, d: usize) -> (VectorField, VectorField) {
        let mut r = rng::stream(self.config.seed ^ 0x5eed, index);
        (VectorField::gaussian(self.n, d, &mut r), VectorField::gaussian(self.n, d, &mut r))
    }

    fn kernel_suite(&self, out: &mut VerificationReport) {
        let est = self.kernel.verify_standard_estimates();
        out.push("kernel", self.name("truncation violations"), est.truncation_violations as f64, Relation::AtMost, 0.0);
        out.push("kernel", self.name("size constant"), est.c_size, Relation::Finite, f64::INFINITY);
        out.push("kernel", self.name("smoothness constant"), est.c_smooth, Relation::Finite, f64::INFINITY);
        let schur = self.kernel.schur_row_bound();
        out.push("kernel", self.name("row sum / (1 + ln R/r)"), schur.max_row_sum / self.kernel.truncation_index(), Relation::Finite, f64::INFINITY);
    }

    fn decomposition_suite(&self, out: &mut VerificationReport) -> Result<()> {
        let mut worst: f64 = 0.0;
        for (t, sys) in self.systems.iter().enumerate() {
            let depth = sys.depth();
            let sigma = depth.min(1);
            let tau = depth.saturating_sub(1).max(sigma);
            for d in [1, 4] {
                let (f, g) = self.fields(t as u64 * 2 + (d == 4) as u64, d);
                worst = worst.max(expand_pairing(self.kernel, sys, &f, &g, sigma, tau)?.relative_residual());
            }
        }
        out.push("decomposition", self.name("ledger residual"), worst, Relation::AtMost, IDENTITY_TOLERANCE);
        Ok(())
    }

    fn bands(&self) -> Bands {
        Bands::new(0.25, 0.5)
    }

    fn haar_suite(&self, out: &mut VerificationReport) {
        let mut ratio: f64 = 0.0;
        let mut beyond: f64 = 0.0;
        for sys in self.systems {
            let rep = verify_haar_bounds(self.kernel, sys, &self.bands());
            ratio = ratio.max(rep.max_ratio);
            beyond = beyond.max(rep.beyond_truncation_max);
        }
        out.push("haar", self.name("banded ratio"), ratio, Relation::Finite, f64::INFINITY);
        out.push("haar", self.name("coefficients beyond R"), beyond, Relation::AtMost, 0.0);
    }

    fn sparse_suite(&self, out: &mut VerificationReport) -> Result<()> {
        let b = extract_symbol(self.kernel);
        let mut overlaps = 0.0;
        let mut major: f64 = 1.0;
        let mut first: f64 = 0.0;
        for (t, sys) in self.systems.iter().enumerate() {
            let (f, _) = self.fields(1000 + t as u64, 1);
            let fnorm = f.pointwise_euclidean();
            let lambda = 2.0 * bmo_norm(sys, &b);
            let fam = stopping_family(sys, &fnorm, &b, lambda, 0)?;
            if !fam.majors_disjoint(self.n) || !fam.majors_inside(sys) {
                overlaps += 1.0;
            }
            major = major.min(fam.major_ratio(sys));
            first = first.max(fam.first_kind_ratio(sys));
        }
        out.push("sparse", self.name("overlapping major subsets"), overlaps, Relation::AtMost, 0.0);
        out.push("sparse", self.name("min mu(E_S) / mu(S)"), major, Relation::AtLeast, 0.5);
        out.push("sparse", self.name("first-kind mass ratio"), first, Relation::AtMost, 0.25);
        Ok(())
    }

    fn paraproduct_suite(&self, out: &mut VerificationReport) -> Result<()> {
        let b = extract_symbol(self.kernel);
        let mut residual: f64 = 0.0;
        let mut bmo_constant: f64 = 0.0;
        let mut stopping: f64 = 0.0;
        for (t, sys) in self.systems.iter().enumerate() {
            let depth = sys.depth();
            let (f, g) = self.fields(2000 + t as u64, 2);
            residual = residual.max(extraction(self.kernel, sys, &f, &g, 0, depth)?.relative_residual());
            bmo_constant = bmo_constant.max(paraproduct_bmo_constant(sys, &b, &f, 0, depth)?);
            let bound = paraproduct_stopping_bound(sys, &b, &f.pointwise_euclidean(), 2.0, 0, depth)?;
            stopping = stopping.max(bound.constant);
        }
        out.push("paraproduct", self.name("extraction residual"), residual, Relation::AtMost, IDENTITY_TOLERANCE);
        out.push("paraproduct", self.name("||Pi_b f|| / (||b||_BMO ||f||)"), bmo_constant, Relation::Finite, f64::INFINITY);
        out.push("paraproduct", self.name("stopping-family constant"), stopping, Relation::Finite, f64::INFINITY);
        Ok(())
    }

    fn block_suite(&self, out: &mut VerificationReport) -> Result<()> {
        let bands = self.bands();
        let depth = self.family.depth();
        let (f, g) = self.fields(3000, 1);
        for flavor in Flavor::ALL {
            let name = self.name(&format!("{flavor:?} reorganized expectation"));
            if depth <= EXACT_BLOCK_DEPTH {
                let (r, d) = reorganized_identity_exact(self.kernel, depth, bands, flavor, &f, &g)?;
                let scale = r.abs().max(d.abs()).max(f64::MIN_POSITIVE);
                out.push("blocks", name, (r - d).abs() / scale, Relation::AtMost, IDENTITY_TOLERANCE);
            } else {
                let est = reorganized_identity_monte_carlo(
                    self.kernel,
                    self.family,
                    bands,
                    flavor,
                    &f,
                    &g,
                    self.config.systems.max(2) as u64,
                    self.config.seed,
                )?;
                let z = est.mean_difference.abs() / est.standard_error.max(f64::MIN_POSITIVE);
                out.push("blocks", name, z, Relation::AtMost, 4.0);
            }
        }
        let mut size: f64 = 0.0;
        let mut cutoff: f64 = 1.0;
        let mut violations = 0;
        for sys in self.systems {
            let dec = BlockDecomposition::new(self.kernel, sys, bands, AncestorModel::Exact)?;
            violations += dec.violations;
            while dec.skipped_band_check(cutoff).1 != 0.0 {
                cutoff *= 2.0;
            }
            for spec in dec.blocks() {
                for flavor in Flavor::ALL {
                    size = size.max(block_operator(&dec, spec, flavor)?.size_constant(sys));
                }
            }
        }
        out.push("blocks", self.name("ancestor probabilities below 1/2"), violations as f64, Relation::AtMost, 0.0);
        out.push("blocks", self.name("block size constant"), size, Relation::Finite, f64::INFINITY);
        // smallest power of two c such that every band with delta^-m r > c R is empty
        out.push("blocks", self.name("band cutoff constant c"), cutoff, Relation::Finite, f64::INFINITY);
        Ok(())
    }

    fn grid_suite(&self, out: &mut VerificationReport) -> Result<()> {
        let fam = self.family;
        let depth = fam.depth();
        let mut covered = 0usize;
        let mut compared = 0usize;
        for (j, eps) in [1.0 / 16.0, 0.125, 0.25].into_iter().enumerate() {
            let mut worst: f64 = 0.0;
            for level in 1..=depth {
                let side = fam.side(level);
                let mc = boundary_layer_probability(fam, level, eps, GRID_TRIALS, self.config.seed ^ j as u64)?;
                for (u, w) in mc.iter().enumerate() {
                    let exact = exact_boundary_probability(fam, level, eps, u)?;
                    compared += 1;
                    covered += w.contains(exact) as usize;
                    let interior = u as f64 >= side && ((self.n - 1 - u) as f64) >= side;
                    if interior {
                        worst = worst.max(exact);
                    }
                }
            }
            out.push("grids", self.name(&format!("eps={eps} boundary probability / 2 eps")), worst / (2.0 * eps), Relation::AtMost, 1.0);
            let m_zero = m0(eps, 0.5);
            let mut lowest: f64 = 1.0;
            for level in m_zero..=depth {
                let reach = (0.5 * eps * fam.side(level)).floor() as usize;
                for u in 0..self.n {
                    for v in u..self.n.min(u + reach + 1) {
                        for m in m_zero..=level {
                            lowest = lowest.min(exact_same_cube_probability(fam, u, v, level - m)?);
                        }
                    }
                }
                let (u, v) = (self.n / 2 - reach.min(self.n / 2), self.n / 2);
                let w = common_ancestor_probability(fam, u, v, level, m_zero, eps, GRID_TRIALS, self.config.seed)?;
                compared += 1;
                covered += w.contains(exact_same_cube_probability(fam, u, v, level - m_zero)?) as usize;
            }
            out.push("grids", self.name(&format!("eps={eps} common ancestor probability")), lowest, Relation::AtLeast, 0.5);
        }
        out.push("grids", self.name("Wilson interval coverage"), covered as f64 / compared as f64, Relation::AtLeast, WILSON_COVERAGE);
        Ok(())
    }

    fn oracle_suite(&self, out: &mut VerificationReport) -> Result<()> {
        let c = self.config;
        let hilbertian = MixedNormDescriptor::new(2.0, 2.0, 1)?;
        let est = operator_norm_lower_bound(self.kernel, &hilbertian, c.restarts, c.iterations.max(5000), c.seed)?;
        let exact = spectral_norm_oracle(self.kernel, 1)?;
        let rel = if exact == 0.0 { est.estimate } else { (est.estimate - exact).abs() / exact };
        out.push("oracle", self.name("power vs spectral"), rel, Relation::AtMost, ORACLE_SPECTRAL_TOLERANCE);
        let schur = self.kernel.schur_row_bound();
        for spec in &c.norms {
            let desc = spec.descriptor(self.n)?;
            if !(desc.p > 1.0 && desc.p.is_finite()) {
                continue;
            }
            let est = operator_norm_lower_bound(self.kernel, &desc, c.restarts, c.iterations, c.seed)?;
            let bound = schur.lp_bound(desc.s);
            let ratio = if bound == 0.0 { est.estimate } else { est.estimate / bound };
            out.push("oracle", self.name(&format!("s={} p={} d={} estimate / Schur bound", desc.s, desc.p, desc.d)), ratio, Relation::AtMost, 1.0 + 1e-9);
            let mut worst: f64 = 0.0;
            for (i, (points, dim)) in [(4, 1), (2, 2), (1, 4), (3, 1)].into_iter().enumerate() {
                let op = DenseOperator::random(points, dim, c.seed.wrapping_add(i as u64))?;
                let small = MixedNormDescriptor::new(desc.s, desc.p, dim)?;
                let grid = operator_norm_oracle_small(&op, &small, 40)?;
                let power = operator_norm_lower_bound(&op, &small, c.restarts, c.iterations.max(5000), c.seed)?.estimate;
                worst = worst.max((grid - power).abs() / grid);
            }
            out.push("oracle", format!("s={} p={} power vs grid search", desc.s, desc.p), worst, Relation::AtMost, ORACLE_GRID_TOLERANCE);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_hilbert_config_passes() {
        let config = ExperimentConfig::parse("family = \"hilbert\"\nsizes = [16]\nsystems = 3\n").unwrap();
        let report = run_verification_suite(&config).unwrap();
        let failed: Vec<_> = report.failures().map(|e| format!("{} {}: {}", e.suite, e.name, e.achieved)).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(report.entries.iter().any(|e| e.suite == "grids"));
    }

    #[test]
    fn corrupted_kernel_fails_the_kernel_suite() {
        let config =
            ExperimentConfig::parse("family = \"hilbert\"\nsizes = [16]\nsystems = 2\ncorrupt_truncation = true\n").unwrap();
        let report = run_verification_suite(&config).unwrap();
        assert!(!report.passed());
        assert!(report.failures().any(|e| e.suite == "kernel"));
    }
}
