use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Modulus, TruncatedKernel};
use crate::norms::MixedNormDescriptor;
use crate::space::FiniteMetricMeasureSpace;

/// Kernel family an experiment is run on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Hilbert,
    RandomKernel,
}

/// How the inner dimension depends on `N`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Growth {
    #[default]
    Fixed,
    /// `d(N) = d * ceil(log2 N)`.
    Log2,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub s: f64,
    pub p: f64,
    pub d: usize,
    #[serde(default)]
    pub growth: Growth,
}

impl NormSpec {
    pub fn descriptor(&self, n: usize) -> Result<MixedNormDescriptor> {
        let d = match self.growth {
            Growth::Fixed => self.d,
            Growth::Log2 => self.d * (n as f64).log2().ceil().max(1.0) as usize,
        };
        MixedNormDescriptor::new(self.s, self.p, d).map_err(|e| Error::Config(e.to_string()))
    }
}

/// `r` and `R`; `R` defaults to `N`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(default = "one")]
    pub inner: f64,
    pub outer: Option<f64>,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { inner: 1.0, outer: None }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    Jsonl,
    Plot,
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Jsonl => "jsonl",
            Self::Plot => "dat",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
    pub formats: Vec<ReportFormat>,
}

/// An experiment description, read from TOML:
///
/// ```toml
/// seed = 7
/// family = "hilbert"            # or "random-kernel"
/// sizes = [64, 128, 256]
/// systems = 5                   # dyadic systems per check, seeds per norm estimate
/// restarts = 8
/// iterations = 2000
/// tolerance = 1e-13             # relative step at which an estimate counts as converged
/// corrupt_truncation = false    # plants a diagonal entry, for testing the checks
///
/// [truncation]
/// inner = 1.0
/// outer = 16.0                  # omitted: R = N
///
/// [[norms]]
/// s = 2.0
/// p = 2.0
/// d = 1
/// growth = "fixed"              # or "log2"
///
/// [output]
/// dir = "out"
/// formats = ["csv", "jsonl", "plot"]
/// ```
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub family: Family,
    pub sizes: Vec<usize>,
    #[serde(default = "default_systems")]
    pub systems: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Convergence tolerance of the norm estimator.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub corrupt_truncation: bool,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default = "default_norms")]
    pub norms: Vec<NormSpec>,
    pub output: Option<Output>,
}

fn default_systems() -> usize {
    5
}

fn default_restarts() -> usize {
    crate::norms::DEFAULT_RESTARTS
}

fn default_iterations() -> usize {
    2000
}

fn default_tolerance() -> f64 {
    crate::norms::DEFAULT_TOLERANCE
}

fn default_norms() -> Vec<NormSpec> {
    vec![NormSpec { s: 2.0, p: 2.0, d: 1, growth: Growth::Fixed }]
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.sizes.is_empty() {
            return bad("sizes must not be empty".into());
        }
        if let Some(n) = self.sizes.iter().find(|&&n| n < 2) {
            return bad(format!("every size must be at least 2, got {n}"));
        }
        if self.norms.is_empty() {
            return bad("norms must not be empty".into());
        }
        if self.systems == 0 || self.restarts == 0 || self.iterations == 0 {
            return bad("systems, restarts and iterations must be positive".into());
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance must be a non-negative number, got {}", self.tolerance));
        }
        let t = self.truncation;
        if !(t.inner > 0.0 && t.inner.is_finite()) {
            return bad(format!("inner radius must be positive, got {}", t.inner));
        }
        if let Some(outer) = t.outer {
            if !(outer > t.inner && outer.is_finite()) {
                return bad(format!("outer radius {outer} must exceed the inner radius {}", t.inner));
            }
        }
        for spec in &self.norms {
            spec.descriptor(2)?;
        }
        if let Some(out) = &self.output {
            if out.formats.is_empty() {
                return bad("output formats must not be empty".into());
            }
        }
        Ok(())
    }

    /// `(r, R)` at size `n`.
    pub fn radii(&self, n: usize) -> (f64, f64) {
        (self.truncation.inner, self.truncation.outer.unwrap_or(n as f64))
    }

    /// The kernel of the configured family on the path of `n` points.
    pub fn kernel(&self, n: usize) -> Result<TruncatedKernel> {
        let (r, big_r) = self.radii(n);
        let kernel = match self.family {
            Family::Hilbert => TruncatedKernel::truncated_hilbert(n, r, big_r)?,
            Family::RandomKernel => {
                let space = Arc::new(FiniteMetricMeasureSpace::path(n)?);
                TruncatedKernel::random(space, r, big_r, self.seed ^ n as u64, Modulus::lipschitz())?
            }
        };
        if self.corrupt_truncation {
            return kernel.with_entry(0, 0, 1.0);
        }
        Ok(kernel)
    }
}
