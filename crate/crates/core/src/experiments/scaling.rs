use rayon::prelude::*;
use serde::Serialize;

use super::{ExperimentConfig, NormSpec};
use crate::error::Result;
use crate::norms::{operator_norm_lower_bound_with_tolerance, spectral_norm_oracle};

/// Largest size at which the spectral oracle is evaluated per row.
const ORACLE_LIMIT: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n_points: usize,
    pub s: f64,
    pub p: f64,
    pub d: usize,
    /// `1 + ln(R / r)`.
    pub truncation_index: f64,
    /// Best lower bound over seeds and restarts.
    pub norm: f64,
    pub converged: bool,
    /// Schur-test bound, linear in the truncation index.
    pub trivial_bound: f64,
    pub row_sum: f64,
    /// Exact norm when `s = p = 2`.
    pub oracle: Option<f64>,
}

/// Least-squares line `ln y = theta ln n + intercept`; `theta` is `None` below two distinct points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub points: usize,
    pub theta: Option<f64>,
    pub intercept: Option<f64>,
    /// Root mean square of the residuals.
    pub residual: Option<f64>,
}

impl Fit {
    pub fn new(xy: &[(f64, f64)]) -> Self {
        let k = xy.len();
        let mean_x = xy.iter().map(|p| p.0).sum::<f64>() / k as f64;
        let mean_y = xy.iter().map(|p| p.1).sum::<f64>() / k as f64;
        let sxx: f64 = xy.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
        if k < 2 || sxx <= 1e-12 * xy.iter().map(|p| p.0 * p.0).sum::<f64>().max(1.0) {
            return Self { points: k, theta: None, intercept: None, residual: None };
        }
        let sxy: f64 = xy.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
        let theta = sxy / sxx;
        let intercept = mean_y - theta * mean_x;
        let rss: f64 = xy.iter().map(|p| (p.1 - theta * p.0 - intercept).powi(2)).sum();
        Self { points: k, theta: Some(theta), intercept: Some(intercept), residual: Some((rss / k as f64).sqrt()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupFit {
    pub spec: NormSpec,
    /// Exponent of the measured norms.
    pub norm: Fit,
    /// Exponent of the Schur row sums.
    pub row_sum: Fit,
    /// Sizes left out because the estimator did not converge.
    pub excluded: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub seed: u64,
    pub rows: Vec<ScalingRow>,
    pub fits: Vec<GroupFit>,
}

/// Estimates the norm for every (size, norm) pair and fits `theta` per norm over rows with
/// truncation index at least 2.
pub fn run_scaling(config: &ExperimentConfig) -> Result<ScalingReport> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> =
        config.norms.iter().enumerate().flat_map(|(j, _)| config.sizes.iter().map(move |&n| (j, n))).collect();
    let rows: Vec<Result<(usize, ScalingRow)>> = jobs.par_iter().map(|&(j, n)| Ok((j, row(config, &config.norms[j], n)?))).collect();
    let mut rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.0, r.1.n_points));
    let fits = config
        .norms
        .iter()
        .enumerate()
        .map(|(j, spec)| {
            let group: Vec<&ScalingRow> = rows.iter().filter(|r| r.0 == j).map(|r| &r.1).collect();
            let usable = |r: &&&ScalingRow| r.truncation_index >= 2.0;
            let norm_xy: Vec<(f64, f64)> = group
                .iter()
                .filter(usable)
                .filter(|r| r.converged && r.norm > 0.0)
                .map(|r| (r.truncation_index.ln(), r.norm.ln()))
                .collect();
            let row_xy: Vec<(f64, f64)> = group
                .iter()
                .filter(usable)
                .filter(|r| r.row_sum > 0.0)
                .map(|r| (r.truncation_index.ln(), r.row_sum.ln()))
                .collect();
            GroupFit {
                spec: *spec,
                norm: Fit::new(&norm_xy),
                row_sum: Fit::new(&row_xy),
                excluded: group.iter().filter(|r| !r.converged).map(|r| r.n_points).collect(),
            }
        })
        .collect();
    Ok(ScalingReport { seed: config.seed, rows: rows.into_iter().map(|r| r.1).collect(), fits })
}

fn row(config: &ExperimentConfig, spec: &NormSpec, n: usize) -> Result<ScalingRow> {
    let kernel = config.kernel(n)?;
    let desc = spec.descriptor(n)?;
    let mut best: Option<crate::norms::NormEstimate> = None;
    for k in 0..config.systems as u64 {
        let est = operator_norm_lower_bound_with_tolerance(
            &kernel,
            &desc,
            config.restarts,
            config.iterations,
            config.tolerance,
            config.seed.wrapping_add(k),
        )?;
        if best.as_ref().is_none_or(|b| est.estimate > b.estimate) {
            best = Some(est);
        }
    }
    let best = best.expect("at least one seed");
    let schur = kernel.schur_row_bound();
    let oracle = if desc.s == 2.0 && desc.p == 2.0 && n <= ORACLE_LIMIT {
        Some(spectral_norm_oracle(&kernel, 1)?)
    } else {
        None
    };
    Ok(ScalingRow {
        n_points: n,
        s: desc.s,
        p: desc.p,
        d: desc.d,
        truncation_index: kernel.truncation_index(),
        norm: best.estimate,
        converged: best.converged,
        trivial_bound: schur.lp_bound(desc.s),
        row_sum: schur.max_row_sum,
        oracle,
    })
}
