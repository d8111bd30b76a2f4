use serde::Serialize;

use super::Record;
use crate::dyadic::DyadicSystem;
use crate::error::{check_dim, domain, Result};
use crate::field::VectorField;
use crate::kernel::TruncatedKernel;

/// Every term of the telescoping expansion of `<Tf, g>` between generations `sigma` and `tau`,
/// with `F_t = I - E_{t+1}`:
///
/// `<Tf, g> = coarse + tail + sum_i (diagonal_i + mixed_f_i + mixed_g_i)
///            - sum_j coarse_correction_j + sum_i tail_correction_i`
///
/// where `coarse = <T E_s f, g>`, `tail = <T F_t f, g>`, `diagonal_i = <T D_i f, D_i g>`,
/// `mixed_f_i = <T E_i f, D_i g>`, `mixed_g_i = <T D_i f, E_i g>`,
/// `coarse_correction_j = <T E_s f, D_j g>` and `tail_correction_i = <T D_i f, F_t g>`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermLedger {
    pub sigma: usize,
    pub tau: usize,
    pub whole: f64,
    pub coarse: f64,
    pub tail: f64,
    pub diagonal: Vec<f64>,
    pub mixed_f: Vec<f64>,
    pub mixed_g: Vec<f64>,
    pub coarse_correction: Vec<f64>,
    pub tail_correction: Vec<f64>,
}

impl TermLedger {
    fn terms(&self) -> impl Iterator<Item = f64> + '_ {
        [self.coarse, self.tail]
            .into_iter()
            .chain(self.diagonal.iter().copied())
            .chain(self.mixed_f.iter().copied())
            .chain(self.mixed_g.iter().copied())
            .chain(self.coarse_correction.iter().copied())
            .chain(self.tail_correction.iter().copied())
    }

    pub fn reconstruct(&self) -> f64 {
        let sum = |v: &[f64]| v.iter().sum::<f64>();
        self.coarse + self.tail + sum(&self.diagonal) + sum(&self.mixed_f) + sum(&self.mixed_g)
            - sum(&self.coarse_correction)
            + sum(&self.tail_correction)
    }

    /// `|whole - reconstruct| / max(|whole|, sum |term|)`, zero when everything vanishes.
    pub fn relative_residual(&self) -> f64 {
        let scale = self.terms().map(f64::abs).sum::<f64>().max(self.whole.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.whole - self.reconstruct()).abs() / scale
        }
    }

    pub fn records(&self) -> Vec<Record> {
        let mut out = vec![
            Record::value("whole", self.whole),
            Record::value("coarse", self.coarse),
            Record::value("tail", self.tail),
        ];
        let named = [
            ("diagonal", &self.diagonal),
            ("mixed_f", &self.mixed_f),
            ("mixed_g", &self.mixed_g),
            ("coarse_correction", &self.coarse_correction),
            ("tail_correction", &self.tail_correction),
        ];
        for (name, values) in named {
            for (k, v) in values.iter().enumerate() {
                out.push(Record::value(format!("{name}[{}]", self.sigma + k), *v));
            }
        }
        out.push(Record::value("relative_residual", self.relative_residual()));
        out
    }
}

/// Evaluates every ledger term by direct summation.
pub fn expand_pairing(
    kernel: &TruncatedKernel,
    sys: &DyadicSystem,
    f: &VectorField,
    g: &VectorField,
    sigma: usize,
    tau: usize,
) -> Result<TermLedger> {
    let n = kernel.len();
    check_dim(n, f.len())?;
    check_dim(n, g.len())?;
    check_dim(f.dim(), g.dim())?;
    check_dim(n, sys.space().len())?;
    if sigma > tau || tau > sys.depth() {
        return Err(domain(format!("need sigma <= tau <= {}, got {sigma}, {tau}", sys.depth())));
    }
    let w = kernel.space().weights();
    let pair = |a: &VectorField, b: &VectorField| a.pairing(b, w);
    let e_sigma_f = sys.average_op(sigma, f)?;
    let t_e_sigma_f = kernel.apply(&e_sigma_f)?;
    let f_tau_g = sys.tail_op(tau, g)?;
    let mut ledger = TermLedger {
        sigma,
        tau,
        whole: pair(&kernel.apply(f)?, g)?,
        coarse: pair(&t_e_sigma_f, g)?,
        tail: pair(&kernel.apply(&sys.tail_op(tau, f)?)?, g)?,
        diagonal: Vec::new(),
        mixed_f: Vec::new(),
        mixed_g: Vec::new(),
        coarse_correction: Vec::new(),
        tail_correction: Vec::new(),
    };
    for i in sigma..=tau {
        let t_d_f = kernel.apply(&sys.difference_op(i, f)?)?;
        let t_e_f = kernel.apply(&sys.average_op(i, f)?)?;
        let d_g = sys.difference_op(i, g)?;
        let e_g = sys.average_op(i, g)?;
        ledger.diagonal.push(pair(&t_d_f, &d_g)?);
        ledger.mixed_f.push(pair(&t_e_f, &d_g)?);
        ledger.mixed_g.push(pair(&t_d_f, &e_g)?);
        ledger.coarse_correction.push(pair(&t_e_sigma_f, &d_g)?);
        ledger.tail_correction.push(pair(&t_d_f, &f_tau_g)?);
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::dyadic::build_shifted_integer_grid;

    #[test]
    fn identity_on_random_fields() {
        let k = TruncatedKernel::finite_hilbert(32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for bits in [0u64, 5, 19] {
            let sys = build_shifted_integer_grid(Arc::clone(k.space()), bits, 5).unwrap();
            let f = VectorField::gaussian(32, 3, &mut rng);
            let g = VectorField::gaussian(32, 3, &mut rng);
            for (s, t) in [(0, 5), (1, 3), (2, 2)] {
                let ledger = expand_pairing(&k, &sys, &f, &g, s, t).unwrap();
                assert!(ledger.relative_residual() < 1e-12, "{}", ledger.relative_residual());
            }
        }
    }

    #[test]
    fn full_range_has_no_tail() {
        let k = TruncatedKernel::finite_hilbert(16).unwrap();
        let sys = build_shifted_integer_grid(Arc::clone(k.space()), 2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = VectorField::gaussian(16, 1, &mut rng);
        let g = VectorField::gaussian(16, 1, &mut rng);
        let ledger = expand_pairing(&k, &sys, &f, &g, 0, 4).unwrap();
        assert_eq!(ledger.tail, 0.0);
        let mean = f.values().iter().sum::<f64>() / 16.0;
        let coarse = k.apply(&VectorField::from_scalar(vec![mean; 16])).unwrap().pairing(&g, k.space().weights()).unwrap();
        assert!((ledger.coarse - coarse).abs() < 1e-12);
        let zero = VectorField::zeros(16, 1);
        let z = expand_pairing(&k, &sys, &zero, &g, 0, 4).unwrap();
        assert!(z.records().iter().all(|r| r.value == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        let k = TruncatedKernel::finite_hilbert(8).unwrap();
        let sys = build_shifted_integer_grid(Arc::clone(k.space()), 0, 3).unwrap();
        let f = VectorField::zeros(8, 2);
        let g = VectorField::zeros(8, 1);
        assert!(expand_pairing(&k, &sys, &f, &g, 0, 3).is_err());
        assert!(expand_pairing(&k, &sys, &f, &f, 2, 1).is_err());
        assert!(expand_pairing(&k, &sys, &f, &f, 0, 4).is_err());
    }
}
