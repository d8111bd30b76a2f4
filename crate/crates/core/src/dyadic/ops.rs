//! Conditional expectations `E_i`, differences `D_i = E_{i+1} - E_i`, tails
//! `F_t = f - E_{t+1} f` and the Haar expansion, with `E_i` the identity
//! for `i` beyond the finest generation.

use super::{CubeId, DyadicSystem};
use crate::error::{domain, Result};
use crate::field::VectorField;

impl DyadicSystem {
    fn check_field(&self, f: &VectorField) -> Result<()> {
        crate::error::check_dim(self.space().len(), f.len())
    }

    /// `<f>_Q`, one entry per component.
    pub fn cube_average(&self, id: CubeId, f: &VectorField) -> Vec<f64> {
        let q = self.cube(id);
        let mut acc = vec![0.0; f.dim()];
        for &u in &q.points {
            let w = self.space().weight(u);
            for (a, x) in acc.iter_mut().zip(f.at(u)) {
                *a += w * x;
            }
        }
        acc.iter_mut().for_each(|a| *a /= q.mass);
        acc
    }

    /// `<f>_Q` for every cube, indexed by cube id, in `O(N * depth * dim)`.
    pub fn all_averages(&self, f: &VectorField) -> Vec<Vec<f64>> {
        let dim = f.dim();
        let mut sums = vec![vec![0.0; dim]; self.cubes().len()];
        for k in 0..=self.depth() {
            for u in 0..f.len() {
                let w = self.space().weight(u);
                let s = &mut sums[self.cube_of(k, u)];
                for (a, x) in s.iter_mut().zip(f.at(u)) {
                    *a += w * x;
                }
            }
        }
        for (s, q) in sums.iter_mut().zip(self.cubes()) {
            s.iter_mut().for_each(|a| *a /= q.mass);
        }
        sums
    }

    /// `E_i f`; `level` may be at most `depth + 1`.
    pub fn average_op(&self, level: usize, f: &VectorField) -> Result<VectorField> {
        self.check_field(f)?;
        if level > self.depth() + 1 {
            return Err(domain(format!("level {level} outside 0..={}", self.depth() + 1)));
        }
        if level > self.depth() {
            return Ok(f.clone());
        }
        let mut out = VectorField::zeros(f.len(), f.dim());
        for &id in self.level(level) {
            let avg = self.cube_average(id, f);
            for &u in &self.cube(id).points {
                out.at_mut(u).copy_from_slice(&avg);
            }
        }
        Ok(out)
    }

    /// `D_i f = E_{i+1} f - E_i f`, `0 <= i <= depth`.
    pub fn difference_op(&self, level: usize, f: &VectorField) -> Result<VectorField> {
        self.check_level(level)?;
        self.average_op(level + 1, f)?.sub(&self.average_op(level, f)?)
    }

    /// `F_t f = f - E_{t+1} f`, `0 <= t <= depth`.
    pub fn tail_op(&self, tau: usize, f: &VectorField) -> Result<VectorField> {
        self.check_level(tau)?;
        f.sub(&self.average_op(tau + 1, f)?)
    }

    /// `D_Q f = sum_children 1_P <f>_P - 1_Q <f>_Q`.
    pub fn cube_difference(&self, id: CubeId, f: &VectorField) -> VectorField {
        let q = self.cube(id);
        let mut out = VectorField::zeros(f.len(), f.dim());
        let parent = self.cube_average(id, f);
        for &c in &q.children {
            let avg = self.cube_average(c, f);
            for &u in &self.cube(c).points {
                for ((o, a), p) in out.at_mut(u).iter_mut().zip(&avg).zip(&parent) {
                    *o = a - p;
                }
            }
        }
        out
    }

    /// The Haar function `h_Q^alpha` (`alpha >= 1`) as a scalar function on the space.
    pub fn haar_function(&self, id: CubeId, alpha: usize) -> Vec<f64> {
        let q = self.cube(id);
        let v = &self.haar(id).vectors[alpha - 1];
        let mut out = vec![0.0; self.space().len()];
        for (j, &c) in q.children.iter().enumerate() {
            for &u in &self.cube(c).points {
                out[u] = v[j];
            }
        }
        out
    }

    /// `<f, h_Q^alpha>` for `alpha = 1..children`, one vector per `alpha`.
    pub fn haar_coefficients(&self, id: CubeId, f: &VectorField) -> Vec<Vec<f64>> {
        let q = self.cube(id);
        let integrals: Vec<Vec<f64>> = q
            .children
            .iter()
            .map(|&c| {
                let m = self.cube(c).mass;
                self.cube_average(c, f).into_iter().map(|a| a * m).collect()
            })
            .collect();
        self.haar(id)
            .vectors
            .iter()
            .map(|v| {
                let mut acc = vec![0.0; f.dim()];
                for (h, int) in v.iter().zip(&integrals) {
                    for (a, x) in acc.iter_mut().zip(int) {
                        *a += h * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// `sum_alpha <f, h_Q^alpha> h_Q^alpha`, which equals `D_Q f`.
    pub fn haar_projection(&self, id: CubeId, f: &VectorField) -> VectorField {
        let mut out = VectorField::zeros(f.len(), f.dim());
        for (alpha, c) in self.haar_coefficients(id, f).iter().enumerate() {
            let h = self.haar_function(id, alpha + 1);
            for &u in &self.cube(id).points {
                for (o, x) in out.at_mut(u).iter_mut().zip(c) {
                    *o += h[u] * x;
                }
            }
        }
        out
    }
}
