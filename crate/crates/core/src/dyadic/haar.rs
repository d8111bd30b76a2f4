use super::Cube;

/// Haar functions of one cube, constant on its children.
///
/// `vectors[a][j]` is the value of `h^{a+1}` on the `j`-th child; `h^0` is
/// `mass^{-1/2}` on the whole cube. Together they are orthonormal in
/// `L^2(mu|_Q)`. Built by weighted Gram-Schmidt on the child indicators.
#[derive(Clone, Debug)]
pub struct HaarBasis {
    pub h0: f64,
    pub vectors: Vec<Vec<f64>>,
}

impl HaarBasis {
    pub(crate) fn new(q: &Cube, cubes: &[Cube]) -> Self {
        let masses: Vec<f64> = q.children.iter().map(|&c| cubes[c].mass).collect();
        let m = masses.len();
        let h0 = q.mass.powf(-0.5);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&masses).map(|((x, y), w)| x * y * w).sum::<f64>();
        let mut basis: Vec<Vec<f64>> = vec![vec![h0; m]];
        for j in 0..m.saturating_sub(1) {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            for b in &basis {
                let c = dot(&e, b);
                for (x, y) in e.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
            let norm = dot(&e, &e).sqrt();
            for x in &mut e {
                *x /= norm;
            }
            basis.push(e);
        }
        let vectors = if m == 0 { Vec::new() } else { basis.split_off(1) };
        Self { h0, vectors }
    }

    /// Number of non-constant Haar functions, `children - 1`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}
