use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Modulus of continuity `omega: [0, 1] -> [0, inf)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulus {
    /// `omega(t) = t^exponent`.
    Power { exponent: f64 },
    /// Piecewise-linear interpolation through `(t_i, value_i)`, with `t_0 = 0`.
    Tabulated { t: Vec<f64>, values: Vec<f64> },
}

impl Modulus {
    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(domain(format!("power-law exponent must be positive, got {exponent}")));
        }
        Ok(Self::Power { exponent })
    }

    pub fn lipschitz() -> Self {
        Self::Power { exponent: 1.0 }
    }

    pub fn tabulated(t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if t.len() != values.len() || t.len() < 2 {
            return Err(domain("tabulated modulus needs at least two (t, value) nodes"));
        }
        if t[0] != 0.0 || *t.last().unwrap() < 1.0 {
            return Err(domain("tabulated modulus must cover [0, 1]"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("tabulated nodes must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || values.windows(2).any(|w| w[1] < w[0]) {
            return Err(domain("tabulated values must be nonnegative and nondecreasing"));
        }
        Ok(Self::Tabulated { t, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Power { exponent } => {
                if x <= 0.0 {
                    0.0
                } else {
                    x.powf(*exponent)
                }
            }
            Self::Tabulated { t, values } => {
                if x <= 0.0 {
                    return values[0];
                }
                let k = t.partition_point(|s| *s <= x);
                if k >= t.len() {
                    return *values.last().unwrap();
                }
                let (t0, t1) = (t[k - 1], t[k]);
                let (v0, v1) = (values[k - 1], values[k]);
                v0 + (v1 - v0) * (x - t0) / (t1 - t0)
            }
        }
    }

    /// `sup omega(2t) / omega(t)` over a geometric grid of `t` in `(0, 1/2]`.
    pub fn doubling_constant(&self) -> f64 {
        if let Self::Power { exponent } = self {
            return 2f64.powf(*exponent);
        }
        let mut best: f64 = 1.0;
        for k in 0..=480 {
            let t = 0.5 * 2f64.powf(-(k as f64) / 8.0);
            let (a, b) = (self.eval(t), self.eval(2.0 * t));
            if a > 0.0 {
                best = best.max(b / a);
            } else if b > 0.0 {
                return f64::INFINITY;
            }
        }
        best
    }

    /// Short descriptor such as `power:0.5` or `tabulated`.
    pub fn descriptor(&self) -> String {
        match self {
            Self::Power { exponent } => format!("power:{exponent}"),
            Self::Tabulated { .. } => "tabulated".to_string(),
        }
    }
}
