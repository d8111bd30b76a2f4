use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{ReportFormat, ScalingReport, VerificationReport};
use crate::error::{Error, Result};

/// Reports that can be written as CSV, JSON lines or plot data.
///
/// Numbers are printed with 12 significant digits and JSON keys are sorted, so equal
/// reports render to equal bytes.
pub trait Render {
    fn render(&self, format: ReportFormat) -> Result<String>;
}

/// Writes `report` to `path` in `format`.
pub fn emit_report<R: Render + ?Sized>(report: &R, format: ReportFormat, path: &Path) -> Result<()> {
    let text = report.render(format)?;
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        "null".into()
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn csv_str(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Default)]
struct JsonLine(BTreeMap<&'static str, String>);

impl JsonLine {
    fn num(mut self, key: &'static str, x: f64) -> Self {
        self.0.insert(key, json_num(x));
        self
    }

    fn opt(mut self, key: &'static str, x: Option<f64>) -> Self {
        self.0.insert(key, x.map_or("null".into(), json_num));
        self
    }

    fn raw(mut self, key: &'static str, value: impl ToString) -> Self {
        self.0.insert(key, value.to_string());
        self
    }

    fn str(mut self, key: &'static str, value: &str) -> Self {
        self.0.insert(key, json_str(value));
        self
    }

    fn finish(self, out: &mut String) {
        let body: Vec<String> = self.0.into_iter().map(|(k, v)| format!("{}:{v}", json_str(k))).collect();
        let _ = writeln!(out, "{{{}}}", body.join(","));
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map_or(String::new(), num)
}

/// Columns: `n_points,s,p,d,truncation_index,norm,converged,trivial_bound,row_sum,oracle`
/// (`oracle` empty when not computed). JSON lines hold one `"kind":"row"` object per row and
/// one `"kind":"fit"` object per norm. Plot data has one block per norm, separated by a blank
/// line, with columns `ln n` and `ln norm`.
impl Render for ScalingReport {
    fn render(&self, format: ReportFormat) -> Result<String> {
        let mut out = String::new();
        match format {
            ReportFormat::Csv => {
                out.push_str("n_points,s,p,d,truncation_index,norm,converged,trivial_bound,row_sum,oracle\n");
                for r in &self.rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.n_points,
                        num(r.s),
                        num(r.p),
                        r.d,
                        num(r.truncation_index),
                        num(r.norm),
                        r.converged,
                        num(r.trivial_bound),
                        num(r.row_sum),
                        opt_num(r.oracle)
                    );
                }
            }
            ReportFormat::Jsonl => {
                for r in &self.rows {
                    JsonLine::default()
                        .str("kind", "row")
                        .raw("n_points", r.n_points)
                        .num("s", r.s)
                        .num("p", r.p)
                        .raw("d", r.d)
                        .num("truncation_index", r.truncation_index)
                        .num("norm", r.norm)
                        .raw("converged", r.converged)
                        .num("trivial_bound", r.trivial_bound)
                        .num("row_sum", r.row_sum)
                        .opt("oracle", r.oracle)
                        .finish(&mut out);
                }
                for f in &self.fits {
                    let excluded: Vec<String> = f.excluded.iter().map(|n| n.to_string()).collect();
                    JsonLine::default()
                        .str("kind", "fit")
                        .num("s", f.spec.s)
                        .num("p", f.spec.p)
                        .raw("d", f.spec.d)
                        .str("growth", &format!("{:?}", f.spec.growth).to_lowercase())
                        .raw("points", f.norm.points)
                        .opt("theta", f.norm.theta)
                        .opt("residual", f.norm.residual)
                        .opt("row_sum_theta", f.row_sum.theta)
                        .opt("row_sum_residual", f.row_sum.residual)
                        .raw("excluded", format!("[{}]", excluded.join(",")))
                        .finish(&mut out);
                }
            }
            ReportFormat::Plot => {
                for (j, f) in self.fits.iter().enumerate() {
                    if j > 0 {
                        out.push('\n');
                    }
                    let theta = f.norm.theta.map_or("undefined".into(), num);
                    let _ = writeln!(out, "# s={} p={} d={} growth={:?} theta={theta}", f.spec.s, f.spec.p, f.spec.d, f.spec.growth);
                    let _ = writeln!(out, "# ln_n ln_norm");
                    for r in self.rows.iter().filter(|r| {
                        r.s == f.spec.s && r.p == f.spec.p && f.spec.descriptor(r.n_points).is_ok_and(|d| d.d == r.d)
                    }) {
                        if r.norm > 0.0 {
                            let _ = writeln!(out, "{} {}", num(r.truncation_index.ln()), num(r.norm.ln()));
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Columns: `suite,name,pass,achieved,relation,tolerance`. There is no plot form.
impl Render for VerificationReport {
    fn render(&self, format: ReportFormat) -> Result<String> {
        let mut out = String::new();
        match format {
            ReportFormat::Csv => {
                out.push_str("suite,name,pass,achieved,relation,tolerance\n");
                for e in &self.entries {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        csv_str(&e.suite),
                        csv_str(&e.name),
                        e.pass,
                        num(e.achieved),
                        e.relation.symbol(),
                        num(e.tolerance)
                    );
                }
            }
            ReportFormat::Jsonl => {
                for e in &self.entries {
                    JsonLine::default()
                        .str("suite", &e.suite)
                        .str("name", &e.name)
                        .raw("pass", e.pass)
                        .num("achieved", e.achieved)
                        .str("relation", e.relation.symbol())
                        .num("tolerance", e.tolerance)
                        .finish(&mut out);
                }
            }
            ReportFormat::Plot => {
                return Err(Error::Config("verification reports have no plot form".into()));
            }
        }
        Ok(out)
    }
}
