//! JSON documents for spaces and kernels.
//!
//! Space document:
//!
//! ```json
//! {"format": "finite-cz/space", "version": 1, "n": 4,
//!  "weights": [1.0, 1.0, 1.0, 1.0], "geometry": "path:4"}
//! ```
//!
//! `geometry` is either `"path:N"` (the distances are regenerated exactly)
//! or `"explicit"`, in which case a `dist` field holds the `N x N` matrix as
//! an array of rows.
//!
//! Kernel document:
//!
//! ```json
//! {"format": "finite-cz/kernel", "version": 1, "tag": "hilbert:64"}
//! ```
//!
//! Closed-form tags are `"hilbert:N"` and `"truncated-hilbert:N:r:R"`. An
//! explicit kernel uses `"tag": "explicit"` with fields `space` (a space
//! document), `r`, `R`, `omega` (`{"kind": "power", "exponent": 1.0}` or
//! `{"kind": "tabulated", "t": [...], "values": [...]}`) and `values`
//! (array of rows). Floats are written in shortest round-trip form.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelTag, Modulus, TruncatedKernel};
use crate::space::{FiniteMetricMeasureSpace, Geometry};

const SPACE_FORMAT: &str = "finite-cz/space";
const KERNEL_FORMAT: &str = "finite-cz/kernel";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SpaceDoc {
    format: String,
    version: u32,
    n: usize,
    weights: Vec<f64>,
    geometry: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct KernelDoc {
    format: String,
    version: u32,
    tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    space: Option<SpaceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    outer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<Modulus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<Vec<f64>>>,
}

fn rows(flat: &[f64], n: usize) -> Vec<Vec<f64>> {
    flat.chunks(n.max(1)).map(<[f64]>::to_vec).collect()
}

fn flatten(rows: Vec<Vec<f64>>, n: usize, what: &str) -> Result<Vec<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("{what} must be a {n} x {n} array of rows")));
    }
    Ok(rows.into_iter().flatten().collect())
}

fn space_doc(space: &FiniteMetricMeasureSpace) -> SpaceDoc {
    let n = space.len();
    let (geometry, dist) = match space.geometry() {
        Geometry::Path => (format!("path:{n}"), None),
        Geometry::Explicit => ("explicit".to_string(), Some(rows(space.distances(), n))),
    };
    SpaceDoc {
        format: SPACE_FORMAT.into(),
        version: VERSION,
        n,
        weights: space.weights().to_vec(),
        geometry,
        dist,
    }
}

fn space_from_doc(doc: SpaceDoc) -> Result<FiniteMetricMeasureSpace> {
    if doc.format != SPACE_FORMAT || doc.version != VERSION {
        return Err(Error::Parse(format!("unsupported space document {} v{}", doc.format, doc.version)));
    }
    if doc.weights.len() != doc.n {
        return Err(Error::Parse(format!("expected {} weights, found {}", doc.n, doc.weights.len())));
    }
    if let Some(rest) = doc.geometry.strip_prefix("path:") {
        let n: usize = rest.parse().map_err(|_| Error::Parse(format!("bad geometry tag {}", doc.geometry)))?;
        if n != doc.n {
            return Err(Error::Parse(format!("geometry tag {} disagrees with n = {}", doc.geometry, doc.n)));
        }
        FiniteMetricMeasureSpace::path_weighted(doc.weights)
    } else if doc.geometry == "explicit" {
        let dist = doc.dist.ok_or_else(|| Error::Parse("explicit geometry needs a dist matrix".into()))?;
        FiniteMetricMeasureSpace::new(flatten(dist, doc.n, "dist")?, doc.weights)
    } else {
        Err(Error::Parse(format!("unknown geometry {}", doc.geometry)))
    }
}

pub fn space_to_string(space: &FiniteMetricMeasureSpace) -> String {
    serde_json::to_string_pretty(&space_doc(space)).expect("space documents serialize")
}

pub fn space_from_str(text: &str) -> Result<FiniteMetricMeasureSpace> {
    let doc: SpaceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    space_from_doc(doc)
}

pub fn kernel_to_string(kernel: &TruncatedKernel) -> String {
    let n = kernel.len();
    let unit_path = kernel.space().is_path() && kernel.space().weights().iter().all(|w| *w == 1.0);
    let closed = |tag: String| KernelDoc {
        format: KERNEL_FORMAT.into(),
        version: VERSION,
        tag,
        space: None,
        r: None,
        outer: None,
        omega: None,
        values: None,
    };
    let doc = match kernel.tag() {
        KernelTag::Hilbert if unit_path => closed(format!("hilbert:{n}")),
        KernelTag::TruncatedHilbert if unit_path => closed(format!(
            "truncated-hilbert:{n}:{}:{}",
            kernel.inner_radius(),
            kernel.outer_radius()
        )),
        _ => KernelDoc {
            format: KERNEL_FORMAT.into(),
            version: VERSION,
            tag: "explicit".into(),
            space: Some(space_doc(kernel.space())),
            r: Some(kernel.inner_radius()),
            outer: Some(kernel.outer_radius()),
            omega: Some(kernel.omega().clone()),
            values: Some(rows(kernel.values(), n)),
        },
    };
    serde_json::to_string_pretty(&doc).expect("kernel documents serialize")
}

pub fn kernel_from_str(text: &str) -> Result<TruncatedKernel> {
    let doc: KernelDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.format != KERNEL_FORMAT || doc.version != VERSION {
        return Err(Error::Parse(format!("unsupported kernel document {} v{}", doc.format, doc.version)));
    }
    let bad_tag = || Error::Parse(format!("bad kernel tag {}", doc.tag));
    if let Some(rest) = doc.tag.strip_prefix("hilbert:") {
        let n = rest.parse().map_err(|_| bad_tag())?;
        return TruncatedKernel::finite_hilbert(n);
    }
    if let Some(rest) = doc.tag.strip_prefix("truncated-hilbert:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad_tag());
        }
        let n = parts[0].parse().map_err(|_| bad_tag())?;
        let r = parts[1].parse().map_err(|_| bad_tag())?;
        let big_r = parts[2].parse().map_err(|_| bad_tag())?;
        return TruncatedKernel::truncated_hilbert(n, r, big_r);
    }
    if doc.tag != "explicit" {
        return Err(bad_tag());
    }
    let missing = |f: &str| Error::Parse(format!("explicit kernel is missing `{f}`"));
    let space = space_from_doc(doc.space.ok_or_else(|| missing("space"))?)?;
    let n = space.len();
    let values = flatten(doc.values.ok_or_else(|| missing("values"))?, n, "values")?;
    TruncatedKernel::new(
        Arc::new(space),
        values,
        doc.r.ok_or_else(|| missing("r"))?,
        doc.outer.ok_or_else(|| missing("R"))?,
        doc.omega.ok_or_else(|| missing("omega"))?,
    )
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_space(space: &FiniteMetricMeasureSpace, path: &Path) -> Result<()> {
    write(path, &space_to_string(space))
}

pub fn load_space(path: &Path) -> Result<FiniteMetricMeasureSpace> {
    space_from_str(&read(path)?)
}

pub fn save_kernel(kernel: &TruncatedKernel, path: &Path) -> Result<()> {
    write(path, &kernel_to_string(kernel))
}

pub fn load_kernel(path: &Path) -> Result<TruncatedKernel> {
    kernel_from_str(&read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_space_uses_tag() {
        let s = FiniteMetricMeasureSpace::path(5).unwrap();
        let text = space_to_string(&s);
        assert!(text.contains("\"path:5\""));
        assert!(!text.contains("dist"));
        assert_eq!(space_from_str(&text).unwrap(), s);
    }

    #[test]
    fn hilbert_kernel_uses_tag() {
        let k = TruncatedKernel::finite_hilbert(16).unwrap();
        let text = kernel_to_string(&k);
        assert!(text.contains("hilbert:16"));
        let back = kernel_from_str(&text).unwrap();
        assert_eq!(back.values(), k.values());
        assert_eq!(back.tag(), KernelTag::Hilbert);
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(space_from_str("{}").is_err());
        assert!(kernel_from_str(r#"{"format":"finite-cz/kernel","version":1,"tag":"hilbert:x"}"#).is_err());
        assert!(kernel_from_str(r#"{"format":"finite-cz/kernel","version":1,"tag":"explicit"}"#).is_err());
    }
}
