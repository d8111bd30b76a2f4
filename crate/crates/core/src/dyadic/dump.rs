//! Plain-text dump of a dyadic system, stable across runs.
//!
//! ```text
//! dyadic delta=0.5 scale=4 depth=2
//! level 0
//!   cube 0 parent - points 0 1 2 3
//! level 1
//!   cube 0 parent 0 points 0 1
//! ```
//!
//! Cube and parent indices are positions inside their generation.

use std::fmt::Write;

use super::DyadicSystem;

pub fn dump(sys: &DyadicSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dyadic delta={} scale={} depth={}", sys.delta(), sys.scale(), sys.depth());
    for k in 0..=sys.depth() {
        let _ = writeln!(out, "level {k}");
        for (i, &id) in sys.level(k).iter().enumerate() {
            let q = sys.cube(id);
            let parent = q.parent.map_or("-".to_string(), |p| sys.position(p).to_string());
            let pts: Vec<String> = q.points.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "  cube {i} parent {parent} points {}", pts.join(" "));
        }
    }
    out
}
