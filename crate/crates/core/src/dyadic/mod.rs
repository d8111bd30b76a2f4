//! Random dyadic systems on finite metric measure spaces.
//!
//! A [`DyadicSystem`] is a finite stack of nested partitions, generation `0`
//! being the whole space and generation `L` the singletons, with side lengths
//! `l(Q) = delta^k * scale` at generation `k`. Two constructions are
//! provided: exact shifted binary grids on path spaces ([`shifted`]) and
//! randomized greedy nets on arbitrary spaces ([`net`]).

mod dump;
mod haar;
pub mod net;
mod ops;
pub mod probability;
pub mod shifted;

use std::sync::Arc;

pub use dump::dump;
pub use haar::HaarBasis;
pub use net::build_net_grid;
pub use probability::{GridFamily, Wilson};
pub use shifted::build_shifted_integer_grid;

use crate::error::{domain, Result};
use crate::space::FiniteMetricMeasureSpace;

/// Index of a cube inside its [`DyadicSystem`].
pub type CubeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub enum GridKind {
    /// Shifted binary grid; bit `j` of `shift_bits` shifts every generation with side above `2^j`.
    ShiftedInteger { shift_bits: u64 },
    Net { seed: u64 },
}

#[derive(Clone, Debug)]
pub struct Cube {
    pub level: usize,
    /// Member points, sorted.
    pub points: Vec<usize>,
    pub parent: Option<CubeId>,
    /// Children, ordered by their smallest member.
    pub children: Vec<CubeId>,
    /// Centre `z_Q`.
    pub center: usize,
    /// Reference point `x_Q`.
    pub reference: usize,
    pub side: f64,
    pub mass: f64,
    /// Position of the cube in its generation's integer grid (shifted grids only).
    pub grid_index: Option<i64>,
}

impl Cube {
    pub fn child_count(&self) -> usize {
        self.children.len()
    }
}

/// Achieved containment constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Containment {
    /// Smallest `C` with `Q` inside the closed ball `B(z_Q, C l(Q))` for all cubes.
    pub outer: f64,
    /// Largest `c` with the open ball `B(z_Q, c l(Q))` inside `Q` for all cubes.
    pub inner: f64,
    /// `max d(z_Q, x_Q) / l(Q)`.
    pub proximity: f64,
}

#[derive(Clone, Debug)]
pub struct DyadicSystem {
    space: Arc<FiniteMetricMeasureSpace>,
    delta: f64,
    scale: f64,
    kind: GridKind,
    cubes: Vec<Cube>,
    levels: Vec<Vec<CubeId>>,
    /// `membership[k][u]` is the generation-`k` cube containing `u`.
    membership: Vec<Vec<CubeId>>,
    position: Vec<usize>,
    haar: Vec<HaarBasis>,
}

/// Per-cube geometry supplied by a construction.
pub(crate) struct CubeMeta {
    pub center: usize,
    pub reference: usize,
    pub grid_index: Option<i64>,
}

impl DyadicSystem {
    /// Assembles a system from per-generation labels (`labels[k][u]`).
    ///
    /// `meta(k, members, label)` provides the centre, reference point and
    /// grid index of each cube. Cubes inside a generation are ordered by
    /// smallest member.
    pub(crate) fn from_labels(
        space: Arc<FiniteMetricMeasureSpace>,
        delta: f64,
        scale: f64,
        kind: GridKind,
        labels: &[Vec<i64>],
        mut meta: impl FnMut(usize, &[usize], i64) -> CubeMeta,
    ) -> Result<Self> {
        let n = space.len();
        let mut cubes: Vec<Cube> = Vec::new();
        let mut levels = Vec::with_capacity(labels.len());
        let mut membership = Vec::with_capacity(labels.len());
        for (k, lab) in labels.iter().enumerate() {
            if lab.len() != n {
                return Err(domain("every generation must label every point"));
            }
            let mut groups: std::collections::BTreeMap<i64, Vec<usize>> = Default::default();
            for (u, l) in lab.iter().enumerate() {
                groups.entry(*l).or_default().push(u);
            }
            let mut sets: Vec<(i64, Vec<usize>)> = groups.into_iter().collect();
            sets.sort_by_key(|(_, pts)| pts[0]);
            let mut ids = Vec::with_capacity(sets.len());
            let mut member = vec![0; n];
            for (label, pts) in sets {
                let id = cubes.len();
                for &u in &pts {
                    member[u] = id;
                }
                let parent = if k == 0 {
                    None
                } else {
                    let prev: &Vec<CubeId> = &membership[k - 1];
                    let p = prev[pts[0]];
                    if pts.iter().any(|&u| prev[u] != p) {
                        return Err(domain(format!("generation {k} is not nested in generation {}", k - 1)));
                    }
                    Some(p)
                };
                let m = meta(k, &pts, label);
                cubes.push(Cube {
                    level: k,
                    mass: space.mass(&pts),
                    side: delta.powi(k as i32) * scale,
                    points: pts,
                    parent,
                    children: Vec::new(),
                    center: m.center,
                    reference: m.reference,
                    grid_index: m.grid_index,
                });
                ids.push(id);
            }
            if k == 0 && ids.len() != 1 {
                return Err(domain("generation 0 must be the whole space"));
            }
            levels.push(ids);
            membership.push(member);
        }
        if let Some(last) = levels.last() {
            if last.len() != n {
                return Err(domain("the finest generation must consist of singletons"));
            }
        }
        for id in 0..cubes.len() {
            if let Some(p) = cubes[id].parent {
                cubes[p].children.push(id);
            }
        }
        let haar = cubes.iter().map(|q| HaarBasis::new(q, &cubes)).collect();
        let mut position = vec![0; cubes.len()];
        for ids in &levels {
            for (i, &id) in ids.iter().enumerate() {
                position[id] = i;
            }
        }
        Ok(Self {
            space,
            delta,
            scale,
            kind,
            cubes,
            levels,
            membership,
            position,
            haar,
        })
    }

    pub fn space(&self) -> &Arc<FiniteMetricMeasureSpace> {
        &self.space
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn kind(&self) -> &GridKind {
        &self.kind
    }

    /// Index `L` of the finest (singleton) generation.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// `delta^k * scale`.
    pub fn side(&self, level: usize) -> f64 {
        self.delta.powi(level as i32) * self.scale
    }

    pub fn cube(&self, id: CubeId) -> &Cube {
        &self.cubes[id]
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn level(&self, k: usize) -> &[CubeId] {
        &self.levels[k]
    }

    pub fn cube_of(&self, level: usize, u: usize) -> CubeId {
        self.membership[level][u]
    }

    /// Index of `id` inside its generation.
    pub fn position(&self, id: CubeId) -> usize {
        self.position[id]
    }

    pub fn haar(&self, id: CubeId) -> &HaarBasis {
        &self.haar[id]
    }

    /// Largest child count `M`.
    pub fn max_children(&self) -> usize {
        self.cubes.iter().map(Cube::child_count).max().unwrap_or(0)
    }

    /// Ancestor of `id` at generation `level` (`level <= level(id)`).
    pub fn ancestor(&self, id: CubeId, level: usize) -> CubeId {
        let q = &self.cubes[id];
        assert!(level <= q.level, "ancestor level below the cube");
        self.membership[level][q.points[0]]
    }

    /// Descendants of `id` at generation `level(id) + depth`.
    pub fn descendants(&self, id: CubeId, depth: usize) -> Vec<CubeId> {
        let q = &self.cubes[id];
        let level = q.level + depth;
        if level > self.depth() {
            return Vec::new();
        }
        let mut out: Vec<CubeId> = q.points.iter().map(|&u| self.membership[level][u]).collect();
        out.dedup();
        out.sort_by_key(|&c| self.cubes[c].points[0]);
        out.dedup();
        out
    }

    pub(crate) fn check_level(&self, level: usize) -> Result<()> {
        if level <= self.depth() {
            Ok(())
        } else {
            Err(domain(format!("level {level} outside 0..={}", self.depth())))
        }
    }

    /// Partition and nesting check over every generation.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.space.len();
        for (k, ids) in self.levels.iter().enumerate() {
            let mut seen = vec![false; n];
            for &id in ids {
                for &u in &self.cubes[id].points {
                    if seen[u] {
                        return Err(domain(format!("point {u} lies in two cubes of generation {k}")));
                    }
                    seen[u] = true;
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(domain(format!("generation {k} does not cover the space")));
            }
        }
        for (id, q) in self.cubes.iter().enumerate() {
            let mut union: Vec<usize> = q
                .children
                .iter()
                .flat_map(|&c| self.cubes[c].points.iter().copied())
                .collect();
            union.sort_unstable();
            if q.level < self.depth() && union != q.points {
                return Err(domain(format!("children of cube {id} do not partition it")));
            }
            if let Some(p) = q.parent {
                let parent = &self.cubes[p];
                if q.points.iter().any(|u| parent.points.binary_search(u).is_err()) {
                    return Err(domain(format!("cube {id} is not inside its parent")));
                }
            }
        }
        Ok(())
    }

    pub fn containment(&self) -> Containment {
        let space = &*self.space;
        let mut outer: f64 = 0.0;
        let mut inner = f64::INFINITY;
        let mut proximity: f64 = 0.0;
        let mut inside = vec![false; space.len()];
        for q in &self.cubes {
            let z = q.center;
            let radius = q.points.iter().map(|&u| space.dist(z, u)).fold(0.0, f64::max);
            outer = outer.max(radius / q.side);
            for &u in &q.points {
                inside[u] = true;
            }
            let gap = (0..space.len())
                .filter(|&v| !inside[v])
                .map(|v| space.dist(z, v))
                .fold(f64::INFINITY, f64::min);
            for &u in &q.points {
                inside[u] = false;
            }
            inner = inner.min(gap / q.side);
            proximity = proximity.max(space.dist(z, q.reference) / q.side);
        }
        Containment { outer, inner, proximity }
    }

    /// `d(u, E \ Q)` for the generation-`level` cube `Q` containing `u`; infinite if `Q = E`.
    pub fn distance_to_complement(&self, level: usize, u: usize) -> f64 {
        let q = self.cube_of(level, u);
        let members = &self.membership[level];
        (0..self.space.len())
            .filter(|&v| members[v] != q)
            .map(|v| self.space.dist(u, v))
            .fold(f64::INFINITY, f64::min)
    }
}
