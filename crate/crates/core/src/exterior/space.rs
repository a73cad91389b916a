use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{q, Q};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoordKind {
    /// Circle coordinate with period 1.
    Periodic,
    /// Interval `[lo, hi]`.
    Affine { lo: Q, hi: Q },
    /// Free barycentric coordinate `t_i`, `i ≥ 1`; `t_0 = 1 − Σ t_i`.
    Barycentric,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Coord {
    pub name: String,
    pub kind: CoordKind,
}

impl Coord {
    pub fn periodic(name: &str) -> Self {
        Coord { name: name.into(), kind: CoordKind::Periodic }
    }

    pub fn affine(name: &str, lo: Q, hi: Q) -> Self {
        Coord { name: name.into(), kind: CoordKind::Affine { lo, hi } }
    }

    pub fn barycentric(i: usize) -> Self {
        Coord { name: format!("t{i}"), kind: CoordKind::Barycentric }
    }

    pub fn domain(&self) -> (Q, Q) {
        match &self.kind {
            CoordKind::Periodic | CoordKind::Barycentric => (q(0), q(1)),
            CoordKind::Affine { lo, hi } => (lo.clone(), hi.clone()),
        }
    }
}

/// An ordered list of named coordinates. Forms on different spaces never mix.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CoordinateSpace {
    pub name: String,
    pub coords: Vec<Coord>,
}

pub type Space = Arc<CoordinateSpace>;

impl CoordinateSpace {
    pub fn new(name: &str, coords: Vec<Coord>) -> Result<Space> {
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].iter().any(|d| d.name == c.name) {
                return Err(Error::Precondition(format!("duplicate coordinate `{}` in space `{name}`", c.name)));
            }
        }
        if coords.len() > 63 {
            return Err(Error::Precondition("at most 63 coordinates per space".into()));
        }
        Ok(Arc::new(CoordinateSpace { name: name.into(), coords }))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.coords
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownCoordinate(name.into()))
    }

    pub fn has(&self, name: &str) -> bool {
        self.coords.iter().any(|c| c.name == name)
    }

    /// Concatenation; coordinate names must be disjoint.
    pub fn product(a: &CoordinateSpace, b: &CoordinateSpace) -> Result<Space> {
        let mut coords = a.coords.clone();
        coords.extend(b.coords.iter().cloned());
        CoordinateSpace::new(&format!("{}×{}", a.name, b.name), coords)
    }

    /// `Δ^p × M` with free barycentric coordinates `t1..tp` first.
    pub fn simplex_product(p: usize, m: &CoordinateSpace) -> Space {
        let mut coords: Vec<Coord> = (1..=p).map(Coord::barycentric).collect();
        coords.extend(m.coords.iter().cloned());
        Arc::new(CoordinateSpace { name: format!("Δ{p}×{}", m.name), coords })
    }

    /// Indices of the barycentric coordinates.
    pub fn barycentric_vars(&self) -> Vec<usize> {
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == CoordKind::Barycentric)
            .map(|(i, _)| i)
            .collect()
    }

    /// The space with the given coordinates removed.
    pub fn without(&self, vars: &[usize]) -> Space {
        let coords = self
            .coords
            .iter()
            .enumerate()
            .filter(|(i, _)| !vars.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        Arc::new(CoordinateSpace { name: format!("{}∖{}", self.name, vars.len()), coords })
    }

    /// The manifold part of `Δ^p × M`.
    pub fn manifold_part(&self) -> Space {
        self.without(&self.barycentric_vars())
    }

    pub fn same_coords(&self, other: &CoordinateSpace) -> bool {
        self.coords == other.coords
    }
}

impl fmt::Display for CoordinateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.names().join(","))
    }
}
