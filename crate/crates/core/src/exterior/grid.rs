//! Rational breakpoint grids for piecewise coefficients.

use std::collections::BTreeMap;

use crate::scalar::{frac, Q};

use super::space::CoordinateSpace;

/// Interior breakpoints per piecewise coordinate. Cells are the products of
/// the resulting intervals, enumerated row-major in increasing variable order.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Grid {
    pub breaks: BTreeMap<usize, Vec<Q>>,
}

impl Grid {
    pub fn trivial() -> Self {
        Grid::default()
    }

    pub fn single(var: usize, mut breaks: Vec<Q>) -> Self {
        breaks.sort();
        breaks.dedup();
        let mut g = Grid::default();
        if !breaks.is_empty() {
            g.breaks.insert(var, breaks);
        }
        g
    }

    pub fn is_trivial(&self) -> bool {
        self.breaks.is_empty()
    }

    pub fn ncells(&self) -> usize {
        self.breaks.values().map(|b| b.len() + 1).product()
    }

    pub fn union(&self, other: &Grid) -> Grid {
        let mut out = self.clone();
        for (v, bs) in &other.breaks {
            let e = out.breaks.entry(*v).or_default();
            e.extend(bs.iter().cloned());
            e.sort();
            e.dedup();
        }
        out
    }

    /// Interval indices of cell `idx`, one per grid variable (in key order).
    pub fn cell_index(&self, mut idx: usize) -> Vec<usize> {
        let sizes: Vec<usize> = self.breaks.values().map(|b| b.len() + 1).collect();
        let mut out = vec![0; sizes.len()];
        for k in (0..sizes.len()).rev() {
            out[k] = idx % sizes[k];
            idx /= sizes[k];
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for (k, b) in self.breaks.values().enumerate() {
            idx = idx * (b.len() + 1) + multi[k];
        }
        idx
    }

    /// `(var, lo, hi)` for each grid variable of cell `idx`.
    pub fn cell_bounds(&self, space: &CoordinateSpace, idx: usize) -> Vec<(usize, Q, Q)> {
        let multi = self.cell_index(idx);
        self.breaks
            .iter()
            .zip(multi)
            .map(|((v, bs), k)| {
                let (lo, hi) = space.coords[*v].domain();
                let a = if k == 0 { lo } else { bs[k - 1].clone() };
                let b = if k == bs.len() { hi } else { bs[k].clone() };
                (*v, a, b)
            })
            .collect()
    }

    /// Interval `(lo, hi)` of variable `v` within cell `idx` (full domain if `v` is smooth).
    pub fn var_bounds(&self, space: &CoordinateSpace, idx: usize, v: usize) -> (Q, Q) {
        self.cell_bounds(space, idx)
            .into_iter()
            .find(|(w, _, _)| *w == v)
            .map(|(_, a, b)| (a, b))
            .unwrap_or_else(|| space.coords[v].domain())
    }

    /// Index of the interval of `bs` containing `x` (ties go to the right).
    pub fn interval_of(bs: &[Q], x: &Q) -> usize {
        bs.iter().take_while(|b| *b <= x).count()
    }

    pub fn interval_of_f64(bs: &[Q], x: f64) -> usize {
        bs.iter().take_while(|b| crate::scalar::to_f64(b) <= x).count()
    }

    /// For each cell of `fine` (which must refine `self`), the containing cell of `self`.
    pub fn coarse_map(&self, space: &CoordinateSpace, fine: &Grid) -> Vec<usize> {
        (0..fine.ncells())
            .map(|idx| {
                let bounds = fine.cell_bounds(space, idx);
                let multi: Vec<usize> = self
                    .breaks
                    .iter()
                    .map(|(v, bs)| {
                        let (_, a, b) = bounds.iter().find(|(w, _, _)| w == v).expect("fine grid refines coarse");
                        let mid = (a + b) * frac(1, 2);
                        Grid::interval_of(bs, &mid)
                    })
                    .collect();
                self.flat_index(&multi)
            })
            .collect()
    }

    /// The cell containing a floating point location.
    pub fn locate_f64(&self, point: &[f64]) -> usize {
        let multi: Vec<usize> = self.breaks.iter().map(|(v, bs)| Grid::interval_of_f64(bs, point[*v])).collect();
        self.flat_index(&multi)
    }

    /// Drop variable `v` from the grid.
    pub fn without(&self, v: usize) -> Grid {
        let mut g = self.clone();
        g.breaks.remove(&v);
        g
    }

    /// Re-key variables through `map` (variables mapped to `None` must not be gridded).
    pub fn reindex(&self, map: &[Option<usize>]) -> Grid {
        let mut g = Grid::default();
        for (v, bs) in &self.breaks {
            if let Some(w) = map[*v] {
                g.breaks.insert(w, bs.clone());
            }
        }
        g
    }

    pub fn midpoint(space: &CoordinateSpace, bounds: &[(usize, Q, Q)]) -> Vec<Q> {
        let mut pt: Vec<Q> = space.coords.iter().map(|c| {
            let (a, b) = c.domain();
            (a + b) * frac(1, 2)
        }).collect();
        for (v, a, b) in bounds {
            pt[*v] = (a + b) * frac(1, 2);
        }
        pt
    }
}
