//! Homogeneous differential forms with exact piecewise trig-polynomial coefficients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{q, Q};

use super::grid::Grid;
use super::poly::Poly;
use super::space::{CoordKind, CoordinateSpace, Space};

/// Sorted wedge monomial: bit `i` is `dx_i` of the owning space.
pub type Wedge = u64;

/// The smooth form on one grid cell.
pub type CellForm = BTreeMap<Wedge, Poly>;

#[derive(Clone, Debug)]
pub struct ExteriorForm {
    space: Space,
    degree: usize,
    grid: Grid,
    cells: Vec<CellForm>,
}

/// `true` when `dx_a ∧ dx_b` (each sorted) needs an odd number of swaps to sort.
pub fn merge_sign(a: Wedge, b: Wedge) -> bool {
    let mut swaps = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    swaps % 2 == 1
}

/// Sign of moving the differentials in `sel` (a subset of `m`) to the front.
pub fn extract_sign(m: Wedge, sel: Wedge) -> bool {
    let rest = m & !sel;
    let mut swaps = 0u32;
    let mut s = sel;
    while s != 0 {
        let i = s.trailing_zeros();
        swaps += (rest & ((1u64 << i) - 1)).count_ones();
        s &= s - 1;
    }
    swaps % 2 == 1
}

/// Map a wedge through a variable renaming; returns the sorted image and its sign.
pub fn remap_wedge(m: Wedge, map: &[Option<usize>]) -> Option<(Wedge, bool)> {
    let mut images = Vec::new();
    let mut mm = m;
    while mm != 0 {
        let i = mm.trailing_zeros() as usize;
        images.push(map[i]?);
        mm &= mm - 1;
    }
    let mut inversions = 0;
    for a in 0..images.len() {
        for b in a + 1..images.len() {
            if images[a] > images[b] {
                inversions += 1;
            }
        }
    }
    let out = images.iter().fold(0u64, |acc, w| acc | (1u64 << w));
    Some((out, inversions % 2 == 1))
}

fn cell_add(acc: &mut CellForm, m: Wedge, p: Poly) {
    if p.is_zero() {
        return;
    }
    match acc.get_mut(&m) {
        Some(existing) => {
            existing.add_assign(&p);
            if existing.is_zero() {
                acc.remove(&m);
            }
        }
        None => {
            acc.insert(m, p);
        }
    }
}

pub(crate) fn cell_wedge(a: &CellForm, b: &CellForm) -> CellForm {
    let mut out = CellForm::new();
    for (ma, pa) in a {
        for (mb, pb) in b {
            if ma & mb != 0 {
                continue;
            }
            let prod = pa.mul(pb);
            let prod = if merge_sign(*ma, *mb) { prod.neg() } else { prod };
            cell_add(&mut out, ma | mb, prod);
        }
    }
    out
}

pub(crate) fn cell_d(cell: &CellForm, nvars: usize) -> CellForm {
    let mut out = CellForm::new();
    for (m, p) in cell {
        for v in 0..nvars {
            if m & (1 << v) != 0 || !p.depends_on(v) {
                continue;
            }
            let dp = p.derivative(v);
            let negative = (m & ((1u64 << v) - 1)).count_ones() % 2 == 1;
            cell_add(&mut out, m | (1 << v), if negative { dp.neg() } else { dp });
        }
    }
    out
}

impl ExteriorForm {
    pub fn zero(space: &Space, degree: usize) -> Self {
        ExteriorForm { space: space.clone(), degree, grid: Grid::trivial(), cells: vec![CellForm::new()] }
    }

    pub fn from_cell(space: &Space, degree: usize, cell: CellForm) -> Result<Self> {
        for m in cell.keys() {
            if m.count_ones() as usize != degree {
                return Err(Error::DegreeMismatch { expected: degree, found: m.count_ones() as usize });
            }
        }
        let cell = cell.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        Ok(ExteriorForm { space: space.clone(), degree, grid: Grid::trivial(), cells: vec![cell] })
    }

    pub fn from_cells(space: &Space, degree: usize, grid: Grid, cells: Vec<CellForm>) -> Result<Self> {
        if cells.len() != grid.ncells() {
            return Err(Error::Precondition("cell count does not match grid".into()));
        }
        let mut f = ExteriorForm { space: space.clone(), degree, grid, cells };
        for c in &mut f.cells {
            c.retain(|_, p| !p.is_zero());
            if c.keys().any(|m| m.count_ones() as usize != degree) {
                return Err(Error::DegreeMismatch { expected: degree, found: 0 });
            }
        }
        Ok(f)
    }

    /// A smooth 0-form.
    pub fn scalar(space: &Space, p: Poly) -> Self {
        assert_eq!(p.nvars(), space.dim());
        let mut cell = CellForm::new();
        cell_add(&mut cell, 0, p);
        ExteriorForm { space: space.clone(), degree: 0, grid: Grid::trivial(), cells: vec![cell] }
    }

    pub fn constant(space: &Space, c: Q) -> Self {
        ExteriorForm::scalar(space, Poly::constant(space.dim(), c))
    }

    pub fn coordinate(space: &Space, name: &str) -> Result<Self> {
        let v = space.index_of(name)?;
        Ok(ExteriorForm::scalar(space, Poly::var(space.dim(), v)))
    }

    pub fn differential(space: &Space, name: &str) -> Result<Self> {
        let v = space.index_of(name)?;
        let mut cell = CellForm::new();
        cell.insert(1 << v, Poly::one(space.dim()));
        ExteriorForm::from_cell(space, 1, cell)
    }

    /// `coeff · d(names[0]) ∧ d(names[1]) ∧ …` in the order given.
    pub fn monomial(space: &Space, coeff: Poly, names: &[&str]) -> Result<Self> {
        let mut acc = ExteriorForm::scalar(space, coeff);
        for n in names {
            acc = acc.wedge(&ExteriorForm::differential(space, n)?)?;
        }
        Ok(acc)
    }

    /// A piecewise 0-form in one variable.
    pub fn piecewise_scalar(space: &Space, var: usize, breaks: Vec<Q>, pieces: Vec<Poly>) -> Result<Self> {
        let grid = Grid::single(var, breaks);
        if grid.ncells() != pieces.len() {
            return Err(Error::Precondition("one piece per interval".into()));
        }
        let cells = pieces
            .into_iter()
            .map(|p| {
                let mut c = CellForm::new();
                cell_add(&mut c, 0, p);
                c
            })
            .collect();
        Ok(ExteriorForm { space: space.clone(), degree: 0, grid, cells })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cells(&self) -> &[CellForm] {
        &self.cells
    }

    pub fn nvars(&self) -> usize {
        self.space.dim()
    }

    pub fn is_smooth(&self) -> bool {
        self.grid.is_trivial()
    }

    /// The single cell of a smooth form.
    pub fn smooth_cell(&self) -> Option<&CellForm> {
        if self.is_smooth() {
            Some(&self.cells[0])
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(|c| c.is_empty())
    }

    fn check_space(&self, other: &ExteriorForm) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space.same_coords(&other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(self.space.to_string(), other.space.to_string()))
        }
    }

    pub fn refine(&self, grid: &Grid) -> ExteriorForm {
        if *grid == self.grid {
            return self.clone();
        }
        let map = self.grid.coarse_map(&self.space, grid);
        let cells = map.into_iter().map(|i| self.cells[i].clone()).collect();
        ExteriorForm { space: self.space.clone(), degree: self.degree, grid: grid.clone(), cells }
    }

    fn align(&self, other: &ExteriorForm) -> Result<(Grid, ExteriorForm, ExteriorForm)> {
        self.check_space(other)?;
        let g = self.grid.union(&other.grid);
        Ok((g.clone(), self.refine(&g), other.refine(&g)))
    }

    pub fn add(&self, other: &ExteriorForm) -> Result<ExteriorForm> {
        if other.is_zero() && (other.degree == self.degree || self.is_zero()) {
            let mut s = self.clone();
            if s.is_zero() {
                s.degree = self.degree.max(other.degree);
            }
            return Ok(s);
        }
        if self.is_zero() {
            self.check_space(other)?;
            return Ok(other.clone());
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        let (g, a, b) = self.align(other)?;
        let cells = a
            .cells
            .into_iter()
            .zip(b.cells)
            .map(|(mut ca, cb)| {
                for (m, p) in cb {
                    cell_add(&mut ca, m, p);
                }
                ca
            })
            .collect();
        Ok(ExteriorForm { space: self.space.clone(), degree: self.degree, grid: g, cells })
    }

    pub fn sub(&self, other: &ExteriorForm) -> Result<ExteriorForm> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ExteriorForm {
        self.scale(&q(-1))
    }

    pub fn scale(&self, c: &Q) -> ExteriorForm {
        let cells = self
            .cells
            .iter()
            .map(|cell| {
                if c.is_zero() {
                    CellForm::new()
                } else {
                    cell.iter().map(|(m, p)| (*m, p.scale(c))).collect()
                }
            })
            .collect();
        ExteriorForm { space: self.space.clone(), degree: self.degree, grid: self.grid.clone(), cells }
    }

    /// Multiply by a smooth coefficient polynomial.
    pub fn mul_poly(&self, p: &Poly) -> ExteriorForm {
        let cells = self
            .cells
            .iter()
            .map(|cell| cell.iter().map(|(m, c)| (*m, c.mul(p))).filter(|(_, c)| !c.is_zero()).collect())
            .collect();
        ExteriorForm { space: self.space.clone(), degree: self.degree, grid: self.grid.clone(), cells }
    }

    pub fn wedge(&self, other: &ExteriorForm) -> Result<ExteriorForm> {
        let (g, a, b) = self.align(other)?;
        let cells = a.cells.iter().zip(&b.cells).map(|(ca, cb)| cell_wedge(ca, cb)).collect();
        Ok(ExteriorForm { space: self.space.clone(), degree: self.degree + other.degree, grid: g, cells })
    }

    /// `a ∧ a ∧ … ∧ a` (`n` factors); `n = 0` gives the constant 1.
    pub fn wedge_power(&self, n: usize) -> Result<ExteriorForm> {
        let mut acc = ExteriorForm::constant(&self.space, q(1));
        for _ in 0..n {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    pub fn d(&self) -> ExteriorForm {
        let n = self.nvars();
        let cells = self.cells.iter().map(|c| cell_d(c, n)).collect();
        ExteriorForm { space: self.space.clone(), degree: self.degree + 1, grid: self.grid.clone(), cells }
    }

    /// Pull back along the map whose coordinate functions are `subs`
    /// (one degree-0 form on `target` per coordinate of this form's space).
    ///
    /// Piecewise coordinates of the source must be carried to a target
    /// coordinate unchanged.
    pub fn pullback(&self, target: &Space, subs: &[ExteriorForm]) -> Result<ExteriorForm> {
        if subs.len() != self.nvars() {
            return Err(Error::Substitution(format!(
                "{} substitutes for {} coordinates",
                subs.len(),
                self.nvars()
            )));
        }
        for s in subs {
            if s.degree != 0 {
                return Err(Error::Substitution("substitutes must be functions".into()));
            }
            if !s.space.same_coords(target) {
                return Err(Error::SpaceMismatch(s.space.to_string(), target.to_string()));
            }
        }
        // source piecewise coordinates → target coordinate carrying the breakpoints
        let mut carried = Grid::trivial();
        let mut transfer: Vec<(usize, usize)> = Vec::new();
        for (v, bs) in &self.grid.breaks {
            let s = &subs[*v];
            let w = s
                .smooth_cell()
                .and_then(|c| if c.len() == 1 { c.get(&0) } else if c.is_empty() { None } else { None })
                .and_then(|p| p.as_affine())
                .and_then(|(w, slope, off)| if slope == q(1) && off.is_zero() { w } else { None })
                .ok_or_else(|| Error::Substitution(format!("piecewise coordinate `{}` must map to a coordinate", self.space.coords[*v].name)))?;
            if target.coords[w].domain() != self.space.coords[*v].domain() {
                return Err(Error::Substitution("carried coordinate changes its domain".into()));
            }
            carried = carried.union(&Grid::single(w, bs.clone()));
            transfer.push((*v, w));
        }
        let mut grid = carried;
        for s in subs {
            grid = grid.union(&s.grid);
        }
        let subs_fine: Vec<ExteriorForm> = subs.iter().map(|s| s.refine(&grid)).collect();
        let nt = target.dim();
        let mut cells = Vec::with_capacity(grid.ncells());
        for idx in 0..grid.ncells() {
            let bounds = grid.cell_bounds(target, idx);
            let src_multi: Vec<usize> = self
                .grid
                .breaks
                .iter()
                .map(|(v, bs)| {
                    let w = transfer.iter().find(|(a, _)| a == v).unwrap().1;
                    let (_, a, b) = bounds.iter().find(|(x, _, _)| *x == w).unwrap();
                    Grid::interval_of(bs, &((a + b) * crate::scalar::frac(1, 2)))
                })
                .collect();
            let src_cell = &self.cells[self.grid.flat_index(&src_multi)];
            let polys: Vec<Poly> = subs_fine
                .iter()
                .map(|s| s.cells[idx].get(&0).cloned().unwrap_or_else(|| Poly::zero(nt)))
                .collect();
            let dpolys: Vec<CellForm> = polys
                .iter()
                .map(|p| {
                    let mut c = CellForm::new();
                    cell_add(&mut c, 0, p.clone());
                    cell_d(&c, nt)
                })
                .collect();
            let mut wedge_cache: HashMap<Wedge, CellForm> = HashMap::new();
            let mut out = CellForm::new();
            for (m, p) in src_cell {
                let coeff = p.compose(&polys, nt)?;
                if coeff.is_zero() {
                    continue;
                }
                let wp = wedge_cache.entry(*m).or_insert_with(|| {
                    let mut acc = CellForm::new();
                    acc.insert(0, Poly::one(nt));
                    let mut mm = *m;
                    while mm != 0 {
                        let v = mm.trailing_zeros() as usize;
                        acc = cell_wedge(&acc, &dpolys[v]);
                        mm &= mm - 1;
                    }
                    acc
                });
                for (wm, wc) in wp.iter() {
                    cell_add(&mut out, *wm, wc.mul(&coeff));
                }
            }
            cells.push(out);
        }
        Ok(ExteriorForm { space: target.clone(), degree: self.degree, grid, cells })
    }

    /// Pull back along named substitutions; unnamed coordinates map to the
    /// target coordinate with the same name.
    pub fn pullback_named(&self, target: &Space, named: &[(&str, ExteriorForm)]) -> Result<ExteriorForm> {
        let mut subs = Vec::with_capacity(self.nvars());
        for c in &self.space.coords {
            if let Some((_, f)) = named.iter().find(|(n, _)| *n == c.name) {
                subs.push(f.clone());
            } else {
                subs.push(ExteriorForm::coordinate(target, &c.name)?);
            }
        }
        self.pullback(target, &subs)
    }

    /// The same form viewed on a space containing all of this space's coordinates.
    pub fn embed(&self, target: &Space) -> Result<ExteriorForm> {
        if self.space.same_coords(target) {
            return Ok(self.clone());
        }
        let map: Vec<Option<usize>> = self
            .space
            .coords
            .iter()
            .map(|c| target.index_of(&c.name).map(Some))
            .collect::<Result<_>>()?;
        self.reindexed(target, &map)
    }

    /// Move to `target` through a coordinate map (`None` = coordinate must be absent).
    fn reindexed(&self, target: &Space, map: &[Option<usize>]) -> Result<ExteriorForm> {
        let nt = target.dim();
        let grid = self.grid.reindex(map);
        // cell order may change when the map permutes gridded variables
        let mut cells = Vec::with_capacity(grid.ncells());
        for idx in 0..grid.ncells() {
            let bounds = grid.cell_bounds(target, idx);
            let multi: Vec<usize> = self
                .grid
                .breaks
                .iter()
                .map(|(v, bs)| {
                    let w = map[*v].expect("gridded coordinate kept");
                    let (_, a, b) = bounds.iter().find(|(x, _, _)| *x == w).unwrap();
                    Grid::interval_of(bs, &((a + b) * crate::scalar::frac(1, 2)))
                })
                .collect();
            let src = &self.cells[self.grid.flat_index(&multi)];
            let mut out = CellForm::new();
            for (m, p) in src {
                let (m2, neg) = remap_wedge(*m, map)
                    .ok_or_else(|| Error::Substitution("differential of a dropped coordinate".into()))?;
                let p2 = p.reindex(map, nt)?;
                cell_add(&mut out, m2, if neg { p2.neg() } else { p2 });
            }
            cells.push(out);
        }
        Ok(ExteriorForm { space: target.clone(), degree: self.degree, grid, cells })
    }

    /// Integrate over the full domains of `vars`, which must all be
    /// periodic or affine. Terms lacking any `dvars` drop out; the rest are
    /// integrated after moving the `vars` differentials to the left.
    pub fn integrate_over(&self, vars: &[usize]) -> Result<ExteriorForm> {
        for v in vars {
            if self.space.coords[*v].kind == CoordKind::Barycentric {
                return Err(Error::Precondition("use integrate_simplex for barycentric coordinates".into()));
            }
        }
        let sel: Wedge = vars.iter().fold(0, |a, v| a | (1 << v));
        // sign-adjusted restriction to terms containing every selected differential
        let mut cells: Vec<CellForm> = self
            .cells
            .iter()
            .map(|c| {
                let mut out = CellForm::new();
                for (m, p) in c {
                    if m & sel == sel {
                        let neg = extract_sign(*m, sel);
                        cell_add(&mut out, m & !sel, if neg { p.neg() } else { p.clone() });
                    }
                }
                out
            })
            .collect();
        let mut grid = self.grid.clone();
        for &v in vars {
            let (ng, nc) = integrate_cells_over_var(&self.space, &grid, &cells, v)?;
            grid = ng;
            cells = nc;
        }
        let target = self.space.without(vars);
        let mut map = vec![None; self.nvars()];
        let mut k = 0;
        for (v, slot) in map.iter_mut().enumerate() {
            if !vars.contains(&v) {
                *slot = Some(k);
                k += 1;
            }
        }
        let tmp = ExteriorForm { space: self.space.clone(), degree: self.degree - vars.len().min(self.degree), grid, cells };
        if self.degree < vars.len() {
            return Ok(ExteriorForm::zero(&target, 0));
        }
        tmp.reindexed(&target, &map)
    }

    pub fn integrate_over_named(&self, names: &[&str]) -> Result<ExteriorForm> {
        let vars: Vec<usize> = names.iter().map(|n| self.space.index_of(n)).collect::<Result<_>>()?;
        self.integrate_over(&vars)
    }

    /// `∫_{Δ^p}` over every barycentric coordinate of the space (left convention).
    /// Only the part of barycentric degree exactly `p` contributes.
    pub fn integrate_simplex(&self) -> Result<ExteriorForm> {
        let vars = self.space.barycentric_vars();
        for v in &vars {
            if self.grid.breaks.contains_key(v) {
                return Err(Error::Precondition("piecewise barycentric coefficients".into()));
            }
        }
        let sel: Wedge = vars.iter().fold(0, |a, v| a | (1 << v));
        let target = self.space.without(&vars);
        if self.degree < vars.len() {
            return Ok(ExteriorForm::zero(&target, 0));
        }
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            let mut out = CellForm::new();
            for (m, p) in c {
                if m & sel == sel {
                    let neg = extract_sign(*m, sel);
                    let ip = p.integrate_simplex(&vars)?;
                    cell_add(&mut out, m & !sel, if neg { ip.neg() } else { ip });
                }
            }
            cells.push(out);
        }
        let mut map = vec![None; self.nvars()];
        let mut k = 0;
        for (v, slot) in map.iter_mut().enumerate() {
            if !vars.contains(&v) {
                *slot = Some(k);
                k += 1;
            }
        }
        let tmp = ExteriorForm { space: self.space.clone(), degree: self.degree - vars.len(), grid: self.grid.clone(), cells };
        tmp.reindexed(&target, &map)
    }

    /// Set coordinate `name` to a rational constant (its differential drops).
    pub fn restrict_const(&self, name: &str, value: &Q) -> Result<ExteriorForm> {
        let v = self.space.index_of(name)?;
        let target = self.space.without(&[v]);
        let mut subs = Vec::new();
        for (i, c) in self.space.coords.iter().enumerate() {
            if i == v {
                subs.push(ExteriorForm::constant(&target, value.clone()));
            } else {
                subs.push(ExteriorForm::coordinate(&target, &c.name)?);
            }
        }
        if self.grid.breaks.contains_key(&v) {
            // pick the piece containing the value
            let bs = &self.grid.breaks[&v];
            let k = Grid::interval_of(bs, value);
            let mut lo = self.space.coords[v].domain().0;
            if k > 0 {
                lo = bs[k - 1].clone();
            }
            let hi = if k < bs.len() { bs[k].clone() } else { self.space.coords[v].domain().1 };
            let mid = (&lo + &hi) * crate::scalar::frac(1, 2);
            let sub_grid = self.grid.without(v);
            let mut cells = Vec::new();
            for idx in 0..sub_grid.ncells() {
                let bounds = sub_grid.cell_bounds(&self.space, idx);
                let multi: Vec<usize> = self
                    .grid
                    .breaks
                    .iter()
                    .map(|(w, bw)| {
                        if *w == v {
                            Grid::interval_of(bw, &mid)
                        } else {
                            let (_, a, b) = bounds.iter().find(|(x, _, _)| x == w).unwrap();
                            Grid::interval_of(bw, &((a + b) * crate::scalar::frac(1, 2)))
                        }
                    })
                    .collect();
                cells.push(self.cells[self.grid.flat_index(&multi)].clone());
            }
            let smooth_v = ExteriorForm { space: self.space.clone(), degree: self.degree, grid: sub_grid, cells };
            return smooth_v.pullback(&target, &subs);
        }
        self.pullback(&target, &subs)
    }

    /// Exact equality as functions (piecewise structure may differ).
    pub fn same_as(&self, other: &ExteriorForm) -> bool {
        match self.sub(other) {
            Ok(diff) => diff.is_zero(),
            Err(_) => false,
        }
    }

    pub fn max_abs_coeff(&self) -> Q {
        self.cells
            .iter()
            .flat_map(|c| c.values().map(|p| p.max_abs_coeff()))
            .max()
            .unwrap_or_else(|| q(0))
    }

    /// Largest coefficient over the cells meeting any of the boxes
    /// (each box lists `(var, lo, hi)` restrictions; unlisted variables are free).
    pub fn max_abs_coeff_on(&self, boxes: &[Vec<(usize, Q, Q)>]) -> Q {
        let mut best = q(0);
        for idx in 0..self.cells.len() {
            if self.cells[idx].is_empty() {
                continue;
            }
            let relevant = boxes.iter().any(|bx| {
                bx.iter().all(|(v, a, b)| {
                    let (lo, hi) = self.grid.var_bounds(&self.space, idx, *v);
                    let l = if lo > *a { lo } else { a.clone() };
                    let h = if hi < *b { hi } else { b.clone() };
                    l < h
                })
            });
            if relevant {
                for p in self.cells[idx].values() {
                    let m = p.max_abs_coeff();
                    if m > best {
                        best = m;
                    }
                }
            }
        }
        best
    }

    pub fn is_zero_on(&self, boxes: &[Vec<(usize, Q, Q)>]) -> bool {
        self.max_abs_coeff_on(boxes).is_zero()
    }

    /// Values of each wedge coefficient at a point.
    pub fn eval_f64(&self, point: &[f64]) -> BTreeMap<Wedge, f64> {
        let idx = self.grid.locate_f64(point);
        self.cells[idx].iter().map(|(m, p)| (*m, p.eval_f64(point))).collect()
    }

    /// Coefficient of a single wedge monomial given by coordinate names (sorted by the space order).
    pub fn component(&self, names: &[&str]) -> Result<ExteriorForm> {
        let mask: Wedge = names.iter().map(|n| self.space.index_of(n).map(|v| 1u64 << v)).collect::<Result<Vec<_>>>()?.into_iter().fold(0, |a, b| a | b);
        let cells = self
            .cells
            .iter()
            .map(|c| {
                let mut out = CellForm::new();
                if let Some(p) = c.get(&mask) {
                    out.insert(0, p.clone());
                }
                out
            })
            .collect();
        Ok(ExteriorForm { space: self.space.clone(), degree: 0, grid: self.grid.clone(), cells })
    }

    /// Merge adjacent cells that carry identical forms.
    pub fn simplify(&self) -> ExteriorForm {
        let mut f = self.clone();
        let vars: Vec<usize> = f.grid.breaks.keys().cloned().collect();
        for v in vars {
            loop {
                let bs = f.grid.breaks.get(&v).cloned().unwrap_or_default();
                let mut removed = false;
                for k in 0..bs.len() {
                    // can breakpoint k be dropped? intervals k and k+1 must agree everywhere
                    let pos = f.grid.breaks.keys().position(|w| *w == v).unwrap();
                    let agree = (0..f.cells.len()).all(|idx| {
                        let multi = f.grid.cell_index(idx);
                        if multi[pos] != k {
                            return true;
                        }
                        let mut other = multi.clone();
                        other[pos] = k + 1;
                        f.cells[idx] == f.cells[f.grid.flat_index(&other)]
                    });
                    if agree {
                        let mut ng = f.grid.clone();
                        let nb = ng.breaks.get_mut(&v).unwrap();
                        nb.remove(k);
                        if nb.is_empty() {
                            ng.breaks.remove(&v);
                        }
                        let map = ng.coarse_map(&f.space, &f.grid);
                        let mut cells = vec![CellForm::new(); ng.ncells()];
                        for (fine_idx, coarse_idx) in map.into_iter().enumerate() {
                            cells[coarse_idx] = f.cells[fine_idx].clone();
                        }
                        f = ExteriorForm { space: f.space.clone(), degree: f.degree, grid: ng, cells };
                        removed = true;
                        break;
                    }
                }
                if !removed {
                    break;
                }
            }
        }
        f
    }

    pub fn wedge_name(&self, m: Wedge) -> String {
        let mut parts = Vec::new();
        let mut mm = m;
        while mm != 0 {
            let v = mm.trailing_zeros() as usize;
            parts.push(format!("d{}", self.space.coords[v].name));
            mm &= mm - 1;
        }
        parts.join("∧")
    }
}

/// Integrate every cell over variable `v`, summing along `v`'s intervals.
fn integrate_cells_over_var(space: &CoordinateSpace, grid: &Grid, cells: &[CellForm], v: usize) -> Result<(Grid, Vec<CellForm>)> {
    let ng = grid.without(v);
    let mut out = vec![CellForm::new(); ng.ncells()];
    let map = if grid.breaks.contains_key(&v) { ng.coarse_map_from_fine(space, grid) } else { (0..cells.len()).collect() };
    for (idx, cell) in cells.iter().enumerate() {
        if cell.is_empty() {
            continue;
        }
        let (a, b) = grid.var_bounds(space, idx, v);
        for (m, p) in cell {
            let ip = p.integrate_interval(v, &a, &b)?;
            cell_add(&mut out[map[idx]], *m, ip);
        }
    }
    Ok((ng, out))
}

impl Grid {
    /// Map each cell of `fine` (a grid with extra gridded variables) to the cell of `self`.
    fn coarse_map_from_fine(&self, space: &CoordinateSpace, fine: &Grid) -> Vec<usize> {
        (0..fine.ncells())
            .map(|idx| {
                let bounds = fine.cell_bounds(space, idx);
                let multi: Vec<usize> = self
                    .breaks
                    .iter()
                    .map(|(w, bs)| {
                        let (_, a, b) = bounds.iter().find(|(x, _, _)| x == w).unwrap();
                        Grid::interval_of(bs, &((a + b) * crate::scalar::frac(1, 2)))
                    })
                    .collect();
                self.flat_index(&multi)
            })
            .collect()
    }
}

impl PartialEq for ExteriorForm {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.same_as(other)
    }
}

impl fmt::Display for ExteriorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.space.names();
        let s = self.simplify();
        if s.is_zero() {
            return write!(f, "0");
        }
        for (idx, cell) in s.cells.iter().enumerate() {
            if !s.grid.is_trivial() {
                let b = s.grid.cell_bounds(&s.space, idx);
                let desc: Vec<String> = b
                    .iter()
                    .map(|(v, lo, hi)| format!("{}∈[{},{}]", names[*v], crate::scalar::fmt_q(lo), crate::scalar::fmt_q(hi)))
                    .collect();
                write!(f, "[{}] ", desc.join(","))?;
            }
            let parts: Vec<String> = cell
                .iter()
                .map(|(m, p)| {
                    let c = p.to_string_with(&names);
                    if *m == 0 {
                        c
                    } else {
                        format!("({c}) {}", s.wedge_name(*m))
                    }
                })
                .collect();
            if parts.is_empty() {
                write!(f, "0")?;
            } else {
                write!(f, "{}", parts.join(" + "))?;
            }
            if idx + 1 < s.cells.len() {
                write!(f, "; ")?;
            }
        }
        Ok(())
    }
}

impl ExteriorForm {
    /// Keep only the wedge monomials accepted by `keep`.
    pub fn filter_wedges(&self, keep: impl Fn(Wedge) -> bool) -> ExteriorForm {
        let cells = self.cells.iter().map(|c| c.iter().filter(|(m, _)| keep(**m)).map(|(m, p)| (*m, p.clone())).collect()).collect();
        ExteriorForm { space: self.space.clone(), degree: self.degree, grid: self.grid.clone(), cells }
    }

    /// The form on the box `bx` and zero outside it (box ends become breakpoints).
    pub fn masked(&self, bx: &[(usize, Q, Q)]) -> ExteriorForm {
        let mut g = Grid::trivial();
        for (v, a, b) in bx {
            let (lo, hi) = self.space.coords[*v].domain();
            let inner: Vec<Q> = [a, b].into_iter().filter(|x| **x > lo && **x < hi).cloned().collect();
            g = g.union(&Grid::single(*v, inner));
        }
        let fine = self.refine(&self.grid.union(&g));
        let cells = (0..fine.grid.ncells())
            .map(|idx| {
                let inside = bx.iter().all(|(v, a, b)| {
                    let (lo, hi) = fine.grid.var_bounds(&fine.space, idx, *v);
                    lo >= *a && hi <= *b
                });
                if inside { fine.cells[idx].clone() } else { CellForm::new() }
            })
            .collect();
        ExteriorForm { cells, ..fine }
    }

    /// Whether any coefficient depends on a variable in `mask`, or any differential lies in it.
    pub fn involves(&self, mask: Wedge) -> bool {
        self.cells.iter().any(|c| {
            c.iter().any(|(m, p)| m & mask != 0 || (0..self.nvars()).any(|v| mask & (1 << v) != 0 && p.depends_on(v)))
        }) || self.grid.breaks.keys().any(|v| mask & (1 << v) != 0 && self.cells.len() > 1)
    }
}

impl ExteriorForm {
    /// Fibre integration over full periods of the given periodic coordinates.
    pub fn integrate_periodic(&self, names: &[&str]) -> Result<ExteriorForm> {
        for n in names {
            let v = self.space.index_of(n)?;
            if self.space.coords[v].kind != CoordKind::Periodic {
                return Err(Error::Precondition(format!("`{n}` is not periodic")));
            }
        }
        self.integrate_over_named(names)
    }

    /// Interior product with the coordinate field `∂/∂name`.
    pub fn contract(&self, name: &str) -> Result<ExteriorForm> {
        let v = self.space.index_of(name)?;
        let bit = 1u64 << v;
        let cells = self
            .cells
            .iter()
            .map(|c| {
                let mut out = CellForm::new();
                for (m, p) in c {
                    if m & bit != 0 {
                        let neg = (m & (bit - 1)).count_ones() % 2 == 1;
                        cell_add(&mut out, m & !bit, if neg { p.neg() } else { p.clone() });
                    }
                }
                out
            })
            .collect();
        Ok(ExteriorForm {
            space: self.space.clone(),
            degree: self.degree.saturating_sub(1),
            grid: self.grid.clone(),
            cells,
        })
    }

    /// Canonical JSON: wedge monomials in space order, each with its piecewise coefficient.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let s = self.simplify();
        let names = s.space.names();
        let mut wedges: Vec<Wedge> = s.cells.iter().flat_map(|c| c.keys().cloned()).collect();
        wedges.sort_by_key(|m| {
            let mut bits = Vec::new();
            let mut mm = *m;
            while mm != 0 {
                bits.push(mm.trailing_zeros());
                mm &= mm - 1;
            }
            bits
        });
        wedges.dedup();
        let terms: Vec<serde_json::Value> = wedges
            .iter()
            .map(|m| {
                let pieces: Vec<serde_json::Value> = s
                    .cells
                    .iter()
                    .enumerate()
                    .filter_map(|(idx, c)| c.get(m).map(|p| (idx, p)))
                    .map(|(idx, p)| {
                        let cell: Vec<serde_json::Value> = s
                            .grid
                            .cell_bounds(&s.space, idx)
                            .iter()
                            .map(|(v, a, b)| json!({"coord": names[*v], "lo": crate::scalar::fmt_q(a), "hi": crate::scalar::fmt_q(b)}))
                            .collect();
                        let monomials: Vec<serde_json::Value> = p
                            .terms()
                            .map(|(mono, c)| {
                                json!({
                                    "coeff": crate::scalar::fmt_q(c),
                                    "tau": mono.tau,
                                    "exps": mono.exps,
                                    "trig": mono.trig,
                                })
                            })
                            .collect();
                        json!({"cell": cell, "monomials": monomials})
                    })
                    .collect();
                let wedge: Vec<String> = {
                    let mut v = Vec::new();
                    let mut mm = *m;
                    while mm != 0 {
                        v.push(names[mm.trailing_zeros() as usize].clone());
                        mm &= mm - 1;
                    }
                    v
                };
                json!({"wedge": wedge, "coeff": {"pieces": pieces}})
            })
            .collect();
        json!({"space": names, "degree": s.degree, "terms": terms})
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::poly::Trig;
    use crate::exterior::space::Coord;
    use crate::scalar::frac;

    fn torus_z() -> Space {
        CoordinateSpace::new(
            "T2xR2",
            vec![Coord::periodic("x1"), Coord::periodic("x2"), Coord::affine("z1", q(-1), q(1)), Coord::affine("z2", q(-1), q(1))],
        )
        .unwrap()
    }

    fn f(s: &Space, n: &str) -> ExteriorForm {
        ExteriorForm::coordinate(s, n).unwrap()
    }

    fn d(s: &Space, n: &str) -> ExteriorForm {
        ExteriorForm::differential(s, n).unwrap()
    }

    #[test]
    fn b_wedge_db() {
        let s = torus_z();
        let b = f(&s, "z1").wedge(&d(&s, "x1")).unwrap().add(&f(&s, "z2").wedge(&d(&s, "x2")).unwrap()).unwrap();
        let db = b.d();
        let expect_db = d(&s, "z1").wedge(&d(&s, "x1")).unwrap().add(&d(&s, "z2").wedge(&d(&s, "x2")).unwrap()).unwrap();
        assert_eq!(db, expect_db);
        let lam = b.wedge(&db).unwrap();
        let dx = d(&s, "x1").wedge(&d(&s, "x2")).unwrap();
        let phase = f(&s, "z2").wedge(&d(&s, "z1")).unwrap().sub(&f(&s, "z1").wedge(&d(&s, "z2")).unwrap()).unwrap();
        assert_eq!(lam, dx.wedge(&phase).unwrap());
        let vol = dx.wedge(&d(&s, "z1")).unwrap().wedge(&d(&s, "z2")).unwrap();
        assert_eq!(lam.d(), vol.scale(&q(-2)));
        assert!(lam.d().d().is_zero());
        assert_eq!(lam.integrate_periodic(&["x1", "x2"]).unwrap().to_string(), "(z2) dz1 + (-z1) dz2");
    }

    #[test]
    fn wedge_is_antisymmetric() {
        let s = torus_z();
        let a = d(&s, "z1").wedge(&d(&s, "z2")).unwrap();
        let b = d(&s, "z2").wedge(&d(&s, "z1")).unwrap();
        assert_eq!(a, b.neg());
    }

    #[test]
    fn circle_restriction() {
        let s = CoordinateSpace::new("R2", vec![Coord::affine("z1", q(-1), q(1)), Coord::affine("z2", q(-1), q(1))]).unwrap();
        let c = CoordinateSpace::new("S1", vec![Coord::periodic("th")]).unwrap();
        let phase = f(&s, "z2").wedge(&d(&s, "z1")).unwrap().sub(&f(&s, "z1").wedge(&d(&s, "z2")).unwrap()).unwrap();
        let cos = ExteriorForm::scalar(&c, Poly::trig(1, 0, Trig::Cos(1)));
        let sin = ExteriorForm::scalar(&c, Poly::trig(1, 0, Trig::Sin(1)));
        let pulled = phase.pullback(&c, &[cos, sin]).unwrap();
        let expect = ExteriorForm::monomial(&c, Poly::tau_pow(1, 1), &["th"]).unwrap().neg();
        assert_eq!(pulled, expect);
        let period = pulled.integrate_periodic(&["th"]).unwrap();
        assert_eq!(period, ExteriorForm::scalar(period.space(), Poly::tau_pow(0, 1).neg()));
    }

    #[test]
    fn affine_differential_pullback() {
        let big = CoordinateSpace::new("T", vec![Coord::affine("t0", q(0), q(1))]).unwrap();
        let small = CoordinateSpace::new("D1", vec![Coord::barycentric(1)]).unwrap();
        let sub = ExteriorForm::constant(&small, q(1)).sub(&f(&small, "t1")).unwrap();
        let pulled = d(&big, "t0").pullback(&small, &[sub]).unwrap();
        assert_eq!(pulled, d(&small, "t1").neg());
    }

    #[test]
    fn simplex_integrals() {
        let m = CoordinateSpace::new("pt", vec![Coord::affine("z", q(0), q(1))]).unwrap();
        let s = CoordinateSpace::simplex_product(2, &m);
        let v = d(&s, "t1").wedge(&d(&s, "t2")).unwrap();
        let r = v.integrate_simplex().unwrap();
        assert_eq!(r, ExteriorForm::constant(r.space(), frac(1, 2)));
        let s1 = CoordinateSpace::simplex_product(1, &m);
        let t1 = f(&s1, "t1");
        let t0 = ExteriorForm::constant(&s1, q(1)).sub(&t1).unwrap();
        let w = t0.wedge(&t1.d()).unwrap().sub(&t1.wedge(&t0.d()).unwrap()).unwrap();
        let r = w.integrate_simplex().unwrap();
        assert_eq!(r, ExteriorForm::constant(r.space(), q(1)));
        assert!(d(&s1, "z").integrate_simplex().unwrap().is_zero());
    }

    #[test]
    fn torus_characteristic_form_k3() {
        let names = ["x1", "x2", "x3", "z1", "z2", "z3"];
        let coords = names
            .iter()
            .map(|n| if n.starts_with('x') { Coord::periodic(n) } else { Coord::affine(n, q(-1), q(1)) })
            .collect();
        let s = CoordinateSpace::new("T3xR3", coords).unwrap();
        let mut b = ExteriorForm::zero(&s, 1);
        for j in 1..=3 {
            b = b.add(&f(&s, &format!("z{j}")).wedge(&d(&s, &format!("x{j}"))).unwrap()).unwrap();
        }
        let db = b.d();
        let lam = b.wedge(&db).unwrap().wedge(&db).unwrap();
        let r = lam.integrate_periodic(&["x1", "x2", "x3"]).unwrap();
        // (−1)^3 · 2! · Σ (−1)^{j−1} z_j dz…
        let rs = r.space().clone();
        let mut expect = ExteriorForm::zero(&rs, 2);
        let z = ["z1", "z2", "z3"];
        for j in 0..3 {
            let rest: Vec<&str> = z.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, n)| *n).collect();
            let term = ExteriorForm::monomial(&rs, Poly::var(3, j), &rest).unwrap();
            expect = expect.add(&term.scale(&q(if j % 2 == 0 { 1 } else { -1 }))).unwrap();
        }
        assert_eq!(r, expect.scale(&q(-2)));
    }

    #[test]
    fn piecewise_lift_and_stokes() {
        let s = CoordinateSpace::new("S1", vec![Coord::periodic("x")]).unwrap();
        let x = Poly::var(1, 0);
        let lift = ExteriorForm::piecewise_scalar(&s, 0, vec![frac(1, 2)], vec![x.clone(), x.sub(&Poly::one(1))]).unwrap();
        // d of the lift is dx everywhere
        assert_eq!(lift.d(), d(&s, "x"));
        let r = lift.wedge(&d(&s, "x")).unwrap().integrate_periodic(&["x"]).unwrap();
        // ∫_0^{1/2} x + ∫_{1/2}^1 (x−1) = 1/8 − 1/8
        assert!(r.is_zero());
        let sq = lift.wedge(&lift).unwrap().wedge(&d(&s, "x")).unwrap().integrate_periodic(&["x"]).unwrap();
        assert_eq!(sq, ExteriorForm::constant(sq.space(), frac(1, 12)));
    }

    #[test]
    fn contraction_and_restriction() {
        let s = torus_z();
        let w = d(&s, "x1").wedge(&d(&s, "z2")).unwrap();
        assert_eq!(w.contract("z2").unwrap(), d(&s, "x1").neg());
        assert_eq!(w.contract("x1").unwrap(), d(&s, "z2"));
        let g = f(&s, "z1").wedge(&d(&s, "z2")).unwrap();
        let r = g.restrict_const("z1", &frac(1, 3)).unwrap();
        assert_eq!(r, ExteriorForm::differential(r.space(), "z2").unwrap().scale(&frac(1, 3)));
    }

    #[test]
    fn json_is_deterministic() {
        let s = torus_z();
        let a = f(&s, "z1").wedge(&d(&s, "x1")).unwrap().add(&d(&s, "x2")).unwrap();
        let b = d(&s, "x2").add(&f(&s, "z1").wedge(&d(&s, "x1")).unwrap()).unwrap();
        assert_eq!(a.to_json().to_string(), b.to_json().to_string());
        assert_eq!(a.to_json()["terms"][0]["wedge"][0], "x1");
    }
}
