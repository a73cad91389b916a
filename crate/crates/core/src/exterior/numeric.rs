//! Floating point forms: lazily evaluated expression trees over exact leaves
//! and user callbacks, with Gauss–Legendre quadrature for integration.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{to_f64, Q};

use super::form::{extract_sign, merge_sign, ExteriorForm, Wedge};
use super::grid::Grid;
use super::space::{CoordKind, Space};
use super::value::{FormValue, Residual};

pub type Coeffs = BTreeMap<Wedge, f64>;
pub type Callback = Arc<dyn Fn(&[f64]) -> Coeffs + Send + Sync>;

#[derive(Clone)]
enum Node {
    Exact(ExteriorForm),
    Callback { f: Callback, smooth: bool },
    Sum(Vec<NumericForm>),
    Scale(f64, NumericForm),
    Wedge(NumericForm, NumericForm),
    Pullback { src: NumericForm, subs: Vec<NumericForm>, dsubs: Vec<NumericForm> },
    FiniteDiff(NumericForm),
    Quadrature { src: NumericForm, vars: Vec<usize>, bounds: Vec<(Q, Q)>, order: usize },
    SimplexQuadrature { src: NumericForm, order: usize },
}

/// A homogeneous form evaluated pointwise in floating point.
#[derive(Clone)]
pub struct NumericForm {
    space: Space,
    degree: usize,
    grid: Grid,
    node: Arc<Node>,
}

impl fmt::Debug for NumericForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumericForm(deg {} on {})", self.degree, self.space)
    }
}

/// Finite difference step for callbacks without analytic derivatives.
const FD_STEP: f64 = 1e-3;

const MIN_PERIODIC_PANELS: usize = 4;

fn wedge_coeffs(a: &Coeffs, b: &Coeffs) -> Coeffs {
    let mut out = Coeffs::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            if ma & mb != 0 {
                continue;
            }
            let s = if merge_sign(*ma, *mb) { -1.0 } else { 1.0 };
            *out.entry(ma | mb).or_insert(0.0) += s * ca * cb;
        }
    }
    out
}

impl NumericForm {
    pub fn from_exact(f: &ExteriorForm) -> Self {
        NumericForm { space: f.space().clone(), degree: f.degree(), grid: f.grid().clone(), node: Arc::new(Node::Exact(f.clone())) }
    }

    /// A callback-defined form; `grid` declares where the callback may be non-smooth.
    pub fn from_callback(space: &Space, degree: usize, grid: Grid, smooth: bool, f: Callback) -> Self {
        NumericForm { space: space.clone(), degree, grid, node: Arc::new(Node::Callback { f, smooth }) }
    }

    pub fn zero(space: &Space, degree: usize) -> Self {
        NumericForm { space: space.clone(), degree, grid: Grid::trivial(), node: Arc::new(Node::Sum(Vec::new())) }
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

    fn check(&self, other: &NumericForm) -> Result<()> {
        if self.space.same_coords(&other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(self.space.to_string(), other.space.to_string()))
        }
    }

    pub fn eval(&self, pt: &[f64]) -> Coeffs {
        match &*self.node {
            Node::Exact(f) => f.eval_f64(pt),
            Node::Callback { f, .. } => f(pt),
            Node::Sum(parts) => {
                let mut out = Coeffs::new();
                for p in parts {
                    for (m, c) in p.eval(pt) {
                        *out.entry(m).or_insert(0.0) += c;
                    }
                }
                out
            }
            Node::Scale(s, a) => a.eval(pt).into_iter().map(|(m, c)| (m, s * c)).collect(),
            Node::Wedge(a, b) => wedge_coeffs(&a.eval(pt), &b.eval(pt)),
            Node::Pullback { src, subs, dsubs } => {
                let image: Vec<f64> = subs.iter().map(|s| s.eval(pt).get(&0).copied().unwrap_or(0.0)).collect();
                let jac: Vec<Coeffs> = dsubs.iter().map(|d| d.eval(pt)).collect();
                let mut out = Coeffs::new();
                for (m, c) in src.eval(&image) {
                    let mut acc = Coeffs::new();
                    acc.insert(0, c);
                    let mut mm = m;
                    while mm != 0 {
                        let v = mm.trailing_zeros() as usize;
                        acc = wedge_coeffs(&acc, &jac[v]);
                        mm &= mm - 1;
                    }
                    for (w, x) in acc {
                        *out.entry(w).or_insert(0.0) += x;
                    }
                }
                out
            }
            Node::FiniteDiff(a) => {
                let mut out = Coeffs::new();
                let mut p = pt.to_vec();
                for v in 0..self.space.dim() {
                    // fourth-order central difference
                    let mut acc = Coeffs::new();
                    for (k, w) in [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)] {
                        p[v] = pt[v] + k * FD_STEP;
                        for (m, c) in a.eval(&p) {
                            *acc.entry(m).or_insert(0.0) += w * c / (12.0 * FD_STEP);
                        }
                    }
                    p[v] = pt[v];
                    for (m, c) in acc {
                        if m & (1 << v) != 0 {
                            continue;
                        }
                        let s = if (m & ((1u64 << v) - 1)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                        *out.entry(m | (1 << v)).or_insert(0.0) += s * c;
                    }
                }
                out
            }
            Node::Quadrature { src, vars, bounds, order } => quad_eval(src, vars, bounds, *order, pt),
            Node::SimplexQuadrature { src, order } => simplex_eval(src, *order, pt),
        }
    }

    pub fn add(&self, other: &NumericForm) -> Result<NumericForm> {
        self.check(other)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        Ok(NumericForm {
            space: self.space.clone(),
            degree: self.degree,
            grid: self.grid.union(&other.grid),
            node: Arc::new(Node::Sum(vec![self.clone(), other.clone()])),
        })
    }

    pub fn scale(&self, s: f64) -> NumericForm {
        NumericForm { space: self.space.clone(), degree: self.degree, grid: self.grid.clone(), node: Arc::new(Node::Scale(s, self.clone())) }
    }

    pub fn wedge(&self, other: &NumericForm) -> Result<NumericForm> {
        self.check(other)?;
        Ok(NumericForm {
            space: self.space.clone(),
            degree: self.degree + other.degree,
            grid: self.grid.union(&other.grid),
            node: Arc::new(Node::Wedge(self.clone(), other.clone())),
        })
    }

    pub fn d(&self) -> Result<NumericForm> {
        let node = match &*self.node {
            Node::Exact(f) => Node::Exact(f.d()),
            Node::Callback { smooth, .. } => {
                if !smooth {
                    return Err(Error::Differentiability("callback declared non-smooth".into()));
                }
                Node::FiniteDiff(self.clone())
            }
            Node::Sum(parts) => Node::Sum(parts.iter().map(|p| p.d()).collect::<Result<_>>()?),
            Node::Scale(s, a) => Node::Scale(*s, a.d()?),
            Node::Wedge(a, b) => {
                let left = a.d()?.wedge(b)?;
                let right = a.wedge(&b.d()?)?;
                let right = if a.degree % 2 == 1 { right.scale(-1.0) } else { right };
                Node::Sum(vec![left, right])
            }
            Node::Pullback { src, subs, dsubs } => Node::Pullback { src: src.d()?, subs: subs.clone(), dsubs: dsubs.clone() },
            Node::FiniteDiff(_) | Node::Quadrature { .. } | Node::SimplexQuadrature { .. } => Node::FiniteDiff(self.clone()),
        };
        Ok(NumericForm { space: self.space.clone(), degree: self.degree + 1, grid: self.grid.clone(), node: Arc::new(node) })
    }

    /// Pull back along function substitutes on `target`, one per coordinate of this space.
    pub fn pullback(&self, target: &Space, subs: &[NumericForm]) -> Result<NumericForm> {
        if subs.len() != self.space.dim() {
            return Err(Error::Substitution("one substitute per coordinate".into()));
        }
        let mut grid = Grid::trivial();
        for s in subs {
            if !s.space.same_coords(target) {
                return Err(Error::SpaceMismatch(s.space.to_string(), target.to_string()));
            }
            grid = grid.union(&s.grid);
        }
        // breakpoints of identity-carried coordinates move to the target
        for (v, bs) in &self.grid.breaks {
            if let Node::Exact(e) = &*subs[*v].node {
                if let Some(p) = e.smooth_cell().and_then(|c| c.get(&0)) {
                    if let Some((Some(w), slope, off)) = p.as_affine() {
                        if slope == crate::scalar::q(1) && off == crate::scalar::q(0) {
                            grid = grid.union(&Grid::single(w, bs.clone()));
                        }
                    }
                }
            }
        }
        let dsubs = subs.iter().map(|s| s.d()).collect::<Result<Vec<_>>>()?;
        Ok(NumericForm {
            space: target.clone(),
            degree: self.degree,
            grid,
            node: Arc::new(Node::Pullback { src: self.clone(), subs: subs.to_vec(), dsubs }),
        })
    }

    /// Gauss–Legendre integration over the full domains of `vars` (left convention),
    /// splitting at declared breakpoints.
    pub fn integrate_over(&self, vars: &[usize], order: usize) -> Result<NumericForm> {
        let bounds = vars.iter().map(|v| self.space.coords[*v].domain()).collect();
        self.integrate_bounded(vars, bounds, order)
    }

    fn integrate_bounded(&self, vars: &[usize], bounds: Vec<(Q, Q)>, order: usize) -> Result<NumericForm> {
        for v in vars {
            if self.space.coords[*v].kind == CoordKind::Barycentric {
                return Err(Error::Precondition("use integrate_simplex for barycentric coordinates".into()));
            }
        }
        let target = self.space.without(vars);
        let mut map = vec![None; self.space.dim()];
        let mut k = 0;
        for (v, slot) in map.iter_mut().enumerate() {
            if !vars.contains(&v) {
                *slot = Some(k);
                k += 1;
            }
        }
        let grid = self.grid.reindex(&map);
        Ok(NumericForm {
            space: target,
            degree: self.degree.saturating_sub(vars.len()),
            grid,
            node: Arc::new(Node::Quadrature { src: self.clone(), vars: vars.to_vec(), bounds, order }),
        })
    }

    pub fn integrate_over_named(&self, names: &[&str], order: usize) -> Result<NumericForm> {
        let vars: Vec<usize> = names.iter().map(|n| self.space.index_of(n)).collect::<Result<_>>()?;
        self.integrate_over(&vars, order)
    }

    /// Collapsed-coordinate quadrature over `Δ^p` in the barycentric coordinates.
    pub fn integrate_simplex(&self, order: usize) -> Result<NumericForm> {
        let vars = self.space.barycentric_vars();
        let target = self.space.without(&vars);
        let mut map = vec![None; self.space.dim()];
        let mut k = 0;
        for (v, slot) in map.iter_mut().enumerate() {
            if !vars.contains(&v) {
                *slot = Some(k);
                k += 1;
            }
        }
        Ok(NumericForm {
            space: target,
            degree: self.degree.saturating_sub(vars.len()),
            grid: self.grid.reindex(&map),
            node: Arc::new(Node::SimplexQuadrature { src: self.clone(), order }),
        })
    }

    /// Sample points covering the given boxes: tensor Gauss nodes of low order.
    fn sample_points(&self, boxes: &[Vec<(usize, Q, Q)>]) -> Vec<Vec<f64>> {
        let (nodes, _) = gauss_legendre(3);
        let mut out = Vec::new();
        for bx in boxes {
            let ranges: Vec<(f64, f64)> = (0..self.space.dim())
                .map(|v| {
                    if let Some((_, a, b)) = bx.iter().find(|(w, _, _)| *w == v) {
                        (to_f64(a), to_f64(b))
                    } else {
                        let (a, b) = self.space.coords[v].domain();
                        (to_f64(&a), to_f64(&b))
                    }
                })
                .collect();
            let mut pts: Vec<Vec<f64>> = vec![Vec::new()];
            for (a, b) in ranges {
                let mut next = Vec::new();
                for p in &pts {
                    for x in &nodes {
                        let mut q = p.clone();
                        q.push(a + (b - a) * (x + 1.0) / 2.0);
                        next.push(q);
                    }
                }
                pts = next;
            }
            out.extend(pts);
        }
        out
    }
}

/// Nodes and weights on `[-1, 1]` by Newton iteration on Legendre polynomials.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            let pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                x[i] = -z;
                w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
                break;
            }
        }
    }
    (x, w)
}

fn lift_point(target_pt: &[f64], src_dim: usize, skip: &[usize]) -> Vec<f64> {
    let mut p = vec![0.0; src_dim];
    let mut k = 0;
    for (v, slot) in p.iter_mut().enumerate() {
        if !skip.contains(&v) {
            *slot = target_pt[k];
            k += 1;
        }
    }
    p
}

fn collapse(m: Wedge, sel: Wedge, skip: &[usize]) -> Wedge {
    // drop the selected bits and compress the rest
    let rest = m & !sel;
    let mut out = 0u64;
    let mut k = 0;
    for v in 0..64usize {
        if skip.contains(&v) {
            continue;
        }
        if rest & (1 << v) != 0 {
            out |= 1 << k;
        }
        k += 1;
        if (rest >> v) == 0 {
            break;
        }
    }
    out
}

fn quad_eval(src: &NumericForm, vars: &[usize], bounds: &[(Q, Q)], order: usize, pt: &[f64]) -> Coeffs {
    let sel: Wedge = vars.iter().fold(0, |a, v| a | (1 << v));
    let (gx, gw) = gauss_legendre(order);
    // per variable: list of (node, weight) over all cells of its breakpoints
    let rules: Vec<Vec<(f64, f64)>> = vars
        .iter()
        .zip(bounds)
        .map(|(v, (lo, hi))| {
            let mut edges = vec![to_f64(lo)];
            if let Some(bs) = src.grid.breaks.get(v) {
                edges.extend(bs.iter().filter(|b| *b > lo && *b < hi).map(to_f64));
            }
            edges.push(to_f64(hi));
            // trig factors of periodic coordinates need a few panels per period
            let periodic = src.space.coords[*v].kind == CoordKind::Periodic;
            let mut r = Vec::new();
            for e in edges.windows(2) {
                let panels = if periodic { ((MIN_PERIODIC_PANELS as f64 * (e[1] - e[0])).ceil() as usize).max(1) } else { 1 };
                for k in 0..panels {
                    let h = (e[1] - e[0]) / panels as f64;
                    let a = e[0] + h * k as f64;
                    for (x, w) in gx.iter().zip(&gw) {
                        r.push((a + h * (x + 1.0) / 2.0, w * h / 2.0));
                    }
                }
            }
            r
        })
        .collect();
    let base = lift_point(pt, src.space.dim(), vars);
    let mut out = Coeffs::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let mut p = base.clone();
        let mut weight = 1.0;
        for (k, v) in vars.iter().enumerate() {
            let (x, w) = rules[k][idx[k]];
            p[*v] = x;
            weight *= w;
        }
        for (m, c) in src.eval(&p) {
            if m & sel == sel {
                let s = if extract_sign(m, sel) { -1.0 } else { 1.0 };
                *out.entry(collapse(m, sel, vars)).or_insert(0.0) += s * weight * c;
            }
        }
        // odometer
        let mut k = vars.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < rules[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn simplex_eval(src: &NumericForm, order: usize, pt: &[f64]) -> Coeffs {
    let vars = src.space.barycentric_vars();
    let p = vars.len();
    let sel: Wedge = vars.iter().fold(0, |a, v| a | (1 << v));
    let (gx, gw) = gauss_legendre(order);
    let base = lift_point(pt, src.space.dim(), &vars);
    let mut out = Coeffs::new();
    if p == 0 {
        return src.eval(&base);
    }
    let mut idx = vec![0usize; p];
    loop {
        let mut q = base.clone();
        let mut weight = 1.0;
        let mut used = 0.0;
        for k in 0..p {
            let u = (gx[idx[k]] + 1.0) / 2.0;
            let room = 1.0 - used;
            let t = room * u;
            weight *= gw[idx[k]] / 2.0 * room;
            q[vars[k]] = t;
            used += t;
        }
        for (m, c) in src.eval(&q) {
            if m & sel == sel {
                let s = if extract_sign(m, sel) { -1.0 } else { 1.0 };
                *out.entry(collapse(m, sel, &vars)).or_insert(0.0) += s * weight * c;
            }
        }
        let mut k = p;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < gx.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

impl FormValue for NumericForm {
    fn from_exact(e: &ExteriorForm) -> Self {
        NumericForm::from_exact(e)
    }

    fn embed(&self, target: &Space) -> Result<Self> {
        if self.space.same_coords(target) {
            return Ok(self.clone());
        }
        let subs = self.space.coords.iter().map(|c| ExteriorForm::coordinate(target, &c.name)).collect::<Result<Vec<_>>>()?;
        self.pullback_exact(target, &subs)
    }

    fn pullback_exact(&self, target: &Space, subs: &[ExteriorForm]) -> Result<Self> {
        let subs: Vec<NumericForm> = subs.iter().map(NumericForm::from_exact).collect();
        self.pullback(target, &subs)
    }

    fn integrate_simplex_ord(&self, order: usize) -> Result<Self> {
        self.integrate_simplex(order)
    }

    fn integrate_box(&self, vars: &[usize], bx: &[(usize, Q, Q)], order: usize) -> Result<Self> {
        let bounds = vars
            .iter()
            .map(|v| bx.iter().find(|(w, _, _)| w == v).map(|(_, a, b)| (a.clone(), b.clone())).unwrap_or_else(|| self.space.coords[*v].domain()))
            .collect();
        self.integrate_bounded(vars, bounds, order)
    }

    fn space(&self) -> &Space {
        &self.space
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn zero_like(space: &Space, degree: usize) -> Self {
        NumericForm::zero(space, degree)
    }

    fn add(&self, other: &Self) -> Result<Self> {
        NumericForm::add(self, other)
    }

    fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    fn scale_q(&self, c: &Q) -> Self {
        self.scale(to_f64(c))
    }

    fn d(&self) -> Result<Self> {
        NumericForm::d(self)
    }

    fn wedge(&self, other: &Self) -> Result<Self> {
        NumericForm::wedge(self, other)
    }

    fn residual_on(&self, boxes: &[Vec<(usize, Q, Q)>]) -> Residual {
        let mut worst = 0.0f64;
        for p in self.sample_points(boxes) {
            for c in self.eval(&p).values() {
                worst = worst.max(c.abs());
            }
        }
        Residual { exact_zero: None, max_abs: worst }
    }

    fn integrality_on(&self, boxes: &[Vec<(usize, Q, Q)>]) -> Residual {
        let pts = self.sample_points(boxes);
        let v0 = self.eval(&pts[0]).get(&0).copied().unwrap_or(0.0).round();
        let mut worst = 0.0f64;
        for p in pts {
            let c = self.eval(&p);
            let v = c.get(&0).copied().unwrap_or(0.0);
            worst = worst.max((v - v0).abs());
        }
        Residual { exact_zero: None, max_abs: worst }
    }

    fn sample_on(&self, boxes: &[Vec<(usize, Q, Q)>]) -> f64 {
        let pt = super::value::box_center(&self.space, &boxes[0]);
        self.eval(&pt).get(&0).copied().unwrap_or(0.0)
    }
}
