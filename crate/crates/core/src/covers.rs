//! Manifold models, good covers, nerves and partitions of unity.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{Coord, CoordinateSpace, ExteriorForm, Poly, Space};
use crate::scalar::{frac, q, Q};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    Circle,
    Interval { lo: Q, hi: Q },
}

/// A product of circles and closed intervals, one named coordinate per factor.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ManifoldModel {
    pub name: String,
    pub factors: Vec<(String, Factor)>,
}

impl ManifoldModel {
    pub fn circle(coord: &str) -> Self {
        ManifoldModel { name: "S1".into(), factors: vec![(coord.into(), Factor::Circle)] }
    }

    pub fn torus(coords: &[&str]) -> Self {
        ManifoldModel {
            name: format!("T{}", coords.len()),
            factors: coords.iter().map(|c| (c.to_string(), Factor::Circle)).collect(),
        }
    }

    pub fn cube(coords: &[(&str, Q, Q)]) -> Self {
        ManifoldModel {
            name: format!("B{}", coords.len()),
            factors: coords.iter().map(|(c, lo, hi)| (c.to_string(), Factor::Interval { lo: lo.clone(), hi: hi.clone() })).collect(),
        }
    }

    /// Products flatten.
    pub fn product(a: &ManifoldModel, b: &ManifoldModel) -> Self {
        let mut factors = a.factors.clone();
        factors.extend(b.factors.iter().cloned());
        ManifoldModel { name: format!("{}×{}", a.name, b.name), factors }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn space(&self) -> Result<Space> {
        let coords = self
            .factors
            .iter()
            .map(|(n, f)| match f {
                Factor::Circle => Coord::periodic(n),
                Factor::Interval { lo, hi } => Coord::affine(n, lo.clone(), hi.clone()),
            })
            .collect();
        CoordinateSpace::new(&self.name, coords)
    }

    pub fn names(&self) -> Vec<&str> {
        self.factors.iter().map(|(n, _)| n.as_str()).collect()
    }
}

/// The open set of one cover element in one factor.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorSet {
    Full,
    /// Arc `(lo, hi)` of the unit circle, `0 < hi − lo < 1`, read mod 1.
    Arc { lo: Q, hi: Q },
    /// Relatively open subinterval of an interval factor.
    Interval { lo: Q, hi: Q },
}

impl FactorSet {
    /// Disjoint open pieces inside the factor's fundamental domain.
    fn pieces(&self, factor: &Factor) -> Vec<(Q, Q)> {
        match (self, factor) {
            (FactorSet::Full, Factor::Circle) => vec![(q(0), q(1))],
            (FactorSet::Full, Factor::Interval { lo, hi }) => vec![(lo.clone(), hi.clone())],
            (FactorSet::Arc { lo, hi }, _) => {
                let shift = lo.floor();
                let a = lo - &shift;
                let b = hi - &shift;
                if b <= q(1) {
                    vec![(a, b)]
                } else {
                    vec![(q(0), b - q(1)), (a, q(1))]
                }
            }
            (FactorSet::Interval { lo, hi }, _) => vec![(lo.clone(), hi.clone())],
        }
    }

    /// Centre of the set, used for choosing branches of periodic lifts.
    pub fn center(&self) -> Q {
        match self {
            FactorSet::Full => frac(1, 2),
            FactorSet::Arc { lo, hi } | FactorSet::Interval { lo, hi } => (lo + hi) * frac(1, 2),
        }
    }
}

fn intersect_pieces(a: &[(Q, Q)], b: &[(Q, Q)]) -> Vec<(Q, Q)> {
    let mut out = Vec::new();
    for (a0, a1) in a {
        for (b0, b1) in b {
            let lo = if a0 > b0 { a0 } else { b0 };
            let hi = if a1 < b1 { a1 } else { b1 };
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
        }
    }
    out.sort();
    out
}

/// Connected components of a union of disjoint open pieces of one factor.
fn components(pieces: &[(Q, Q)], factor: &Factor) -> usize {
    let n = pieces.len();
    if n >= 2 && *factor == Factor::Circle && pieces[0].0.is_zero() && pieces[n - 1].1 == q(1) {
        n - 1
    } else {
        n
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverElement {
    pub label: String,
    pub sets: Vec<FactorSet>,
}

#[derive(Clone, Debug)]
pub struct GoodCover {
    pub model: ManifoldModel,
    pub elements: Vec<CoverElement>,
    space: Space,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PouKind {
    /// Piecewise linear ramps.
    Pl,
    /// C¹ piecewise cubic ramps `3u² − 2u³`.
    #[default]
    C1cubic,
}

/// One bump function per cover element, summing to 1 exactly.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    pub phis: Vec<ExteriorForm>,
}

impl PartitionOfUnity {
    /// `Σφ_j − 1`, which is identically zero for a valid partition.
    pub fn defect(&self) -> Result<ExteriorForm> {
        let space = self.phis[0].space().clone();
        let mut acc = ExteriorForm::constant(&space, q(-1));
        for p in &self.phis {
            acc = acc.add(p)?;
        }
        Ok(acc)
    }

    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }
}

impl GoodCover {
    pub fn new(model: ManifoldModel, elements: Vec<CoverElement>) -> Result<Self> {
        let space = model.space()?;
        for e in &elements {
            if e.sets.len() != model.dim() {
                return Err(Error::BadCover(format!("element `{}` has wrong factor count", e.label)));
            }
        }
        Ok(GoodCover { model, elements, space })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Intersection of the given elements as a list of open boxes `(var, lo, hi)`.
    /// Empty list means empty intersection.
    pub fn intersection(&self, idx: &[usize]) -> Vec<Vec<(usize, Q, Q)>> {
        let mut per_factor: Vec<Vec<(Q, Q)>> = Vec::with_capacity(self.model.dim());
        for (f, (_, factor)) in self.model.factors.iter().enumerate() {
            let mut acc = FactorSet::Full.pieces(factor);
            for i in idx {
                acc = intersect_pieces(&acc, &self.elements[*i].sets[f].pieces(factor));
            }
            if acc.is_empty() {
                return Vec::new();
            }
            per_factor.push(acc);
        }
        let mut boxes: Vec<Vec<(usize, Q, Q)>> = vec![Vec::new()];
        for (f, pieces) in per_factor.into_iter().enumerate() {
            let mut next = Vec::new();
            for b in &boxes {
                for (lo, hi) in &pieces {
                    let mut nb = b.clone();
                    nb.push((f, lo.clone(), hi.clone()));
                    next.push(nb);
                }
            }
            boxes = next;
        }
        boxes
    }

    pub fn meets(&self, idx: &[usize]) -> bool {
        !self.intersection(idx).is_empty()
    }

    /// Check that the sets cover the model and that every intersection of up to
    /// `depth` distinct elements is empty or connected (products of intervals).
    pub fn validate(&self, depth: usize) -> Result<()> {
        for (f, (name, factor)) in self.model.factors.iter().enumerate() {
            let mut pts: BTreeSet<Q> = BTreeSet::new();
            let mut all: Vec<(Q, Q)> = Vec::new();
            for e in &self.elements {
                for p in e.sets[f].pieces(factor) {
                    pts.insert(p.0.clone());
                    pts.insert(p.1.clone());
                    all.push(p);
                }
            }
            let (lo, hi) = match factor {
                Factor::Circle => (q(0), q(1)),
                Factor::Interval { lo, hi } => (lo.clone(), hi.clone()),
            };
            pts.insert(lo.clone());
            pts.insert(hi.clone());
            // every breakpoint in the domain lies strictly inside some piece, or is a domain end
            for x in pts.iter().filter(|x| **x >= lo && **x <= hi) {
                let inside = all.iter().any(|(a, b)| a < x && x < b);
                let end_ok = (*x == lo && all.iter().any(|(a, _)| *a == lo)) || (*x == hi && all.iter().any(|(_, b)| *b == hi));
                let wrap_ok = *factor == Factor::Circle
                    && (x.is_zero() || *x == q(1))
                    && all.iter().any(|(a, _)| a.is_zero())
                    && all.iter().any(|(_, b)| *b == q(1));
                if !(inside || ((end_ok) && *factor != Factor::Circle) || wrap_ok) {
                    return Err(Error::BadCover(format!("point {x} of `{name}` is not covered")));
                }
            }
        }
        let n = self.len();
        let mut stack: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        while let Some(s) = stack.pop() {
            for (f, (name, factor)) in self.model.factors.iter().enumerate() {
                let mut acc = FactorSet::Full.pieces(factor);
                for i in &s {
                    acc = intersect_pieces(&acc, &self.elements[*i].sets[f].pieces(factor));
                }
                if components(&acc, factor) > 1 {
                    return Err(Error::BadCover(format!("intersection {s:?} is disconnected along `{name}`")));
                }
            }
            if s.len() < depth {
                for j in s[s.len() - 1] + 1..n {
                    let mut t = s.clone();
                    t.push(j);
                    if self.meets(&t) {
                        stack.push(t);
                    }
                }
            }
        }
        Ok(())
    }

    /// A lift of periodic coordinate `name` to ℝ that is continuous on element `elem`
    /// (its single jump sits opposite the element's centre).
    pub fn local_lift(&self, elem: usize, name: &str) -> Result<ExteriorForm> {
        let v = self.space.index_of(name)?;
        let f = self.model.factors.iter().position(|(n, _)| n == name).expect("model coordinate");
        let nv = self.space.dim();
        let x = Poly::var(nv, v);
        if self.model.factors[f].1 != Factor::Circle {
            return Ok(ExteriorForm::scalar(&self.space, x));
        }
        let c = self.elements[elem].sets[f].center();
        // value stays within (c − 1/2, c + 1/2]
        let cut = c.clone() + frac(1, 2);
        let k = cut.floor();
        let r = &cut - &k;
        let shift = |m: Q| x.add(&Poly::constant(nv, m));
        if r.is_zero() {
            return Ok(ExteriorForm::scalar(&self.space, shift(k - q(1))));
        }
        ExteriorForm::piecewise_scalar(&self.space, v, vec![r], vec![shift(k.clone()), shift(k - q(1))])
    }
}

/// Cover of a single factor together with its one-variable bumps.
struct FactorCover {
    sets: Vec<FactorSet>,
    /// `(breakpoints, pieces)` per element; pieces are polynomials in the factor variable.
    bumps: Vec<(Vec<Q>, Vec<Poly>)>,
}

fn ramp(kind: PouKind, a: &Q, width: &Q, rising: bool) -> Poly {
    // u = (x − a)/width on one variable
    let u = Poly::var(1, 0).scale(&(q(1) / width)).add(&Poly::constant(1, -(a / width)));
    let s = match kind {
        PouKind::Pl => u,
        PouKind::C1cubic => u.pow(2).scale(&q(3)).sub(&u.pow(3).scale(&q(2))),
    };
    if rising {
        s
    } else {
        Poly::one(1).sub(&s)
    }
}

/// Bumps over `[lo, hi]` with ramps centred at `cuts`: element `k` is 1 between
/// cut `k−1` and cut `k`. `cuts` are sorted and separated by more than `width`.
fn ramp_bumps(kind: PouKind, cuts: &[Q], width: &Q, periodic: bool) -> Vec<(Vec<Q>, Vec<Poly>)> {
    let half = width * frac(1, 2);
    let mut breaks = Vec::new();
    for c in cuts {
        breaks.push(c - &half);
        breaks.push(c + &half);
    }
    let m = cuts.len();
    // number of elements
    let ne = if periodic { m } else { m + 1 };
    let mut out = Vec::with_capacity(ne);
    for k in 0..ne {
        // cell 2i+1 is the ramp at cut i; cells 2i (and 2m) are plateaus
        let mut pieces = Vec::with_capacity(2 * m + 1);
        for cell in 0..=2 * m {
            let p = if cell % 2 == 1 {
                let i = cell / 2;
                let a = &cuts[i] - &half;
                // element k rises at cut k−1 and falls at cut k
                let rises = if periodic { (i + 1) % m == k } else { i + 1 == k };
                let falls = i == k;
                if rises {
                    ramp(kind, &a, width, true)
                } else if falls {
                    ramp(kind, &a, width, false)
                } else {
                    Poly::zero(1)
                }
            } else {
                // plateau between cut i−1 and cut i
                let i = cell / 2;
                let owner = if periodic { i % m } else { i };
                if owner == k {
                    Poly::one(1)
                } else {
                    Poly::zero(1)
                }
            };
            pieces.push(p);
        }
        out.push((breaks.clone(), pieces));
    }
    out
}

fn circle_factor(n: usize, delta: &Q, kind: PouKind) -> Result<FactorCover> {
    if n < 3 {
        return Err(Error::BadCover("a circle cover needs at least 3 arcs".into()));
    }
    let nq = q(n as i64);
    if *delta <= q(0) {
        return Err(Error::BadCover("overlap must be positive".into()));
    }
    if *delta >= q(1) / (q(2) * &nq) {
        return Err(Error::BadCover(format!("overlap {delta} makes three consecutive arcs meet")));
    }
    let sets = (0..n)
        .map(|j| {
            let c = q(j as i64) / &nq;
            let r = q(1) / (q(2) * &nq) + delta;
            FactorSet::Arc { lo: &c - &r, hi: c + r }
        })
        .collect();
    // boundaries (j + 1/2)/n; element j rises at cut j−1 and falls at cut j
    let cuts: Vec<Q> = (0..n).map(|j| (q(j as i64) + frac(1, 2)) / &nq).collect();
    let mut bumps = ramp_bumps(kind, &cuts, delta, true);
    // on the circle the first plateau [0, cut_0) belongs to element 0 and the last to element 0 too
    for b in bumps.iter_mut().take(n) {
        let last = b.1.len() - 1;
        b.1[last] = b.1[0].clone();
    }
    Ok(FactorCover { sets, bumps })
}

fn interval_factor(lo: &Q, hi: &Q, m: usize, delta: &Q, kind: PouKind) -> Result<FactorCover> {
    if m == 1 {
        return Ok(FactorCover { sets: vec![FactorSet::Full], bumps: vec![(Vec::new(), vec![Poly::one(1)])] });
    }
    let h = (hi - lo) / q(m as i64);
    if *delta <= q(0) || delta * q(2) >= h {
        return Err(Error::BadCover(format!("overlap {delta} incompatible with {m} interval pieces")));
    }
    let sets = (0..m)
        .map(|k| {
            let a = if k == 0 { lo.clone() } else { lo + &h * q(k as i64) - delta };
            let b = if k + 1 == m { hi.clone() } else { lo + &h * q(k as i64 + 1) + delta };
            // end pieces reach the closed ends; treated as relatively open
            FactorSet::Interval { lo: a, hi: b }
        })
        .collect();
    let cuts: Vec<Q> = (1..m).map(|k| lo + &h * q(k as i64)).collect();
    Ok(FactorCover { sets, bumps: ramp_bumps(kind, &cuts, delta, false) })
}

fn factor_bump_form(space: &Space, var: usize, bump: &(Vec<Q>, Vec<Poly>)) -> Result<ExteriorForm> {
    let nv = space.dim();
    let mut map = vec![None; 1];
    map[0] = Some(var);
    let pieces = bump.1.iter().map(|p| p.reindex(&map, nv)).collect::<Result<Vec<_>>>()?;
    if bump.0.is_empty() {
        return Ok(ExteriorForm::scalar(space, pieces[0].clone()));
    }
    Ok(ExteriorForm::piecewise_scalar(space, var, bump.0.clone(), pieces)?.simplify())
}

fn assemble(model: ManifoldModel, factors: Vec<FactorCover>, labels: impl Fn(&[usize]) -> String) -> Result<(GoodCover, PartitionOfUnity)> {
    let space = model.space()?;
    let mut elements = Vec::new();
    let mut phis = Vec::new();
    let sizes: Vec<usize> = factors.iter().map(|f| f.sets.len()).collect();
    let total: usize = sizes.iter().product();
    let factor_forms: Vec<Vec<ExteriorForm>> = factors
        .iter()
        .enumerate()
        .map(|(v, fc)| fc.bumps.iter().map(|b| factor_bump_form(&space, v, b)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    for flat in 0..total {
        let mut multi = vec![0; sizes.len()];
        let mut r = flat;
        for k in (0..sizes.len()).rev() {
            multi[k] = r % sizes[k];
            r /= sizes[k];
        }
        let sets = multi.iter().enumerate().map(|(f, i)| factors[f].sets[*i].clone()).collect();
        let mut phi = ExteriorForm::constant(&space, q(1));
        for (f, i) in multi.iter().enumerate() {
            phi = phi.wedge(&factor_forms[f][*i])?;
        }
        elements.push(CoverElement { label: labels(&multi), sets });
        phis.push(phi);
    }
    Ok((GoodCover::new(model, elements)?, PartitionOfUnity { phis }))
}

/// `n` arcs of length `1/n + 2δ` centred at `j/n`, with ramps of width `δ`
/// around the midpoints `(j + 1/2)/n`.
pub fn build_circle_cover(coord: &str, n: usize, delta: &Q, kind: PouKind) -> Result<(GoodCover, PartitionOfUnity)> {
    let fc = circle_factor(n, delta, kind)?;
    let cover = assemble(ManifoldModel::circle(coord), vec![fc], |m| format!("U{}", m[0]))?;
    cover.0.validate(3)?;
    Ok(cover)
}

/// Product of circle covers, one per coordinate, lexicographic in coordinate order.
pub fn build_torus_cover(coords: &[&str], n: usize, delta: &Q, kind: PouKind) -> Result<(GoodCover, PartitionOfUnity)> {
    let fcs = coords.iter().map(|_| circle_factor(n, delta, kind)).collect::<Result<Vec<_>>>()?;
    assemble(ManifoldModel::torus(coords), fcs, |m| format!("U{m:?}"))
}

/// Box cover with `pieces` overlapping subintervals per axis (1 = single chart).
pub fn build_box_cover(coords: &[(&str, Q, Q)], pieces: usize, delta: &Q, kind: PouKind) -> Result<(GoodCover, PartitionOfUnity)> {
    let fcs = coords
        .iter()
        .map(|(_, lo, hi)| interval_factor(lo, hi, pieces, delta, kind))
        .collect::<Result<Vec<_>>>()?;
    assemble(ManifoldModel::cube(coords), fcs, |m| format!("B{m:?}"))
}

/// Product cover on `first × second` (coordinates of `first` come first).
/// Element `(i, j)` with `i` indexing `major`'s cover is stored at `i·n_minor + j`.
pub fn product_cover(
    first: (&GoodCover, &PartitionOfUnity),
    second: (&GoodCover, &PartitionOfUnity),
    major_is_second: bool,
) -> Result<(GoodCover, PartitionOfUnity)> {
    let model = ManifoldModel::product(&first.0.model, &second.0.model);
    let space = model.space()?;
    let (n1, n2) = (first.0.len(), second.0.len());
    let mut elements = Vec::with_capacity(n1 * n2);
    let mut phis = Vec::with_capacity(n1 * n2);
    let f_phis: Vec<ExteriorForm> = first.1.phis.iter().map(|p| p.embed(&space)).collect::<Result<_>>()?;
    let s_phis: Vec<ExteriorForm> = second.1.phis.iter().map(|p| p.embed(&space)).collect::<Result<_>>()?;
    let (outer, inner) = if major_is_second { (n2, n1) } else { (n1, n2) };
    for o in 0..outer {
        for i in 0..inner {
            let (a, b) = if major_is_second { (i, o) } else { (o, i) };
            let mut sets = first.0.elements[a].sets.clone();
            sets.extend(second.0.elements[b].sets.iter().cloned());
            let label = if major_is_second {
                format!("{}×{}", second.0.elements[b].label, first.0.elements[a].label)
            } else {
                format!("{}×{}", first.0.elements[a].label, second.0.elements[b].label)
            };
            elements.push(CoverElement { label, sets });
            phis.push(f_phis[a].wedge(&s_phis[b])?);
        }
    }
    Ok((GoodCover::new(model, elements)?, PartitionOfUnity { phis }))
}

/// Ordered tuples `i_0 ≤ … ≤ i_p` with nonempty common intersection, degenerate ones included.
#[derive(Debug)]
pub struct Nerve {
    cover: Arc<GoodCover>,
    levels: Mutex<Vec<Arc<Vec<Vec<usize>>>>>,
    lookup: Mutex<Vec<Arc<HashMap<Vec<usize>, usize>>>>,
}

impl Nerve {
    pub fn new(cover: Arc<GoodCover>) -> Self {
        let level0: Vec<Vec<usize>> = (0..cover.len()).map(|i| vec![i]).collect();
        let look0 = level0.iter().enumerate().map(|(k, t)| (t.clone(), k)).collect();
        Nerve { cover, levels: Mutex::new(vec![Arc::new(level0)]), lookup: Mutex::new(vec![Arc::new(look0)]) }
    }

    pub fn cover(&self) -> &Arc<GoodCover> {
        &self.cover
    }

    fn ensure(&self, p: usize) {
        let mut levels = self.levels.lock().unwrap();
        let mut lookup = self.lookup.lock().unwrap();
        while levels.len() <= p {
            let prev = levels.last().unwrap().clone();
            let mut next = Vec::new();
            for t in prev.iter() {
                let last = *t.last().unwrap();
                for j in last..self.cover.len() {
                    let mut distinct: Vec<usize> = t.clone();
                    distinct.push(j);
                    distinct.dedup();
                    if j == last || self.cover.meets(&distinct) {
                        let mut nt = t.clone();
                        nt.push(j);
                        next.push(nt);
                    }
                }
            }
            let look = next.iter().enumerate().map(|(k, t)| (t.clone(), k)).collect();
            levels.push(Arc::new(next));
            lookup.push(Arc::new(look));
        }
    }

    pub fn level(&self, p: usize) -> Arc<Vec<Vec<usize>>> {
        self.ensure(p);
        self.levels.lock().unwrap()[p].clone()
    }

    pub fn count(&self, p: usize) -> usize {
        self.level(p).len()
    }

    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        if tuple.is_empty() {
            return None;
        }
        self.ensure(tuple.len() - 1);
        self.lookup.lock().unwrap()[tuple.len() - 1].get(tuple).copied()
    }

    pub fn tuple(&self, p: usize, idx: usize) -> Vec<usize> {
        self.level(p)[idx].clone()
    }

    /// Index of `ε_i` applied to tuple `idx` of level `p`.
    pub fn face(&self, p: usize, idx: usize, i: usize) -> Result<usize> {
        if i > p || p == 0 {
            return Err(Error::IndexOutOfRange { index: i, level: p });
        }
        let mut t = self.tuple(p, idx);
        t.remove(i);
        Ok(self.index_of(&t).expect("faces of nerve tuples are nerve tuples"))
    }

    /// Index of `η_j` (repeat entry `j`) applied to tuple `idx` of level `p`.
    pub fn degeneracy(&self, p: usize, idx: usize, j: usize) -> Result<usize> {
        if j > p {
            return Err(Error::IndexOutOfRange { index: j, level: p });
        }
        let mut t = self.tuple(p, idx);
        t.insert(j, t[j]);
        Ok(self.index_of(&t).expect("degeneracies of nerve tuples are nerve tuples"))
    }

    pub fn is_degenerate(tuple: &[usize]) -> bool {
        tuple.windows(2).any(|w| w[0] == w[1])
    }

    pub fn nondegenerate(&self, p: usize) -> Vec<usize> {
        self.level(p).iter().enumerate().filter(|(_, t)| !Nerve::is_degenerate(t)).map(|(k, _)| k).collect()
    }

    /// Intersection region of tuple `idx` at level `p` as open boxes.
    pub fn region(&self, p: usize, idx: usize) -> Vec<Vec<(usize, Q, Q)>> {
        let mut t = self.tuple(p, idx);
        t.dedup();
        self.cover.intersection(&t)
    }
}

/// Tuple-level face map (delete entry `i`).
pub fn face_tuple(t: &[usize], i: usize) -> Vec<usize> {
    let mut out = t.to_vec();
    out.remove(i);
    out
}

/// Tuple-level degeneracy map (repeat entry `j`).
pub fn degeneracy_tuple(t: &[usize], j: usize) -> Vec<usize> {
    let mut out = t.to_vec();
    out.insert(j, t[j]);
    out
}

/// Reduce a rational into `[0, 1)`.
pub fn frac_part(x: &Q) -> Q {
    let n = x.numer().div_floor(x.denom());
    x - Q::from_integer(n)
}
