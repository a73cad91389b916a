//! Čech–de Rham cochains, Deligne cocycles, curvature, Bockstein classes and periods.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::covers::{Nerve, PartitionOfUnity};
use crate::error::{Error, Result};
use crate::exterior::{ExteriorForm, FormValue, Poly, Residual, Space};
use crate::scalar::{factorial, q, Q};

/// A `(p, q)` cochain: one degree-`q` form per level-`p` nerve tuple. Each value is
/// stored as a form on the whole model but only its restriction to the tuple's
/// intersection carries meaning.
#[derive(Clone, Debug)]
pub struct CechCochain<F: FormValue = ExteriorForm> {
    nerve: Arc<Nerve>,
    space: Space,
    p: usize,
    q: usize,
    values: Vec<F>,
}

impl<F: FormValue> CechCochain<F> {
    pub fn zero(nerve: &Arc<Nerve>, space: &Space, p: usize, q: usize) -> Self {
        let n = nerve.count(p);
        CechCochain { nerve: nerve.clone(), space: space.clone(), p, q, values: vec![F::zero_like(space, q); n] }
    }

    /// Build from a function of the tuple.
    pub fn from_fn(nerve: &Arc<Nerve>, space: &Space, p: usize, q: usize, mut f: impl FnMut(&[usize]) -> Result<F>) -> Result<Self> {
        let level = nerve.level(p);
        let mut values = Vec::with_capacity(level.len());
        for t in level.iter() {
            let v = f(t)?;
            if v.degree() != q && !(v.degree() == 0 && q == 0) {
                return Err(Error::DegreeMismatch { expected: q, found: v.degree() });
            }
            values.push(v);
        }
        Ok(CechCochain { nerve: nerve.clone(), space: space.clone(), p, q, values })
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn nerve(&self) -> &Arc<Nerve> {
        &self.nerve
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> &F {
        &self.values[idx]
    }

    pub fn get(&self, tuple: &[usize]) -> Option<&F> {
        if tuple.len() != self.p + 1 {
            return None;
        }
        self.nerve.index_of(tuple).map(|i| &self.values[i])
    }

    pub fn set(&mut self, tuple: &[usize], v: F) -> Result<()> {
        let i = self
            .nerve
            .index_of(tuple)
            .ok_or_else(|| Error::Precondition(format!("{tuple:?} is not a nerve tuple")))?;
        self.values[i] = v;
        Ok(())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.q != other.q {
            return Err(Error::DegreeMismatch { expected: self.p * 100 + self.q, found: other.p * 100 + other.q });
        }
        if !Arc::ptr_eq(&self.nerve, &other.nerve) {
            return Err(Error::Precondition("cochains on different nerves".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(CechCochain { values, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CechCochain { values: self.values.iter().map(|v| v.neg()).collect(), ..self.clone() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        CechCochain { values: self.values.iter().map(|v| v.scale_q(c)).collect(), ..self.clone() }
    }

    pub fn map(&self, q: usize, f: impl Fn(&F) -> Result<F>) -> Result<Self> {
        let values = self.values.iter().map(f).collect::<Result<_>>()?;
        Ok(CechCochain { q, values, ..self.clone() })
    }

    /// de Rham differential applied valuewise (no sign).
    pub fn d(&self) -> Result<Self> {
        self.map(self.q + 1, |v| v.d())
    }

    /// `(δ̌c)(i_0…i_{p+1}) = Σ_ν (−1)^ν c(i_0…î_ν…i_{p+1})`.
    pub fn cech_delta(&self) -> Result<Self> {
        let p1 = self.p + 1;
        let level = self.nerve.level(p1);
        let mut values = Vec::with_capacity(level.len());
        for idx in 0..level.len() {
            let mut acc = F::zero_like(&self.space, self.q);
            for nu in 0..=p1 {
                let face = self.nerve.face(p1, idx, nu)?;
                let term = &self.values[face];
                acc = if nu % 2 == 0 { acc.add(term)? } else { acc.sub(term)? };
            }
            values.push(acc);
        }
        Ok(CechCochain { nerve: self.nerve.clone(), space: self.space.clone(), p: p1, q: self.q, values })
    }

    /// Components of `D c = δ̌c + (−1)^p dc`: the `(p+1, q)` and `(p, q+1)` parts.
    pub fn total_d(&self) -> Result<(Self, Self)> {
        let dc = self.d()?;
        let dc = if self.p % 2 == 1 { dc.neg() } else { dc };
        Ok((self.cech_delta()?, dc))
    }

    /// Largest value over non-degenerate tuples, measured on each intersection.
    pub fn residual(&self) -> Residual {
        let mut r = Residual::zero_exact();
        for idx in self.nerve.nondegenerate(self.p) {
            let region = self.nerve.region(self.p, idx);
            r = r.combine(&self.values[idx].residual_on(&region));
        }
        r
    }

    /// Values vanish on degenerate tuples.
    pub fn is_normalized(&self) -> bool {
        let level = self.nerve.level(self.p);
        level.iter().enumerate().filter(|(_, t)| Nerve::is_degenerate(t)).all(|(idx, _)| {
            let region = self.nerve.region(self.p, idx);
            self.values[idx].residual_on(&region).passes(0.0)
        })
    }

    /// Zero out degenerate tuples.
    pub fn normalized(&self) -> Self {
        let level = self.nerve.level(self.p);
        let values = self
            .values
            .iter()
            .zip(level.iter())
            .map(|(v, t)| if Nerve::is_degenerate(t) { F::zero_like(&self.space, self.q) } else { v.clone() })
            .collect();
        CechCochain { values, ..self.clone() }
    }
}

/// `ε*a`: the restriction of a global form to every cover element.
pub fn epsilon_star<F: FormValue>(nerve: &Arc<Nerve>, a: &F) -> CechCochain<F> {
    let n = nerve.count(0);
    CechCochain { nerve: nerve.clone(), space: a.space().clone(), p: 0, q: a.degree(), values: vec![a.clone(); n] }
}

/// An element of the total complex of degree `n`: components of bidegree `(p, n−p)`.
#[derive(Clone, Debug)]
pub struct TotalCochain<F: FormValue = ExteriorForm> {
    pub parts: Vec<CechCochain<F>>,
}

impl<F: FormValue> TotalCochain<F> {
    pub fn degree(&self) -> usize {
        self.parts.len() - 1
    }

    /// `D` on the total complex.
    pub fn total_d(&self) -> Result<TotalCochain<F>> {
        let n = self.degree();
        let nerve = self.parts[0].nerve.clone();
        let space = self.parts[0].space.clone();
        let mut out: Vec<CechCochain<F>> = (0..=n + 1).map(|p| CechCochain::zero(&nerve, &space, p, n + 1 - p)).collect();
        for c in &self.parts {
            let (dh, dv) = c.total_d()?;
            out[c.p + 1] = out[c.p + 1].add(&dh)?;
            out[c.p] = out[c.p].add(&dv)?;
        }
        Ok(TotalCochain { parts: out })
    }

    pub fn residual(&self) -> Residual {
        self.parts.iter().fold(Residual::zero_exact(), |r, c| r.combine(&c.residual()))
    }
}

/// An `ℓ`-gerbe with connection: `ω^ν` of bidegree `(ν, ℓ−ν)`, `θ ≡ −ω^ℓ mod ℤ`.
#[derive(Clone, Debug)]
pub struct DeligneCocycle<F: FormValue = ExteriorForm> {
    pub level: usize,
    pub omega: Vec<CechCochain<F>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionResidual {
    pub name: String,
    pub exact_zero: Option<bool>,
    pub max_abs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeligneReport {
    pub conditions: Vec<ConditionResidual>,
    pub integrality: ConditionResidual,
    pub curvature_consistency: ConditionResidual,
}

impl DeligneReport {
    pub fn passes(&self, tol: f64) -> bool {
        let ok = |c: &ConditionResidual| match c.exact_zero {
            Some(z) => z,
            None => c.max_abs <= tol,
        };
        self.conditions.iter().all(ok) && ok(&self.integrality) && ok(&self.curvature_consistency)
    }

    pub fn max_residual(&self) -> f64 {
        self.conditions
            .iter()
            .chain([&self.integrality, &self.curvature_consistency])
            .map(|c| c.max_abs)
            .fold(0.0, f64::max)
    }
}

fn cond(name: &str, r: Residual) -> ConditionResidual {
    ConditionResidual { name: name.into(), exact_zero: r.exact_zero, max_abs: r.max_abs }
}

impl<F: FormValue> DeligneCocycle<F> {
    pub fn new(omega: Vec<CechCochain<F>>) -> Result<Self> {
        let level = omega.len().checked_sub(1).ok_or_else(|| Error::Precondition("empty connection".into()))?;
        for (nu, w) in omega.iter().enumerate() {
            if w.bidegree() != (nu, level - nu) {
                return Err(Error::DegreeMismatch { expected: level - nu, found: w.q });
            }
        }
        Ok(DeligneCocycle { level, omega })
    }

    pub fn nerve(&self) -> &Arc<Nerve> {
        &self.omega[0].nerve
    }

    /// The real lift `−ω^ℓ` of `θ`.
    pub fn theta(&self) -> CechCochain<F> {
        self.omega[self.level].neg()
    }

    /// `δ̌ω^{ν−1} + (−1)^ν dω^ν` for `ν = 1..ℓ`.
    pub fn condition(&self, nu: usize) -> Result<CechCochain<F>> {
        let a = self.omega[nu - 1].cech_delta()?;
        let b = self.omega[nu].d()?;
        if nu % 2 == 1 {
            a.sub(&b)
        } else {
            a.add(&b)
        }
    }

    /// Check every cocycle condition; failures are reported, not thrown.
    pub fn verify(&self) -> Result<DeligneReport> {
        let mut conditions = Vec::new();
        for nu in 1..=self.level {
            conditions.push(cond(&format!("nu={nu}"), self.condition(nu)?.residual()));
        }
        let top = self.omega[self.level].cech_delta()?;
        let mut integ = Residual::zero_exact();
        for idx in self.nerve().nondegenerate(self.level + 1) {
            let region = self.nerve().region(self.level + 1, idx);
            integ = integ.combine(&top.values[idx].integrality_on(&region));
        }
        // dω^0 agrees on overlaps
        let dw0 = self.omega[0].d()?;
        let curv = dw0.cech_delta()?.residual();
        Ok(DeligneReport {
            conditions,
            integrality: cond("integral top coboundary", integ),
            curvature_consistency: cond("d omega0 global", curv),
        })
    }

    /// Apply the equivalence move `ω ↦ ω + Dη` for a total cochain `η` of degree `ℓ−1`.
    pub fn shifted_by(&self, eta: &TotalCochain<F>) -> Result<Self> {
        let d_eta = eta.total_d()?;
        let omega = self.omega.iter().zip(&d_eta.parts).map(|(w, e)| w.add(e)).collect::<Result<_>>()?;
        DeligneCocycle::new(omega)
    }
}

impl DeligneCocycle<ExteriorForm> {
    /// The 0-gerbe-style cocycle `ω^0 = ε*ω`, higher components zero.
    pub fn from_global(nerve: &Arc<Nerve>, level: usize, w: &ExteriorForm) -> Result<Self> {
        if w.degree() != level {
            return Err(Error::DegreeMismatch { expected: level, found: w.degree() });
        }
        let space = w.space().clone();
        let mut omega = vec![epsilon_star(nerve, w)];
        for nu in 1..=level {
            omega.push(CechCochain::zero(nerve, &space, nu, level - nu));
        }
        DeligneCocycle::new(omega)
    }

    /// The global form `F` with `ε*F = dω^0`, glued with the partition of unity.
    pub fn curvature(&self, pou: &PartitionOfUnity) -> Result<ExteriorForm> {
        let dw0 = self.omega[0].d()?;
        if !dw0.cech_delta()?.residual().passes(0.0) {
            return Err(Error::NotACocycle("dω^0 disagrees on overlaps".into()));
        }
        let mut f = ExteriorForm::zero(&self.omega[0].space, self.level + 1);
        for (j, phi) in pou.phis.iter().enumerate() {
            f = f.add(&phi.wedge(&dw0.values[j])?)?;
        }
        Ok(f.simplify())
    }

    /// `z = −δ̌ω^ℓ` as an integral cochain.
    pub fn bockstein_class(&self) -> Result<IntegralCechCocycle> {
        let top = self.omega[self.level].cech_delta()?.neg();
        let p = self.level + 1;
        let nerve = self.nerve().clone();
        let level = nerve.level(p);
        let mut values = vec![BigInt::zero(); level.len()];
        for (idx, t) in level.iter().enumerate() {
            let region = nerve.region(p, idx);
            let r = top.values[idx].integrality_on(&region);
            if !r.passes(0.0) {
                if Nerve::is_degenerate(t) {
                    continue;
                }
                return Err(Error::Integrality(format!("{t:?}: off by {}", r.max_abs)));
            }
            values[idx] = exact_constant_on(&top.values[idx], &region).to_integer();
        }
        Ok(IntegralCechCocycle { nerve, p, values })
    }
}

/// The constant value of a function that is known to be constant on the region.
fn exact_constant_on(f: &ExteriorForm, region: &[Vec<(usize, Q, Q)>]) -> Q {
    let pt = crate::exterior::value::box_center(f.space(), &region[0]);
    let idx = f.grid().locate_f64(&pt);
    f.cells()[idx].get(&0).and_then(|p| p.as_rational()).unwrap_or_else(|| q(0))
}

/// An integral Čech cochain of bidegree `(p, 0)`.
#[derive(Clone, Debug)]
pub struct IntegralCechCocycle {
    pub nerve: Arc<Nerve>,
    pub p: usize,
    pub values: Vec<BigInt>,
}

impl IntegralCechCocycle {
    pub fn cech_delta(&self) -> Result<IntegralCechCocycle> {
        let p1 = self.p + 1;
        let n = self.nerve.count(p1);
        let mut values = Vec::with_capacity(n);
        for idx in 0..n {
            let mut acc = BigInt::zero();
            for nu in 0..=p1 {
                let f = self.nerve.face(p1, idx, nu)?;
                if nu % 2 == 0 {
                    acc += &self.values[f];
                } else {
                    acc -= &self.values[f];
                }
            }
            values.push(acc);
        }
        Ok(IntegralCechCocycle { nerve: self.nerve.clone(), p: p1, values })
    }

    pub fn is_cocycle(&self) -> Result<bool> {
        let d = self.cech_delta()?;
        Ok(self.nerve.nondegenerate(d.p).iter().all(|i| d.values[*i].is_zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// The collated global `p`-form `Σ_{i_0<…<i_p} z · p! Σ_s (−1)^s φ_{i_s} dφ_{i_0}…∧̂…dφ_{i_p}`,
    /// whose de Rham class is the image of `[z]`.
    pub fn collate(&self, pou: &PartitionOfUnity) -> Result<ExteriorForm> {
        let space = pou.phis[0].space().clone();
        let mut acc = ExteriorForm::zero(&space, self.p);
        let dphi: Vec<ExteriorForm> = pou.phis.iter().map(|f| f.d()).collect();
        let pf = Q::from_integer(factorial(self.p as u32));
        for idx in self.nerve.nondegenerate(self.p) {
            if self.values[idx].is_zero() {
                continue;
            }
            let t = self.nerve.tuple(self.p, idx);
            let mut w = ExteriorForm::zero(&space, self.p);
            for s in 0..=self.p {
                let mut term = pou.phis[t[s]].clone();
                for (r, i) in t.iter().enumerate() {
                    if r != s {
                        term = term.wedge(&dphi[*i])?;
                    }
                }
                w = if s % 2 == 0 { w.add(&term)? } else { w.sub(&term)? };
            }
            acc = acc.add(&w.scale(&(&pf * Q::from_integer(self.values[idx].clone()))))?;
        }
        Ok(acc)
    }

    pub fn values_i64(&self) -> Vec<i64> {
        self.values.iter().map(|v| v.to_i64().unwrap_or(i64::MAX)).collect()
    }
}

/// A Laurent polynomial in the formal period `τ = 2π`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TauValue(pub std::collections::BTreeMap<i32, Q>);

impl TauValue {
    pub fn from_poly(p: &Poly) -> Result<Self> {
        p.as_tau_laurent()
            .map(TauValue)
            .ok_or_else(|| Error::InternalConsistency(format!("period {p} is not a number")))
    }

    pub fn rational(c: Q) -> Self {
        let mut m = std::collections::BTreeMap::new();
        if !c.is_zero() {
            m.insert(0, c);
        }
        TauValue(m)
    }

    /// The value when it is a pure rational.
    pub fn as_rational(&self) -> Option<Q> {
        match self.0.len() {
            0 => Some(q(0)),
            1 => self.0.get(&0).cloned(),
            _ => None,
        }
    }

    /// The value in full turns (divided by `τ`) when that is rational.
    pub fn in_turns(&self) -> Option<Q> {
        match self.0.len() {
            0 => Some(q(0)),
            1 => self.0.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.iter().map(|(k, c)| crate::scalar::to_f64(c) * crate::scalar::TAU_F64.powi(*k)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for TauValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, c)| match k {
                0 => crate::scalar::fmt_q(c),
                1 => format!("{}τ", crate::scalar::fmt_q(c)),
                _ => format!("{}τ^{k}", crate::scalar::fmt_q(c)),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Exact integrals of a closed form over coordinate subtori through the origin.
/// Each cycle lists the periodic coordinates it spans; all other coordinates
/// are set to 0 (interval coordinates to their lower end).
pub fn periods(a: &ExteriorForm, cycles: &[Vec<&str>]) -> Result<Vec<TauValue>> {
    if !a.d().is_zero() {
        return Err(Error::NotClosed(format!("{a}")));
    }
    let mut out = Vec::with_capacity(cycles.len());
    for cyc in cycles {
        if cyc.len() != a.degree() {
            return Err(Error::DegreeMismatch { expected: a.degree(), found: cyc.len() });
        }
        let mut f = a.clone();
        for c in a.space().coords.iter() {
            if !cyc.contains(&c.name.as_str()) {
                f = f.restrict_const(&c.name, &c.domain().0)?;
            }
        }
        let r = f.integrate_periodic(cyc)?;
        let p = r.smooth_cell().and_then(|c| c.get(&0)).cloned().unwrap_or_else(|| Poly::zero(0));
        out.push(TauValue::from_poly(&p)?);
    }
    Ok(out)
}

/// Periods over every coordinate subtorus of matching dimension, keyed by its coordinates.
pub fn coordinate_periods(a: &ExteriorForm) -> Result<Vec<(Vec<String>, TauValue)>> {
    let periodic: Vec<&str> =
        a.space().coords.iter().filter(|c| c.kind == crate::exterior::CoordKind::Periodic).map(|c| c.name.as_str()).collect();
    let k = a.degree();
    let mut cycles: Vec<Vec<&str>> = Vec::new();
    for mask in 0u64..(1u64 << periodic.len()) {
        if mask.count_ones() as usize == k {
            cycles.push((0..periodic.len()).filter(|i| mask >> i & 1 == 1).map(|i| periodic[i]).collect());
        }
    }
    let vals = periods(a, &cycles)?;
    Ok(cycles.into_iter().map(|c| c.into_iter().map(String::from).collect()).zip(vals).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::{build_box_cover, build_circle_cover, product_cover, PouKind};
    use crate::exterior::{Coord, CoordinateSpace};
    use crate::scalar::frac;

    fn circle_nerve() -> (Arc<Nerve>, PartitionOfUnity) {
        let (c, pou) = build_circle_cover("x", 3, &frac(1, 24), PouKind::C1cubic).unwrap();
        (Arc::new(Nerve::new(Arc::new(c))), pou)
    }

    #[test]
    fn delta_on_zero_cochains() {
        let (nerve, _) = circle_nerve();
        let space = nerve.cover().space().clone();
        let c: CechCochain = CechCochain::from_fn(&nerve, &space, 0, 0, |t| Ok(ExteriorForm::constant(&space, q(t[0] as i64 * 7)))).unwrap();
        let d = c.cech_delta().unwrap();
        assert_eq!(d.get(&[0, 1]).unwrap(), &ExteriorForm::constant(&space, q(7)));
        assert!(d.cech_delta().unwrap().residual().passes(0.0));
        let one: CechCochain = epsilon_star(&nerve, &ExteriorForm::constant(&space, q(1)));
        assert!(one.cech_delta().unwrap().residual().passes(0.0));
    }

    #[test]
    fn total_d_sign_on_level_one() {
        let (nerve, _) = circle_nerve();
        let space = nerve.cover().space().clone();
        let x = ExteriorForm::coordinate(&space, "x").unwrap();
        let c: CechCochain = CechCochain::from_fn(&nerve, &space, 1, 0, |_| Ok(x.clone())).unwrap();
        let (_, dv) = c.total_d().unwrap();
        assert_eq!(dv.value(0), &x.d().neg());
    }

    #[test]
    fn global_form_cocycle_and_curvature() {
        let (cover, pou) = build_box_cover(&[("z1", q(-1), q(1)), ("z2", q(-1), q(1))], 2, &frac(1, 4), PouKind::C1cubic).unwrap();
        let nerve = Arc::new(Nerve::new(Arc::new(cover)));
        let s = nerve.cover().space().clone();
        let z1 = ExteriorForm::coordinate(&s, "z1").unwrap();
        let z2 = ExteriorForm::coordinate(&s, "z2").unwrap();
        let w = z2.wedge(&z1.d()).unwrap().sub(&z1.wedge(&z2.d()).unwrap()).unwrap();
        let eps = epsilon_star(&nerve, &w);
        assert_eq!(eps.value(0), eps.value(1));
        let dc = DeligneCocycle::from_global(&nerve, 1, &w).unwrap();
        assert!(dc.verify().unwrap().passes(0.0));
        let f = dc.curvature(&pou).unwrap();
        assert_eq!(f, z1.d().wedge(&z2.d()).unwrap().scale(&q(-2)));
        assert!(dc.bockstein_class().unwrap().is_zero());
    }

    #[test]
    fn non_cocycle_is_flagged() {
        let (nerve, _) = circle_nerve();
        let space = nerve.cover().space().clone();
        let w0: CechCochain = CechCochain::from_fn(&nerve, &space, 0, 1, |t| {
            Ok(ExteriorForm::differential(&space, "x").unwrap().scale(&q(t[0] as i64)))
        })
        .unwrap();
        let w1 = CechCochain::zero(&nerve, &space, 1, 0);
        let dc = DeligneCocycle::new(vec![w0, w1]).unwrap();
        assert!(!dc.verify().unwrap().passes(0.0));
    }

    #[test]
    fn winding_line_bundle_on_circle_torus() {
        let (ca, pa) = build_circle_cover("x", 3, &frac(1, 24), PouKind::C1cubic).unwrap();
        let (cb, pb) = build_circle_cover("y", 3, &frac(1, 24), PouKind::C1cubic).unwrap();
        let (cover, pou) = product_cover((&ca, &pa), (&cb, &pb), false).unwrap();
        let cover = Arc::new(cover);
        let nerve = Arc::new(Nerve::new(cover.clone()));
        let s = cover.space().clone();
        let lift = |e: usize| cover.local_lift(e, "x").unwrap();
        let ylift = |e: usize| cover.local_lift(e, "y").unwrap();
        let dy = ExteriorForm::differential(&s, "y").unwrap();
        let w0: CechCochain = CechCochain::from_fn(&nerve, &s, 0, 1, |t| lift(t[0]).wedge(&dy).map(|f| f.neg())).unwrap();
        // ω^1_{ab} = −n_{ab} y^{(a)} where x^{(b)} − x^{(a)} = n_{ab}
        let w1: CechCochain = CechCochain::from_fn(&nerve, &s, 1, 0, |t| {
            let n = lift(t[1]).sub(&lift(t[0]))?;
            let y = ylift(t[0]);
            n.wedge(&y).map(|f| f.neg())
        })
        .unwrap();
        let dc = DeligneCocycle::new(vec![w0, w1]).unwrap();
        let rep = dc.verify().unwrap();
        assert!(rep.passes(0.0), "{rep:?}");
        let f = dc.curvature(&pou).unwrap();
        let dx = ExteriorForm::differential(&s, "x").unwrap();
        assert_eq!(f, dx.wedge(&dy).unwrap().neg());
        let z = dc.bockstein_class().unwrap();
        assert!(z.is_cocycle().unwrap());
        let coll = z.collate(&pou).unwrap();
        let per = periods(&coll, &[vec!["x", "y"]]).unwrap();
        let curv = periods(&f, &[vec!["x", "y"]]).unwrap();
        assert_eq!(crate::scalar::abs(&per[0].as_rational().unwrap()), q(1));
        assert_eq!(per[0], curv[0]);
    }

    #[test]
    fn periods_of_simple_forms() {
        let s = CoordinateSpace::new("T2", vec![Coord::periodic("x"), Coord::periodic("y")]).unwrap();
        let vol = ExteriorForm::monomial(&s, Poly::one(2), &["x", "y"]).unwrap();
        assert_eq!(periods(&vol, &[vec!["x", "y"]]).unwrap()[0].as_rational(), Some(q(1)));
        let h = ExteriorForm::scalar(&s, Poly::trig(2, 0, crate::exterior::Trig::Sin(2)).mul(&Poly::var(2, 1)));
        assert!(periods(&h.d(), &[vec!["x"], vec!["y"]]).unwrap().iter().all(|p| p.is_zero()));
        let notclosed = ExteriorForm::monomial(&s, Poly::var(2, 0), &["y"]).unwrap();
        assert!(matches!(periods(&notclosed, &[vec!["y"]]), Err(Error::NotClosed(_))));
    }
}
