//! Simplicial forms on the nerve, the integration map to Čech–de Rham cochains,
//! Whitney lifts and simplicial gerbes.

use std::sync::Arc;

use serde::Serialize;

use crate::cech::{CechCochain, DeligneCocycle, IntegralCechCocycle, TotalCochain};
use crate::covers::{Nerve, PartitionOfUnity};
use crate::error::{Error, Result};
use crate::exterior::{CoordinateSpace, ExteriorForm, FormValue, Poly, Residual, Space};
use crate::scalar::{factorial, q, Q};

/// Forms `ω^{(p)}` on `Δ^p × M`, one per level-`p` nerve tuple, for `p = 0..=max_level`.
#[derive(Clone, Debug)]
pub struct SimplicialForm<F: FormValue = ExteriorForm> {
    nerve: Arc<Nerve>,
    base: Space,
    degree: usize,
    spaces: Vec<Space>,
    levels: Vec<Vec<F>>,
}

/// Quadrature order used by the numeric backend when none is given.
pub const DEFAULT_ORDER: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct LevelResidual {
    pub level: usize,
    pub exact_zero: Option<bool>,
    pub max_abs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimplicialReport {
    pub levels: Vec<LevelResidual>,
}

impl SimplicialReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.levels.iter().all(|l| match l.exact_zero {
            Some(z) => z,
            None => l.max_abs <= tol,
        })
    }

    pub fn max_residual(&self) -> f64 {
        self.levels.iter().map(|l| l.max_abs).fold(0.0, f64::max)
    }
}

/// Free-coordinate expressions of the face map `ε^i: Δ^{p−1} → Δ^p` on `target = Δ^{p−1} × M`.
fn face_subs(p: usize, i: usize, target: &Space, base_dim: usize) -> Vec<ExteriorForm> {
    let n = target.dim();
    let s = |k: usize| -> Poly {
        // barycentric coordinate s_k of Δ^{p−1}, with s_0 = 1 − Σ s
        if k == 0 {
            let mut acc = Poly::one(n);
            for j in 1..p {
                acc = acc.sub(&Poly::var(n, j - 1));
            }
            acc
        } else {
            Poly::var(n, k - 1)
        }
    };
    let mut subs = Vec::with_capacity(p + base_dim);
    for j in 1..=p {
        let e = match j.cmp(&i) {
            std::cmp::Ordering::Less => s(j),
            std::cmp::Ordering::Equal => Poly::zero(n),
            std::cmp::Ordering::Greater => s(j - 1),
        };
        subs.push(ExteriorForm::scalar(target, e));
    }
    for v in 0..base_dim {
        subs.push(ExteriorForm::scalar(target, Poly::var(n, p - 1 + v)));
    }
    subs
}

/// Free-coordinate expressions of the codegeneracy `η^j: Δ^{p+1} → Δ^p` on `target = Δ^{p+1} × M`.
fn degeneracy_subs(p: usize, j: usize, target: &Space, base_dim: usize) -> Vec<ExteriorForm> {
    let n = target.dim();
    let t = |k: usize| Poly::var(n, k - 1);
    let mut subs = Vec::with_capacity(p + base_dim);
    for k in 1..=p {
        let e = if k < j {
            t(k)
        } else if k == j {
            t(k).add(&t(k + 1))
        } else {
            t(k + 1)
        };
        subs.push(ExteriorForm::scalar(target, e));
    }
    for v in 0..base_dim {
        subs.push(ExteriorForm::scalar(target, Poly::var(n, p + 1 + v)));
    }
    subs
}

/// Shift a manifold region into the coordinates of `Δ^p × M`.
pub fn shift_region(region: &[Vec<(usize, Q, Q)>], p: usize) -> Vec<Vec<(usize, Q, Q)>> {
    region.iter().map(|bx| bx.iter().map(|(v, a, b)| (v + p, a.clone(), b.clone())).collect()).collect()
}

/// Barycentric coordinate `t_k` (with `t_0 = 1 − Σ`) on `Δ^p × M`.
pub fn bary(space: &Space, p: usize, k: usize) -> ExteriorForm {
    let n = space.dim();
    let poly = if k == 0 {
        let mut acc = Poly::one(n);
        for j in 0..p {
            acc = acc.sub(&Poly::var(n, j));
        }
        acc
    } else {
        Poly::var(n, k - 1)
    };
    ExteriorForm::scalar(space, poly)
}

/// The elementary Whitney form `ν!·Σ_s (−1)^s t_{k_s} dt_{k_0}∧…∧\hat{dt_{k_s}}∧…∧dt_{k_ν}` on `Δ^p × M`.
pub fn whitney_form(space: &Space, p: usize, ks: &[usize]) -> Result<ExteriorForm> {
    let nu = ks.len() - 1;
    let ts: Vec<ExteriorForm> = ks.iter().map(|k| bary(space, p, *k)).collect();
    let dts: Vec<ExteriorForm> = ts.iter().map(|t| t.d()).collect();
    let mut acc = ExteriorForm::zero(space, nu);
    for s in 0..=nu {
        let mut term = ts[s].clone();
        for (r, dt) in dts.iter().enumerate() {
            if r != s {
                term = term.wedge(dt)?;
            }
        }
        acc = if s % 2 == 0 { acc.add(&term)? } else { acc.sub(&term)? };
    }
    Ok(acc.scale(&Q::from_integer(factorial(nu as u32))))
}

fn increasing_subsets(p: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, p: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for k in start..=p {
            cur.push(k);
            rec(k + 1, p, size, cur, out);
            cur.pop();
        }
    }
    rec(0, p, size, &mut cur, &mut out);
    out
}

/// The Whitney lift of `c` at one nerve tuple, on `sp = Δ^p × M`.
pub fn whitney_value<F: FormValue>(c: &TotalCochain<F>, t: &[usize], sp: &Space) -> Result<F> {
    let n = c.degree();
    let p = t.len() - 1;
    let mut acc = F::zero_like(sp, n);
    for (nu, cnu) in c.parts.iter().enumerate() {
        if nu > p {
            break;
        }
        for ks in increasing_subsets(p, nu + 1) {
            let sub: Vec<usize> = ks.iter().map(|k| t[*k]).collect();
            let val = cnu.get(&sub).ok_or_else(|| Error::Precondition(format!("tuple {sub:?} is not in the nerve")))?;
            if val.is_exact_zero() {
                continue;
            }
            let w = F::from_exact(&whitney_form(sp, p, &ks)?);
            acc = acc.add(&w.wedge(&val.embed(sp)?)?)?;
        }
    }
    Ok(acc)
}

impl<F: FormValue> SimplicialForm<F> {
    pub fn from_fn(
        nerve: &Arc<Nerve>,
        base: &Space,
        degree: usize,
        max_level: usize,
        mut f: impl FnMut(usize, &[usize], &Space) -> Result<F>,
    ) -> Result<Self> {
        let spaces: Vec<Space> = (0..=max_level).map(|p| CoordinateSpace::simplex_product(p, base)).collect();
        let mut levels = Vec::with_capacity(max_level + 1);
        for (p, sp) in spaces.iter().enumerate() {
            let tuples = nerve.level(p);
            let mut vals = Vec::with_capacity(tuples.len());
            for t in tuples.iter() {
                let v = f(p, t, sp)?;
                if v.degree() != degree {
                    return Err(Error::DegreeMismatch { expected: degree, found: v.degree() });
                }
                vals.push(v);
            }
            levels.push(vals);
        }
        Ok(SimplicialForm { nerve: nerve.clone(), base: base.clone(), degree, spaces, levels })
    }

    pub fn zero(nerve: &Arc<Nerve>, base: &Space, degree: usize, max_level: usize) -> Self {
        SimplicialForm::from_fn(nerve, base, degree, max_level, |_, _, sp| Ok(F::zero_like(sp, degree))).unwrap()
    }

    /// `ε*a` for a global form on the base: the same form at every level and tuple.
    pub fn epsilon_star(nerve: &Arc<Nerve>, a: &F, max_level: usize) -> Result<Self> {
        let base = a.space().clone();
        SimplicialForm::from_fn(nerve, &base, a.degree(), max_level, |_, _, sp| a.embed(sp))
    }

    pub fn nerve(&self) -> &Arc<Nerve> {
        &self.nerve
    }

    pub fn base(&self) -> &Space {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level_space(&self, p: usize) -> &Space {
        &self.spaces[p]
    }

    pub fn level(&self, p: usize) -> &[F] {
        &self.levels[p]
    }

    pub fn value(&self, p: usize, tuple: &[usize]) -> Option<&F> {
        self.nerve.index_of(tuple).map(|i| &self.levels[p][i])
    }

    pub fn set(&mut self, p: usize, idx: usize, v: F) {
        self.levels[p][idx] = v;
    }

    fn zip_with(&self, other: &Self, degree: usize, f: impl Fn(&F, &F) -> Result<F>) -> Result<Self> {
        if !Arc::ptr_eq(&self.nerve, &other.nerve) {
            return Err(Error::Precondition("simplicial forms on different nerves".into()));
        }
        let top = self.max_level().min(other.max_level());
        let levels = (0..=top)
            .map(|p| self.levels[p].iter().zip(&other.levels[p]).map(|(a, b)| f(a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(SimplicialForm { nerve: self.nerve.clone(), base: self.base.clone(), degree, spaces: self.spaces[..=top].to_vec(), levels })
    }

    fn map(&self, degree: usize, f: impl Fn(&F) -> Result<F>) -> Result<Self> {
        let levels = self.levels.iter().map(|l| l.iter().map(&f).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        Ok(SimplicialForm { levels, degree, ..self.clone() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        self.zip_with(other, self.degree, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&q(-1))
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.map(self.degree, |a| Ok(a.scale_q(c))).unwrap()
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, self.degree + other.degree, |a, b| a.wedge(b))
    }

    pub fn d(&self) -> Result<Self> {
        self.map(self.degree + 1, |a| a.d())
    }

    /// Face compatibility `(ε^i × id)*ω^{(p)} = ω^{(p−1)}∘(id × ε_i)` on every tuple's intersection.
    pub fn verify_simplicial(&self) -> Result<SimplicialReport> {
        let bd = self.base.dim();
        let mut out = Vec::new();
        for p in 1..=self.max_level() {
            let target = &self.spaces[p - 1];
            let mut r = Residual::zero_exact();
            for i in 0..=p {
                let subs = face_subs(p, i, target, bd);
                for (idx, w) in self.levels[p].iter().enumerate() {
                    let pulled = w.pullback_exact(target, &subs)?;
                    let face = self.nerve.face(p, idx, i)?;
                    let diff = pulled.sub(&self.levels[p - 1][face].embed(target)?)?;
                    let region = shift_region(&self.nerve.region(p, idx), p - 1);
                    r = r.combine(&diff.residual_on(&region));
                }
            }
            out.push(LevelResidual { level: p, exact_zero: r.exact_zero, max_abs: r.max_abs });
        }
        Ok(SimplicialReport { levels: out })
    }

    /// Degeneracy compatibility `(η^j × id)*ω^{(p)} = ω^{(p+1)}∘(id × η_j)` for `j = 0..=p`.
    pub fn verify_normal(&self) -> Result<SimplicialReport> {
        let bd = self.base.dim();
        let mut out = Vec::new();
        for p in 0..self.max_level() {
            let target = &self.spaces[p + 1];
            let mut r = Residual::zero_exact();
            for j in 0..=p {
                let subs = degeneracy_subs(p, j, target, bd);
                for (idx, w) in self.levels[p].iter().enumerate() {
                    let pulled = w.pullback_exact(target, &subs)?;
                    let up = self.nerve.degeneracy(p, idx, j)?;
                    let diff = pulled.sub(&self.levels[p + 1][up])?;
                    let region = shift_region(&self.nerve.region(p, idx), p + 1);
                    r = r.combine(&diff.residual_on(&region));
                }
            }
            out.push(LevelResidual { level: p, exact_zero: r.exact_zero, max_abs: r.max_abs });
        }
        Ok(SimplicialReport { levels: out })
    }

    /// `E(c)^{(p)} = Σ_ν Σ_{k_0<…<k_ν} W_{k_0…k_ν} ∧ c^ν(j_{k_0}…j_{k_ν})`.
    pub fn whitney_lift(c: &TotalCochain<F>, max_level: usize) -> Result<Self> {
        let nerve = c.parts[0].nerve().clone();
        let base = c.parts[0].space().clone();
        SimplicialForm::from_fn(&nerve, &base, c.degree(), max_level, |_, t, sp| whitney_value(c, t, sp))
    }

    /// `𝓘_Δ`: the `(p, k−p)` components `∫_{Δ^p} ω^{(p)}` for `p ≤ min(k, max_level)`.
    pub fn i_delta(&self) -> Result<TotalCochain<F>> {
        self.i_delta_ord(DEFAULT_ORDER)
    }

    pub fn i_delta_ord(&self, order: usize) -> Result<TotalCochain<F>> {
        let mut parts = Vec::new();
        for p in 0..=self.degree {
            if p > self.max_level() {
                parts.push(CechCochain::zero(&self.nerve, &self.base, p, self.degree - p));
                continue;
            }
            let vals = &self.levels[p];
            let c = CechCochain::from_fn(&self.nerve, &self.base, p, self.degree - p, |t| {
                let idx = self.nerve.index_of(t).unwrap();
                vals[idx].integrate_simplex_ord(order)?.embed(&self.base)
            })?;
            parts.push(c);
        }
        Ok(TotalCochain { parts })
    }
}

impl SimplicialForm<ExteriorForm> {
    /// The part of barycentric degree `nu` at every level.
    pub fn bary_part(&self, nu: usize) -> Self {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(p, l)| {
                let mask: u64 = (1u64 << p) - 1;
                l.iter().map(|f| f.filter_wedges(|m| (m & mask).count_ones() as usize == nu)).collect()
            })
            .collect();
        SimplicialForm { levels, ..self.clone() }
    }

    /// Discrete: no manifold differentials and no manifold dependence.
    pub fn is_discrete(&self) -> bool {
        self.levels.iter().enumerate().all(|(p, l)| {
            let manifold_mask: u64 = ((1u64 << (p + self.base.dim())) - 1) & !((1u64 << p) - 1);
            l.iter().all(|f| !f.simplify().involves(manifold_mask))
        })
    }

    /// Discrete with integer `𝓘_Δ` values.
    pub fn is_integral(&self) -> Result<bool> {
        if !self.is_discrete() {
            return Ok(false);
        }
        let id = self.i_delta()?;
        let c = &id.parts[self.degree];
        for idx in self.nerve.nondegenerate(self.degree) {
            let region = self.nerve.region(self.degree, idx);
            if !c.value(idx).integrality_on(&region).passes(0.0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A simplicial `ℓ`-gerbe: `dΛ = ε*α − η*β` with `β` discrete and integral.
#[derive(Clone, Debug)]
pub struct SimplicialGerbe {
    pub lambda: SimplicialForm,
    pub alpha: ExteriorForm,
    pub beta: SimplicialForm,
}

impl SimplicialGerbe {
    /// Whitney lift of a Deligne cocycle, with curvature `α` and `β = E(z)`.
    pub fn from_deligne(dc: &DeligneCocycle, pou: &PartitionOfUnity, max_level: usize) -> Result<Self> {
        let lambda = SimplicialForm::whitney_lift(&TotalCochain { parts: dc.omega.clone() }, max_level)?;
        let alpha = dc.curvature(pou)?;
        let z = dc.bockstein_class()?;
        let space = dc.omega[0].space().clone();
        let zc: CechCochain = CechCochain::from_fn(dc.nerve(), &space, z.p, 0, |t| {
            let idx = dc.nerve().index_of(t).unwrap();
            Ok(ExteriorForm::constant(&space, Q::from_integer(z.values[idx].clone())))
        })?;
        let mut parts: Vec<CechCochain> = (0..z.p).map(|p| CechCochain::zero(dc.nerve(), &space, p, z.p - p)).collect();
        parts.push(zc.normalized());
        let beta = SimplicialForm::whitney_lift(&TotalCochain { parts }, max_level)?;
        Ok(SimplicialGerbe { lambda, alpha, beta })
    }

    pub fn level(&self) -> usize {
        self.lambda.degree()
    }

    /// Residual of `dΛ − ε*α + β` at every level, plus discreteness and integrality of `β`.
    pub fn verify(&self) -> Result<(SimplicialReport, bool)> {
        let top = self.lambda.max_level();
        let eps = SimplicialForm::epsilon_star(self.lambda.nerve(), &self.alpha, top)?;
        let diff = self.lambda.d()?.sub(&eps)?.add(&self.beta)?;
        let mut out = Vec::new();
        for p in 0..=diff.max_level() {
            let mut r = Residual::zero_exact();
            for (idx, f) in diff.levels[p].iter().enumerate() {
                let region = shift_region(&diff.nerve.region(p, idx), p);
                r = r.combine(&f.residual_on(&region));
            }
            out.push(LevelResidual { level: p, exact_zero: r.exact_zero, max_abs: r.max_abs });
        }
        Ok((SimplicialReport { levels: out }, self.beta.is_integral()?))
    }

    /// `ω^ν = ∫_{Δ^ν} Λ^ν`, `θ = −ω^ℓ`.
    pub fn extract(&self) -> Result<DeligneCocycle> {
        let (rep, integral) = self.verify()?;
        if !rep.passes(0.0) {
            return Err(Error::NotAGerbe(format!("residual {}", rep.max_residual())));
        }
        if !integral {
            return Err(Error::NotAGerbe("β is not integral".into()));
        }
        extract_unchecked(&self.lambda)
    }
}

/// The cochains `∫_{Δ^ν} Λ^ν` without checking the gerbe condition.
pub fn extract_unchecked(lambda: &SimplicialForm) -> Result<DeligneCocycle> {
    DeligneCocycle::new(lambda.i_delta()?.parts)
}

/// `𝓘_Δ(β) = −∫_{Δ^{ℓ+1}} dΛ^ℓ` as an integral cochain.
pub fn beta_of(lambda: &SimplicialForm) -> Result<IntegralCechCocycle> {
    let l = lambda.degree();
    let dl = lambda.d()?;
    let comp = dl.i_delta()?.parts[l + 1].neg();
    let nerve = lambda.nerve().clone();
    let mut values = vec![num_bigint::BigInt::from(0); nerve.count(l + 1)];
    for idx in nerve.nondegenerate(l + 1) {
        let region = nerve.region(l + 1, idx);
        let f = comp.value(idx);
        if !f.integrality_on(&region).passes(0.0) {
            return Err(Error::Integrality(format!("{:?}", nerve.tuple(l + 1, idx))));
        }
        let pt = crate::exterior::value::box_center(f.space(), &region[0]);
        let v = f.eval_f64(&pt).get(&0).copied().unwrap_or(0.0);
        values[idx] = num_bigint::BigInt::from(v.round() as i64);
    }
    Ok(IntegralCechCocycle { nerve, p: l + 1, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::{build_circle_cover, PouKind};
    use crate::exterior::Trig;
    use crate::scalar::frac;

    fn setup() -> (Arc<Nerve>, PartitionOfUnity, Space) {
        let (c, pou) = build_circle_cover("x", 3, &frac(1, 24), PouKind::C1cubic).unwrap();
        let space = c.space().clone();
        (Arc::new(Nerve::new(Arc::new(c))), pou, space)
    }

    #[test]
    fn whitney_forms_integrate_to_one() {
        let m = CoordinateSpace::new("pt", vec![]).unwrap();
        for p in 0..=3 {
            let sp = CoordinateSpace::simplex_product(p, &m);
            let w = whitney_form(&sp, p, &(0..=p).collect::<Vec<_>>()).unwrap();
            assert_eq!(w.integrate_simplex().unwrap(), ExteriorForm::constant(&CoordinateSpace::new("pt", vec![]).unwrap(), q(1)));
        }
    }

    #[test]
    fn global_form_is_simplicial_and_normal() {
        let (nerve, _, s) = setup();
        let a = ExteriorForm::monomial(&s, Poly::trig(1, 0, Trig::Cos(1)), &["x"]).unwrap();
        let e = SimplicialForm::epsilon_star(&nerve, &a, 2).unwrap();
        assert!(e.verify_simplicial().unwrap().passes(0.0));
        assert!(e.verify_normal().unwrap().passes(0.0));
        let id = e.i_delta().unwrap();
        assert_eq!(id.parts[0].value(0), &a);
        assert!(id.parts[1].residual().passes(0.0));
        assert!(!e.is_discrete());
    }

    #[test]
    fn whitney_lift_sections_the_integration_map() {
        let (nerve, _, s) = setup();
        let x = ExteriorForm::coordinate(&s, "x").unwrap();
        let c0: CechCochain = CechCochain::from_fn(&nerve, &s, 0, 1, |t| Ok(x.d().scale(&q(t[0] as i64 + 1)))).unwrap();
        let c1: CechCochain = CechCochain::from_fn(&nerve, &s, 1, 0, |t| {
            Ok(if Nerve::is_degenerate(t) { ExteriorForm::zero(&s, 0) } else { x.scale(&q(t[1] as i64 - 2 * t[0] as i64)) })
        })
        .unwrap();
        let c = TotalCochain { parts: vec![c0, c1] };
        let e = SimplicialForm::whitney_lift(&c, 3).unwrap();
        assert!(e.verify_simplicial().unwrap().passes(0.0));
        assert!(e.verify_normal().unwrap().passes(0.0));
        let back = e.i_delta().unwrap();
        for (a, b) in back.parts.iter().zip(&c.parts) {
            assert!(a.sub(b).unwrap().residual().passes(0.0));
        }
        // chain map: E(Dc) = dE(c)
        let lhs = SimplicialForm::whitney_lift(&c.total_d().unwrap(), 3).unwrap();
        let rhs = e.d().unwrap();
        for p in 0..=3 {
            for (a, b) in lhs.level(p).iter().zip(rhs.level(p)) {
                assert_eq!(a, b, "level {p}");
            }
        }
    }

    #[test]
    fn corrupted_value_is_detected() {
        let (nerve, _, s) = setup();
        let a = ExteriorForm::differential(&s, "x").unwrap();
        let mut e = SimplicialForm::epsilon_star(&nerve, &a, 2).unwrap();
        let idx = nerve.index_of(&[0, 1]).unwrap();
        let sp = e.level_space(1).clone();
        e.set(1, idx, ExteriorForm::differential(&sp, "x").unwrap().scale(&q(2)));
        assert!(!e.verify_simplicial().unwrap().passes(0.0));
    }

    #[test]
    fn discrete_and_integral() {
        let (nerve, _, s) = setup();
        let half = |k: Q| -> SimplicialForm {
            let z: CechCochain = CechCochain::from_fn(&nerve, &s, 1, 0, |t| {
                Ok(if Nerve::is_degenerate(t) { ExteriorForm::zero(&s, 0) } else { ExteriorForm::constant(&s, k.clone()) })
            })
            .unwrap();
            let parts = vec![CechCochain::zero(&nerve, &s, 0, 1), z];
            SimplicialForm::whitney_lift(&TotalCochain { parts }, 2).unwrap()
        };
        assert!(half(q(3)).is_discrete());
        assert!(half(q(3)).is_integral().unwrap());
        assert!(!half(frac(1, 2)).is_integral().unwrap());
        let e = SimplicialForm::epsilon_star(&nerve, &ExteriorForm::differential(&s, "x").unwrap(), 1).unwrap();
        assert!(!e.is_discrete());
    }

    #[test]
    fn gerbe_of_the_circle_winding() {
        // 0-gerbe on S¹ given by the local lifts of the identity map to ℝ/ℤ
        let (nerve, pou, s) = setup();
        let cover = nerve.cover().clone();
        let w0: CechCochain = CechCochain::from_fn(&nerve, &s, 0, 0, |t| Ok(cover.local_lift(t[0], "x").unwrap())).unwrap();
        let dc = DeligneCocycle::new(vec![w0]).unwrap();
        assert!(dc.verify().unwrap().passes(0.0));
        let g = SimplicialGerbe::from_deligne(&dc, &pou, 2).unwrap();
        let (rep, integral) = g.verify().unwrap();
        assert!(rep.passes(0.0), "{rep:?}");
        assert!(integral);
        let back = g.extract().unwrap();
        assert_eq!(back.curvature(&pou).unwrap(), g.alpha);
        let z1 = beta_of(&g.lambda).unwrap();
        let z2 = back.bockstein_class().unwrap();
        assert_eq!(z1.values_i64(), z2.values_i64());
        assert!(!z1.is_zero());
    }
}
