//! Line bundles with connection from local data, and holonomy of case-I families.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cech::{CechCochain, DeligneCocycle};
use crate::covers::Nerve;
use crate::error::{Error, Result};
use crate::exterior::{ExteriorForm, Poly};
use crate::scalar::{q, Q};

/// Transition `g_ij = exp(2πi(winding + phase))`.
#[derive(Clone, Debug)]
pub struct Transition {
    pub winding: i64,
    pub phase: ExteriorForm,
}

impl Transition {
    /// The real lift `winding + phase`.
    pub fn lift(&self) -> ExteriorForm {
        self.phase.add(&ExteriorForm::constant(self.phase.space(), q(self.winding))).expect("same space")
    }
}

/// Local connection forms `A_i` and transitions on pairwise overlaps.
#[derive(Clone, Debug)]
pub struct LineBundleData {
    pub nerve: Arc<Nerve>,
    pub connection: Vec<ExteriorForm>,
    pub transitions: BTreeMap<(usize, usize), Transition>,
}

impl LineBundleData {
    /// The Poincaré bundle on `T × T̂` (coordinates `x`, `xi`): `A_a = −x^{(a)} dξ`,
    /// phase `−(x^{(b)} − x^{(a)}) ξ^{(a)}`, curvature `dξ∧dx`.
    pub fn poincare(nerve: &Arc<Nerve>, x: &str, xi: &str) -> Result<Self> {
        let cover = nerve.cover().clone();
        let s = cover.space().clone();
        let dxi = ExteriorForm::differential(&s, xi)?;
        let connection = (0..cover.len()).map(|a| Ok(cover.local_lift(a, x)?.wedge(&dxi)?.neg())).collect::<Result<Vec<_>>>()?;
        let mut transitions = BTreeMap::new();
        for t in nerve.level(1).iter() {
            let n = cover.local_lift(t[1], x)?.sub(&cover.local_lift(t[0], x)?)?;
            let phase = n.wedge(&cover.local_lift(t[0], xi)?)?.neg();
            transitions.insert((t[0], t[1]), Transition { winding: 0, phase });
        }
        Ok(LineBundleData { nerve: nerve.clone(), connection, transitions })
    }

    /// The trivial bundle with global connection `a`.
    pub fn trivial(nerve: &Arc<Nerve>, a: &ExteriorForm) -> Self {
        let connection = vec![a.clone(); nerve.cover().len()];
        let zero = ExteriorForm::zero(a.space(), 0);
        let transitions = nerve.level(1).iter().map(|t| ((t[0], t[1]), Transition { winding: 0, phase: zero.clone() })).collect();
        LineBundleData { nerve: nerve.clone(), connection, transitions }
    }

    /// `L^{⊗k}`: windings, phases and connections multiplied by `k`.
    pub fn tensor_power(&self, k: i64) -> Self {
        let c = q(k);
        LineBundleData {
            nerve: self.nerve.clone(),
            connection: self.connection.iter().map(|a| a.scale(&c)).collect(),
            transitions: self
                .transitions
                .iter()
                .map(|(key, t)| (*key, Transition { winding: t.winding * k, phase: t.phase.scale(&c) }))
                .collect(),
        }
    }

    fn lift(&self, i: usize, j: usize) -> Result<ExteriorForm> {
        self.transitions
            .get(&(i, j))
            .map(Transition::lift)
            .ok_or_else(|| Error::Model(format!("no transition on ({i}, {j})")))
    }

    /// `A_j − A_i = d(lift_ij)` on overlaps and integral `δ̌(lift)` on triple overlaps.
    pub fn verify(&self) -> Result<()> {
        let cover = self.nerve.cover();
        for t in self.nerve.level(1).iter() {
            let diff = self.connection[t[1]].sub(&self.connection[t[0]])?.sub(&self.lift(t[0], t[1])?.d())?;
            if !diff.is_zero_on(&cover.intersection(t)) {
                return Err(Error::Model(format!("A_j − A_i ≠ d(phase) on {t:?}")));
            }
        }
        for t in self.nerve.level(2).iter() {
            let c = self.lift(t[1], t[2])?.sub(&self.lift(t[0], t[2])?)?.add(&self.lift(t[0], t[1])?)?;
            for bx in cover.intersection(t) {
                let cell = c.masked(&bx);
                let vals: Vec<Q> = cell.cells().iter().filter_map(|m| m.get(&0).and_then(Poly::as_rational)).collect();
                let nonconst = cell.cells().iter().any(|m| m.get(&0).is_some_and(|p| p.as_rational().is_none()));
                if nonconst || vals.iter().any(|v| !v.is_integer()) {
                    return Err(Error::Model(format!("transitions fail the cocycle condition on {t:?}")));
                }
            }
        }
        Ok(())
    }
}

/// The level-1 Deligne cocycle `(ω⁰, ω¹) = (A_i, lift_ij)`.
pub fn line_bundle_deligne(lb: &LineBundleData) -> Result<DeligneCocycle> {
    lb.verify()?;
    let s = lb.nerve.cover().space().clone();
    let w0 = CechCochain::from_fn(&lb.nerve, &s, 0, 1, |t| Ok(lb.connection[t[0]].clone()))?;
    let w1 = CechCochain::from_fn(&lb.nerve, &s, 1, 0, |t| lb.lift(t[0], t[1]))?;
    DeligneCocycle::new(vec![w0, w1])
}

/// `Σ_j λ_j ∫_{x_j-loop} B`, a function on the remaining coordinates; the other
/// fibre coordinates sit at 0.
pub fn holonomy_exponent(b: &ExteriorForm, fibre: &[&str], lambda: &[i64]) -> Result<ExteriorForm> {
    if fibre.len() != lambda.len() {
        return Err(Error::Precondition("one winding number per fibre circle".into()));
    }
    let mut total: Option<ExteriorForm> = None;
    for (j, (name, l)) in fibre.iter().zip(lambda).enumerate() {
        let mut f = b.clone();
        for (i, other) in fibre.iter().enumerate() {
            if i != j {
                f = f.restrict_const(other, &q(0))?;
            }
        }
        let v = f.space().index_of(name)?;
        let along = f.filter_wedges(|m| m == 1 << v);
        let term = along.integrate_periodic(&[name])?.scale(&q(*l));
        total = Some(match total {
            Some(t) => t.add(&term)?,
            None => term,
        });
    }
    total.ok_or_else(|| Error::Precondition("empty fibre".into()))
}

/// `h_z(λ) = exp(holonomy_exponent)` at a point of the base.
pub fn holonomy(b: &ExteriorForm, fibre: &[&str], lambda: &[i64], z: &[f64]) -> Result<f64> {
    let e = holonomy_exponent(b, fibre, lambda)?;
    Ok(e.eval_f64(z).get(&0).copied().unwrap_or(0.0).exp())
}
