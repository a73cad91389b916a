//! Abelian Chern–Weil forms, transgressions and the formal fibre model.

use serde::Serialize;

use crate::cech::{coordinate_periods, TauValue};
use crate::error::{Error, Result};
use crate::exterior::ExteriorForm;
use crate::scalar::{binomial, q, Q};

mod formal;
mod line_bundle;

pub use formal::{formal_family_connection, FormalFiberModel, FormalForm};
pub use line_bundle::{holonomy, holonomy_exponent, line_bundle_deligne, LineBundleData};

/// `Q(ξ) = coeff · ξ^power`, the invariant polynomials of `u(1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantMonomial {
    pub power: usize,
    pub coeff: Q,
}

impl InvariantMonomial {
    pub fn new(power: usize, coeff: Q) -> Self {
        InvariantMonomial { power, coeff }
    }

    /// `ξ^{n+1}`.
    pub fn chern_power(n_plus_1: usize) -> Self {
        InvariantMonomial { power: n_plus_1, coeff: q(1) }
    }

    pub fn degree(&self) -> usize {
        2 * self.power
    }

    pub fn product(&self, other: &InvariantMonomial) -> InvariantMonomial {
        InvariantMonomial { power: self.power + other.power, coeff: &self.coeff * &other.coeff }
    }
}

fn require_degree(a: &ExteriorForm, k: usize) -> Result<()> {
    if a.degree() != k {
        return Err(Error::DegreeMismatch { expected: k, found: a.degree() });
    }
    Ok(())
}

/// `Q(F)` for a curvature 2-form.
pub fn chern_weil_form(qm: &InvariantMonomial, f: &ExteriorForm) -> Result<ExteriorForm> {
    require_degree(f, 2)?;
    Ok(f.wedge_power(qm.power)?.scale(&qm.coeff))
}

/// `B ∧ (dB)^n`.
pub fn cs_transgression_abelian(b: &ExteriorForm, n: usize) -> Result<ExteriorForm> {
    require_degree(b, 1)?;
    b.wedge(&b.d().wedge_power(n)?)
}

/// `coeff · B ∧ (dB)^{power−1}`, so that `d` of it is `Q(dB)`.
pub fn transgression(qm: &InvariantMonomial, b: &ExteriorForm) -> Result<ExteriorForm> {
    if qm.power == 0 {
        return Err(Error::Precondition("constant invariant polynomial has no transgression".into()));
    }
    Ok(cs_transgression_abelian(b, qm.power - 1)?.scale(&qm.coeff))
}

/// Outcome of comparing two forms up to exact forms.
#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    /// The difference vanishes identically.
    pub identical: bool,
    pub closed: bool,
    /// Periods over coordinate subtori; empty on contractible spaces.
    pub periods: Vec<(Vec<String>, TauValue)>,
}

impl ExactnessReport {
    pub fn of(diff: &ExteriorForm) -> Result<Self> {
        let identical = diff.is_zero();
        let closed = diff.d().is_zero();
        let periods = if closed { coordinate_periods(diff)? } else { Vec::new() };
        Ok(ExactnessReport { identical, closed, periods })
    }

    /// Closed with vanishing periods, i.e. exact on a torus times a box.
    pub fn exact(&self) -> bool {
        self.closed && self.periods.iter().all(|(_, p)| p.is_zero())
    }
}

/// The variational formula between two connections `A0`, `A1`.
#[derive(Clone, Debug, Serialize)]
pub struct VariationalReport {
    #[serde(skip)]
    pub bulk: ExteriorForm,
    pub check: ExactnessReport,
}

/// `Λ(A1) − Λ(A0) − (n+1)∫₀¹ coeff·Ȧ∧F_t^n dt` should be exact.
///
/// With `F_t = F_0 + t dȦ` the `t`-integral is done in closed form.
pub fn variational_delta(qm: &InvariantMonomial, a0: &ExteriorForm, a1: &ExteriorForm) -> Result<VariationalReport> {
    require_degree(a0, 1)?;
    let adot = a1.sub(a0)?;
    let n = qm.power.checked_sub(1).ok_or_else(|| Error::Precondition("power must be positive".into()))?;
    let f0 = a0.d();
    let dd = adot.d();
    let mut bulk = ExteriorForm::zero(a0.space(), 2 * n + 1);
    for j in 0..=n {
        let c = Q::new((binomial(n as u64, j as u64) as i64).into(), ((j + 1) as i64).into());
        let term = adot.wedge(&dd.wedge_power(j)?)?.wedge(&f0.wedge_power(n - j)?)?;
        bulk = bulk.add(&term.scale(&c))?;
    }
    let bulk = bulk.scale(&(&qm.coeff * q(qm.power as i64)));
    let diff = transgression(qm, a1)?.sub(&transgression(qm, a0)?)?.sub(&bulk)?;
    Ok(VariationalReport { bulk, check: ExactnessReport::of(&diff)? })
}

/// `Λ(Q1·Q2, B)` against `Q1(F)∧Λ(Q2, B)`.
pub fn product_identity_check(q1: &InvariantMonomial, q2: &InvariantMonomial, b: &ExteriorForm) -> Result<ExactnessReport> {
    let lhs = transgression(&q1.product(q2), b)?;
    let f = b.d();
    let rhs = f.wedge_power(q1.power)?.scale(&q1.coeff).wedge(&transgression(q2, b)?)?;
    ExactnessReport::of(&lhs.sub(&rhs)?)
}

/// Godbillon–Vey type form `β ∧ (dβ)^n` with its defining identity checked.
#[derive(Clone, Debug, Serialize)]
pub struct GvReport {
    pub n: usize,
    /// `d(β∧(dβ)^n) = dβ∧(dβ)^n` holds exactly.
    pub identity_holds: bool,
    pub closed: bool,
}

pub fn gv_form(beta: &ExteriorForm, n: usize) -> Result<(ExteriorForm, GvReport)> {
    let gv = cs_transgression_abelian(beta, n)?;
    let dgv = gv.d();
    let identity_holds = dgv.sub(&beta.d().wedge(&beta.d().wedge_power(n)?)?)?.is_zero();
    let closed = dgv.is_zero();
    Ok((gv, GvReport { n, identity_holds, closed }))
}

#[cfg(test)]
pub(crate) mod tests;
