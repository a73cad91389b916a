//! Extension independence, flat-class periods, rigidity and the Bockstein transfer sign.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::{lambda_family, Backend, CoverParams, FamilySpec};
use crate::chern_weil::transgression;
use crate::cech::{coordinate_periods, CechCochain, DeligneCocycle, IntegralCechCocycle, TauValue, TotalCochain};
use crate::error::{Error, Result};
use crate::exterior::{Coord, CoordinateSpace, ExteriorForm, Poly, Space, Trig};
use crate::fibre::{check_integral_preserved, deligne_pushforward, FibreOptions, IntegralityReport, ProductFibration, Source};
use crate::scalar::{frac, q, Q};

/// A map from a closed parameter manifold into the base, given by substitutions.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub name: String,
    pub target: Space,
    /// One degree-0 form on `target` per base coordinate.
    pub subs: Vec<ExteriorForm>,
    /// The target is a 2-sphere in polar coordinates rather than a torus.
    pub sphere: bool,
}

impl Restriction {
    /// `θ ↦ r(cos τdθ, sin τdθ, 0, …)`, a degree-`d` circle of radius `r`.
    pub fn circle(base: &Space, radius: Q, degree: u32) -> Result<Self> {
        let target = CoordinateSpace::new("S1", vec![Coord::periodic("theta")])?;
        let trig = |t: Trig| ExteriorForm::scalar(&target, Poly::trig(1, 0, t).scale(&radius));
        let mut subs = vec![trig(Trig::Cos(degree)), trig(Trig::Sin(degree))];
        Self::pad(base, &target, &mut subs)?;
        Ok(Restriction { name: format!("circle(r={radius}, d={degree})"), target, subs, sphere: false })
    }

    /// The unit 2-sphere with polar angle `φ ∈ [0, 1/2]` turns and azimuth `θ`.
    pub fn sphere2(base: &Space) -> Result<Self> {
        let target = CoordinateSpace::new("S2", vec![Coord::affine("phi", q(0), frac(1, 2)), Coord::periodic("theta")])?;
        let t = |v: usize, tr: Trig| Poly::trig(2, v, tr);
        let sp = t(0, Trig::Sin(1));
        let subs = vec![
            ExteriorForm::scalar(&target, sp.mul(&t(1, Trig::Cos(1)))),
            ExteriorForm::scalar(&target, sp.mul(&t(1, Trig::Sin(1)))),
            ExteriorForm::scalar(&target, t(0, Trig::Cos(1))),
        ];
        if base.dim() != 3 {
            return Err(Error::Precondition("the 2-sphere restriction needs a 3-dimensional base".into()));
        }
        Ok(Restriction { name: "sphere2".into(), target, subs, sphere: true })
    }

    /// `(θ1, θ2) ↦ (cos τθ1, sin τθ1, cos τθ2, sin τθ2, 0, …)`.
    pub fn two_torus(base: &Space) -> Result<Self> {
        let target = CoordinateSpace::new("T2", vec![Coord::periodic("theta1"), Coord::periodic("theta2")])?;
        let f = |v: usize, t: Trig| ExteriorForm::scalar(&target, Poly::trig(2, v, t));
        let mut subs = vec![f(0, Trig::Cos(1)), f(0, Trig::Sin(1)), f(1, Trig::Cos(1)), f(1, Trig::Sin(1))];
        Self::pad(base, &target, &mut subs)?;
        Ok(Restriction { name: "two_torus".into(), target, subs, sphere: false })
    }

    fn pad(base: &Space, target: &Space, subs: &mut Vec<ExteriorForm>) -> Result<()> {
        if base.dim() < subs.len() {
            return Err(Error::Precondition(format!("base of dimension {} is too small", base.dim())));
        }
        subs.truncate(base.dim());
        while subs.len() < base.dim() {
            subs.push(ExteriorForm::zero(target, 0));
        }
        Ok(())
    }

    pub fn apply(&self, a: &ExteriorForm) -> Result<ExteriorForm> {
        a.pullback(&self.target, &self.subs)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatClassReport {
    pub restriction: Option<String>,
    pub closed: bool,
    pub periods: Vec<(Vec<String>, TauValue)>,
}

/// Closedness and exact periods of an invariant, optionally after restriction.
pub fn flat_class(rep: &ExteriorForm, restriction: Option<&Restriction>) -> Result<FlatClassReport> {
    let a = match restriction {
        Some(r) => r.apply(rep)?,
        None => rep.clone(),
    };
    if !a.d().is_zero() {
        return Err(Error::NotClosed(format!("{a}")));
    }
    let periods = match restriction {
        Some(r) if r.sphere => {
            let names = r.target.names();
            if a.degree() != names.len() {
                Vec::new()
            } else {
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let v = a.integrate_over_named(&refs)?;
                let p = v.smooth_cell().and_then(|c| c.get(&0)).cloned().unwrap_or_else(|| Poly::zero(0));
                vec![(names.clone(), TauValue::from_poly(&p)?)]
            }
        }
        _ => coordinate_periods(&a)?,
    };
    Ok(FlatClassReport { restriction: restriction.map(|r| r.name.clone()), closed: true, periods })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionReport {
    pub fibre_parts_equal: bool,
    pub difference_zero: bool,
    pub difference_closed: bool,
    pub periods: Vec<(Vec<String>, TauValue)>,
}

impl ExtensionReport {
    /// The two invariants define the same class.
    pub fn trivial(&self) -> bool {
        self.difference_closed && self.periods.iter().all(|(_, p)| p.is_zero())
    }
}

/// Compare `Λ_{Y/Z}` for two global extensions `B0`, `B1` of the same fibre family.
/// With `negative_control` the fibre parts may differ and the report shows the effect.
pub fn extension_independence(spec: &FamilySpec, b0: &ExteriorForm, b1: &ExteriorForm, negative_control: bool) -> Result<ExtensionReport> {
    let fibre_parts_equal = spec.fibre_part(&b1.sub(b0)?)?.is_zero();
    if !fibre_parts_equal && !negative_control {
        return Err(Error::Precondition("the extensions restrict to different fibre families".into()));
    }
    let fibre: Vec<&str> = spec.fibre.iter().map(String::as_str).collect();
    let with = |b: &ExteriorForm| transgression(&spec.invariant, b)?.integrate_over_named(&fibre)?.embed(&spec.base);
    let mut s0 = spec.clone();
    s0.chart = Some(b0.clone());
    if !negative_control {
        s0.verify_condition()?;
    }
    let diff = with(b1)?.sub(&with(b0)?)?;
    let difference_closed = diff.d().is_zero();
    let periods = if difference_closed { coordinate_periods(&diff)? } else { Vec::new() };
    Ok(ExtensionReport { fibre_parts_equal, difference_zero: diff.is_zero(), difference_closed, periods })
}

#[derive(Clone, Debug, Serialize)]
pub struct FoliatedReport {
    /// `n − ℓ` of the sampled family.
    pub n_minus_ell: i64,
    pub samples: Vec<(Q, Vec<TauValue>)>,
    /// All sampled periods coincide.
    pub constant: bool,
}

/// Flat-class periods along a deformation `s ↦ spec(s)` at the given parameters.
pub fn foliated_family_scenario(
    family: impl Fn(&Q) -> Result<FamilySpec>,
    params: &[Q],
    restriction: impl Fn(&FamilySpec) -> Result<Option<Restriction>>,
) -> Result<FoliatedReport> {
    let mut samples = Vec::new();
    let mut n_minus_ell = 0;
    for s in params {
        let spec = family(s)?;
        let ell = spec.ell()?;
        n_minus_ell = spec.invariant.power as i64 - 1 - ell as i64;
        let inv = lambda_family(&spec, Backend::Classical, &CoverParams::default())?;
        let rep = inv.form().ok_or_else(|| Error::InternalConsistency("case I invariant expected".into()))?;
        let r = restriction(&spec)?;
        let fc = flat_class(rep, r.as_ref())?;
        samples.push((s.clone(), fc.periods.into_iter().map(|(_, p)| p).collect::<Vec<_>>()));
    }
    let constant = samples.windows(2).all(|w| w[0].1 == w[1].1);
    Ok(FoliatedReport { n_minus_ell, samples, constant })
}

/// Compares the Bockstein class of the pushed-forward gerbe with the fibre
/// integral of the Bockstein class upstairs, both as periods over the base circle.
#[derive(Clone, Debug, Serialize)]
pub struct BocksteinSign {
    pub pushed_period: TauValue,
    pub integrated_period: TauValue,
    /// `pushed = sign · integrated`.
    pub sign: Option<i64>,
}

pub fn bockstein_transfer_sign(fib: &ProductFibration, dc: &DeligneCocycle, base_cycle: &[&str]) -> Result<BocksteinSign> {
    let opts = FibreOptions::default();
    let down = deligne_pushforward(fib, dc, &opts)?;
    let zd = down.bockstein_class()?.collate(&fib.base_pou)?;
    let pushed_period = crate::cech::periods(&zd, &[base_cycle.to_vec()])?.remove(0);

    let rep = integrated_bockstein(fib, dc)?;
    if !rep.integral {
        return Err(Error::Integrality(format!("fibre integral of the Bockstein class: {:?}", rep.max_deviation)));
    }
    let base = &fib.base_nerve;
    let mut values = vec![BigInt::zero(); base.count(rep.level)];
    for (t, v) in &rep.entries {
        let idx = base.index_of(t).ok_or_else(|| Error::InternalConsistency("tuple not in base nerve".into()))?;
        values[idx] = BigInt::from(*v);
    }
    let zi = IntegralCechCocycle { nerve: base.clone(), p: rep.level, values }.collate(&fib.base_pou)?;
    let integrated_period = crate::cech::periods(&zi, &[base_cycle.to_vec()])?.remove(0);
    let sign = match (pushed_period.as_rational(), integrated_period.as_rational()) {
        (Some(a), Some(b)) if !b.is_zero() && (&a == &b || a == -b.clone()) => Some(if a == b { 1 } else { -1 }),
        _ => None,
    };
    Ok(BocksteinSign { pushed_period, integrated_period, sign })
}

/// `𝓘_Δ ∫_{Y/Z}` of the Whitney lift of the Bockstein class of `dc`, with its integrality verdict.
pub fn integrated_bockstein(fib: &ProductFibration, dc: &DeligneCocycle) -> Result<IntegralityReport> {
    let z = dc.bockstein_class()?;
    let s = fib.total_space().clone();
    let nerve = &fib.total_nerve;
    let l = dc.omega.len() - 1;
    let zc = CechCochain::from_fn(nerve, &s, z.p, 0, |t| {
        let idx = nerve.index_of(t).ok_or_else(|| Error::InternalConsistency("tuple not in nerve".into()))?;
        Ok(ExteriorForm::constant(&s, Q::from_integer(z.values[idx].clone())))
    })?;
    let mut parts: Vec<CechCochain> = (0..z.p).map(|nu| CechCochain::zero(nerve, &s, nu, l + 1 - nu)).collect();
    parts.push(zc.normalized());
    check_integral_preserved(fib, &Source::Whitney(TotalCochain { parts }), &FibreOptions::default(), 1e-9)
}
