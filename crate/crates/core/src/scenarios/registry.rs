//! The checks run by each scenario.

use super::expected::{surface_curvature, surface_lambda, torus_curvature, torus_lambda};
use super::report::{Check, CheckKind, FormTable};
use super::{custom, Outcome, ScenarioConfig, ScenarioId, Timer};
use crate::cech::periods;
use crate::chern_weil::{chern_weil_form, gv_form, holonomy, holonomy_exponent, line_bundle_deligne, transgression, InvariantMonomial};
use crate::error::{Error, Result};
use crate::exterior::{Coord, CoordKind, CoordinateSpace, ExteriorForm, FormValue, NumericForm, Poly, Space};
use crate::families::{
    bockstein_transfer_sign, curvature_check, flat_class, integrated_bockstein, lambda_family, Backend, CoverParams, FamilyInvariant,
    FamilySpec, InvariantValue, Restriction,
};
use crate::covers::PouKind;
use crate::scalar::{abs, factorial, frac, q, Q};

use CheckKind::*;

pub(crate) fn run(cfg: &ScenarioConfig, timer: &mut Timer) -> Result<Outcome> {
    match &cfg.scenario {
        ScenarioId::Ex71 => {
            let spec = FamilySpec::torus(2)?;
            let mut out = family(cfg, &spec, Some(&torus_lambda(&spec.base, 2)?), Some(&torus_curvature(&spec.base, 2)?), timer)?;
            out.checks.extend(holonomy_checks(&spec)?);
            timer.lap("holonomy");
            Ok(out)
        }
        ScenarioId::Ex71S1 => circle_restriction(cfg, timer),
        ScenarioId::Ex75 { g } => surface(cfg, *g, timer),
        ScenarioId::Ex78 { k } => torus(cfg, *k, timer),
        ScenarioId::Ex715 { .. } => poincare(cfg, timer),
        ScenarioId::Ex715Curvature { k } => poincare_curvature(*k, timer),
        ScenarioId::GvFormal => godbillon_vey(timer),
        ScenarioId::Custom(path) => {
            let c = custom::CustomScenario::load(path)?;
            let spec = c.family()?;
            family(cfg, &spec, c.expected_lambda(&spec.base)?.as_ref(), c.expected_curvature(&spec.base)?.as_ref(), timer)
        }
    }
}

fn name(b: Backend) -> &'static str {
    match b {
        Backend::Classical => "classical",
        Backend::Formal => "formal",
        Backend::ChartShuffle => "shuffle",
        Backend::ChartShuffleNumeric => "shuffle_numeric",
    }
}

/// The whole of a base made of intervals and circles, as one box.
fn whole(space: &Space) -> Vec<Vec<(usize, Q, Q)>> {
    let bx = space
        .coords
        .iter()
        .enumerate()
        .map(|(i, c)| match &c.kind {
            CoordKind::Affine { lo, hi } => (i, lo.clone(), hi.clone()),
            _ => (i, q(0), q(1)),
        })
        .collect();
    vec![bx]
}

/// Largest deviation of a numeric invariant and of its derivative from an exact form.
fn numeric_residuals(num: &NumericForm, exact: &ExteriorForm) -> Result<(f64, f64)> {
    let boxes = whole(exact.space());
    let ex = NumericForm::from_exact(exact);
    let r0 = num.sub(&ex)?.residual_on(&boxes).max_abs;
    let r1 = num.d()?.sub(&ex.d()?)?.residual_on(&boxes).max_abs;
    Ok((r0, r1))
}

fn invariants(cfg: &ScenarioConfig, spec: &FamilySpec, timer: &mut Timer) -> Result<Vec<FamilyInvariant>> {
    let usable: Vec<Backend> = cfg.backends()?.into_iter().filter(|b| spec.supports(*b)).collect();
    if usable.is_empty() {
        return Err(Error::Config(format!("{} has no data for backend selection {:?}", spec.name, cfg.backend)));
    }
    let mut out = Vec::new();
    for b in usable {
        out.push(lambda_family(spec, b, &cfg.cover)?);
        timer.lap(name(b));
    }
    Ok(out)
}

/// Invariant, curvature and the transgression identity for every selected backend.
fn family(
    cfg: &ScenarioConfig,
    spec: &FamilySpec,
    lambda: Option<&ExteriorForm>,
    curvature: Option<&ExteriorForm>,
    timer: &mut Timer,
) -> Result<Outcome> {
    let invs = invariants(cfg, spec, timer)?;
    let mut checks = Vec::new();
    let mut tables = Vec::new();
    for inv in &invs {
        let b = name(inv.backend);
        match &inv.value {
            InvariantValue::Form(f) => {
                if let Some(e) = lambda {
                    checks.push(Check::forms(&format!("lambda[{b}]"), ClosedForm, e, f));
                }
                if let Some(e) = curvature {
                    checks.push(Check::forms(&format!("curvature[{b}]"), ClosedForm, e, &f.d()));
                }
                let c = curvature_check(spec, inv)?;
                checks.push(Check::flag(
                    &format!("integrated curvature = ({:+}) d lambda [{b}]", c.sign),
                    Identity,
                    "exact equality",
                    if c.exact_zero { "exact equality" } else { "differs" },
                    c.exact_zero,
                ));
                if tables.is_empty() {
                    tables.push(FormTable::of("lambda", f));
                    tables.push(FormTable::of("curvature", &f.d()));
                }
            }
            InvariantValue::Numeric(num) => {
                let reference = match (lambda, invs.iter().find_map(FamilyInvariant::form)) {
                    (Some(e), _) => e.clone(),
                    (None, Some(f)) => f.clone(),
                    (None, None) => lambda_family(spec, Backend::Classical, &cfg.cover)?.form().cloned().ok_or_else(|| Error::InternalConsistency("classical invariant is a form".into()))?,
                };
                let (r0, r1) = numeric_residuals(num, &reference)?;
                checks.push(Check::within(&format!("lambda[{b}] (order {})", cfg.cover.quad_order), CrossCheck, r0, cfg.tolerance));
                checks.push(Check::within(&format!("curvature[{b}] (order {})", cfg.cover.quad_order), CrossCheck, r1, cfg.tolerance));
            }
            InvariantValue::Gerbe { .. } => return Err(Error::InternalConsistency("gerbe invariant in a case-I scenario".into())),
        }
    }
    checks.extend(pairwise(cfg, &invs, false)?);
    timer.lap("checks");
    Ok(Outcome { checks, tables })
}

/// Agreement between every pair of computed invariants.
/// Numeric pairs are optional since each costs a full residual sweep.
fn pairwise(cfg: &ScenarioConfig, invs: &[FamilyInvariant], numeric: bool) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (i, a) in invs.iter().enumerate() {
        for b in &invs[i + 1..] {
            let label = format!("{} vs {}", name(a.backend), name(b.backend));
            match (&a.value, &b.value) {
                (InvariantValue::Form(x), InvariantValue::Form(y)) => {
                    checks.push(Check::forms(&format!("lambda {label}"), CrossCheck, x, y));
                    checks.push(Check::forms(&format!("curvature {label}"), CrossCheck, &x.d(), &y.d()));
                }
                (InvariantValue::Form(x), InvariantValue::Numeric(n)) | (InvariantValue::Numeric(n), InvariantValue::Form(x)) if numeric => {
                    let (r0, r1) = numeric_residuals(n, x)?;
                    checks.push(Check::within(&format!("lambda {label}"), CrossCheck, r0, cfg.tolerance));
                    checks.push(Check::within(&format!("curvature {label}"), CrossCheck, r1, cfg.tolerance));
                }
                _ => {}
            }
        }
    }
    Ok(checks)
}

/// `h_z(λ) = exp(Σ λ_j z_j)` and its homomorphism law.
fn holonomy_checks(spec: &FamilySpec) -> Result<Vec<Check>> {
    let b = spec.chart.as_ref().ok_or_else(|| Error::Config("holonomy needs a chart connection".into()))?;
    let fibre: Vec<&str> = spec.fibre.iter().map(String::as_str).collect();
    let k = fibre.len();
    let samples: [Vec<i64>; 3] = [(1..=k as i64).collect(), (0..k as i64).map(|i| if i % 2 == 0 { 2 } else { -3 }).collect(), vec![0; k]];
    let mut checks = Vec::new();
    for lam in &samples {
        let mut expect = ExteriorForm::zero(&spec.base, 0);
        for (j, l) in lam.iter().enumerate() {
            expect = expect.add(&ExteriorForm::coordinate(&spec.base, &format!("z{}", j + 1))?.scale(&q(*l)))?;
        }
        let got = holonomy_exponent(b, &fibre, lam)?.embed(&spec.base)?;
        checks.push(Check::forms(&format!("holonomy exponent {lam:?}"), ClosedForm, &expect, &got));
    }
    let z: Vec<f64> = (0..k).map(|j| 0.3 - 0.25 * j as f64).collect();
    let (l, m) = (&samples[0], &samples[1]);
    let lm: Vec<i64> = l.iter().zip(m).map(|(a, b)| a + b).collect();
    let h = holonomy(b, &fibre, &lm, &z)?;
    let hh = holonomy(b, &fibre, l, &z)? * holonomy(b, &fibre, m, &z)?;
    let rel = (h - hh).abs() / h.abs().max(1.0);
    checks.push(Check::within("holonomy h(l+m) = h(l) h(m)", Identity, rel, 1e-12));
    Ok(checks)
}

/// Representatives of the `T²` invariant from the selected exact backends.
fn exact_reps(cfg: &ScenarioConfig, spec: &FamilySpec, timer: &mut Timer) -> Result<Vec<(Backend, ExteriorForm)>> {
    let mut out = Vec::new();
    for inv in invariants(cfg, spec, timer)? {
        let f = inv.form().cloned().ok_or_else(|| Error::InternalConsistency("exact invariant expected".into()))?;
        out.push((inv.backend, f));
    }
    Ok(out)
}

fn turns(p: &crate::cech::TauValue) -> Result<Q> {
    p.in_turns().ok_or_else(|| Error::NonRational(format!("period {p:?} is not a multiple of τ")))
}

fn circle_restriction(cfg: &ScenarioConfig, timer: &mut Timer) -> Result<Outcome> {
    let spec = FamilySpec::torus(2)?;
    let mut checks = Vec::new();
    let mut tables = Vec::new();
    for (backend, rep) in exact_reps(cfg, &spec, timer)? {
        let b = name(backend);
        let unit = Restriction::circle(&spec.base, q(1), 1)?;
        let restricted = unit.apply(&rep)?;
        let minus_dtheta = ExteriorForm::monomial(&unit.target, Poly::tau_pow(1, 1).scale(&q(-1)), &["theta"])?;
        checks.push(Check::forms(&format!("restriction to S1 [{b}]"), ClosedForm, &minus_dtheta, &restricted));
        let fc = flat_class(&rep, Some(&unit))?;
        checks.push(Check::rational(&format!("period over S1 in turns [{b}]"), ClosedForm, &q(-1), &turns(&fc.periods[0].1)?));
        for (radius, degree, expect) in [(q(1), 2u32, q(-2)), (q(1), 3, q(-3)), (frac(1, 2), 1, frac(-1, 4))] {
            let r = Restriction::circle(&spec.base, radius.clone(), degree)?;
            let fc = flat_class(&rep, Some(&r))?;
            checks.push(Check::rational(&format!("period over {} [{b}]", r.name), ClosedForm, &expect, &turns(&fc.periods[0].1)?));
        }
        let open = matches!(flat_class(&rep, None), Err(Error::NotClosed(_)));
        checks.push(Check::flag(&format!("unrestricted invariant is not closed [{b}]"), NegativeControl, "not closed", if open { "not closed" } else { "closed" }, open));
        if tables.is_empty() {
            tables.push(FormTable::of("restricted_lambda", &restricted));
        }
    }
    Ok(Outcome { checks, tables })
}

fn surface(cfg: &ScenarioConfig, g: usize, timer: &mut Timer) -> Result<Outcome> {
    let spec = FamilySpec::surface(g)?;
    let mut checks = Vec::new();
    if let Some(f) = &spec.formal {
        let ok = f.model.verify().is_ok();
        checks.push(Check::flag("fibre model axioms", Identity, "valid", if ok { "valid" } else { "invalid" }, ok));
    }
    let mut out = family(cfg, &spec, Some(&surface_lambda(&spec.base, g)?), Some(&surface_curvature(&spec.base, g)?), timer)?;
    checks.append(&mut out.checks);
    if 2 * g >= 4 {
        if let Some(rep) = lambda_family(&spec, Backend::Formal, &cfg.cover)?.form() {
            let fc = flat_class(rep, Some(&Restriction::two_torus(&spec.base)?))?;
            for (cycle, p) in &fc.periods {
                checks.push(Check::rational(&format!("period over two_torus {cycle:?}"), ClosedForm, &q(-1), &turns(p)?));
            }
        }
    }
    timer.lap("restriction");
    Ok(Outcome { checks, tables: out.tables })
}

fn torus(cfg: &ScenarioConfig, k: usize, timer: &mut Timer) -> Result<Outcome> {
    let spec = FamilySpec::torus(k)?;
    let lam = torus_lambda(&spec.base, k)?;
    let mut out = family(cfg, &spec, Some(&lam), Some(&torus_curvature(&spec.base, k)?), timer)?;
    if k == 2 {
        let z = &spec.base;
        let direct = ExteriorForm::monomial(z, Poly::var(2, 1), &["z1"])?.sub(&ExteriorForm::monomial(z, Poly::var(2, 0), &["z2"])?)?;
        out.checks.push(Check::forms("k = 2 coincides with z2 dz1 - z1 dz2", CrossCheck, &direct, &lam));
    }
    if k == 3 {
        let fc = flat_class(&lam, Some(&Restriction::sphere2(&spec.base)?))?;
        let p = turns(&fc.periods[0].1)?;
        out.checks.push(Check::flag("restriction to S2 is closed with nonzero period", ClosedForm, "nonzero", &p, !crate::scalar::is_zero(&p)));
    }
    out.checks.extend(holonomy_checks(&spec)?);
    timer.lap("probes");
    Ok(out)
}

struct PushedPoincare {
    curvature: ExteriorForm,
    bockstein: Q,
    transfer: Option<i64>,
}

fn poincare_with(cover: &CoverParams, power: i64, checks: &mut Vec<Check>) -> Result<PushedPoincare> {
    let tag = format!("{:?}, L^{power}", cover.pou);
    let fib = FamilySpec::poincare_fibration(cover)?;
    let mut spec = FamilySpec::poincare(fib.clone())?;
    if power != 1 {
        spec.line_bundle = spec.line_bundle.map(|lb| lb.tensor_power(power));
        spec.name = format!("poincare_1^{power}");
    }
    let lb = spec.line_bundle.as_ref().ok_or_else(|| Error::InternalConsistency("Poincaré family without bundle".into()))?;
    let dc = line_bundle_deligne(lb)?;
    let up = dc.verify()?.passes(0.0);
    checks.push(Check::flag(&format!("bundle cocycle conditions [{tag}]"), Identity, "exact", if up { "exact" } else { "violated" }, up));

    let inv = lambda_family(&spec, Backend::ChartShuffle, cover)?;
    let InvariantValue::Gerbe { cocycle, pou } = &inv.value else {
        return Err(Error::InternalConsistency("pushforward of a line bundle is a gerbe".into()));
    };
    let down = cocycle.verify()?.passes(0.0);
    checks.push(Check::flag(&format!("pushed cocycle conditions [{tag}]"), Identity, "exact", if down { "exact" } else { "violated" }, down));

    let curvature = cocycle.curvature(pou)?;
    let dxi = ExteriorForm::differential(fib.base_space(), "xi")?.scale(&q(power));
    let plus_minus = curvature == dxi || curvature == dxi.neg();
    checks.push(Check::flag(&format!("curvature is ±{power} dxi [{tag}]"), ClosedForm, &format!("±{dxi}"), &curvature, plus_minus));
    let c = curvature_check(&spec, &inv)?;
    checks.push(Check::flag(&format!("curvature = fibre integral of F [{tag}]"), Identity, "exact equality", if c.exact_zero { "exact equality" } else { "differs" }, c.exact_zero));

    let z = cocycle.bockstein_class()?.collate(pou)?;
    let bockstein = periods(&z, &[vec!["xi"]])?.remove(0).as_rational().ok_or_else(|| Error::NonRational("Bockstein period".into()))?;
    checks.push(Check::rational(&format!("|Bockstein pairing| [{tag}]"), ClosedForm, &q(power.abs()), &abs(&bockstein)));

    let integ = integrated_bockstein(&fib, &dc)?;
    checks.push(Check::within(&format!("fibre integral of the Bockstein class is integral [{tag}]"), Identity, integ.max_deviation, 1e-9));
    let transfer = if integ.integral { bockstein_transfer_sign(&fib, &dc, &["xi"])?.sign } else { None };
    checks.push(Check::flag(
        &format!("pushed Bockstein = ± integrated Bockstein [{tag}]"),
        Identity,
        "sign ±1",
        transfer.map_or("none".to_string(), |s| format!("{s:+}")),
        transfer.is_some(),
    ));
    Ok(PushedPoincare { curvature, bockstein, transfer })
}

fn other_pou(p: PouKind) -> PouKind {
    match p {
        PouKind::C1cubic => PouKind::Pl,
        PouKind::Pl => PouKind::C1cubic,
    }
}

fn poincare_results(cfg: &ScenarioConfig, checks: &mut Vec<Check>, timer: &mut Timer) -> Result<(PushedPoincare, PushedPoincare)> {
    let a = poincare_with(&cfg.cover, 1, checks)?;
    timer.lap("pushforward");
    let other = CoverParams { pou: other_pou(cfg.cover.pou), ..cfg.cover.clone() };
    let b = poincare_with(&other, 1, checks)?;
    timer.lap("pushforward_other_pou");
    Ok((a, b))
}

fn pou_independence(a: &PushedPoincare, b: &PushedPoincare) -> Vec<Check> {
    vec![
        Check::forms("curvature independent of the partition of unity", CrossCheck, &a.curvature, &b.curvature),
        Check::rational("Bockstein pairing independent of the partition of unity", CrossCheck, &a.bockstein, &b.bockstein),
        Check::flag("transfer sign independent of the partition of unity", CrossCheck, &format!("{:?}", a.transfer), &format!("{:?}", b.transfer), a.transfer == b.transfer),
    ]
}

fn poincare(cfg: &ScenarioConfig, timer: &mut Timer) -> Result<Outcome> {
    let mut checks = Vec::new();
    let (a, b) = poincare_results(cfg, &mut checks, timer)?;
    checks.extend(pou_independence(&a, &b));
    for power in [2, 3, -1] {
        poincare_with(&cfg.cover, power, &mut checks)?;
    }
    timer.lap("scaled");
    let tables = vec![FormTable::of("curvature", &a.curvature)];
    Ok(Outcome { checks, tables })
}

/// `T^k × T̂^k` with coordinates `x1..xk`, `xi1..xik`, all periodic.
fn poincare_torus(k: usize) -> Result<Space> {
    let mut coords: Vec<Coord> = (1..=k).map(|i| Coord::periodic(&format!("x{i}"))).collect();
    coords.extend((1..=k).map(|i| Coord::periodic(&format!("xi{i}"))));
    CoordinateSpace::new("TxT^", coords)
}

fn poincare_curvature(k: usize, timer: &mut Timer) -> Result<Outcome> {
    let s = poincare_torus(k)?;
    let mut omega = ExteriorForm::zero(&s, 2);
    for j in 1..=k {
        let t = ExteriorForm::differential(&s, &format!("xi{j}"))?.wedge(&ExteriorForm::differential(&s, &format!("x{j}"))?)?;
        omega = omega.add(&t)?;
    }
    let xs: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = xs.iter().map(String::as_str).collect();
    let base = CoordinateSpace::new("T^", (1..=k).map(|i| Coord::periodic(&format!("xi{i}"))).collect())?;
    let pushed = chern_weil_form(&InvariantMonomial::chern_power(k), &omega)?.integrate_over_named(&refs)?.embed(&base)?;
    timer.lap("fibre_integral");
    let xis: Vec<String> = (1..=k).map(|i| format!("xi{i}")).collect();
    let vol = ExteriorForm::monomial(&base, Poly::constant(k, Q::from_integer(factorial(k as u32))), &xis.iter().map(String::as_str).collect::<Vec<_>>())?;
    let ok = pushed == vol || pushed == vol.neg();
    let mut checks = vec![
        Check::flag(&format!("fibre integral of omega^{k} is ±{k}! V"), ClosedForm, &format!("±{vol}"), &pushed, ok),
        Check::flag("result is closed", Identity, "0", pushed.d(), pushed.d().is_zero()),
    ];
    if k == 1 {
        let mut extra = Vec::new();
        let a = poincare_with(&CoverParams::default(), 1, &mut extra)?;
        let sign = if pushed == vol { q(1) } else { q(-1) };
        let same = ExteriorForm::differential(a.curvature.space(), "xi")?.scale(&sign);
        checks.push(Check::forms("k = 1 agrees with the pushed-forward gerbe", CrossCheck, &same, &a.curvature));
        timer.lap("pushforward");
    }
    Ok(Outcome { checks, tables: vec![FormTable::of("curvature", &pushed)] })
}

/// `β∧(dβ)^n` on the diagonal torus data for `n ≤ 3`, plus a foliation-type `β`.
fn godbillon_vey(timer: &mut Timer) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut tables = Vec::new();
    for n in 0..=3 {
        let spec = FamilySpec::torus(n + 1)?;
        let beta = spec.chart.as_ref().ok_or_else(|| Error::InternalConsistency("torus family has a chart".into()))?;
        let (gv, rep) = gv_form(beta, n)?;
        checks.push(Check::flag(&format!("d(beta dbeta^{n}) = dbeta^{}", n + 1), Identity, "exact", if rep.identity_holds { "exact" } else { "violated" }, rep.identity_holds));
        checks.push(Check::forms(&format!("beta dbeta^{n} = transgression of xi^{}", n + 1), CrossCheck, &transgression(&InvariantMonomial::chern_power(n + 1), beta)?, &gv));
        let fibre: Vec<&str> = spec.fibre.iter().map(String::as_str).collect();
        let down = gv.integrate_over_named(&fibre)?.embed(&spec.base)?;
        checks.push(Check::forms(&format!("fibre integral, n = {n}"), ClosedForm, &torus_lambda(&spec.base, n + 1)?, &down));
        if n == 1 {
            tables.push(FormTable::of("gv_fibre_integral", &down));
        }
    }
    // z1 dx1 has (dβ)² = 0, so its GV form is closed
    let spec = FamilySpec::torus(2)?;
    let beta = ExteriorForm::coordinate(&spec.total, "z1")?.wedge(&ExteriorForm::differential(&spec.total, "x1")?)?;
    let (_, rep) = gv_form(&beta, 1)?;
    checks.push(Check::flag("codimension-one beta gives a closed form", ClosedForm, "closed", if rep.closed { "closed" } else { "not closed" }, rep.closed && rep.identity_holds));
    timer.lap("gv");
    Ok(Outcome { checks, tables })
}

pub(crate) fn compare(cfg: &ScenarioConfig, timer: &mut Timer) -> Result<Outcome> {
    let spec = match &cfg.scenario {
        ScenarioId::Ex715 { .. } => {
            let mut scratch = Vec::new();
            let (a, b) = poincare_results(cfg, &mut scratch, timer)?;
            return Ok(Outcome { checks: pou_independence(&a, &b), tables: Vec::new() });
        }
        ScenarioId::Ex71 | ScenarioId::Ex71S1 => FamilySpec::torus(2)?,
        ScenarioId::Ex75 { g } => FamilySpec::surface(*g)?,
        ScenarioId::Ex78 { k } => FamilySpec::torus(*k)?,
        ScenarioId::Custom(path) => custom::CustomScenario::load(path)?.family()?,
        other => return Err(Error::Config(format!("scenario {other} has a single backend; nothing to compare"))),
    };
    let invs = invariants(cfg, &spec, timer)?;
    if invs.len() < 2 {
        return Err(Error::Config(format!("comparing needs two backends; {} selects only {:?}", cfg.scenario, cfg.backend)));
    }
    let checks = pairwise(cfg, &invs, true)?;
    timer.lap("compare");
    Ok(Outcome { checks, tables: Vec::new() })
}
