use std::sync::Arc;

use super::*;
use crate::exterior::{Poly, Trig};

fn two_torus_lambda(base: &Space) -> ExteriorForm {
    let z2dz1 = ExteriorForm::monomial(base, Poly::var(2, 1), &["z1"]).unwrap();
    let z1dz2 = ExteriorForm::monomial(base, Poly::var(2, 0), &["z2"]).unwrap();
    z2dz1.sub(&z1dz2).unwrap()
}

#[test]
fn two_torus_family_all_backends() {
    let spec = FamilySpec::torus(2).unwrap();
    let expect = two_torus_lambda(&spec.base);
    let params = CoverParams::default();
    for backend in [Backend::Classical, Backend::Formal, Backend::ChartShuffle] {
        let inv = lambda_family(&spec, backend, &params).unwrap();
        assert_eq!(inv.ell, 1);
        assert_eq!(inv.form().unwrap(), &expect, "{backend:?}");
        let c = curvature_check(&spec, &inv).unwrap();
        assert!(c.exact_zero && c.sign == 1, "{backend:?}");
    }
}

#[test]
fn numeric_shuffle_backend_is_close() {
    let spec = FamilySpec::torus(2).unwrap();
    let inv = lambda_family(&spec, Backend::ChartShuffleNumeric, &CoverParams::default()).unwrap();
    let InvariantValue::Numeric(num) = &inv.value else { panic!("numeric value expected") };
    let exact = NumericForm::from_exact(&two_torus_lambda(&spec.base));
    let whole = vec![vec![(0, q(-1), q(1)), (1, q(-1), q(1))]];
    assert!(num.sub(&exact).unwrap().residual_on(&whole).max_abs < 1e-9);
    let dn = num.d().unwrap().sub(&exact.d().unwrap()).unwrap();
    assert!(dn.residual_on(&whole).max_abs < 1e-7);
}

#[test]
fn torus_and_surface_families() {
    let t3 = FamilySpec::torus(3).unwrap();
    let a = lambda_family(&t3, Backend::Classical, &CoverParams::default()).unwrap();
    let b = lambda_family(&t3, Backend::Formal, &CoverParams::default()).unwrap();
    assert_eq!(a.form(), b.form());
    let c = curvature_check(&t3, &a).unwrap();
    assert!(c.exact_zero && c.sign == -1);
    let s2 = FamilySpec::surface(2).unwrap();
    let inv = lambda_family(&s2, Backend::Formal, &CoverParams::default()).unwrap();
    assert!(curvature_check(&s2, &inv).unwrap().exact_zero);
    assert!(matches!(lambda_family(&s2, Backend::Classical, &CoverParams::default()), Err(Error::Config(_))));
}

#[test]
fn restrictions_and_functoriality() {
    let spec = FamilySpec::torus(2).unwrap();
    let rep = two_torus_lambda(&spec.base);
    for d in 1..=3u32 {
        let r = Restriction::circle(&spec.base, q(1), d).unwrap();
        let fc = flat_class(&rep, Some(&r)).unwrap();
        assert_eq!(fc.periods[0].1.in_turns(), Some(q(-(d as i64))));
    }
    let r = Restriction::circle(&spec.base, frac(1, 2), 1).unwrap();
    assert_eq!(flat_class(&rep, Some(&r)).unwrap().periods[0].1.in_turns(), Some(frac(-1, 4)));
    // the unrestricted invariant is not closed
    assert!(matches!(flat_class(&rep, None), Err(Error::NotClosed(_))));

    let t3 = FamilySpec::torus(3).unwrap();
    let rep3 = lambda_family(&t3, Backend::Classical, &CoverParams::default()).unwrap().form().cloned().unwrap();
    let fc = flat_class(&rep3, Some(&Restriction::sphere2(&t3.base).unwrap())).unwrap();
    assert!(!fc.periods[0].1.is_zero(), "{fc:?}");

    let s2 = FamilySpec::surface(2).unwrap();
    let rep = lambda_family(&s2, Backend::Formal, &CoverParams::default()).unwrap().form().cloned().unwrap();
    let fc = flat_class(&rep, Some(&Restriction::two_torus(&s2.base).unwrap())).unwrap();
    let turns: Vec<Q> = fc.periods.iter().map(|(_, p)| p.in_turns().unwrap()).collect();
    assert_eq!(turns, vec![q(-1), q(-1)]);
}

#[test]
fn extension_independence_and_its_failure() {
    let spec = FamilySpec::torus(2).unwrap();
    let b0 = spec.chart.clone().unwrap();
    let s = &spec.total;
    let n = s.dim();
    let base_pert = ExteriorForm::monomial(s, Poly::var(n, 2).mul(&Poly::var(n, 3)), &["z1"]).unwrap();
    let r = extension_independence(&spec, &b0, &b0.add(&base_pert).unwrap(), false).unwrap();
    assert!(r.fibre_parts_equal && r.trivial(), "{r:?}");
    let r = extension_independence(&spec, &b0, &b0, false).unwrap();
    assert!(r.difference_zero);
    let g = Poly::one(n).add(&Poly::trig(n, 1, Trig::Cos(1))).mul(&Poly::var(n, 2));
    let fibre_pert = ExteriorForm::monomial(s, g, &["x1"]).unwrap();
    let b1 = b0.add(&fibre_pert).unwrap();
    assert!(matches!(extension_independence(&spec, &b0, &b1, false), Err(Error::Precondition(_))));
    let r = extension_independence(&spec, &b0, &b1, true).unwrap();
    assert!(!r.fibre_parts_equal && !r.trivial(), "{r:?}");
}

#[test]
fn rigidity_when_n_exceeds_ell() {
    let params: Vec<Q> = (0..5).map(|i| frac(i, 4)).collect();
    let rep = foliated_family_scenario(FamilySpec::torus4_over_circle, &params, |_| Ok(None)).unwrap();
    assert_eq!(rep.n_minus_ell, 1);
    assert!(rep.constant, "{rep:?}");
    // with n = ℓ the class varies with the radius of the circle
    let mut periods = Vec::new();
    for r in [q(1), frac(1, 2), frac(3, 4)] {
        let spec = FamilySpec::torus(2).unwrap();
        let rep = two_torus_lambda(&spec.base);
        periods.push(flat_class(&rep, Some(&Restriction::circle(&spec.base, r, 1).unwrap())).unwrap().periods[0].1.clone());
    }
    assert!(periods[0] != periods[1] && periods[1] != periods[2]);
}

#[test]
fn poincare_pushforward_and_bockstein_sign() {
    use crate::covers::PouKind;
    let mut results = Vec::new();
    for kind in [PouKind::C1cubic, PouKind::Pl] {
        let fib = Arc::new(crate::chern_weil::tests::poincare_fibration(kind));
        let spec = FamilySpec::poincare(fib.clone()).unwrap();
        assert_eq!(spec.ell().unwrap(), 0);
        let inv = lambda_family(&spec, Backend::ChartShuffle, &CoverParams::default()).unwrap();
        let InvariantValue::Gerbe { cocycle, pou } = &inv.value else { panic!("gerbe expected") };
        assert!(cocycle.verify().unwrap().passes(0.0));
        let curv = cocycle.curvature(pou).unwrap();
        let dxi = ExteriorForm::differential(fib.base_space(), "xi").unwrap();
        assert!(curv == dxi || curv == dxi.neg(), "{curv}");
        assert!(curvature_check(&spec, &inv).unwrap().exact_zero);
        let dc = line_bundle_deligne(spec.line_bundle.as_ref().unwrap()).unwrap();
        let sign = bockstein_transfer_sign(&fib, &dc, &["xi"]).unwrap();
        assert_eq!(crate::scalar::abs(&sign.pushed_period.as_rational().unwrap()), q(1));
        assert!(sign.sign.is_some(), "{sign:?}");
        results.push((curv, sign.pushed_period, sign.sign));
    }
    assert_eq!(results[0], results[1]);
    eprintln!("transfer sign: {:?}", results[0].2);
}
