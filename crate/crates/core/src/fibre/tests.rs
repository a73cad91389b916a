use super::*;
use crate::cech::periods;
use crate::covers::{build_circle_cover, PouKind};
use crate::exterior::Trig;
use crate::scalar::frac;

/// Circle fibre `x` over circle base `y`.
fn circle_over_circle(kind: PouKind) -> ProductFibration {
    let (cx, px) = build_circle_cover("x", 3, &frac(1, 24), kind).unwrap();
    let (cy, py) = build_circle_cover("y", 3, &frac(1, 24), kind).unwrap();
    ProductFibration::new((&cx, &px), (&cy, &py)).unwrap()
}

/// Line bundle on `S¹_x × S¹_y` with curvature `−dx∧dy`.
fn line_bundle(fib: &ProductFibration) -> DeligneCocycle {
    let nerve = &fib.total_nerve;
    let cover = nerve.cover().clone();
    let s = fib.total_space().clone();
    let lift = |e: usize| cover.local_lift(e, "x").unwrap();
    let ylift = |e: usize| cover.local_lift(e, "y").unwrap();
    let dy = ExteriorForm::differential(&s, "y").unwrap();
    let w0: CechCochain = CechCochain::from_fn(nerve, &s, 0, 1, |t| lift(t[0]).wedge(&dy).map(|f| f.neg())).unwrap();
    let w1: CechCochain = CechCochain::from_fn(nerve, &s, 1, 0, |t| {
        let n = lift(t[1]).sub(&lift(t[0]))?;
        n.wedge(&ylift(t[0])).map(|f| f.neg())
    })
    .unwrap();
    DeligneCocycle::new(vec![w0, w1]).unwrap()
}

#[test]
fn global_forms_integrate_classically() {
    let fib = circle_over_circle(PouKind::C1cubic);
    let s = fib.total_space().clone();
    let a = ExteriorForm::monomial(&s, Poly::one(2).add(&Poly::trig(2, 0, Trig::Cos(12))), &["x", "y"]).unwrap();
    let expected = classical_fibre_integral(&fib, &a).unwrap();
    assert_eq!(expected, ExteriorForm::differential(fib.base_space(), "y").unwrap());
    let src = Source::Global(fib.total_nerve.clone(), a);
    let out = fib.fibre_integrate(&src, 2, &FibreOptions::default()).unwrap();
    for p in 0..=2 {
        let sp = out.level_space(p).clone();
        for v in out.level(p) {
            assert_eq!(v, &expected.embed(&sp).unwrap(), "level {p}");
        }
    }
    // fibre degree below dim X integrates to zero
    let low = Source::Global(fib.total_nerve.clone(), ExteriorForm::differential(&s, "y").unwrap());
    let out = fib.fibre_integrate(&low, 1, &FibreOptions::default()).unwrap();
    assert!(out.level(1).iter().all(|v| v.is_zero()));
}

#[test]
fn single_bump_is_identity_substitution() {
    // a one-element fibre cover cannot exist on a circle, so test p = 0 against φ̄ directly
    let fib = circle_over_circle(PouKind::Pl);
    let dc = line_bundle(&fib);
    let src = Source::Whitney(TotalCochain { parts: dc.omega.clone() });
    for conv in Convention::ALL {
        let out = fib.fibre_integrate(&src, 0, &FibreOptions::with(conv)).unwrap();
        let base = out.level(0).to_vec();
        let pv = fib.fibre_integrate(&src, 0, &FibreOptions::default()).unwrap();
        assert_eq!(base, pv.level(0).to_vec(), "{conv:?}");
    }
}

#[test]
fn product_vertex_is_face_compatible() {
    let fib = circle_over_circle(PouKind::C1cubic);
    let dc = line_bundle(&fib);
    let src = Source::Whitney(TotalCochain { parts: dc.omega.clone() });
    let out = fib.fibre_integrate(&src, 2, &FibreOptions::default()).unwrap();
    let rep = out.verify_simplicial().unwrap();
    assert!(rep.passes(0.0), "{rep:?}");
}

#[test]
fn stokes_holds_with_the_sign_and_fails_without() {
    let fib = circle_over_circle(PouKind::C1cubic);
    let dc = line_bundle(&fib);
    let src = Source::Whitney(TotalCochain { parts: dc.omega.clone() });
    let opts = FibreOptions::default();
    assert!(stokes_residual(&fib, &src, 1, &opts, false).unwrap().passes(0.0));
    assert!(!stokes_residual(&fib, &src, 1, &opts, true).unwrap().passes(0.0));
}

#[test]
fn pushforward_of_the_line_bundle() {
    let fib = circle_over_circle(PouKind::C1cubic);
    let dc = line_bundle(&fib);
    let alpha = dc.curvature(&fib.total_pou).unwrap();
    let down = deligne_pushforward(&fib, &dc, &FibreOptions::default()).unwrap();
    let rep = down.verify().unwrap();
    assert!(rep.passes(0.0), "{rep:?}");
    let curv = down.curvature(&fib.base_pou).unwrap();
    assert_eq!(curv, classical_fibre_integral(&fib, &alpha).unwrap());
    let z = down.bockstein_class().unwrap();
    let per = periods(&z.collate(&fib.base_pou).unwrap(), &[vec!["y"]]).unwrap();
    assert_eq!(per, periods(&curv, &[vec!["y"]]).unwrap());
    assert_eq!(crate::scalar::abs(&per[0].as_rational().unwrap()), q(1));
}

#[test]
fn integrality_is_preserved_and_linear() {
    let fib = circle_over_circle(PouKind::C1cubic);
    let dc = line_bundle(&fib);
    let z = dc.bockstein_class().unwrap();
    let beta = |scale: i64| -> Source {
        let s = fib.total_space().clone();
        let zc: CechCochain = CechCochain::from_fn(&fib.total_nerve, &s, 2, 0, |t| {
            let idx = fib.total_nerve.index_of(t).unwrap();
            Ok(ExteriorForm::constant(&s, Q::from_integer(z.values[idx].clone() * scale)))
        })
        .unwrap();
        let parts = vec![CechCochain::zero(&fib.total_nerve, &s, 0, 2), CechCochain::zero(&fib.total_nerve, &s, 1, 1), zc.normalized()];
        Source::Whitney(TotalCochain { parts })
    };
    let opts = FibreOptions::default();
    let one = check_integral_preserved(&fib, &beta(1), &opts, 1e-9).unwrap();
    assert!(one.integral, "{one:?}");
    let total: i64 = one.entries.iter().map(|(_, v)| v).sum();
    assert_eq!(total.abs(), 1);
    let three = check_integral_preserved(&fib, &beta(3), &opts, 1e-9).unwrap();
    assert!(three.integral);
    for (a, b) in one.entries.iter().zip(&three.entries) {
        assert_eq!(3 * a.1, b.1);
    }
    let zero = check_integral_preserved(&fib, &beta(0), &opts, 1e-9).unwrap();
    assert!(zero.entries.iter().all(|(_, v)| *v == 0));
}

#[test]
fn non_normal_input_is_rejected() {
    let fib = circle_over_circle(PouKind::Pl);
    let s = fib.total_space().clone();
    let mut f = SimplicialForm::epsilon_star(&fib.total_nerve, &ExteriorForm::differential(&s, "x").unwrap(), 1).unwrap();
    let idx = fib.total_nerve.index_of(&[0, 0]).unwrap();
    let sp = f.level_space(1).clone();
    f.set(1, idx, ExteriorForm::zero(&sp, 1));
    let err = fib.fibre_integrate(&Source::Stored(f), 0, &FibreOptions::default()).unwrap_err();
    assert!(matches!(err, Error::NormalityRequired(_)));
}

#[test]
fn numeric_backend_matches_exact() {
    use crate::exterior::NumericForm;
    let fib = circle_over_circle(PouKind::C1cubic);
    let dc = line_bundle(&fib);
    let exact = fib.fibre_integrate(&Source::Whitney(TotalCochain { parts: dc.omega.clone() }), 1, &FibreOptions::default()).unwrap();
    let parts: Vec<CechCochain<NumericForm>> =
        dc.omega.iter().map(|c| CechCochain::from_fn(c.nerve(), c.space(), c.bidegree().0, c.bidegree().1, |t| Ok(NumericForm::from_exact(c.get(t).unwrap()))).unwrap()).collect();
    let num = fib.fibre_integrate(&Source::Whitney(TotalCochain { parts }), 1, &FibreOptions::default()).unwrap();
    for p in 0..=1 {
        for (idx, (a, b)) in exact.level(p).iter().zip(num.level(p)).enumerate() {
            let region = crate::simplicial::shift_region(&fib.base_nerve.region(p, idx), p);
            let diff = NumericForm::from_exact(a).sub(b).unwrap();
            assert!(diff.residual_on(&region).max_abs < 1e-9, "level {p} tuple {idx}");
        }
    }
}

#[test]
fn convention_verdicts_on_the_line_bundle() {
    let fib = circle_over_circle(PouKind::C1cubic);
    let dc = line_bundle(&fib);
    let src = Source::Whitney(TotalCochain { parts: dc.omega.clone() });
    let v = convention_verdicts(&fib, &src, 1, 8, 0.0).unwrap();
    eprintln!("{v:#?}");
    let pv = v.iter().find(|c| c.convention == Convention::ProductVertex).unwrap();
    assert!(pv.passes());
}
