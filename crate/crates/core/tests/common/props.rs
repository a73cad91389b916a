//! Generators and checks for the structural identities, shared by the property suite
//! and the acceptance run.

use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use gerbe_core::cech::{epsilon_star, CechCochain, DeligneCocycle, TotalCochain};
use gerbe_core::chern_weil::gv_form;
use gerbe_core::chern_weil::{line_bundle_deligne, LineBundleData};
use gerbe_core::covers::{build_box_cover, build_circle_cover, product_cover, Nerve, PouKind};
use gerbe_core::exterior::{Coord, CoordinateSpace, ExteriorForm, Monomial, Poly, Space, Trig};
use gerbe_core::fibre::{deligne_pushforward, FibreOptions};
use gerbe_core::scalar::{frac, q};
use gerbe_core::simplicial::SimplicialForm;

/// Coefficients of one random polynomial: `(exponents, numerator, denominator)`.
pub type RawPoly = Vec<(Vec<u32>, i64, i64)>;

pub fn raw_poly(nvars: usize) -> impl Strategy<Value = RawPoly> {
    prop::collection::vec((prop::collection::vec(0u32..3, nvars), -6i64..=6, 1i64..=4), 1..4)
}

pub fn poly(nvars: usize, raw: &RawPoly) -> Poly {
    Poly::from_terms(
        nvars,
        raw.iter().map(|(e, n, d)| {
            let mut m = Monomial::one(nvars);
            m.exps.clone_from(e);
            (m, frac(*n, *d))
        }),
    )
}

pub fn affine(n: usize) -> Space {
    let coords = (0..n).map(|i| Coord::affine(&format!("z{}", i + 1), q(-1), q(1))).collect();
    CoordinateSpace::new("Z", coords).unwrap()
}

/// A random form of the given degree: one random coefficient per basis wedge.
pub fn form(space: &Space, degree: usize, raws: &[RawPoly]) -> ExteriorForm {
    let names: Vec<String> = (0..space.dim()).map(|i| format!("z{}", i + 1)).collect();
    let mut out = ExteriorForm::zero(space, degree);
    let mut raws = raws.iter().cycle();
    for mask in 0u32..(1 << space.dim()) {
        if mask.count_ones() as usize != degree {
            continue;
        }
        let wedge: Vec<&str> = (0..space.dim()).filter(|i| mask >> i & 1 == 1).map(|i| names[i].as_str()).collect();
        let p = poly(space.dim(), raws.next().unwrap());
        out = out.add(&ExteriorForm::monomial(space, p, &wedge).unwrap()).unwrap();
    }
    out
}

pub fn raws(nvars: usize) -> impl Strategy<Value = Vec<RawPoly>> {
    prop::collection::vec(raw_poly(nvars), 1..5)
}

pub fn box_nerve() -> (Arc<Nerve>, Space) {
    let (c, _) = build_box_cover(&[("z1", q(-1), q(1)), ("z2", q(-1), q(1))], 2, &frac(1, 4), PouKind::C1cubic).unwrap();
    let s = c.space().clone();
    (Arc::new(Nerve::new(Arc::new(c))), s)
}

/// A random Čech cochain whose value on each tuple is drawn from `r`, rotated by the tuple.
pub fn cochain(nerve: &Arc<Nerve>, s: &Space, p: usize, deg: usize, r: &[RawPoly]) -> CechCochain {
    CechCochain::from_fn(nerve, s, p, deg, |t| {
        let shift = t.iter().fold(p, |h, &a| h * 7 + a) % r.len();
        let mut rot = r.to_vec();
        rot.rotate_left(shift);
        Ok(form(s, deg, &rot))
    })
    .unwrap()
}

/// A random normalized total cochain of total degree `n` with `parts[ν]` of bidegree `(ν, n − ν)`.
pub fn total(nerve: &Arc<Nerve>, s: &Space, n: usize, r: &[RawPoly]) -> TotalCochain {
    TotalCochain { parts: (0..=n).map(|nu| cochain(nerve, s, nu, n - nu, r).normalized()).collect() }
}

/// A periodic function of `x` on the two-variable space: `a + b cos(12τx) + c sin(24τx)`.
pub fn periodic(nvars: usize, x: usize, (a, b, c): (i64, i64, i64)) -> Poly {
    Poly::constant(nvars, q(a))
        .add(&Poly::trig(nvars, x, Trig::Cos(12)).scale(&q(b)))
        .add(&Poly::trig(nvars, x, Trig::Sin(24)).scale(&q(c)))
}

pub fn coeffs() -> impl Strategy<Value = (i64, i64, i64)> {
    (-4i64..=4, -4i64..=4, -4i64..=4)
}

pub fn torus_nerve(x: &str, y: &str) -> Arc<Nerve> {
    let (ca, pa) = build_circle_cover(x, 3, &frac(1, 24), PouKind::C1cubic).unwrap();
    let (cb, pb) = build_circle_cover(y, 3, &frac(1, 24), PouKind::C1cubic).unwrap();
    let (c, _) = product_cover((&ca, &pa), (&cb, &pb), false).unwrap();
    Arc::new(Nerve::new(Arc::new(c)))
}

type Check = std::result::Result<(), TestCaseError>;

pub fn d_squared(deg: usize, r: &[RawPoly]) -> Check {
    let a = form(&affine(3), deg, r);
    prop_assert!(a.d().d().is_zero());
    Ok(())
}

pub fn leibniz(p: usize, qd: usize, ra: &[RawPoly], rb: &[RawPoly]) -> Check {
    let s = affine(3);
    let (a, b) = (form(&s, p, ra), form(&s, qd, rb));
    let sign = if p % 2 == 0 { q(1) } else { q(-1) };
    let rhs = a.d().wedge(&b).unwrap().add(&a.wedge(&b.d()).unwrap().scale(&sign)).unwrap();
    prop_assert_eq!(a.wedge(&b).unwrap().d(), rhs);
    Ok(())
}

pub fn cech_delta_squared(p: usize, deg: usize, r: &[RawPoly]) -> Check {
    let (nerve, s) = box_nerve();
    let c = cochain(&nerve, &s, p, deg, r);
    prop_assert!(c.cech_delta().unwrap().cech_delta().unwrap().residual().passes(0.0));
    Ok(())
}

pub fn total_d_squared(n: usize, r: &[RawPoly]) -> Check {
    let (nerve, s) = box_nerve();
    let c = total(&nerve, &s, n, r);
    prop_assert!(c.total_d().unwrap().total_d().unwrap().residual().passes(0.0));
    Ok(())
}

/// `𝓘_Δ ∘ E = id` and `E(Dc) = dE(c)` for the Whitney lift `E`.
pub fn whitney(n: usize, r: &[RawPoly]) -> Check {
    let (nerve, s) = box_nerve();
    let c = total(&nerve, &s, n, r);
    let e = SimplicialForm::whitney_lift(&c, 2).unwrap();
    prop_assert!(e.verify_simplicial().unwrap().passes(0.0));
    for (a, b) in e.i_delta().unwrap().parts.iter().zip(&c.parts) {
        prop_assert!(a.sub(b).unwrap().residual().passes(0.0));
    }
    let lhs = SimplicialForm::whitney_lift(&c.total_d().unwrap(), 2).unwrap();
    let rhs = e.d().unwrap();
    for p in 0..=2 {
        prop_assert_eq!(lhs.level(p), rhs.level(p));
    }
    Ok(())
}

pub fn global_cocycle(level: usize, r: &[RawPoly]) -> Check {
    let (nerve, s) = box_nerve();
    let w = form(&s, level, r);
    prop_assert!(DeligneCocycle::from_global(&nerve, level, &w).unwrap().verify().unwrap().passes(0.0));
    Ok(())
}

pub fn trivial_bundle(r: &[RawPoly]) -> Check {
    let (nerve, s) = box_nerve();
    let a = form(&s, 1, r);
    let dc = line_bundle_deligne(&LineBundleData::trivial(&nerve, &a)).unwrap();
    prop_assert!(dc.verify().unwrap().passes(0.0));
    prop_assert!(epsilon_star(&nerve, &a.d()).sub(&dc.omega[0].d().unwrap()).unwrap().residual().passes(0.0));
    Ok(())
}

pub fn poincare_power(k: i64) -> Check {
    let nerve = torus_nerve("x", "xi");
    let lb = LineBundleData::poincare(&nerve, "x", "xi").unwrap().tensor_power(k);
    prop_assert!(lb.verify().is_ok());
    prop_assert!(line_bundle_deligne(&lb).unwrap().verify().unwrap().passes(0.0));
    Ok(())
}

pub fn pushforward(c: (i64, i64, i64), e: (i64, i64, i64)) -> Check {
    let fib = super::circle_over_circle(PouKind::C1cubic);
    let s = fib.total_space().clone();
    let w = ExteriorForm::monomial(&s, periodic(2, 0, c).mul(&periodic(2, 1, e)), &["x", "y"]).unwrap();
    let dc = DeligneCocycle::from_global(&fib.total_nerve, 2, &w).unwrap();
    prop_assert!(deligne_pushforward(&fib, &dc, &FibreOptions::default()).unwrap().verify().unwrap().passes(0.0));
    Ok(())
}

pub fn godbillon_vey(n: usize, r: &[RawPoly]) -> Check {
    let (_, rep) = gv_form(&form(&affine(4), 1, r), n).unwrap();
    prop_assert!(rep.identity_holds);
    Ok(())
}

/// Runs every suite with `cases` random cases; one `(name, outcome)` per suite.
pub fn run_all(cases: u32) -> Vec<(&'static str, std::result::Result<(), String>)> {
    fn go<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Check) -> std::result::Result<(), String> {
        TestRunner::new(Config::with_cases(cases)).run(&s, f).map_err(|e| e.to_string())
    }
    vec![
        ("d^2 = 0", go(cases, (0usize..3, raws(3)), |(d, r)| d_squared(d, &r))),
        ("Leibniz", go(cases, (0usize..3, 0usize..2, raws(3), raws(3)), |(p, q, a, b)| leibniz(p, q, &a, &b))),
        ("Cech delta^2 = 0", go(cases, (0usize..2, 0usize..3, raws(2)), |(p, d, r)| cech_delta_squared(p, d, &r))),
        ("D^2 = 0", go(cases, (0usize..3, raws(2)), |(n, r)| total_d_squared(n, &r))),
        ("Whitney section and chain map", go(cases, (0usize..3, raws(2)), |(n, r)| whitney(n, &r))),
        ("global forms are Deligne cocycles", go(cases, (1usize..3, raws(2)), |(l, r)| global_cocycle(l, &r))),
        ("trivial bundles are Deligne cocycles", go(cases, raws(2), |r| trivial_bundle(&r))),
        ("Poincare powers are Deligne cocycles", go(cases, -3i64..=3, poincare_power)),
        ("pushforwards are Deligne cocycles", go(cases, (coeffs(), coeffs()), |(c, e)| pushforward(c, e))),
        ("Godbillon-Vey identity", go(cases, (0usize..4, raws(4)), |(n, r)| godbillon_vey(n, &r))),
    ]
}
