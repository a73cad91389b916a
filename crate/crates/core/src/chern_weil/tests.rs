use std::sync::Arc;

use super::*;
use crate::exterior::{Coord, CoordinateSpace, Poly, Space};
use crate::scalar::binomial;

/// `T^k × [−1,1]^k` with coordinates `x1..xk`, `z1..zk`.
pub(crate) fn torus_family_space(k: usize) -> Space {
    let mut coords: Vec<Coord> = (1..=k).map(|i| Coord::periodic(&format!("x{i}"))).collect();
    coords.extend((1..=k).map(|i| Coord::affine(&format!("z{i}"), q(-1), q(1))));
    CoordinateSpace::new("Y", coords).unwrap()
}

fn base_space(k: usize) -> Space {
    CoordinateSpace::new("Z", (1..=k).map(|i| Coord::affine(&format!("z{i}"), q(-1), q(1))).collect()).unwrap()
}

/// `B = Σ z_j dx_j`.
pub(crate) fn diagonal_connection(s: &Space, k: usize) -> ExteriorForm {
    (1..=k).fold(ExteriorForm::zero(s, 1), |acc, j| {
        let z = ExteriorForm::coordinate(s, &format!("z{j}")).unwrap();
        acc.add(&z.wedge(&ExteriorForm::differential(s, &format!("x{j}")).unwrap()).unwrap()).unwrap()
    })
}

fn dz(s: &Space, names: &[&str], c: Poly) -> ExteriorForm {
    ExteriorForm::monomial(s, c, names).unwrap()
}

fn fibre_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

/// `(−1)^{C(k,2)}(k−1)! Σ_j (−1)^{j−1} z_j dz_1…ĵ…dz_k`.
fn expected_torus_lambda(z: &Space, k: usize) -> ExteriorForm {
    let sign = if binomial(k as u64, 2) % 2 == 0 { 1 } else { -1 };
    let fact: i64 = (1..k as i64).product();
    let mut out = ExteriorForm::zero(z, k - 1);
    for j in 1..=k {
        let names: Vec<String> = (1..=k).filter(|i| *i != j).map(|i| format!("z{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let c = Poly::var(k, j - 1).scale(&q(sign * fact * if j % 2 == 1 { 1 } else { -1 }));
        out = out.add(&dz(z, &refs, c)).unwrap();
    }
    out
}

#[test]
fn two_torus_family_by_hand() {
    let s = torus_family_space(2);
    let b = diagonal_connection(&s, 2);
    let lam = cs_transgression_abelian(&b, 1).unwrap();
    let n = s.dim();
    let z2dz1 = dz(&s, &["x1", "x2", "z1"], Poly::var(n, 3));
    let z1dz2 = dz(&s, &["x1", "x2", "z2"], Poly::var(n, 2));
    assert_eq!(lam, z2dz1.sub(&z1dz2).unwrap());
    let qf = chern_weil_form(&InvariantMonomial::chern_power(2), &b.d()).unwrap();
    assert_eq!(qf, dz(&s, &["x1", "x2", "z1", "z2"], Poly::constant(n, q(-2))));
    assert_eq!(lam.d(), qf);
    let down = lam.integrate_over_named(&["x1", "x2"]).unwrap();
    assert_eq!(down, expected_torus_lambda(&base_space(2), 2));
    // a single term squares to zero
    let f = dz(&s, &["z1", "x1"], Poly::one(n));
    assert!(chern_weil_form(&InvariantMonomial::chern_power(2), &f).unwrap().is_zero());
    assert!(matches!(chern_weil_form(&InvariantMonomial::chern_power(2), &b), Err(Error::DegreeMismatch { .. })));
}

#[test]
fn torus_family_coefficients() {
    for k in 2..=4 {
        let s = torus_family_space(k);
        let b = diagonal_connection(&s, k);
        let names = fibre_names(k);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let lam = cs_transgression_abelian(&b, k - 1).unwrap().integrate_over_named(&refs).unwrap();
        let z = base_space(k);
        assert_eq!(lam, expected_torus_lambda(&z, k), "k = {k}");
        let sign = if binomial(k as u64, 2) % 2 == 0 { 1 } else { -1 };
        let kf: i64 = (1..=k as i64).product();
        let zn: Vec<String> = (1..=k).map(|i| format!("z{i}")).collect();
        let zr: Vec<&str> = zn.iter().map(String::as_str).collect();
        assert_eq!(lam.d(), dz(&z, &zr, Poly::constant(k, q(sign * kf))));
    }
}

#[test]
fn formal_torus_matches_chart() {
    for k in 2..=3 {
        let s = torus_family_space(k);
        let z = base_space(k);
        let names = fibre_names(k);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let model = Arc::new(FormalFiberModel::torus(&refs));
        model.verify().unwrap();
        let coeffs: Vec<(usize, ExteriorForm)> =
            (0..k).map(|j| (1usize << j, ExteriorForm::coordinate(&z, &format!("z{}", j + 1)).unwrap())).collect();
        let fam = formal_family_connection(&model, &z, &coeffs, None, k - 1).unwrap();
        let b = diagonal_connection(&s, k);
        assert_eq!(fam.b.to_chart(&s, &refs).unwrap(), b);
        let chart_lambda = cs_transgression_abelian(&b, k - 1).unwrap();
        assert_eq!(fam.lambda.to_chart(&s, &refs).unwrap(), chart_lambda);
        assert_eq!(fam.lambda_yz, chart_lambda.integrate_over_named(&refs).unwrap());
        assert_eq!(fam.ell, k - 1);
        // ∫_X Q(F) = (−1)^{ℓ−1} dΛ_{Y/Z}
        let sign = if (fam.ell + 1) % 2 == 0 { q(1) } else { q(-1) };
        assert_eq!(fam.integrated_curvature, fam.lambda_yz.d().scale(&sign));
    }
}

#[test]
fn genus_g_surface_family() {
    for g in 1..=3 {
        let model = Arc::new(FormalFiberModel::surface(g));
        model.verify().unwrap();
        for i in 1..=g {
            assert_eq!(model.pair(i, g + i), q(1));
            assert_eq!(model.pair(i, i), q(0));
            for j in 1..=g {
                if i != j {
                    assert_eq!(model.pair(i, g + j), q(0));
                }
            }
        }
        let z = base_space(2 * g);
        let coeffs: Vec<(usize, ExteriorForm)> = (1..=g)
            .flat_map(|i| {
                [(i, format!("z{}", 2 * i - 1)), (g + i, format!("z{}", 2 * i))]
            })
            .map(|(a, n)| (a, ExteriorForm::coordinate(&z, &n).unwrap()))
            .collect();
        let fam = formal_family_connection(&model, &z, &coeffs, None, 1).unwrap();
        let nv = 2 * g;
        let mut lam = ExteriorForm::zero(&z, 1);
        let mut curv = ExteriorForm::zero(&z, 2);
        for i in 1..=g {
            let (a, b) = (format!("z{}", 2 * i - 1), format!("z{}", 2 * i));
            lam = lam.add(&dz(&z, &[&a], Poly::var(nv, 2 * i - 1))).unwrap();
            lam = lam.sub(&dz(&z, &[&b], Poly::var(nv, 2 * i - 2))).unwrap();
            curv = curv.add(&dz(&z, &[&a, &b], Poly::constant(nv, q(-2)))).unwrap();
        }
        assert_eq!(fam.lambda_yz, lam, "g = {g}");
        assert_eq!(fam.integrated_curvature, curv);
        assert_eq!(fam.lambda_yz.d(), curv);
    }
}

#[test]
fn broken_models_are_rejected() {
    let mut m = FormalFiberModel::surface(1);
    m.mult.insert((1, 2), vec![(3, q(1))]);
    m.mult.insert((2, 1), vec![(3, q(1))]);
    assert!(m.verify().is_err());
    let mut m = FormalFiberModel::surface(1);
    m.pairing.clear();
    let m = Arc::new(m);
    let z = base_space(2);
    let coeffs = vec![(1, ExteriorForm::coordinate(&z, "z1").unwrap()), (2, ExteriorForm::coordinate(&z, "z2").unwrap())];
    assert!(matches!(formal_family_connection(&m, &z, &coeffs, None, 1), Err(Error::Model(_))));
}

#[test]
fn variational_formula() {
    let s = torus_family_space(2);
    let b = diagonal_connection(&s, 2);
    let qm = InvariantMonomial::chern_power(2);
    let same = variational_delta(&qm, &b, &b).unwrap();
    assert!(same.bulk.is_zero() && same.check.identical);
    let n = s.dim();
    let f = ExteriorForm::scalar(&s, Poly::var(n, 2).mul(&Poly::var(n, 3)).add(&Poly::trig(n, 0, crate::exterior::Trig::Sin(1))));
    let r = variational_delta(&qm, &b, &b.add(&f.d()).unwrap()).unwrap();
    assert!(r.check.exact(), "{:?}", r.check);
    let pert = dz(&s, &["z1"], Poly::var(n, 2).mul(&Poly::var(n, 3)));
    let r = variational_delta(&InvariantMonomial::new(3, q(5)), &b, &b.add(&pert).unwrap()).unwrap();
    assert!(r.check.exact());
}

#[test]
fn product_identity_and_gv() {
    let s = torus_family_space(3);
    let b = diagonal_connection(&s, 3);
    let xi = InvariantMonomial::chern_power(1);
    let r = product_identity_check(&xi, &xi, &b).unwrap();
    assert!(r.identical);
    let c = InvariantMonomial::new(0, q(7));
    assert!(product_identity_check(&c, &InvariantMonomial::new(2, q(3)), &b).unwrap().identical);
    let s2 = torus_family_space(2);
    let beta = diagonal_connection(&s2, 2);
    let (gv, rep) = gv_form(&beta, 1).unwrap();
    assert_eq!(gv, cs_transgression_abelian(&beta, 1).unwrap());
    assert!(rep.identity_holds && !rep.closed);
    let (gv0, rep0) = gv_form(&beta, 0).unwrap();
    assert_eq!(gv0, beta);
    assert!(rep0.identity_holds);
}

pub(crate) fn poincare_fibration(kind: crate::covers::PouKind) -> crate::fibre::ProductFibration {
    use crate::covers::build_circle_cover;
    let d = crate::scalar::frac(1, 24);
    let (cx, px) = build_circle_cover("x", 3, &d, kind).unwrap();
    let (cy, py) = build_circle_cover("xi", 3, &d, kind).unwrap();
    crate::fibre::ProductFibration::new((&cx, &px), (&cy, &py)).unwrap()
}

#[test]
fn poincare_line_bundle() {
    use crate::cech::periods;
    let fib = poincare_fibration(crate::covers::PouKind::C1cubic);
    let lb = LineBundleData::poincare(&fib.total_nerve, "x", "xi").unwrap();
    let dc = line_bundle_deligne(&lb).unwrap();
    assert!(dc.verify().unwrap().passes(0.0));
    let s = fib.total_space().clone();
    let curv = dc.curvature(&fib.total_pou).unwrap();
    assert_eq!(curv, ExteriorForm::monomial(&s, Poly::constant(2, q(-1)), &["x", "xi"]).unwrap());
    let z = dc.bockstein_class().unwrap();
    let pz = periods(&z.collate(&fib.total_pou).unwrap(), &[vec!["x", "xi"]]).unwrap();
    assert_eq!(pz, periods(&curv, &[vec!["x", "xi"]]).unwrap());
    assert_eq!(pz[0].as_rational(), Some(q(-1)));

    let sq = line_bundle_deligne(&lb.tensor_power(2)).unwrap();
    assert_eq!(sq.curvature(&fib.total_pou).unwrap(), curv.scale(&q(2)));
    let z2 = sq.bockstein_class().unwrap();
    assert_eq!(z2.values_i64(), z.values_i64().iter().map(|v| 2 * v).collect::<Vec<_>>());

    let triv = LineBundleData::trivial(&fib.total_nerve, &ExteriorForm::differential(&s, "x").unwrap());
    let dt = line_bundle_deligne(&triv).unwrap();
    assert!(dt.bockstein_class().unwrap().is_zero());

    let mut bad = lb.clone();
    bad.connection[0] = bad.connection[0].add(&ExteriorForm::differential(&s, "x").unwrap()).unwrap();
    assert!(line_bundle_deligne(&bad).is_err());
}

#[test]
fn holonomy_is_a_homomorphism() {
    let s = torus_family_space(2);
    let b = diagonal_connection(&s, 2);
    let fib = ["x1", "x2"];
    let e = holonomy_exponent(&b, &fib, &[1, 0]).unwrap();
    assert_eq!(e, ExteriorForm::coordinate(e.space(), "z1").unwrap());
    for l in [[1i64, 0], [0, 1], [2, -3], [-1, 4]] {
        for m in [[0i64, 1], [5, 2], [-2, -2]] {
            let lm = [l[0] + m[0], l[1] + m[1]];
            let lhs = holonomy_exponent(&b, &fib, &lm).unwrap();
            let rhs = holonomy_exponent(&b, &fib, &l).unwrap().add(&holonomy_exponent(&b, &fib, &m).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            let z = [0.3, -0.7];
            let h = holonomy(&b, &fib, &lm, &z).unwrap();
            let hh = holonomy(&b, &fib, &l, &z).unwrap() * holonomy(&b, &fib, &m, &z).unwrap();
            assert!((h - hh).abs() < 1e-12 * h.abs().max(1.0));
        }
    }
}
