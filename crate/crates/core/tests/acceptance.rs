//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test -p gerbe-core --test acceptance -- --nocapture` shows the lines.

mod common;

use std::time::{Duration, Instant};

use gerbe_core::exterior::{ExteriorForm, Poly, Trig};
use gerbe_core::families::{extension_independence, foliated_family_scenario, FamilySpec};
use gerbe_core::scalar::{frac, q};
use gerbe_core::scenarios::{compare_backends, run_scenario, BackendSelection, Check, ScenarioConfig, VerificationReport};

struct Verdict {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn config(id: &str, backend: Option<BackendSelection>) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(id.parse().expect("built-in scenario id"));
    if let Some(b) = backend {
        cfg.backend = b;
    }
    cfg
}

fn run(id: &str, backend: Option<BackendSelection>) -> VerificationReport {
    run_scenario(&config(id, backend)).unwrap_or_else(|e| panic!("{id}: {e}"))
}

/// Passes when every check of every report passes; the detail lists failures.
fn all_pass<'a>(reports: impl IntoIterator<Item = &'a VerificationReport>) -> (bool, String) {
    let mut failed = Vec::new();
    let mut total = 0;
    for r in reports {
        total += r.checks.len();
        failed.extend(r.failures().map(|c| format!("{}: {}", r.scenario, c.name)));
    }
    (failed.is_empty(), if failed.is_empty() { format!("{total} checks") } else { failed.join("; ") })
}

/// Checks of `r` whose name contains any of `needles`; passes when there is at least one and all pass.
fn selected(r: &VerificationReport, needles: &[&str]) -> (bool, String) {
    let picked: Vec<&Check> = r.checks.iter().filter(|c| needles.iter().any(|n| c.name.contains(n))).collect();
    let bad: Vec<&str> = picked.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    (!picked.is_empty() && bad.is_empty(), if bad.is_empty() { format!("{} checks", picked.len()) } else { bad.join("; ") })
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn basic_family() -> Verdict {
    let (r, t) = timed(|| run("ex7_1", Some(BackendSelection::Exact)));
    let (ok, detail) = all_pass([&r]);
    let fast = t < Duration::from_secs(5);
    Verdict { id: 1, title: "two-torus family, exact backends, under 5 s", pass: ok && fast, detail: format!("{detail}, {:.2} s", t.as_secs_f64()) }
}

fn circle_restriction() -> Verdict {
    let r = run("ex7_1_s1", None);
    let (ok, detail) = all_pass([&r]);
    let (period, _) = selected(&r, &["period over S1 in turns"]);
    Verdict { id: 2, title: "restriction to S1 is -dtheta with period -1", pass: ok && period, detail }
}

fn surfaces() -> Verdict {
    let rs = [run("ex7_5(g=2)", None), run("ex7_5(g=3)", None)];
    let (pass, detail) = all_pass(&rs);
    Verdict { id: 3, title: "surface families g = 2, 3 (formal)", pass, detail }
}

fn tori() -> Verdict {
    let rs = [run("ex7_8(k=2)", None), run("ex7_8(k=3)", None), run("ex7_8(k=4)", None)];
    let (ok, detail) = all_pass(&rs);
    let (coincide, _) = selected(&rs[0], &["k = 2 coincides"]);
    Verdict { id: 4, title: "torus families k = 2, 3, 4; k = 2 matches the two-torus family", pass: ok && coincide, detail }
}

fn backends_agree() -> Verdict {
    let (rs, t) = timed(|| {
        ["ex7_1", "ex7_8(k=2)"]
            .map(|id| {
                let mut cfg = config(id, Some(BackendSelection::All));
                cfg.tolerance = 1e-7;
                cfg.cover.quad_order = 8;
                compare_backends(&cfg).unwrap_or_else(|e| panic!("{id}: {e}"))
            })
    });
    let (ok, detail) = all_pass(&rs);
    let fast = t < Duration::from_secs(120);
    let worst = rs.iter().flat_map(|r| &r.checks).map(|c| c.residual).fold(0.0, f64::max);
    Verdict {
        id: 5,
        title: "shuffle vs classical exact, numeric within 1e-7 at order 8, under 2 min",
        pass: ok && fast,
        detail: format!("{detail}, max residual {worst:e}, {:.1} s", t.as_secs_f64()),
    }
}

fn stokes() -> Verdict {
    const DRAWS: u64 = 20;
    let (holds, detected) = common::stokes_draws(DRAWS, 2);
    Verdict {
        id: 6,
        title: "Stokes for fibre integration on random draws",
        pass: holds == DRAWS && detected * 2 > DRAWS,
        detail: format!("{holds}/{DRAWS} hold, sign flip detected on {detected}"),
    }
}

fn integrality(poincare: &VerificationReport) -> Verdict {
    let (pass, detail) = selected(poincare, &["is integral"]);
    Verdict { id: 7, title: "integrality preserved on the Poincare bundle and its powers", pass, detail }
}

fn poincare_gerbe(poincare: &VerificationReport) -> Verdict {
    let (a, da) = selected(poincare, &["curvature is", "Bockstein pairing", "partition of unity"]);
    let curv = [run("ex7_15_curvature(k=1)", None), run("ex7_15_curvature(k=2)", None)];
    let (b, db) = all_pass(&curv);
    Verdict { id: 8, title: "Poincare pushforward: curvature +-dxi, Bockstein +-1, independent of the partition", pass: a && b, detail: format!("{da}; curvature scenarios {db}") }
}

fn properties() -> Verdict {
    let out = common::props::run_all(100);
    let bad: Vec<String> = out.iter().filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}"))).collect();
    Verdict {
        id: 9,
        title: "structural identities, 100 random cases each",
        pass: bad.is_empty(),
        detail: if bad.is_empty() { format!("{} suites", out.len()) } else { bad.join("; ") },
    }
}

fn extension_and_rigidity() -> Verdict {
    let spec = FamilySpec::torus(2).unwrap();
    let b0 = spec.chart.clone().unwrap();
    let n = spec.total.dim();
    let base_pert = ExteriorForm::monomial(&spec.total, Poly::var(n, 2).mul(&Poly::var(n, 3)), &["z1"]).unwrap();
    let same = extension_independence(&spec, &b0, &b0.add(&base_pert).unwrap(), false).unwrap();
    let g = Poly::one(n).add(&Poly::trig(n, 1, Trig::Cos(1))).mul(&Poly::var(n, 2));
    let fibre_pert = ExteriorForm::monomial(&spec.total, g, &["x1"]).unwrap();
    let control = extension_independence(&spec, &b0, &b0.add(&fibre_pert).unwrap(), true).unwrap();
    let params: Vec<_> = (0..6).map(|i| frac(i, 4)).chain([q(-1)]).collect();
    let rigid = foliated_family_scenario(FamilySpec::torus4_over_circle, &params, |_| Ok(None)).unwrap();
    Verdict {
        id: 10,
        title: "independent of the extension (with negative control); rigid when n > l",
        pass: same.trivial() && !control.trivial() && rigid.n_minus_ell > 0 && rigid.constant,
        detail: format!("negative control detected: {}, {} parameters, n - l = {}", !control.trivial(), params.len(), rigid.n_minus_ell),
    }
}

#[test]
fn acceptance() {
    let poincare = run("ex7_15", None);
    let verdicts = [
        basic_family(),
        circle_restriction(),
        surfaces(),
        tori(),
        backends_agree(),
        stokes(),
        integrality(&poincare),
        poincare_gerbe(&poincare),
        properties(),
        extension_and_rigidity(),
    ];
    let mut lines = Vec::new();
    for v in &verdicts {
        let line = format!("{} {:>2} {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.id, v.title, v.detail);
        println!("{line}");
        lines.push(line);
    }
    assert!(verdicts.iter().all(|v| v.pass), "\n{}", lines.join("\n"));
}
