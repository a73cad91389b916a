//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use gerbe_core::cech::{CechCochain, TotalCochain};
use gerbe_core::covers::{build_circle_cover, PouKind};
use gerbe_core::exterior::{ExteriorForm, Poly, Space, Trig};
use gerbe_core::fibre::{stokes_residual, FibreOptions, ProductFibration, Source};
use gerbe_core::scalar::{frac, q};

pub mod props;

/// Circle fibre `x` over circle base `y`.
pub fn circle_over_circle(kind: PouKind) -> ProductFibration {
    let (cx, px) = build_circle_cover("x", 3, &frac(1, 24), kind).unwrap();
    let (cy, py) = build_circle_cover("y", 3, &frac(1, 24), kind).unwrap();
    ProductFibration::new((&cx, &px), (&cy, &py)).unwrap()
}

/// Random trigonometric coefficient whose fibre integrals over the cover cells stay rational.
fn coeff(rng: &mut ChaCha8Rng) -> Poly {
    let mut p = Poly::constant(2, q(rng.gen_range(-3..=3)));
    for v in 0..2 {
        for t in [Trig::Cos(12), Trig::Sin(12), Trig::Cos(24)] {
            let c = rng.gen_range(-2..=2);
            if c != 0 {
                p = p.add(&Poly::trig(2, v, t).scale(&q(c)));
            }
        }
    }
    if rng.gen_bool(0.5) {
        p = p.mul(&Poly::trig(2, 1 - rng.gen_range(0..2), Trig::Cos(12)));
    }
    p
}

fn random_form(rng: &mut ChaCha8Rng, s: &Space, degree: usize) -> ExteriorForm {
    let wedges: &[&[&str]] = match degree {
        0 => &[&[]],
        1 => &[&["x"], &["y"]],
        _ => &[&["x", "y"]],
    };
    let mut out = ExteriorForm::zero(s, degree);
    for w in wedges {
        out = out.add(&ExteriorForm::monomial(s, coeff(rng), w).unwrap()).unwrap();
    }
    out
}

pub fn random_source(rng: &mut ChaCha8Rng, fib: &ProductFibration) -> Source {
    let s = fib.total_space().clone();
    let nerve = fib.total_nerve.clone();
    let n = rng.gen_range(1..=2);
    if rng.gen_bool(0.25) {
        return Source::Global(nerve, random_form(rng, &s, n));
    }
    let parts = (0..=n)
        .map(|nu| CechCochain::from_fn(&nerve, &s, nu, n - nu, |_| Ok(random_form(rng, &s, n - nu))).unwrap().normalized())
        .collect();
    Source::Whitney(TotalCochain { parts })
}

/// Stokes over `draws` seeded random sources: returns `(holds, sign_flip_detected)` counts.
pub fn stokes_draws(draws: u64, max_level: usize) -> (u64, u64) {
    use rand::SeedableRng;
    let opts = FibreOptions::default();
    let (mut holds, mut detected) = (0, 0);
    for seed in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = if seed % 2 == 0 { PouKind::C1cubic } else { PouKind::Pl };
        let fib = circle_over_circle(kind);
        let src = random_source(&mut rng, &fib);
        if stokes_residual(&fib, &src, max_level, &opts, false).unwrap().passes(0.0) {
            holds += 1;
        }
        if !stokes_residual(&fib, &src, max_level, &opts, true).unwrap().passes(0.0) {
            detected += 1;
        }
    }
    (holds, detected)
}
