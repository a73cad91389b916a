//! Randomized structural identities: d² = 0, Leibniz, δ̌² = 0, D² = 0, the Whitney
//! section and chain map, Deligne cocycles from the library constructors, and the
//! Godbillon–Vey identity.

mod common;

use common::props::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn d_squared_vanishes(deg in 0usize..3, r in raws(3)) { d_squared(deg, &r)?; }

    #[test]
    fn leibniz_rule(p in 0usize..3, qd in 0usize..2, ra in raws(3), rb in raws(3)) { leibniz(p, qd, &ra, &rb)?; }

    #[test]
    fn cech_delta_squared_vanishes(p in 0usize..2, deg in 0usize..3, r in raws(2)) { cech_delta_squared(p, deg, &r)?; }

    #[test]
    fn total_differential_squares_to_zero(n in 0usize..3, r in raws(2)) { total_d_squared(n, &r)?; }

    #[test]
    fn whitney_lift_is_a_section_and_a_chain_map(n in 0usize..3, r in raws(2)) { whitney(n, &r)?; }

    #[test]
    fn global_forms_give_cocycles(level in 1usize..3, r in raws(2)) { global_cocycle(level, &r)?; }

    #[test]
    fn trivial_bundles_give_cocycles(r in raws(2)) { trivial_bundle(&r)?; }

    #[test]
    fn poincare_powers_give_cocycles(k in -3i64..=3) { poincare_power(k)?; }

    #[test]
    fn pushforwards_give_cocycles(c in coeffs(), e in coeffs()) { pushforward(c, e)?; }

    #[test]
    fn godbillon_vey_identity(n in 0usize..4, r in raws(4)) { godbillon_vey(n, &r)?; }
}
