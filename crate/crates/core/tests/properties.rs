mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;

use common::*;
use shockstab::stability::{c_star, worksheet};
use shockstab::*;

fn weak_triple() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.05f64..0.95, 0.2f64..10.0, 1e-4f64..1.0 - 1e-4).prop_map(|(m1, g, t)| {
        let lo = 1.0 / (1.0 + g);
        let hi = (1.0 + m1) / g;
        (m1, g, (lo + t * (hi - lo)) / (m1 * m1))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ideal_shocks_satisfy_jump_relations(
        gamma in 1.1f64..3.0,
        ratio in 1.001f64..1e3,
        u in -3.0f64..3.0,
        s in -1.0f64..1.0,
    ) {
        let eos = EosSpec::ideal_gas(gamma);
        let sh = solve_downstream(&eos, &FluidState::new(1.0, u, 0.0, s), ShockStrength::PressureRatio(ratio)).unwrap();
        prop_assert!(sh.rh_residual_scaled().unwrap() < 1e-12);
        prop_assert!(sh.validate(1e-12).is_ok());
        prop_assert!(sh.downstream.s > sh.upstream.s);
        let p0 = sh.upstream.pressure(&eos).unwrap();
        let p1 = sh.downstream.pressure(&eos).unwrap();
        assert_relative_eq!(p1 / p0, ratio, max_relative = 1e-10);
    }

    #[test]
    fn classification_follows_margins(m1 in 0.01f64..0.99, g in 0.1f64..20.0, nu in 0.01f64..20.0) {
        let c = classify(m1, g, nu).unwrap();
        let expected = if c.lower_margin < 0.0 {
            StabilityRegime::Uniform
        } else if c.upper_margin < 0.0 {
            StabilityRegime::Violent
        } else {
            StabilityRegime::Weak
        };
        prop_assert_eq!(c.regime, expected);
    }

    #[test]
    fn v_and_c_star_coincide((m1, g, nu) in weak_triple(), c1 in 0.1f64..10.0) {
        let v = solve_v(m1, g, nu, c1).unwrap();
        let cs = c_star(m1, g, nu, c1).unwrap();
        assert_relative_eq!(v.v, cs.c_star, max_relative = 1e-9);
        prop_assert!(cs.beta > -1.0 && cs.beta < m1);
        prop_assert!(cs.phi > m1 && cs.phi < 1.0);
        prop_assert!(v.glancing_margin > -1e-12 * c1 * c1);
        prop_assert!(v.inequality_margin > 0.0);
    }

    #[test]
    fn worksheet_is_self_consistent((m1, g, nu) in weak_triple()) {
        let w = worksheet(m1, g, nu, 1.0).unwrap();
        prop_assert!(w.q_of_y.abs() < 1e-12);
        prop_assert!(w.y_bound_margin > 0.0);
        prop_assert!(w.upsilon_identity_gap < 1e-10);
    }

    #[test]
    fn v_scales_with_sound_speed((m1, g, nu) in weak_triple(), scale in 0.1f64..10.0) {
        let a = solve_v(m1, g, nu, 1.0).unwrap().v;
        let b = solve_v(m1, g, nu, scale).unwrap().v;
        assert_relative_eq!(b, scale * a, max_relative = 1e-12);
    }

    #[test]
    fn averaged_jacobian_is_symmetric(tau in 0.75f64..1.1, s in 0.0f64..2.0, dt in -0.05f64..0.05) {
        let eos = weak_eos();
        let a = FluidState::new(tau, 1.0, -2.0, s);
        let b = FluidState::new(tau + dt, 0.5, -1.5, s + 0.1);
        for axis in 1..=2 {
            let ab = averaged_jacobian(&eos, axis, &a, &b).unwrap();
            let ba = averaged_jacobian(&eos, axis, &b, &a).unwrap();
            prop_assert_eq!(ab, ba);
        }
    }
}
