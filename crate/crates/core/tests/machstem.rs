mod common;

use common::*;
use shockstab::machstem::{
    extrapolate_to_zero, loglog_slope, MachStemProblem, ValidationTolerances,
};
use shockstab::*;

fn vec_rel(a: &nalgebra::Vector4<f64>, b: &nalgebra::Vector4<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn state1_at_reference_is_reference_downstream() {
    let p = reference_problem();
    let w = p.downstream_state_1(&p.shock.upstream).unwrap();
    assert!(vec_rel(&w.to_vector(), &p.shock.downstream.to_vector()) < 1e-12);
}

#[test]
fn state1_tangential_derivative_is_unit() {
    let p = reference_problem();
    let ub = p.shock.u_bar;
    let h = 1e-5 * ub.abs();
    let wp = p.downstream_state_1(&p.upstream_with(ub + h)).unwrap();
    let wm = p.downstream_state_1(&p.upstream_with(ub - h)).unwrap();
    let d = (wp.to_vector() - wm.to_vector()) / (2.0 * h);
    let expected = nalgebra::Vector4::new(0.0, 1.0, 0.0, 0.0);
    assert!((d - expected).norm() < 1e-8, "{d}");
}

#[test]
fn state1_solves_its_jump_relation() {
    let p = reference_problem();
    let eos = p.shock.eos;
    let u = FluidState::new(1.01, p.shock.u_bar * 0.98, p.shock.upstream.v * 1.02, 0.001);
    let w = p.downstream_state_1(&u).unwrap();
    let r = flux(&eos, 2, &w).unwrap() - flux(&eos, 2, &u).unwrap();
    assert!(r.norm() / flux(&eos, 2, &u).unwrap().norm() < 1e-12);
}

#[test]
fn state2_reduces_to_state1_at_zero_angle() {
    let p = reference_problem();
    let u = p.upstream_with(p.shock.u_bar * 1.03);
    let a = p.downstream_state_1(&u).unwrap();
    let b = p.downstream_state_2(0.0, &u).unwrap();
    assert!(vec_rel(&a.to_vector(), &b.to_vector()) < 1e-12);
}

#[test]
fn state2_angle_derivative_matches_linear_solve_and_closed_form() {
    let p = reference_problem();
    let eos = p.shock.eos;
    let (u0, u1) = (p.shock.upstream, p.shock.downstream);
    let h = 1e-5;
    let wp = p.downstream_state_2(h, &u0).unwrap();
    let wm = p.downstream_state_2(-h, &u0).unwrap();
    let fd = (wp.to_vector() - wm.to_vector()) / (2.0 * h);
    let df2 = flux_jacobian(&eos, 2, &u1).unwrap();
    let jump = flux(&eos, 1, &u1).unwrap() - flux(&eos, 1, &u0).unwrap();
    let linear = -df2.try_inverse().unwrap() * jump;
    assert!(vec_rel(&fd, &linear) < 1e-7, "fd {fd} linear {linear}");
    let closed = solve_linearized_rh(&p.shock).unwrap().u_dot;
    assert!(
        vec_rel(&closed, &linear) < 1e-10,
        "closed {closed} linear {linear}"
    );
}

#[test]
fn trust_region_is_enforced() {
    let p = reference_problem();
    let far = p.upstream_with(p.shock.u_bar * 1.5);
    assert!(matches!(
        p.downstream_state_1(&far),
        Err(Error::SeedTooFar { .. })
    ));
}

#[test]
fn zero_amplitude_shock3() {
    let p = reference_problem();
    let eos = p.shock.eos;
    let u1 = p.shock.downstream;
    let s3 = p
        .shock3_solve(&u1, u1.pressure(&eos).unwrap(), None)
        .unwrap();
    assert_eq!(s3.state, u1);
    assert_eq!(s3.lambda, 0.0);
    assert!((s3.psi - p.psi0).abs() < 1e-15);
}

#[test]
fn shock3_amplitude_derivative_is_kernel_vector() {
    let p = reference_problem();
    let eos = p.shock.eos;
    let u1 = p.shock.downstream;
    let t1 = u1.thermo(&eos).unwrap();
    let c = t1.sound_speed;
    let r = nalgebra::Vector4::new(u1.tau, c * p.psi0.sin(), -c * p.psi0.cos(), 0.0);
    // Central difference in the amplitude, via pressure targets on both sides.
    let dp = 1e-6 * t1.pressure;
    let a = p.shock3_solve(&u1, t1.pressure + dp, None).unwrap();
    let b = p.shock3_solve(&u1, t1.pressure - dp, None).unwrap();
    let d = (a.state.to_vector() - b.state.to_vector()) / (a.lambda - b.lambda);
    assert!(vec_rel(&d, &r) < 1e-6, "{d} vs {r}");
    assert!(a.lambda < 0.0 && b.lambda > 0.0);
}

#[test]
fn limit_angle_satisfies_sonic_relation() {
    let p = reference_problem();
    let u1 = p.shock.downstream;
    let c1 = p.shock.thermo_downstream().unwrap().sound_speed;
    let lhs = -u1.u * p.psi0.sin() + u1.v * p.psi0.cos();
    assert!((lhs + c1).abs() < 1e-12 * c1);
    assert!(p.phi0 > std::f64::consts::PI && p.phi0 < 1.5 * std::f64::consts::PI);
    assert!(p.psi0 > p.phi0 && p.psi0 < std::f64::consts::TAU);
}

#[test]
fn mismatch_vanishes_at_zero_angle() {
    let p = reference_problem();
    for f in [1.0, 1.01, 1.03] {
        let m = p
            .velocity_mismatch(0.0, &p.upstream_with(p.shock.u_bar * f))
            .unwrap();
        assert!(m.delta.abs() < 1e-12, "{}", m.delta);
        assert!(m.delta_tilde.is_none());
    }
}

#[test]
fn family_passes_every_invariant() {
    let p = reference_problem();
    let grid = log_grid(1e-4, 1e-2, 10);
    let fam = p.continue_family(&grid).unwrap();
    assert!(fam.failure.is_none(), "{:?}", fam.failure);
    assert_eq!(fam.patterns.len(), 10);
    for q in &fam.patterns {
        assert!(q.is_valid(), "{:?}", q.failures);
        assert_eq!(q.theta, std::f64::consts::PI - q.eps);
        assert!(q.diagnostics.entropy_jump_s3 > 0.0);
    }
    let gaps: Vec<f64> = fam
        .patterns
        .iter()
        .map(|q| q.state_gap(&p.shock.downstream))
        .collect();
    let slope = loglog_slope(&grid, &gaps);
    assert!((slope - 1.0).abs() < 0.1, "{slope}");
    for w in fam.patterns.windows(2) {
        assert!(w[1].phi < w[0].phi);
        assert!(w[1].psi < w[0].psi);
    }
    let x = [grid[0], grid[1], grid[2]];
    let phi = extrapolate_to_zero(
        x,
        [
            fam.patterns[0].phi,
            fam.patterns[1].phi,
            fam.patterns[2].phi,
        ],
    );
    let psi = extrapolate_to_zero(
        x,
        [
            fam.patterns[0].psi,
            fam.patterns[1].psi,
            fam.patterns[2].psi,
        ],
    );
    assert!((phi - p.phi0).abs() < 1e-8, "{phi} {}", p.phi0);
    assert!((psi - p.psi0).abs() < 1e-8, "{psi} {}", p.psi0);
}

#[test]
fn negative_angle_fails_s3_admissibility() {
    let p = reference_problem();
    match p.solve_pattern(-1e-3, p.shock.u_bar) {
        Err(Error::Validation { failures, pattern }) => {
            assert!(failures.iter().any(|f| f.contains("S3")), "{failures:?}");
            assert!(pattern.diagnostics.s3_upstream_excess < 0.0);
            assert!(pattern.diagnostics.s3_downstream_excess > 0.0);
            assert!(pattern.diagnostics.entropy_jump_s3 < 0.0);
            assert!(pattern.diagnostics.delta_normalized < 1e-12);
        }
        other => panic!("expected a validation failure, got {other:?}"),
    }
}

#[test]
fn newton_pulls_tangential_velocity_back() {
    let p = reference_problem();
    let ub = p.shock.u_bar;
    let eps = 1e-3;
    let q = p.solve_pattern(eps, 1.01 * ub).unwrap();
    assert!((q.u_tangential - ub).abs() < 10.0 * eps * ub.abs());
    assert!((q.u_tangential - ub).abs() < 0.2 * (0.01 * ub).abs());
}

#[test]
fn asymptotic_coefficients_match_finite_differences() {
    let p = reference_problem();
    let a = p.asymptotic_checks().unwrap();
    assert!(a.notes.is_empty(), "{:?}", a.notes);
    assert!(a.omega0 > 0.0 && a.omega1 > 0.0);
    assert!(a.d2_delta_closed != 0.0);
    assert!(a.lambda_gap.unwrap() < 1e-6);
    assert!(a.d2_delta_gap.unwrap() < 1e-4);
    assert!(a.psi_prime_gap.unwrap() < 1e-4);
    assert!(a.lax_upstream_gap.unwrap() < 1e-4);
    assert!(a.lax_downstream_gap.unwrap() < 1e-4);
    assert!(a.alpha_minus < 0.0 && a.g1 > 0.0);
    let at = a.d_eps_delta.unwrap().abs();
    let off = a.d_eps_delta_perturbed.unwrap().abs();
    assert!(off > 10.0 * at && at < 1e-6, "{at} {off}");
}

#[test]
fn problem_rejects_unsuitable_shocks() {
    let sh = weak_shock(0.75);
    assert!(matches!(
        MachStemProblem::new(sh),
        Err(Error::NotWeaklyStable { .. })
    ));
    let ideal = solve_downstream(
        &EosSpec::ideal_gas(1.4),
        &FluidState::new(1.0, 0.0, 0.0, 1.0),
        ShockStrength::PressureRatio(4.5),
    )
    .unwrap();
    assert!(matches!(
        MachStemProblem::new(ideal),
        Err(Error::RegimeMismatch(_))
    ));
    let p = reference_problem();
    assert!(p.solve_pattern(0.0, p.shock.u_bar).is_err());
    assert!(p.continue_family(&[1e-3, 1e-4]).is_err());
    assert!(p.continue_family(&[]).is_err());
}

#[test]
fn pattern_json_round_trip() {
    let p = reference_problem();
    let q = p.solve_pattern(1e-3, p.shock.u_bar).unwrap();
    let s = serde_json::to_string(&q).unwrap();
    let back: MachStemPattern = serde_json::from_str(&s).unwrap();
    assert_eq!(back, q);
}

#[test]
fn verify_accepts_solved_and_flags_tampered_patterns() {
    let p = reference_problem();
    let tol = ValidationTolerances::default();
    let q = p.solve_pattern(2e-3, p.shock.u_bar).unwrap();
    assert!(p.verify(&q, tol).unwrap().is_valid());

    let mut bad = q.clone();
    bad.u3.tau *= 1.0 + 1e-6;
    assert!(!p.verify(&bad, tol).unwrap().is_valid());

    let mut bad = q.clone();
    bad.theta += 1e-6;
    assert!(!p.verify(&bad, tol).unwrap().is_valid());

    let mut bad = q;
    bad.u1.v += 1e-6;
    assert!(!p.verify(&bad, tol).unwrap().is_valid());
}
