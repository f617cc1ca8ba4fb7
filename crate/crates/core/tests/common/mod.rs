#![allow(dead_code)]

use shockstab::machstem::MachStemProblem;
use shockstab::*;

/// Constant-Grüneisen fluid with a weak-stability window near `tau1 = 0.75`.
pub fn weak_eos() -> EosSpec {
    EosSpec::ConstantGruneisen {
        gruneisen: 5.0,
        cv: 1.0,
        thermal_amplitude: 0.01,
        cold_modulus: 10.0,
        cold_exponent: 2.0,
        tau_ref: 1.0,
        s_ref: 0.0,
    }
}

pub fn upstream() -> FluidState {
    FluidState::new(1.0, 0.0, 0.0, 0.0)
}

pub fn weak_shock(tau1: f64) -> PlanarShock {
    solve_downstream(
        &weak_eos(),
        &upstream(),
        ShockStrength::DownstreamVolume(tau1),
    )
    .unwrap()
}

pub fn reference_problem() -> MachStemProblem {
    MachStemProblem::new(weak_reference_shock(&weak_shock(0.75)).unwrap()).unwrap()
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
