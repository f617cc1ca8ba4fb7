//! Steady Mach stem patterns bifurcating from a weakly stable planar shock.
//!
//! Four states meet at the origin: `U0` (upstream), `U1` behind the planar
//! front `S2` (angle 0), `U2` behind the tilted front `S1` (angle `pi - eps`),
//! and `U3` behind the weak shock `S3` (angle `Psi`) issued from `U1`. A contact
//! discontinuity at angle `Phi` separates `U2` and `U3`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{flux, flux_jacobian, FluidState};
use crate::linalg::{damped_newton, NewtonOptions};
use crate::modes::{
    causal_angle, rejected_angle, solve_linearized_rh, FrequencyPoint, LopatinskiiProblem,
};
use crate::shock::{galilean_shift, scaled_rh_residual, PlanarShock};
use crate::stability::{classify, solve_v, StabilityRegime};

use std::f64::consts::{PI, TAU};

/// Relative trust region of every inner Newton solve.
pub const TRUST_REGION: f64 = 0.1;

/// Tolerances used when validating a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationTolerances {
    pub rh: f64,
    pub pressure: f64,
    pub delta: f64,
    pub contact: f64,
}

impl Default for ValidationTolerances {
    fn default() -> Self {
        ValidationTolerances {
            rh: 1e-10,
            pressure: 1e-12,
            delta: 1e-12,
            contact: 1e-10,
        }
    }
}

/// Shifts a weakly stable shock to the tangential velocity `-V`.
pub fn weak_reference_shock(shock: &PlanarShock) -> Result<PlanarShock> {
    let p = shock.stability_inputs()?;
    let v = solve_v(p.m1, p.gamma1, p.nu, p.c1)?.v;
    Ok(galilean_shift(shock, -v))
}

/// A validated reference shock with `u_bar = -V`, together with its limit angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachStemProblem {
    pub shock: PlanarShock,
    pub psi0: f64,
    pub phi0: f64,
}

impl MachStemProblem {
    pub fn new(shock: PlanarShock) -> Result<Self> {
        shock.validate(1e-10)?;
        let p = shock.stability_inputs()?;
        let class = classify(p.m1, p.gamma1, p.nu)?;
        if class.regime != StabilityRegime::Weak {
            return Err(Error::RegimeMismatch(class.regime));
        }
        let lop =
            LopatinskiiProblem::from_shock(&shock)?.evaluate(&FrequencyPoint::real(0.0, 1.0))?;
        if !(lop.normalized < 1e-8) {
            return Err(Error::NotWeaklyStable {
                normalized: lop.normalized,
            });
        }
        let u1 = shock.downstream;
        let c1 = p.c1;
        let psi0 = causal_angle(u1.u, u1.v, c1)?;
        Ok(MachStemProblem {
            shock,
            psi0,
            phi0: limit_contact_angle(u1.u, u1.v),
        })
    }

    fn eos(&self) -> &crate::eos::EosSpec {
        &self.shock.eos
    }

    fn check_upstream(&self, u: &FluidState) -> Result<()> {
        let deviation = u.relative_deviation(&self.shock.upstream);
        if !(deviation <= TRUST_REGION) {
            return Err(Error::SeedTooFar {
                deviation,
                limit: TRUST_REGION,
            });
        }
        Ok(())
    }

    fn check_downstream(&self, w: &FluidState) -> Result<()> {
        let deviation = w.relative_deviation(&self.shock.downstream);
        if !(deviation <= TRUST_REGION) {
            return Err(Error::SeedTooFar {
                deviation,
                limit: TRUST_REGION,
            });
        }
        Ok(())
    }

    /// Upstream state `(tau0, u, v0, s0)` with tangential velocity `u`.
    pub fn upstream_with(&self, u: f64) -> FluidState {
        FluidState {
            u,
            ..self.shock.upstream
        }
    }

    /// `U1(U)`: the state behind the front `x2 = 0` for upstream state `U`.
    pub fn downstream_state_1(&self, u: &FluidState) -> Result<FluidState> {
        self.downstream_state_2(0.0, u)
    }

    /// `U2(eps, U)`: the state behind the front `sin(eps) x1 + cos(eps) x2 = 0`.
    pub fn downstream_state_2(&self, eps: f64, u: &FluidState) -> Result<FluidState> {
        self.check_upstream(u)?;
        let eos = *self.eos();
        let (s, c) = eps.sin_cos();
        let target = flux(&eos, 1, u)? * s + flux(&eos, 2, u)? * c;
        let floor = 1e-3 * target.norm();
        let scale: Vec<f64> = target.iter().map(|x| x.abs().max(floor)).collect();
        let system = |x: &DVector<f64>| -> Result<(DVector<f64>, DMatrix<f64>)> {
            let w = FluidState::new(x[0], x[1], x[2], x[3]);
            let f = flux(&eos, 1, &w)? * s + flux(&eos, 2, &w)? * c - target;
            let j = flux_jacobian(&eos, 1, &w)? * s + flux_jacobian(&eos, 2, &w)? * c;
            let res = DVector::from_fn(4, |i, _| f[i] / scale[i]);
            let jac = DMatrix::from_fn(4, 4, |i, k| j[(i, k)] / scale[i]);
            Ok((res, jac))
        };
        let seed = self.shock.downstream.to_vector();
        let out = damped_newton(
            "downstream state",
            system,
            DVector::from_column_slice(seed.as_slice()),
            NewtonOptions::default(),
        )?;
        let w = FluidState::new(out.x[0], out.x[1], out.x[2], out.x[3]);
        self.check_downstream(&w)?;
        w.thermo(&eos)?;
        Ok(w)
    }

    /// Solves the jump relations across `S3` from `u1` together with
    /// `p(U3) = p_target`, on the branch of `Psi` near the causal root.
    pub fn shock3_solve(
        &self,
        u1: &FluidState,
        p_target: f64,
        seed: Option<(FluidState, f64)>,
    ) -> Result<Shock3> {
        let eos = *self.eos();
        let t1 = u1.thermo(&eos)?;
        let c = t1.sound_speed;
        let psi_eik = causal_angle(u1.u, u1.v, c)?;
        let psi_rej = rejected_angle(u1.u, u1.v, c)?;
        let r = nalgebra::Vector4::new(u1.tau, c * psi_eik.sin(), -c * psi_eik.cos(), 0.0);
        if p_target == t1.pressure {
            return Ok(Shock3 {
                state: *u1,
                psi: psi_eik,
                lambda: 0.0,
                iterations: 0,
            });
        }
        let (u3_seed, psi_seed) = seed.unwrap_or_else(|| {
            let lam = -(p_target - t1.pressure) * u1.tau / (c * c);
            (
                FluidState::from_vector(&(u1.to_vector() + r * lam)),
                psi_eik,
            )
        });
        let f1a = flux(&eos, 1, u1)?;
        let f2a = flux(&eos, 2, u1)?;
        let normal = f1a * (-psi_eik.sin()) + f2a * psi_eik.cos();
        let floor = 1e-3 * normal.norm();
        let scale: Vec<f64> = normal.iter().map(|x| x.abs().max(floor)).collect();
        let system = |x: &DVector<f64>| -> Result<(DVector<f64>, DMatrix<f64>)> {
            let w = FluidState::new(x[0], x[1], x[2], x[3]);
            let psi = x[4];
            let (sp, cp) = psi.sin_cos();
            let tw = w.thermo(&eos)?;
            let d1 = flux(&eos, 1, &w)? - f1a;
            let d2 = flux(&eos, 2, &w)? - f2a;
            let f = d1 * (-sp) + d2 * cp;
            let j = flux_jacobian(&eos, 1, &w)? * (-sp) + flux_jacobian(&eos, 2, &w)? * cp;
            let dpsi = d1 * (-cp) - d2 * sp;
            let mut res = DVector::zeros(5);
            let mut jac = DMatrix::zeros(5, 5);
            for i in 0..4 {
                res[i] = f[i] / scale[i];
                for k in 0..4 {
                    jac[(i, k)] = j[(i, k)] / scale[i];
                }
                jac[(i, 4)] = dpsi[i] / scale[i];
            }
            res[4] = (tw.pressure - p_target) / p_target;
            jac[(4, 0)] = -tw.e_tt / p_target;
            jac[(4, 3)] = -tw.e_st / p_target;
            Ok((res, jac))
        };
        let x0 = DVector::from_vec(vec![u3_seed.tau, u3_seed.u, u3_seed.v, u3_seed.s, psi_seed]);
        let out = damped_newton(
            "S3 shock",
            system,
            x0,
            NewtonOptions {
                tol: 1e-13,
                ..NewtonOptions::default()
            },
        )?;
        let state = FluidState::new(out.x[0], out.x[1], out.x[2], out.x[3]);
        let psi = out.x[4].rem_euclid(TAU);
        if angle_distance(psi, psi_rej) < angle_distance(psi, psi_eik) {
            return Err(Error::BranchJump {
                psi,
                expected: psi_eik,
            });
        }
        self.check_downstream(&state)?;
        let lambda = (state.to_vector() - u1.to_vector()).dot(&r) / r.norm_squared();
        Ok(Shock3 {
            state,
            psi,
            lambda,
            iterations: out.iterations,
        })
    }

    /// `delta(eps, U)`: determinant of the velocities of `U2` and `U3`.
    pub fn velocity_mismatch(&self, eps: f64, u: &FluidState) -> Result<Mismatch> {
        self.velocity_mismatch_seeded(eps, u, None)
    }

    fn velocity_mismatch_seeded(
        &self,
        eps: f64,
        u: &FluidState,
        seed: Option<(FluidState, f64)>,
    ) -> Result<Mismatch> {
        let eos = *self.eos();
        let w1 = self.downstream_state_1(u)?;
        let w2 = self.downstream_state_2(eps, u)?;
        let p2 = w2.pressure(&eos)?;
        let s3 = self.shock3_solve(&w1, p2, seed)?;
        let w3 = s3.state;
        let delta = w2.u * w3.v - w2.v * w3.u;
        Ok(Mismatch {
            eps,
            delta,
            delta_tilde: if eps != 0.0 { Some(delta / eps) } else { None },
            upstream: *u,
            u1: w1,
            u2: w2,
            shock3: s3,
        })
    }

    /// Newton (secant) iteration on the tangential upstream velocity driving
    /// `delta / eps` to zero; returns the raw converged configuration.
    pub fn solve_raw(&self, eps: f64, u_seed: f64) -> Result<(Mismatch, usize)> {
        if eps == 0.0 || !eps.is_finite() {
            return Err(Error::domain("eps must be nonzero and finite"));
        }
        let scale = self.shock.u_bar.abs().max(self.shock.upstream.v.abs());
        let eval = |u: f64, seed: Option<(FluidState, f64)>| {
            self.velocity_mismatch_seeded(eps, &self.upstream_with(u), seed)
        };
        let mut xa = u_seed;
        let mut ma = eval(xa, None)?;
        let mut fa = ma.delta / eps;
        let mut xb = u_seed + 1e-7 * scale;
        let mut mb = eval(xb, Some((ma.shock3.state, ma.shock3.psi)))?;
        let mut fb = mb.delta / eps;
        let delta_scale = |m: &Mismatch| m.u2.speed() * m.shock3.state.speed();
        for iter in 0..50 {
            if (mb.delta.abs() <= 1e-14 * delta_scale(&mb)) || fb == 0.0 {
                return Ok((mb, iter));
            }
            if fb == fa {
                break;
            }
            let xc = xb - fb * (xb - xa) / (fb - fa);
            if !xc.is_finite() {
                break;
            }
            let mc = eval(xc, Some((mb.shock3.state, mb.shock3.psi)))?;
            let converged = (xc - xb).abs() <= 4.0 * f64::EPSILON * scale;
            xa = xb;
            fa = fb;
            ma = mb;
            xb = xc;
            fb = mc.delta / eps;
            mb = mc;
            if converged {
                return Ok((mb, iter + 1));
            }
        }
        let _ = ma;
        if mb.delta.abs() <= 1e-12 * delta_scale(&mb) {
            return Ok((mb, 50));
        }
        Err(Error::Convergence {
            solver: "Mach stem velocity",
            iterations: 50,
            residual: mb.delta.abs() / delta_scale(&mb),
        })
    }

    /// Solves for the pattern at `eps` and validates every invariant.
    pub fn solve_pattern(&self, eps: f64, u_seed: f64) -> Result<MachStemPattern> {
        self.solve_pattern_with(eps, u_seed, ValidationTolerances::default())
    }

    pub fn solve_pattern_with(
        &self,
        eps: f64,
        u_seed: f64,
        tol: ValidationTolerances,
    ) -> Result<MachStemPattern> {
        let (m, iterations) = self.solve_raw(eps, u_seed)?;
        let pattern = self.assemble(&m, iterations, tol)?;
        if pattern.failures.is_empty() {
            Ok(pattern)
        } else {
            Err(Error::Validation {
                failures: pattern.failures.clone(),
                pattern: Box::new(pattern),
            })
        }
    }

    /// Builds the pattern record and runs every check without failing on them.
    pub fn assemble(
        &self,
        m: &Mismatch,
        iterations: usize,
        tol: ValidationTolerances,
    ) -> Result<MachStemPattern> {
        let eos = *self.eos();
        let eps = m.eps;
        let (u0, u1, u2, u3) = (m.upstream, m.u1, m.u2, m.shock3.state);
        let psi = m.shock3.psi;
        let theta = PI - eps;
        let phi = u2.v.atan2(u2.u).rem_euclid(TAU);
        let t: Vec<_> = [u0, u1, u2, u3]
            .iter()
            .map(|s| s.thermo(&eos))
            .collect::<Result<_>>()?;
        let pressures = [t[0].pressure, t[1].pressure, t[2].pressure, t[3].pressure];

        let rh_s1 = scaled_rh_residual(&eos, &u0, &u2, theta)?;
        let rh_s2 = scaled_rh_residual(&eos, &u0, &u1, 0.0)?;
        let rh_s3 = scaled_rh_residual(&eos, &u1, &u3, psi)?;
        let rh_cd = scaled_rh_residual(&eos, &u2, &u3, phi)?;
        let pressure_gap = (pressures[2] - pressures[3]).abs() / pressures[2];
        let delta_normalized = m.delta.abs() / (u2.speed() * u3.speed());
        let n_cd = (-phi.sin(), phi.cos());
        let cd_normal_velocity = ((u2.u * n_cd.0 + u2.v * n_cd.1).abs() / u2.speed())
            .max((u3.u * n_cd.0 + u3.v * n_cd.1).abs() / u3.speed());
        let causality_cd = u2.u * phi.cos() + u2.v * phi.sin();
        let causality_s3 = u1.u * psi.cos() + u1.v * psi.sin();
        let collinear_ratio = (u2.u * u3.u + u2.v * u3.v) / (u2.speed() * u3.speed());

        // Normal Mach numbers, the normal pointing toward the upstream side.
        let n1 = (eps.sin(), eps.cos());
        let mach = |s: &FluidState, c: f64, n: (f64, f64)| -(s.u * n.0 + s.v * n.1) / c;
        let s1_upstream_mach = mach(&u0, t[0].sound_speed, n1);
        let s1_downstream_mach = mach(&u2, t[2].sound_speed, n1);
        let s2_upstream_mach = mach(&u0, t[0].sound_speed, (0.0, 1.0));
        let s2_downstream_mach = mach(&u1, t[1].sound_speed, (0.0, 1.0));
        let n3 = (psi.sin(), -psi.cos());
        let s3_upstream_excess = u1.u * n3.0 + u1.v * n3.1 - t[1].sound_speed;
        let s3_downstream_excess = u3.u * n3.0 + u3.v * n3.1 - t[3].sound_speed;
        let s3_downstream_flux = u3.u * n3.0 + u3.v * n3.1;

        let psi_rej = rejected_angle(u1.u, u1.v, t[1].sound_speed)?;
        let psi_eik = causal_angle(u1.u, u1.v, t[1].sound_speed)?;
        let branch_ok = angle_distance(psi, psi_eik) < angle_distance(psi, psi_rej);

        let diagnostics = PatternDiagnostics {
            rh_s1,
            rh_s2,
            rh_s3,
            rh_cd,
            pressure_gap,
            delta: m.delta,
            delta_normalized,
            cd_normal_velocity,
            collinear_ratio,
            causality_cd,
            causality_s3,
            s1_upstream_mach,
            s1_downstream_mach,
            s2_upstream_mach,
            s2_downstream_mach,
            s3_upstream_excess,
            s3_downstream_excess,
            pressures,
            pressure_ordering: pressures[0] < pressures[1]
                && pressures[1] < pressures[2]
                && pressure_gap <= tol.pressure,
            entropy_jump_s3: u3.s - u1.s,
            branch_ok,
            newton_iterations: iterations,
        };

        let mut failures = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                failures.push(msg);
            }
        };
        for (name, r) in [("S1", rh_s1), ("S2", rh_s2), ("S3", rh_s3), ("CD", rh_cd)] {
            check(
                r < tol.rh,
                format!("jump relations across {name}: scaled residual {r:e}"),
            );
        }
        check(
            pressure_gap <= tol.pressure,
            format!("contact pressure gap {pressure_gap:e}"),
        );
        check(
            delta_normalized <= tol.delta,
            format!("velocity mismatch {delta_normalized:e}"),
        );
        check(
            collinear_ratio > 0.0,
            "velocities of U2 and U3 point in opposite directions".into(),
        );
        check(
            cd_normal_velocity <= tol.contact,
            format!("normal velocity across the contact {cd_normal_velocity:e}"),
        );
        check(
            causality_cd > 0.0,
            format!("contact causality {causality_cd:e}"),
        );
        check(causality_s3 > 0.0, format!("S3 causality {causality_s3:e}"));
        check(
            diagnostics.pressure_ordering,
            format!("pressure ordering p0 < p1 < p2 = p3 fails: {pressures:?}"),
        );
        check(
            s1_upstream_mach > 1.0 && 0.0 < s1_downstream_mach && s1_downstream_mach < 1.0,
            format!("Lax inequalities for S1 fail: {s1_upstream_mach}, {s1_downstream_mach}"),
        );
        check(
            s2_upstream_mach > 1.0 && 0.0 < s2_downstream_mach && s2_downstream_mach < 1.0,
            format!("Lax inequalities for S2 fail: {s2_upstream_mach}, {s2_downstream_mach}"),
        );
        check(
            s3_upstream_excess > 0.0 && s3_downstream_excess < 0.0 && s3_downstream_flux > 0.0,
            format!(
                "Lax inequalities for S3 fail: upstream excess {s3_upstream_excess:e}, downstream excess {s3_downstream_excess:e}"
            ),
        );
        check(
            u3.s > u1.s,
            format!("entropy decreases across S3: {:e}", u3.s - u1.s),
        );
        check(branch_ok, "S3 angle left the causal branch".into());

        Ok(MachStemPattern {
            eps,
            theta,
            phi,
            psi,
            phi0: self.phi0,
            psi0: self.psi0,
            lambda: m.shock3.lambda,
            u_tangential: u0.u,
            u0,
            u1,
            u2,
            u3,
            diagnostics,
            failures,
        })
    }

    /// Recomputes every invariant of a stored pattern from its four states.
    /// Also flags stored angles that disagree with the recomputed ones.
    pub fn verify(
        &self,
        stored: &MachStemPattern,
        tol: ValidationTolerances,
    ) -> Result<MachStemPattern> {
        let (u2, u3) = (stored.u2, stored.u3);
        let m = Mismatch {
            eps: stored.eps,
            delta: u2.u * u3.v - u2.v * u3.u,
            delta_tilde: (stored.eps != 0.0).then(|| (u2.u * u3.v - u2.v * u3.u) / stored.eps),
            upstream: stored.u0,
            u1: stored.u1,
            u2,
            shock3: Shock3 {
                state: u3,
                psi: stored.psi,
                lambda: stored.lambda,
                iterations: stored.diagnostics.newton_iterations,
            },
        };
        let mut fresh = self.assemble(&m, stored.diagnostics.newton_iterations, tol)?;
        if stored.theta != fresh.theta {
            fresh.failures.push(format!(
                "stored Theta {} differs from pi - eps",
                stored.theta
            ));
        }
        if angle_distance(stored.phi, fresh.phi) > tol.contact {
            fresh.failures.push(format!(
                "stored Phi {} differs from the velocity angle {}",
                stored.phi, fresh.phi
            ));
        }
        let mismatch = self
            .downstream_state_1(&stored.u0)
            .map(|w| w.relative_deviation(&stored.u1));
        match mismatch {
            Ok(d) if d <= 1e-9 => {}
            Ok(d) => fresh
                .failures
                .push(format!("U1 is not the state behind S2 (deviation {d:e})")),
            Err(e) => fresh
                .failures
                .push(format!("U1 could not be recomputed: {e}")),
        }
        Ok(fresh)
    }

    /// Predictor-corrector continuation over an increasing grid of positive `eps`.
    pub fn continue_family(&self, eps_grid: &[f64]) -> Result<FamilyResult> {
        self.continue_family_with(eps_grid, ValidationTolerances::default())
    }

    pub fn continue_family_with(
        &self,
        eps_grid: &[f64],
        tol: ValidationTolerances,
    ) -> Result<FamilyResult> {
        if eps_grid.is_empty() {
            return Err(Error::domain("eps grid is empty"));
        }
        if eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite()))
            || eps_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::domain(
                "eps grid must be positive and strictly increasing",
            ));
        }
        let ub = self.shock.u_bar;
        let mut patterns: Vec<MachStemPattern> = Vec::new();
        for &eps in eps_grid {
            let seed = match patterns.as_slice() {
                [] => ub,
                [p] => ub + (p.u_tangential - ub) / p.eps * eps,
                [.., a, b] => {
                    b.u_tangential
                        + (b.u_tangential - a.u_tangential) / (b.eps - a.eps) * (eps - b.eps)
                }
            };
            match self.solve_pattern_with(eps, seed, tol) {
                Ok(p) => patterns.push(p),
                Err(e) => {
                    return Ok(FamilyResult {
                        patterns,
                        failure: Some(FamilyFailure::from_error(eps, e)),
                    })
                }
            }
        }
        Ok(FamilyResult {
            patterns,
            failure: None,
        })
    }

    /// Compares every closed-form first-order quantity against finite
    /// differences of the numerical maps.
    pub fn asymptotic_checks(&self) -> Result<AsymptoticReport> {
        let eos = *self.eos();
        let lin = solve_linearized_rh(&self.shock)?;
        let t1 = self.shock.thermo_downstream()?;
        let (c1, g1) = (t1.sound_speed, t1.nonlinearity);
        let ub = self.shock.u_bar;
        let v1 = self.shock.downstream.v;
        let (m1, nu, beta) = (self.shock.m1, self.shock.nu, lin.beta);
        let sb = (1.0 - beta * beta).sqrt();
        let den = 1.0 + m1 * m1 - 2.0 * m1 * beta;
        let omega0 = den / ((m1 - beta) * (1.0 - m1 * beta));
        let omega1 = (m1 * (3.0 + m1 * m1) * beta * beta - 2.0 * (1.0 + 3.0 * m1 * m1) * beta
            + m1 * (3.0 + m1 * m1))
            / ((m1 - beta) * (1.0 - m1 * beta) * den);
        let d2_delta_closed = nu * v1 * sb / (1.0 + nu) * (omega0 + nu * m1 * omega1);
        let sqrt_d = (ub * ub + v1 * v1 - c1 * c1).sqrt();
        let lax_up_closed = -0.5 * lin.alpha_minus * c1 * g1;
        let lax_down_closed = 0.5 * lin.alpha_minus * c1 * g1;
        let mut notes = Vec::new();

        // Family at eps, eps/2, eps/4 for Richardson extrapolation.
        let h = 2e-3;
        let steps = [h, h / 2.0, h / 4.0];
        let mut raw = Vec::new();
        let mut seed = ub;
        for &e in &steps {
            match self.solve_raw(e, seed) {
                Ok((m, _)) => {
                    seed = ub + (m.upstream.u - ub) * 0.5;
                    raw.push(m);
                }
                Err(err) => {
                    notes.push(format!("family point eps = {e}: {err}"));
                    break;
                }
            }
        }
        let richardson = |f: &dyn Fn(&Mismatch) -> f64| -> Option<f64> {
            if raw.len() < 3 {
                return None;
            }
            let v: Vec<f64> = raw.iter().map(f).collect();
            let r1 = 2.0 * v[1] - v[0];
            let r2 = 2.0 * v[2] - v[1];
            Some((4.0 * r2 - r1) / 3.0)
        };
        let lambda_over_eps = richardson(&|m| m.shock3.lambda / m.eps);
        let u_prime_0 = richardson(&|m| (m.upstream.u - ub) / m.eps);
        let psi0 = self.psi0;
        let psi_prime_fd = richardson(&|m| wrap_angle(m.shock3.psi - psi0) / m.eps);
        let psi_prime_closed = u_prime_0.map(|up| (lax_up_closed - psi0.sin() * up) / sqrt_d);

        // Mixed derivative of delta at (0, u_bar), centred stencils extrapolated.
        let d = |e: f64, u: f64| -> Result<f64> {
            Ok(self.velocity_mismatch(e, &self.upstream_with(u))?.delta)
        };
        let mixed = |he: f64| -> Result<f64> {
            let k = he * ub.abs();
            Ok(
                (d(he, ub + k)? - d(he, ub - k)? - d(-he, ub + k)? + d(-he, ub - k)?)
                    / (4.0 * he * k),
            )
        };
        let d2_delta_fd = (|| -> Result<f64> { Ok((4.0 * mixed(5e-5)? - mixed(1e-4)?) / 3.0) })()
            .map_err(|e| notes.push(format!("mixed derivative: {e}")))
            .ok();
        let d_eps = |u: f64| -> Result<f64> {
            let c = |he: f64| -> Result<f64> { Ok((d(he, u)? - d(-he, u)?) / (2.0 * he)) };
            Ok((4.0 * c(5e-5)? - c(1e-4)?) / 3.0)
        };
        let d_eps_delta = d_eps(ub)
            .map_err(|e| notes.push(format!("d/deps delta: {e}")))
            .ok();
        let d_eps_delta_perturbed = d_eps(1.01 * ub)
            .map_err(|e| notes.push(format!("d/deps delta off -V: {e}")))
            .ok();

        // S3 Lax margins at +-h and +-h/2, centred differences extrapolated.
        let margins = |e: f64| -> Result<(f64, f64)> {
            let (m, _) = self.solve_raw(e, ub + u_prime_0.unwrap_or(0.0) * e)?;
            let psi = m.shock3.psi;
            let n = (psi.sin(), -psi.cos());
            let c_1 = m.u1.thermo(&eos)?.sound_speed;
            let c_3 = m.shock3.state.thermo(&eos)?.sound_speed;
            Ok((
                m.u1.u * n.0 + m.u1.v * n.1 - c_1,
                m.shock3.state.u * n.0 + m.shock3.state.v * n.1 - c_3,
            ))
        };
        let lax = (|| -> Result<(f64, f64)> {
            let hl = 4e-3;
            let (ap, bp) = margins(hl)?;
            let (am, bm) = margins(-hl)?;
            let (ap2, bp2) = margins(hl / 2.0)?;
            let (am2, bm2) = margins(-hl / 2.0)?;
            let da = (ap - am) / (2.0 * hl);
            let db = (bp - bm) / (2.0 * hl);
            let da2 = (ap2 - am2) / hl;
            let db2 = (bp2 - bm2) / hl;
            Ok(((4.0 * da2 - da) / 3.0, (4.0 * db2 - db) / 3.0))
        })()
        .map_err(|e| notes.push(format!("S3 Lax margins: {e}")))
        .ok();

        let rel = |a: Option<f64>, b: f64| a.map(|a| (a - b).abs() / b.abs());
        Ok(AsymptoticReport {
            alpha0: lin.alpha0,
            alpha_minus: lin.alpha_minus,
            mu0: lin.mu0,
            g1,
            omega0,
            omega1,
            lambda_over_eps_limit: lambda_over_eps,
            lambda_gap: rel(lambda_over_eps, lin.alpha_minus),
            u_prime_0,
            psi_prime_0_closed: psi_prime_closed,
            psi_prime_0_fd: psi_prime_fd,
            psi_prime_gap: match (psi_prime_fd, psi_prime_closed) {
                (Some(a), Some(b)) => Some((a - b).abs() / b.abs()),
                _ => None,
            },
            d2_delta_closed,
            d2_delta_fd,
            d2_delta_gap: rel(d2_delta_fd, d2_delta_closed),
            d_eps_delta,
            d_eps_delta_perturbed,
            lax_upstream_derivative_closed: lax_up_closed,
            lax_upstream_derivative_fd: lax.map(|l| l.0),
            lax_upstream_gap: rel(lax.map(|l| l.0), lax_up_closed),
            lax_downstream_derivative_closed: lax_down_closed,
            lax_downstream_derivative_fd: lax.map(|l| l.1),
            lax_downstream_gap: rel(lax.map(|l| l.1), lax_down_closed),
            notes,
        })
    }
}

/// Validates `shock` as a Mach stem reference and solves one pattern.
pub fn solve_pattern(shock: &PlanarShock, eps: f64, u_seed: f64) -> Result<MachStemPattern> {
    MachStemProblem::new(*shock)?.solve_pattern(eps, u_seed)
}

pub fn continue_family(shock: &PlanarShock, eps_grid: &[f64]) -> Result<FamilyResult> {
    MachStemProblem::new(*shock)?.continue_family(eps_grid)
}

pub fn asymptotic_checks(shock: &PlanarShock) -> Result<AsymptoticReport> {
    MachStemProblem::new(*shock)?.asymptotic_checks()
}

/// `atan2(v1, u_bar)` in `[0, 2 pi)`; lies in `(pi, 3 pi / 2)` for `u_bar, v1 < 0`.
pub fn limit_contact_angle(u_bar: f64, v1: f64) -> f64 {
    v1.atan2(u_bar).rem_euclid(TAU)
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shock3 {
    pub state: FluidState,
    pub psi: f64,
    /// Signed projection of `U3 - U1` on `R(U1) = (tau, c sin Psi, -c cos Psi, 0)`.
    pub lambda: f64,
    pub iterations: usize,
}

/// All intermediate states behind one evaluation of `delta(eps, U)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub eps: f64,
    pub delta: f64,
    pub delta_tilde: Option<f64>,
    pub upstream: FluidState,
    pub u1: FluidState,
    pub u2: FluidState,
    pub shock3: Shock3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternDiagnostics {
    pub rh_s1: f64,
    pub rh_s2: f64,
    pub rh_s3: f64,
    pub rh_cd: f64,
    pub pressure_gap: f64,
    pub delta: f64,
    /// `|delta| / (|u(U2)| |u(U3)|)`
    pub delta_normalized: f64,
    pub cd_normal_velocity: f64,
    pub collinear_ratio: f64,
    pub causality_cd: f64,
    pub causality_s3: f64,
    pub s1_upstream_mach: f64,
    pub s1_downstream_mach: f64,
    pub s2_upstream_mach: f64,
    pub s2_downstream_mach: f64,
    /// `u(U1).(sin Psi, -cos Psi) - c(U1)`, positive for a Lax shock.
    pub s3_upstream_excess: f64,
    /// `u(U3).(sin Psi, -cos Psi) - c(U3)`, negative for a Lax shock.
    pub s3_downstream_excess: f64,
    pub pressures: [f64; 4],
    pub pressure_ordering: bool,
    pub entropy_jump_s3: f64,
    pub branch_ok: bool,
    pub newton_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachStemPattern {
    pub eps: f64,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
    pub phi0: f64,
    pub psi0: f64,
    pub lambda: f64,
    /// Tangential velocity of `U0(eps)`.
    pub u_tangential: f64,
    pub u0: FluidState,
    pub u1: FluidState,
    pub u2: FluidState,
    pub u3: FluidState,
    pub diagnostics: PatternDiagnostics,
    pub failures: Vec<String>,
}

impl MachStemPattern {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }

    /// `max_j |U_j - U_ref|` over `j = 1, 2, 3`.
    pub fn state_gap(&self, reference: &FluidState) -> f64 {
        [self.u1, self.u2, self.u3]
            .iter()
            .map(|s| (s.to_vector() - reference.to_vector()).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFailure {
    pub eps: f64,
    pub message: String,
    /// The assembled pattern when the failure is a validation failure.
    pub pattern: Option<Box<MachStemPattern>>,
}

impl FamilyFailure {
    pub fn from_error(eps: f64, error: Error) -> Self {
        let message = error.to_string();
        let pattern = match error {
            Error::Validation { pattern, .. } => Some(pattern),
            _ => None,
        };
        FamilyFailure {
            eps,
            message,
            pattern,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResult {
    pub patterns: Vec<MachStemPattern>,
    pub failure: Option<FamilyFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub alpha0: f64,
    pub alpha_minus: f64,
    pub mu0: f64,
    pub g1: f64,
    pub omega0: f64,
    pub omega1: f64,
    pub lambda_over_eps_limit: Option<f64>,
    pub lambda_gap: Option<f64>,
    pub u_prime_0: Option<f64>,
    pub psi_prime_0_closed: Option<f64>,
    pub psi_prime_0_fd: Option<f64>,
    pub psi_prime_gap: Option<f64>,
    pub d2_delta_closed: f64,
    pub d2_delta_fd: Option<f64>,
    pub d2_delta_gap: Option<f64>,
    pub d_eps_delta: Option<f64>,
    pub d_eps_delta_perturbed: Option<f64>,
    pub lax_upstream_derivative_closed: f64,
    pub lax_upstream_derivative_fd: Option<f64>,
    pub lax_upstream_gap: Option<f64>,
    pub lax_downstream_derivative_closed: f64,
    pub lax_downstream_derivative_fd: Option<f64>,
    pub lax_downstream_gap: Option<f64>,
    pub notes: Vec<String>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Value at 0 of the quadratic through three points.
pub fn extrapolate_to_zero(x: [f64; 3], y: [f64; 3]) -> f64 {
    let mut total = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= -x[j] / (x[i] - x[j]);
            }
        }
        total += w * y[i];
    }
    total
}
