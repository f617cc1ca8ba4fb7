//! Steady planar shocks `U0 | U1` across the line `x2 = 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::eos::{thermo_eval, EosSpec, ThermoPoint};
use crate::error::{Error, Result};
use crate::flux::{flux, FluidState, FluxVector};
use crate::linalg::{damped_newton, NewtonOptions};

/// How the shock strength is specified.
///
/// For every variant except `UpstreamVelocity` the normal velocity of the
/// given upstream state is replaced by `-j tau0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockStrength {
    DownstreamVolume(f64),
    MassFlux(f64),
    PressureRatio(f64),
    /// Use `v` of the upstream state as given, `j = -v0 / tau0`.
    UpstreamVelocity,
}

/// Upstream state `U0` (x2 > 0) and downstream state `U1` (x2 < 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarShock {
    pub eos: EosSpec,
    pub upstream: FluidState,
    pub downstream: FluidState,
    /// Mass flux `j = -v0/tau0 = -v1/tau1`.
    pub j: f64,
    pub u_bar: f64,
    pub m1: f64,
    pub nu: f64,
}

/// Dimensionless inputs of the stability analysis, read off a shock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockParameters {
    pub m1: f64,
    pub gamma1: f64,
    pub nu: f64,
    pub c1: f64,
    pub v1: f64,
}

impl PlanarShock {
    pub fn thermo_upstream(&self) -> Result<ThermoPoint> {
        self.upstream.thermo(&self.eos)
    }

    pub fn thermo_downstream(&self) -> Result<ThermoPoint> {
        self.downstream.thermo(&self.eos)
    }

    pub fn upstream_mach(&self) -> Result<f64> {
        Ok(-self.upstream.v / self.thermo_upstream()?.sound_speed)
    }

    pub fn stability_inputs(&self) -> Result<ShockParameters> {
        let t1 = self.thermo_downstream()?;
        Ok(ShockParameters {
            m1: self.m1,
            gamma1: t1.gruneisen,
            nu: self.nu,
            c1: t1.sound_speed,
            v1: self.downstream.v,
        })
    }

    /// Scaled residual of the jump relations across `x2 = 0`.
    pub fn rh_residual_scaled(&self) -> Result<f64> {
        scaled_rh_residual(&self.eos, &self.upstream, &self.downstream, 0.0)
    }

    /// Checks the jump relations (scaled residual below `tol`), the strict Lax
    /// inequalities, `u0 = u1` and the sign conventions.
    pub fn validate(&self, tol: f64) -> Result<()> {
        self.eos.validate()?;
        let t0 = self.thermo_upstream()?;
        let t1 = self.thermo_downstream()?;
        if self.upstream.u != self.downstream.u || self.u_bar != self.upstream.u {
            return Err(Error::Admissibility(
                "tangential velocity must be continuous and equal to u_bar".into(),
            ));
        }
        let res = self.rh_residual_scaled()?;
        if !(res < tol) {
            return Err(Error::Admissibility(format!(
                "jump relations violated (scaled residual {res:e})"
            )));
        }
        let m0 = -self.upstream.v / t0.sound_speed;
        let m1 = -self.downstream.v / t1.sound_speed;
        if !(0.0 < m1 && m1 < 1.0 && 1.0 < m0) {
            return Err(Error::Admissibility(format!(
                "Lax inequalities fail: M1 = {m1}, M0 = {m0}"
            )));
        }
        Ok(())
    }
}

/// `-sin(angle) (f1(ub) - f1(ua)) + cos(angle) (f2(ub) - f2(ua))`: the jump of
/// the flux normal to the line through the origin with direction
/// `(cos angle, sin angle)`.
pub fn rh_residual(
    eos: &EosSpec,
    ua: &FluidState,
    ub: &FluidState,
    angle: f64,
) -> Result<FluxVector> {
    let (s, c) = angle.sin_cos();
    let d1 = flux(eos, 1, ub)? - flux(eos, 1, ua)?;
    let d2 = flux(eos, 2, ub)? - flux(eos, 2, ua)?;
    Ok(d1 * (-s) + d2 * c)
}

/// Componentwise relative size of [`rh_residual`], each component divided by
/// the magnitudes of the corresponding components of both axis fluxes.
pub fn scaled_rh_residual(
    eos: &EosSpec,
    ua: &FluidState,
    ub: &FluidState,
    angle: f64,
) -> Result<f64> {
    let r = rh_residual(eos, ua, ub, angle)?;
    let (f1a, f2a) = (flux(eos, 1, ua)?, flux(eos, 2, ua)?);
    let (f1b, f2b) = (flux(eos, 1, ub)?, flux(eos, 2, ub)?);
    Ok((0..4)
        .map(|i| {
            let scale = f1a[i].abs() + f2a[i].abs() + f1b[i].abs() + f2b[i].abs();
            r[i].abs() / scale.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max))
}

/// Entropy on the Hugoniot of `(tau0, s0)` at volume `tau1`, by Newton in `s`.
fn hugoniot_entropy(eos: &EosSpec, t0: &ThermoPoint, tau1: f64, seed: f64) -> Result<f64> {
    let mut s = seed;
    let h = |s: f64| -> Result<(f64, f64)> {
        let d = eos.derivatives(tau1, s)?;
        let p = -d.e_t;
        let val = d.e - t0.e + 0.5 * (p + t0.pressure) * (tau1 - t0.tau);
        let ds = d.e_s - 0.5 * d.e_st * (tau1 - t0.tau);
        Ok((val, ds))
    };
    let (mut val, mut ds) = h(s)?;
    for _ in 0..100 {
        if !(ds > 0.0) {
            return Err(Error::domain(format!(
                "Hugoniot has no entropy solution at tau1 = {tau1} (compression limit)"
            )));
        }
        let step = -val / ds;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = s + scale * step;
            if let Ok((v2, d2)) = h(trial) {
                if v2.abs() < val.abs() || v2 == 0.0 {
                    s = trial;
                    val = v2;
                    ds = d2;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted || (step * scale).abs() <= 1e-15 * s.abs().max(1.0) {
            break;
        }
    }
    let scale = t0.e.abs() + (t0.pressure * (tau1 - t0.tau)).abs();
    if val.abs() > 1e-10 * scale {
        return Err(Error::Convergence {
            solver: "hugoniot entropy",
            iterations: 100,
            residual: val.abs() / scale,
        });
    }
    Ok(s)
}

#[derive(Clone, Copy)]
enum Target {
    Volume(f64),
    Pressure(f64),
    MassFluxSquared(f64),
}

fn target_gap(target: Target, t0: &ThermoPoint, tau1: f64, p1: f64) -> f64 {
    match target {
        Target::Volume(t) => tau1 - t,
        Target::Pressure(p) => (p1 - p) / p,
        Target::MassFluxSquared(j2) => ((p1 - t0.pressure) / (t0.tau - tau1) - j2) / j2,
    }
}

/// Solves the jump relations for the downstream state of a compressive shock.
pub fn solve_downstream(
    eos: &EosSpec,
    upstream: &FluidState,
    strength: ShockStrength,
) -> Result<PlanarShock> {
    eos.validate()?;
    let t0 = thermo_eval(eos, upstream.tau, upstream.s)?;
    let tau0 = t0.tau;
    let target = match strength {
        ShockStrength::DownstreamVolume(t) => {
            if !(t > 0.0) {
                return Err(Error::domain("downstream volume must be positive"));
            }
            if t >= tau0 {
                return Err(Error::Admissibility(format!(
                    "tau1 = {t} >= tau0 = {tau0} is not a compressive shock"
                )));
            }
            Target::Volume(t)
        }
        ShockStrength::PressureRatio(r) => {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::domain("pressure ratio must be positive and finite"));
            }
            if r <= 1.0 {
                return Err(Error::Admissibility(format!(
                    "pressure ratio {r} <= 1 gives no compressive shock"
                )));
            }
            Target::Pressure(r * t0.pressure)
        }
        ShockStrength::MassFlux(j) => mass_flux_target(j, &t0)?,
        ShockStrength::UpstreamVelocity => {
            if !(upstream.v < 0.0) {
                return Err(Error::domain("upstream normal velocity must be negative"));
            }
            mass_flux_target(-upstream.v / tau0, &t0)?
        }
    };

    let (tau1, s1) = bracket_and_solve(eos, &t0, target)?;
    let (tau1, s1) = polish(eos, &t0, target, tau1, s1)?;
    let t1 = thermo_eval(eos, tau1, s1)?;
    let j = match strength {
        ShockStrength::MassFlux(j) => j,
        ShockStrength::UpstreamVelocity => -upstream.v / tau0,
        _ => ((t1.pressure - t0.pressure) / (tau0 - tau1)).sqrt(),
    };
    let u_bar = upstream.u;
    let u0 = FluidState::new(tau0, u_bar, -j * tau0, upstream.s);
    let u1 = FluidState::new(tau1, u_bar, -j * tau1, s1);
    let m1 = j * tau1 / t1.sound_speed;
    let m0 = j * tau0 / t0.sound_speed;
    if !(0.0 < m1 && m1 < 1.0 && m0 > 1.0) {
        return Err(Error::Admissibility(format!(
            "Lax inequalities fail: M1 = {m1}, M0 = {m0}"
        )));
    }
    let shock = PlanarShock {
        eos: *eos,
        upstream: u0,
        downstream: u1,
        j,
        u_bar,
        m1,
        nu: tau0 / tau1 - 1.0,
    };
    let res = shock.rh_residual_scaled()?;
    if !(res < 1e-12) {
        return Err(Error::Convergence {
            solver: "planar shock",
            iterations: 50,
            residual: res,
        });
    }
    Ok(shock)
}

fn mass_flux_target(j: f64, t0: &ThermoPoint) -> Result<Target> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::domain("mass flux must be positive and finite"));
    }
    let j_sonic = t0.sound_speed / t0.tau;
    if j <= j_sonic {
        return Err(Error::Admissibility(format!(
            "upstream Mach number {} <= 1",
            j / j_sonic
        )));
    }
    Ok(Target::MassFluxSquared(j * j))
}

/// Walks down the Hugoniot from the acoustic limit until the target is
/// bracketed, then refines by false position.
fn bracket_and_solve(eos: &EosSpec, t0: &ThermoPoint, target: Target) -> Result<(f64, f64)> {
    let tau0 = t0.tau;
    if let Target::Volume(t) = target {
        let s = hugoniot_entropy(eos, t0, t, t0.s)?;
        return Ok((t, s));
    }
    let eval = |tau1: f64, seed: f64| -> Result<(f64, f64)> {
        let s = hugoniot_entropy(eos, t0, tau1, seed)?;
        let p1 = thermo_eval(eos, tau1, s)
            .map(|tp| tp.pressure)
            .or_else(|_| eos.derivatives(tau1, s).map(|d| -d.e_t))?;
        Ok((s, target_gap(target, t0, tau1, p1)))
    };

    let mut d_prev = 1e-6;
    let (mut s_prev, mut g_prev) = eval(tau0 * (1.0 - d_prev), t0.s)?;
    if g_prev >= 0.0 {
        // Target lies closer to the acoustic limit than the first probe.
        let d = 1e-12;
        let (s, g) = eval(tau0 * (1.0 - d), t0.s)?;
        if g >= 0.0 {
            return Err(Error::Admissibility(
                "shock strength too close to zero".into(),
            ));
        }
        return false_position(
            eval,
            tau0 * (1.0 - d),
            s,
            g,
            tau0 * (1.0 - d_prev),
            s_prev,
            g_prev,
        );
    }
    let mut d_fail: Option<f64> = None;
    for _ in 0..400 {
        let d_next = match d_fail {
            None => (d_prev * 1.5).min(0.5 * (d_prev + 1.0)),
            Some(f) => 0.5 * (d_prev + f),
        };
        if let Some(f) = d_fail {
            if (f - d_prev) < 1e-15 {
                break;
            }
        }
        match eval(tau0 * (1.0 - d_next), s_prev) {
            Ok((s, g)) if g.is_finite() => {
                if g >= 0.0 {
                    return false_position(
                        eval,
                        tau0 * (1.0 - d_prev),
                        s_prev,
                        g_prev,
                        tau0 * (1.0 - d_next),
                        s,
                        g,
                    );
                }
                d_prev = d_next;
                s_prev = s;
                g_prev = g;
            }
            _ => d_fail = Some(d_next),
        }
    }
    Err(Error::domain(
        "requested strength exceeds the compression limit of the Hugoniot",
    ))
}

fn false_position<F>(
    eval: F,
    mut a: f64,
    mut sa: f64,
    mut ga: f64,
    mut b: f64,
    mut sb: f64,
    mut gb: f64,
) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> Result<(f64, f64)>,
{
    // Illinois variant; ga < 0 <= gb.
    let mut side = 0i8;
    for _ in 0..200 {
        let x = (a * gb - b * ga) / (gb - ga);
        let (sx, gx) = eval(x, 0.5 * (sa + sb))?;
        if gx == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            return Ok((x, sx));
        }
        if gx < 0.0 {
            a = x;
            sa = sx;
            ga = gx;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            sb = sx;
            gb = gx;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
        if gx.abs() < 1e-15 {
            return Ok((x, sx));
        }
    }
    Ok(if ga.abs() < gb.abs() {
        (a, sa)
    } else {
        (b, sb)
    })
}

/// Final 2x2 Newton on `(tau1, s1)` for the target and the Hugoniot relation.
fn polish(
    eos: &EosSpec,
    t0: &ThermoPoint,
    target: Target,
    tau1: f64,
    s1: f64,
) -> Result<(f64, f64)> {
    let tau0 = t0.tau;
    let system = |x: &DVector<f64>| -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (tau, s) = (x[0], x[1]);
        if let Target::Volume(t) = target {
            if tau != t {
                return Err(Error::domain("volume is fixed"));
            }
        }
        let d = eos.derivatives(tau, s)?;
        let p = -d.e_t;
        let (p_t, p_s) = (-d.e_tt, -d.e_st);
        let h_scale = t0.e.abs() + (t0.pressure * (tau - tau0)).abs();
        let h = (d.e - t0.e + 0.5 * (p + t0.pressure) * (tau - tau0)) / h_scale;
        let h_t = (d.e_t + 0.5 * p_t * (tau - tau0) + 0.5 * (p + t0.pressure)) / h_scale;
        let h_s = (d.e_s + 0.5 * p_s * (tau - tau0)) / h_scale;
        let (g, g_t, g_s) = match target {
            Target::Volume(t) => (tau - t, 1.0, 0.0),
            Target::Pressure(pt) => ((p - pt) / pt, p_t / pt, p_s / pt),
            Target::MassFluxSquared(j2) => {
                let sc = p.abs() + t0.pressure.abs();
                (
                    (j2 * (tau - tau0) + p - t0.pressure) / sc,
                    (j2 + p_t) / sc,
                    p_s / sc,
                )
            }
        };
        Ok((
            DVector::from_vec(vec![g, h]),
            DMatrix::from_row_slice(2, 2, &[g_t, g_s, h_t, h_s]),
        ))
    };
    if let Target::Volume(_) = target {
        return Ok((tau1, s1));
    }
    let out = damped_newton(
        "planar shock",
        system,
        DVector::from_vec(vec![tau1, s1]),
        NewtonOptions {
            tol: 1e-14,
            ..NewtonOptions::default()
        },
    )
    .or_else(|e| match e {
        // The bracketed value is already at round-off; keep it.
        Error::Convergence { residual, .. } if residual < 1e-12 => {
            Ok(crate::linalg::NewtonOutcome {
                x: DVector::from_vec(vec![tau1, s1]),
                residual,
                iterations: 0,
            })
        }
        other => Err(other),
    })?;
    Ok((out.x[0], out.x[1]))
}

/// The same shock with tangential velocity `new_u_bar` on both sides.
pub fn galilean_shift(shock: &PlanarShock, new_u_bar: f64) -> PlanarShock {
    let mut out = *shock;
    out.upstream.u = new_u_bar;
    out.downstream.u = new_u_bar;
    out.u_bar = new_u_bar;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mie() -> EosSpec {
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

    fn mach2() -> PlanarShock {
        let eos = EosSpec::ideal_gas(1.4);
        let c0 = 1.4f64.sqrt();
        solve_downstream(
            &eos,
            &FluidState::new(1.0, 0.0, -2.0 * c0, 0.0),
            ShockStrength::UpstreamVelocity,
        )
        .unwrap()
    }

    #[test]
    fn ideal_gas_mach_two() {
        let sh = mach2();
        let p0 = sh.thermo_upstream().unwrap().pressure;
        let p1 = sh.thermo_downstream().unwrap().pressure;
        assert!((p1 / p0 - 4.5).abs() < 1e-10);
        assert!((sh.upstream.tau / sh.downstream.tau - 8.0 / 3.0).abs() < 1e-10);
        assert!((sh.m1 - 1.0 / 3f64.sqrt()).abs() < 1e-10);
        assert!(sh.rh_residual_scaled().unwrap() < 1e-12);
        sh.validate(1e-12).unwrap();
    }

    #[test]
    fn strength_forms_agree() {
        let eos = mie();
        let up = FluidState::new(1.0, 0.0, -1.0, 0.0);
        let a = solve_downstream(&eos, &up, ShockStrength::DownstreamVolume(0.75)).unwrap();
        let p0 = a.thermo_upstream().unwrap().pressure;
        let p1 = a.thermo_downstream().unwrap().pressure;
        let b = solve_downstream(&eos, &up, ShockStrength::PressureRatio(p1 / p0)).unwrap();
        let c = solve_downstream(&eos, &up, ShockStrength::MassFlux(a.j)).unwrap();
        for s in [&b, &c] {
            assert!((s.downstream.tau - 0.75).abs() < 1e-11);
            assert!((s.downstream.s - a.downstream.s).abs() < 1e-11);
        }
    }

    #[test]
    fn degenerate_and_expansive_requests_fail() {
        let eos = EosSpec::ideal_gas(1.4);
        let up = FluidState::new(1.0, 0.0, -1.0, 0.0);
        assert!(matches!(
            solve_downstream(&eos, &up, ShockStrength::PressureRatio(1.0)),
            Err(Error::Admissibility(_))
        ));
        assert!(matches!(
            solve_downstream(&eos, &up, ShockStrength::DownstreamVolume(1.2)),
            Err(Error::Admissibility(_))
        ));
        assert!(matches!(
            solve_downstream(&eos, &up, ShockStrength::MassFlux(0.5)),
            Err(Error::Admissibility(_))
        ));
    }

    #[test]
    fn residual_identities() {
        let sh = mach2();
        let eos = sh.eos;
        let z = rh_residual(&eos, &sh.upstream, &sh.upstream, 0.3).unwrap();
        assert_eq!(z, FluxVector::zeros());
        let r0 = rh_residual(&eos, &sh.upstream, &sh.downstream, 0.0).unwrap();
        let rpi = rh_residual(&eos, &sh.upstream, &sh.downstream, std::f64::consts::PI).unwrap();
        assert!((r0 + rpi).norm() < 1e-12);
        let shifted = galilean_shift(&sh, -0.7);
        assert!(shifted.rh_residual_scaled().unwrap() < 1e-12);
        assert_eq!(galilean_shift(&sh, sh.u_bar), sh);
    }

    #[test]
    fn hugoniot_is_monotone() {
        for eos in [EosSpec::ideal_gas(1.4), mie()] {
            let up = FluidState::new(1.0, 0.0, -1.0, 0.0);
            let mut prev: Option<PlanarShock> = None;
            for k in 1..30 {
                let ratio = 1.0 + 0.5 * k as f64;
                let sh = solve_downstream(&eos, &up, ShockStrength::PressureRatio(ratio)).unwrap();
                assert!(sh.nu > 0.0);
                if let Some(p) = prev {
                    assert!(sh.downstream.tau < p.downstream.tau);
                    assert!(
                        sh.thermo_downstream().unwrap().pressure
                            > p.thermo_downstream().unwrap().pressure
                    );
                }
                prev = Some(sh);
            }
        }
    }
}
