//! Euler fluxes `f0, f1, f2` on the state `U = (tau, u, v, s)` and their Jacobians.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::eos::{thermo_eval, EosSpec, ThermoPoint};
use crate::error::{Error, Result};
use crate::linalg::gauss_legendre;

pub type FluxVector = Vector4<f64>;

/// Fluid state `(tau, u, v, s)`: specific volume, velocity components, specific entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    pub tau: f64,
    pub u: f64,
    pub v: f64,
    pub s: f64,
}

impl FluidState {
    pub fn new(tau: f64, u: f64, v: f64, s: f64) -> Self {
        FluidState { tau, u, v, s }
    }

    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(self.tau, self.u, self.v, self.s)
    }

    pub fn from_vector(x: &Vector4<f64>) -> Self {
        FluidState::new(x[0], x[1], x[2], x[3])
    }

    pub fn thermo(&self, eos: &EosSpec) -> Result<ThermoPoint> {
        thermo_eval(eos, self.tau, self.s)
    }

    pub fn pressure(&self, eos: &EosSpec) -> Result<f64> {
        Ok(self.thermo(eos)?.pressure)
    }

    pub fn speed(&self) -> f64 {
        self.u.hypot(self.v)
    }

    /// `max_i |a_i - b_i| / max(1, |b_i|)`, used for trust-region checks.
    pub fn relative_deviation(&self, reference: &FluidState) -> f64 {
        let (a, b) = (self.to_vector(), reference.to_vector());
        let vel_scale = reference.speed().max(1e-300);
        let d = [
            (a[0] - b[0]).abs() / b[0].abs(),
            (a[1] - b[1]).abs() / vel_scale,
            (a[2] - b[2]).abs() / vel_scale,
            (a[3] - b[3]).abs() / b[3].abs().max(1.0),
        ];
        d.into_iter().fold(0.0, f64::max)
    }
}

fn check_axis(axis: usize, allow_time: bool) -> Result<()> {
    if axis > 2 || (!allow_time && axis == 0) {
        return Err(Error::domain(format!("invalid flux axis {axis}")));
    }
    Ok(())
}

pub(crate) fn flux_from(tp: &ThermoPoint, axis: usize, u: &FluidState) -> FluxVector {
    let rho = 1.0 / u.tau;
    let energy = 0.5 * rho * (u.u * u.u + u.v * u.v) + rho * tp.e;
    let p = tp.pressure;
    match axis {
        0 => Vector4::new(rho, rho * u.u, rho * u.v, energy),
        1 => Vector4::new(
            rho * u.u,
            rho * u.u * u.u + p,
            rho * u.u * u.v,
            (energy + p) * u.u,
        ),
        _ => Vector4::new(
            rho * u.v,
            rho * u.u * u.v,
            rho * u.v * u.v + p,
            (energy + p) * u.v,
        ),
    }
}

/// Evaluates `f_axis(U)` for `axis` in `{0, 1, 2}`.
pub fn flux(eos: &EosSpec, axis: usize, state: &FluidState) -> Result<FluxVector> {
    check_axis(axis, true)?;
    let tp = state.thermo(eos)?;
    Ok(flux_from(&tp, axis, state))
}

pub(crate) fn transport_from(tp: &ThermoPoint, st: &FluidState) -> Matrix4<f64> {
    let (tau, u, v) = (st.tau, st.u, st.v);
    let t = tp.temperature;
    let rho = 1.0 / tau;
    let q2 = 0.5 * (u * u + v * v);
    Matrix4::new(
        -tau * tau,
        0.0,
        0.0,
        0.0,
        -tau * u,
        tau,
        0.0,
        0.0,
        -tau * v,
        0.0,
        tau,
        0.0,
        tau * tau / t * (rho * (q2 - tp.e) - tp.pressure),
        -tau * u / t,
        -tau * v / t,
        tau / t,
    )
}

/// The matrix `P(U)` with `df_j(U) = P(U)^{-1} B_j(U)`; note `df_0 = P^{-1}`.
pub fn transport_matrix(eos: &EosSpec, state: &FluidState) -> Result<Matrix4<f64>> {
    let tp = state.thermo(eos)?;
    Ok(transport_from(&tp, state))
}

pub fn transport_matrix_inverse(eos: &EosSpec, state: &FluidState) -> Result<Matrix4<f64>> {
    transport_matrix(eos, state)?
        .try_inverse()
        .ok_or(Error::SingularMatrix)
}

/// Quasilinear matrix `B_j(U)` for `axis` in `{1, 2}`.
pub fn quasilinear_matrix(eos: &EosSpec, axis: usize, state: &FluidState) -> Result<Matrix4<f64>> {
    check_axis(axis, false)?;
    let tp = state.thermo(eos)?;
    Ok(quasilinear_from(&tp, axis, state))
}

fn quasilinear_from(tp: &ThermoPoint, axis: usize, st: &FluidState) -> Matrix4<f64> {
    let tau = st.tau;
    let c2t = -tp.sound_speed * tp.sound_speed / tau;
    let gt = tp.gruneisen * tp.temperature;
    if axis == 1 {
        let u = st.u;
        Matrix4::new(
            u, -tau, 0.0, 0.0, c2t, u, 0.0, gt, 0.0, 0.0, u, 0.0, 0.0, 0.0, 0.0, u,
        )
    } else {
        let v = st.v;
        Matrix4::new(
            v, 0.0, -tau, 0.0, 0.0, v, 0.0, 0.0, c2t, 0.0, v, gt, 0.0, 0.0, 0.0, v,
        )
    }
}

pub(crate) fn jacobian_from(
    tp: &ThermoPoint,
    axis: usize,
    st: &FluidState,
) -> Result<Matrix4<f64>> {
    let p_inv = transport_from(tp, st)
        .try_inverse()
        .ok_or(Error::SingularMatrix)?;
    if axis == 0 {
        return Ok(p_inv);
    }
    Ok(p_inv * quasilinear_from(tp, axis, st))
}

/// `df_axis(U)` for `axis` in `{0, 1, 2}`, computed as `P(U)^{-1} B_axis(U)`.
pub fn flux_jacobian(eos: &EosSpec, axis: usize, state: &FluidState) -> Result<Matrix4<f64>> {
    check_axis(axis, true)?;
    let tp = state.thermo(eos)?;
    jacobian_from(&tp, axis, state)
}

/// Segment average `A_j(U1, U3) = int_0^1 df_j(t U1 + (1 - t) U3) dt`.
///
/// Gauss-Legendre with 8 nodes, doubled until the mean-value identity
/// `A_j (U1 - U3) = f_j(U1) - f_j(U3)` holds to `1e-10` relative (at most 256 nodes).
pub fn averaged_jacobian(
    eos: &EosSpec,
    axis: usize,
    u1: &FluidState,
    u3: &FluidState,
) -> Result<Matrix4<f64>> {
    check_axis(axis, false)?;
    let a = u1.to_vector();
    let b = u3.to_vector();
    let df = flux(eos, axis, u1)? - flux(eos, axis, u3)?;
    let floor = 1e-14 * flux(eos, axis, u1)?.norm();
    let mut n = 8;
    loop {
        let avg = gauss_average(eos, axis, &a, &b, n)?;
        let gap = (avg * (a - b) - df).norm();
        if gap <= 1e-10 * df.norm() + floor || n >= 256 {
            return Ok(avg);
        }
        n *= 2;
    }
}

fn gauss_average(
    eos: &EosSpec,
    axis: usize,
    a: &Vector4<f64>,
    b: &Vector4<f64>,
    n: usize,
) -> Result<Matrix4<f64>> {
    let (x, w) = gauss_legendre(n);
    let mut sum = Matrix4::zeros();
    // Nodes come in pairs t, 1 - t; summing each pair makes the result
    // bitwise symmetric under exchange of the end points.
    for i in 0..n / 2 {
        let t_hi = 0.5 * (1.0 + x[i]);
        let t_lo = 0.5 * (1.0 - x[i]);
        let p = a * t_hi + b * t_lo;
        let q = a * t_lo + b * t_hi;
        let jp = flux_jacobian(eos, axis, &FluidState::from_vector(&p))?;
        let jq = flux_jacobian(eos, axis, &FluidState::from_vector(&q))?;
        sum += (jp + jq) * (0.5 * w[i]);
    }
    Ok(sum)
}
