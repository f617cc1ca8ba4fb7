//! Normal modes behind a planar shock, the stable subspace, the linearized
//! jump relations and the Lopatinskii determinant.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{flux, flux_jacobian};
use crate::linalg::complex_quadratic_roots;
use crate::shock::PlanarShock;

pub type CVector4 = Vector4<Complex64>;
pub type CMatrix4 = Matrix4<Complex64>;

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Laplace frequency `z` (with `Im z <= 0`) and tangential wavenumber `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPoint {
    pub z: Complex64,
    pub eta: f64,
}

impl FrequencyPoint {
    pub fn new(z: Complex64, eta: f64) -> Self {
        FrequencyPoint { z, eta }
    }

    pub fn real(z: f64, eta: f64) -> Self {
        FrequencyPoint::new(cx(z), eta)
    }

    fn check(&self) -> Result<()> {
        if !(self.z.re.is_finite() && self.z.im.is_finite() && self.eta.is_finite()) {
            return Err(Error::domain("frequency must be finite"));
        }
        if self.z.im > 0.0 {
            return Err(Error::domain(format!(
                "frequencies must satisfy Im z <= 0, got {}",
                self.z
            )));
        }
        if self.z.norm() == 0.0 && self.eta == 0.0 {
            return Err(Error::domain("(z, eta) = (0, 0) is excluded"));
        }
        Ok(())
    }
}

/// Downstream quantities that enter the mode analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DownstreamFrame {
    pub tau1: f64,
    pub v1: f64,
    pub c1: f64,
    pub gamma1: f64,
    pub t1: f64,
    pub u_bar: f64,
}

impl DownstreamFrame {
    pub fn from_shock(shock: &PlanarShock) -> Result<Self> {
        let t = shock.thermo_downstream()?;
        Ok(DownstreamFrame {
            tau1: shock.downstream.tau,
            v1: shock.downstream.v,
            c1: t.sound_speed,
            gamma1: t.gruneisen,
            t1: t.temperature,
            u_bar: shock.u_bar,
        })
    }

    /// Dimensionless frame with `c1 = tau1 = T1 = 1`, `v1 = -M1`.
    pub fn normalized(m1: f64, gamma1: f64, u_bar: f64) -> Self {
        DownstreamFrame {
            tau1: 1.0,
            v1: -m1,
            c1: 1.0,
            gamma1,
            t1: 1.0,
            u_bar,
        }
    }

    /// The two real glancing frequencies `z` for wavenumber `eta`, in increasing order.
    pub fn glancing_points(&self, eta: f64) -> (f64, f64) {
        let w = (self.c1 * self.c1 - self.v1 * self.v1).sqrt() * eta.abs();
        (-self.u_bar * eta - w, -self.u_bar * eta + w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeDecomposition {
    pub omega0: Complex64,
    pub omega_minus: Complex64,
    pub basis_e0: [CVector4; 2],
    pub basis_eminus: CVector4,
    /// Real frequency with two distinct real acoustic roots.
    pub hyperbolic: bool,
}

impl ModeDecomposition {
    pub fn stable_basis(&self) -> [CVector4; 3] {
        [self.basis_e0[0], self.basis_e0[1], self.basis_eminus]
    }
}

fn acoustic_roots(frame: &DownstreamFrame, zeta: Complex64, eta: f64) -> (Complex64, Complex64) {
    let (v1, c1) = (frame.v1, frame.c1);
    complex_quadratic_roots(
        cx(v1 * v1 - c1 * c1),
        zeta * (2.0 * v1),
        zeta * zeta - cx(c1 * c1 * eta * eta),
    )
}

fn decaying_root(frame: &DownstreamFrame, zeta: Complex64, eta: f64) -> Complex64 {
    let (a, b) = acoustic_roots(frame, zeta, eta);
    if a.im < b.im {
        a
    } else {
        b
    }
}

/// Frequency scale used for probes and tolerances.
fn frequency_scale(frame: &DownstreamFrame, f: &FrequencyPoint) -> f64 {
    (f.z.norm() + (frame.u_bar * f.eta).abs()).max(frame.c1 * f.eta.abs())
}

/// `omega_-` on the branch with `Im omega_- < 0` for `Im z < 0`, continued to
/// real `z` by probing at `z - i gamma` with `gamma` halved until successive
/// probes agree.
pub fn omega_minus(frame: &DownstreamFrame, f: &FrequencyPoint) -> Result<Complex64> {
    f.check()?;
    let zeta = f.z + cx(frame.u_bar * f.eta);
    let scale = frequency_scale(frame, f);
    let mut gamma = 1e-8 * scale;
    if f.z.im < -gamma {
        return Ok(decaying_root(frame, zeta, f.eta));
    }
    let (r1, r2) = acoustic_roots(frame, zeta, f.eta);
    // Collision of the two roots at a real frequency.
    if f.z.im == 0.0 && (r1 - r2).norm() <= 1e-7 * (r1.norm() + r2.norm() + scale / frame.c1) {
        return Err(Error::Glancing {
            z: f.z.re,
            eta: f.eta,
        });
    }
    let mut prev = decaying_root(frame, zeta - Complex64::new(0.0, gamma), f.eta);
    for _ in 0..60 {
        gamma *= 0.5;
        let next = decaying_root(frame, zeta - Complex64::new(0.0, gamma), f.eta);
        let converged = (next - prev).norm() <= 1e-10 * next.norm().max(scale / frame.c1);
        prev = next;
        if converged {
            break;
        }
    }
    Ok(if (r1 - prev).norm() <= (r2 - prev).norm() {
        r1
    } else {
        r2
    })
}

/// Eigenmodes `omega_0`, `omega_-` and the spanning vectors of `E_0` and `E_-`.
pub fn eigenmodes(frame: &DownstreamFrame, f: &FrequencyPoint) -> Result<ModeDecomposition> {
    let wm = omega_minus(frame, f)?;
    let zeta = f.z + cx(frame.u_bar * f.eta);
    let w0 = -zeta / frame.v1;
    if (w0 - wm).norm() < 1e-10 * (w0.norm() + wm.norm()) {
        return Err(Error::Coincidence);
    }
    let (tau1, c1, v1) = (frame.tau1, frame.c1, frame.v1);
    let c2 = c1 * c1;
    let eta = cx(f.eta);
    let b1 = CVector4::new(cx(0.0), w0, -eta, cx(0.0));
    let b2 = CVector4::new(cx(frame.gamma1 * frame.t1 * tau1), cx(0.0), cx(0.0), cx(c2));
    let b3 = CVector4::new((zeta + wm * v1) * tau1, eta * c2, wm * c2, cx(0.0));
    let disc = zeta * zeta - cx((c2 - v1 * v1) * f.eta * f.eta);
    let hyperbolic = f.z.im == 0.0 && disc.re > 0.0;
    Ok(ModeDecomposition {
        omega0: w0,
        omega_minus: wm,
        basis_e0: [b1, b2],
        basis_eminus: b3,
        hyperbolic,
    })
}

/// Alias of [`eigenmodes`]: the decomposition carries the basis of `E^s`.
pub fn stable_subspace(frame: &DownstreamFrame, f: &FrequencyPoint) -> Result<ModeDecomposition> {
    eigenmodes(frame, f)
}

/// Matrix of the linearized interior system behind the shock at `(z, eta, omega)`.
pub fn interior_symbol(
    frame: &DownstreamFrame,
    z: Complex64,
    eta: f64,
    omega: Complex64,
) -> CMatrix4 {
    let (tau1, c1, v1) = (frame.tau1, frame.c1, frame.v1);
    let a = z + cx(frame.u_bar * eta) + omega * v1;
    let c2t = c1 * c1 / tau1;
    let gt = frame.gamma1 * frame.t1;
    let zero = cx(0.0);
    CMatrix4::new(
        a,
        cx(-tau1 * eta),
        -omega * tau1,
        zero,
        cx(-c2t * eta),
        a,
        zero,
        cx(gt * eta),
        -omega * c2t,
        zero,
        a,
        omega * gt,
        zero,
        zero,
        zero,
        a,
    )
}

/// Data of the jump relations entering the Lopatinskii determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhJumpData {
    /// `r = df2(U1)^{-1} (z (f0(U1) - f0(U0)) + eta (f1(U1) - f1(U0)))`.
    Shock {
        df2_inv: Matrix4<f64>,
        jump_f0: Vector4<f64>,
        jump_f1: Vector4<f64>,
    },
    /// Row-reduced form: the operator `L` of the linearized jump relations with
    /// right-hand side `g = (-(rho1 - rho0)(z + u eta), -(p1 - p0) eta, 0, 0)`.
    Reduced {
        operator: Matrix4<f64>,
        jump_rho: f64,
        jump_p: f64,
    },
}

/// Everything needed to evaluate `Delta(u_bar, z, eta)` repeatedly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LopatinskiiProblem {
    pub frame: DownstreamFrame,
    pub jumps: RhJumpData,
}

/// `L` of the linearized jump relations (rows in the order of the reduced system).
pub fn linearized_rh_operator(frame: &DownstreamFrame, tau0: f64, jump_p: f64) -> Matrix4<f64> {
    let (tau1, c1, v1, t1, g1) = (frame.tau1, frame.c1, frame.v1, frame.t1, frame.gamma1);
    let t12 = tau1 * tau1;
    Matrix4::new(
        -v1 / t12,
        0.0,
        1.0 / tau1,
        0.0,
        0.0,
        v1 / tau1,
        0.0,
        0.0,
        -(v1 * v1 + c1 * c1) / t12,
        0.0,
        2.0 * v1 / tau1,
        g1 * t1 / tau1,
        -0.5 * (c1 * c1 / t12 * (tau1 - tau0) + jump_p),
        0.0,
        0.0,
        t1 * (1.0 + g1 * (tau1 - tau0) / (2.0 * tau1)),
    )
}

impl LopatinskiiProblem {
    pub fn from_shock(shock: &PlanarShock) -> Result<Self> {
        let eos = &shock.eos;
        let (u0, u1) = (&shock.upstream, &shock.downstream);
        let df2_inv = flux_jacobian(eos, 2, u1)?
            .try_inverse()
            .ok_or(Error::SingularMatrix)?;
        Ok(LopatinskiiProblem {
            frame: DownstreamFrame::from_shock(shock)?,
            jumps: RhJumpData::Shock {
                df2_inv,
                jump_f0: flux(eos, 0, u1)? - flux(eos, 0, u0)?,
                jump_f1: flux(eos, 1, u1)? - flux(eos, 1, u0)?,
            },
        })
    }

    /// Dimensionless problem built from `(M1, Gamma1, nu)` alone, with
    /// `c1 = tau1 = T1 = 1`, `tau0 = 1 + nu` and `p1 - p0 = M1^2 nu`.
    pub fn reduced(m1: f64, gamma1: f64, nu: f64, u_bar: f64) -> Self {
        let frame = DownstreamFrame::normalized(m1, gamma1, u_bar);
        let tau0 = 1.0 + nu;
        let jump_p = m1 * m1 * nu;
        LopatinskiiProblem {
            frame,
            jumps: RhJumpData::Reduced {
                operator: linearized_rh_operator(&frame, tau0, jump_p),
                jump_rho: 1.0 - 1.0 / tau0,
                jump_p,
            },
        }
    }

    /// The last column of the determinant.
    pub fn forcing(&self, f: &FrequencyPoint) -> CVector4 {
        match self.jumps {
            RhJumpData::Shock {
                df2_inv,
                jump_f0,
                jump_f1,
            } => {
                let a = df2_inv * jump_f0;
                let b = df2_inv * jump_f1;
                CVector4::from_fn(|i, _| f.z * a[i] + cx(f.eta * b[i]))
            }
            RhJumpData::Reduced {
                jump_rho, jump_p, ..
            } => {
                let zeta = f.z + cx(self.frame.u_bar * f.eta);
                CVector4::new(zeta * jump_rho, cx(jump_p * f.eta), cx(0.0), cx(0.0))
            }
        }
    }

    /// Determinant matrix `[b1 | b2 | b3 | r]` (or `[L b1 | L b2 | L b3 | -g]`).
    pub fn matrix(&self, f: &FrequencyPoint) -> Result<(CMatrix4, ModeDecomposition)> {
        let modes = stable_subspace(&self.frame, f)?;
        let [b1, b2, b3] = modes.stable_basis();
        let last = self.forcing(f);
        let m = match self.jumps {
            RhJumpData::Shock { .. } => CMatrix4::from_columns(&[b1, b2, b3, last]),
            RhJumpData::Reduced { operator, .. } => {
                let l = operator.map(cx);
                CMatrix4::from_columns(&[l * b1, l * b2, l * b3, last])
            }
        };
        Ok((m, modes))
    }

    pub fn evaluate(&self, f: &FrequencyPoint) -> Result<LopatinskiiValue> {
        let (m, modes) = self.matrix(f)?;
        let value = m.determinant();
        let rows: f64 = m.row_iter().map(|r| r.norm()).product();
        let cols: f64 = m.column_iter().map(|c| c.norm()).product();
        let norm = rows.min(cols);
        Ok(LopatinskiiValue {
            value,
            normalized: if norm > 0.0 { value.norm() / norm } else { 0.0 },
            omega_gap: modes.omega_minus - modes.omega0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LopatinskiiValue {
    pub value: Complex64,
    /// `|Delta|` divided by the smaller of the row-norm and column-norm
    /// products of the matrix, both of which bound `|Delta|`.
    pub normalized: f64,
    /// `omega_- - omega_0`, which vanishes where `E_0` and `E_-` merge.
    pub omega_gap: Complex64,
}

/// `Delta(u_bar, z, eta)` for a shock.
pub fn lopatinskii(shock: &PlanarShock, f: &FrequencyPoint) -> Result<LopatinskiiValue> {
    LopatinskiiProblem::from_shock(shock)?.evaluate(f)
}

/// Solution of the linearized jump relations at `(z, eta, chi) = (0, 1, 1)`
/// and its decomposition on `E^s(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedRhSolution {
    pub chi: f64,
    pub u_dot: Vector4<f64>,
    pub r: Vector4<f64>,
    pub alpha0: f64,
    pub alpha0_angle_form: f64,
    pub alpha_minus: f64,
    pub alpha_minus_angle_form: f64,
    pub mu0: f64,
    pub psi0: f64,
    pub beta: f64,
    /// Scaled residual of the four linearized jump relations.
    pub residual: f64,
    /// `|U_dot - (alpha0 e_0 + mu0 e_s + alpha_- R)| / |U_dot|`.
    pub reconstruction_gap: f64,
    /// `|U_dot + r| / |U_dot|`.
    pub forcing_gap: f64,
    pub lopatinskii_normalized: f64,
}

/// Limit angle `Psi0` with `cos Psi0 = (-c v + u sqrt(D)) / (u^2 + v^2)` and
/// `sin Psi0 = (c u + v sqrt(D)) / (u^2 + v^2)`, `D = u^2 + v^2 - c^2`,
/// returned in `[0, 2 pi)`.
pub fn causal_angle(u: f64, v: f64, c: f64) -> Result<f64> {
    let q2 = u * u + v * v;
    let d = q2 - c * c;
    if !(d >= 0.0) {
        return Err(Error::domain(format!(
            "flow is not supersonic: u^2 + v^2 - c^2 = {d}"
        )));
    }
    let r = d.sqrt();
    let cos = (-c * v + u * r) / q2;
    let sin = (c * u + v * r) / q2;
    Ok(sin.atan2(cos).rem_euclid(std::f64::consts::TAU))
}

/// The other root of `-u sin Psi + v cos Psi + c = 0`.
pub fn rejected_angle(u: f64, v: f64, c: f64) -> Result<f64> {
    let q2 = u * u + v * v;
    let d = q2 - c * c;
    if !(d >= 0.0) {
        return Err(Error::domain("flow is not supersonic"));
    }
    let r = d.sqrt();
    let cos = (-c * v - u * r) / q2;
    let sin = (c * u - v * r) / q2;
    Ok(sin.atan2(cos).rem_euclid(std::f64::consts::TAU))
}

/// Closed-form solution of the linearized jump relations for a shock with
/// `Delta(u_bar, 0, 1) = 0`.
pub fn solve_linearized_rh(shock: &PlanarShock) -> Result<LinearizedRhSolution> {
    let problem = LopatinskiiProblem::from_shock(shock)?;
    let lop = problem.evaluate(&FrequencyPoint::real(0.0, 1.0))?;
    if !(lop.normalized < 1e-8) {
        return Err(Error::NotWeaklyStable {
            normalized: lop.normalized,
        });
    }
    let t0 = shock.thermo_upstream()?;
    let t1 = shock.thermo_downstream()?;
    let (tau0, tau1) = (shock.upstream.tau, shock.downstream.tau);
    let (v0, v1) = (shock.upstream.v, shock.downstream.v);
    let ub = shock.u_bar;
    let c1 = t1.sound_speed;
    let g1 = t1.gruneisen;
    let temp1 = t1.temperature;
    let j = shock.j;
    let sub = c1 * c1 - v1 * v1;

    let tau_dot = (2.0 + g1 * (1.0 - tau0 / tau1)) * v1 * v1 * ub / (v0 * sub) * (tau1 - tau0);
    let u_dot = v1 - v0;
    let v_dot =
        ub / sub * (tau1 / tau0 - 1.0) * (c1 * c1 + v1 * v1 + v1 * v1 * g1 * (1.0 - tau0 / tau1));
    let s_dot = j * j / temp1 * ub / v0 * (tau1 - tau0).powi(2);
    let u_dot_vec = Vector4::new(tau_dot, u_dot, v_dot, s_dot);

    let r = match problem.jumps {
        RhJumpData::Shock {
            df2_inv, jump_f1, ..
        } => df2_inv * jump_f1,
        RhJumpData::Reduced { .. } => unreachable!(),
    };

    let jump_p = t1.pressure - t0.pressure;
    let jump_rho = 1.0 / tau1 - 1.0 / tau0;
    let op = linearized_rh_operator(&problem.frame, tau0, jump_p);
    let rhs = Vector4::new(-jump_rho * ub, -jump_p, 0.0, 0.0);
    let lhs = op * u_dot_vec;
    let residual = (0..4)
        .map(|i| {
            let scale: f64 = (0..4)
                .map(|k| (op[(i, k)] * u_dot_vec[k]).abs())
                .sum::<f64>()
                + rhs[i].abs();
            if scale > 0.0 {
                (lhs[i] - rhs[i]).abs() / scale
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);

    let psi0 = causal_angle(ub, v1, c1)?;
    let (sin_p, cos_p) = psi0.sin_cos();
    let q2 = ub * ub + v1 * v1;
    let alpha0_angle = -(ub / v0) * (v1 - v0).powi(2) / q2;
    let alpham_angle = (v1 - v0) / (c1 * sin_p) * (v1 / v0) * (ub * ub + v0 * v1) / q2;

    let m1 = shock.m1;
    let nu = shock.nu;
    // beta from the tangential Mach number, see `causal_angle`.
    let ups = ub / c1;
    let beta = (m1 + ups * (ups * ups + m1 * m1 - 1.0).sqrt()) / (ups * ups + m1 * m1);
    let sb = (1.0 - beta * beta).sqrt();
    let den = 1.0 + m1 * m1 - 2.0 * m1 * beta;
    let alpha0 = -(m1 * nu * nu / (1.0 + nu)) * (1.0 - m1 * beta) * sb / den;
    let alpham = -(m1 * nu / (1.0 + nu)) * (1.0 / sb + m1 * m1 * nu * sb / den);
    let mu0 = s_dot / (c1 * c1);

    let recon = Vector4::new(0.0, ub, v1, 0.0) * alpha0
        + Vector4::new(g1 * temp1 * tau1, 0.0, 0.0, c1 * c1) * mu0
        + Vector4::new(tau1, c1 * sin_p, -c1 * cos_p, 0.0) * alpham;
    let norm = u_dot_vec.norm();

    Ok(LinearizedRhSolution {
        chi: 1.0,
        u_dot: u_dot_vec,
        r,
        alpha0,
        alpha0_angle_form: alpha0_angle,
        alpha_minus: alpham,
        alpha_minus_angle_form: alpham_angle,
        mu0,
        psi0,
        beta,
        residual,
        reconstruction_gap: (recon - u_dot_vec).norm() / norm,
        forcing_gap: (u_dot_vec + r).norm() / norm,
        lopatinskii_normalized: lop.normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> DownstreamFrame {
        DownstreamFrame {
            tau1: 0.75,
            v1: -1.7,
            c1: 2.3,
            gamma1: 5.0,
            t1: 0.4,
            u_bar: -0.6,
        }
    }

    fn residual(fr: &DownstreamFrame, f: &FrequencyPoint, w: Complex64) -> f64 {
        let zeta = f.z + cx(fr.u_bar * f.eta);
        let lhs = (zeta + w * fr.v1).powi(2);
        let rhs = (cx(f.eta * f.eta) + w * w) * (fr.c1 * fr.c1);
        (lhs - rhs).norm() / (lhs.norm() + rhs.norm())
    }

    #[test]
    fn normal_incidence() {
        let fr = frame();
        let f = FrequencyPoint::new(Complex64::new(0.0, -1.0), 0.0);
        let m = eigenmodes(&fr, &f).unwrap();
        assert!((m.omega0 - Complex64::new(0.0, 1.0) / fr.v1).norm() < 1e-15);
        assert!(m.omega_minus.im < 0.0);
        assert!(residual(&fr, &f, m.omega_minus) < 1e-14);
    }

    #[test]
    fn branch_rule_and_homogeneity() {
        let fr = frame();
        for &(re, im, eta) in &[
            (0.3, -0.2, 1.0),
            (-4.0, -1e-3, 0.5),
            (5.0, 0.0, 1.0),
            (0.1, 0.0, 1.0),
        ] {
            let f = FrequencyPoint::new(Complex64::new(re, im), eta);
            let w = omega_minus(&fr, &f).unwrap();
            assert!(residual(&fr, &f, w) < 1e-13);
            if im < 0.0 {
                assert!(w.im < 0.0);
            }
            for s in [2.0, 10.0] {
                let g = FrequencyPoint::new(f.z * s, eta * s);
                let ws = omega_minus(&fr, &g).unwrap();
                assert!((ws - w * s).norm() < 1e-12 * ws.norm());
            }
        }
    }

    #[test]
    fn hyperbolic_point_formula() {
        let fr = frame();
        let ub = fr.u_bar * 5.0;
        let fr = DownstreamFrame { u_bar: ub, ..fr };
        let (v1, c1) = (fr.v1, fr.c1);
        let d = ub * ub + v1 * v1 - c1 * c1;
        assert!(d > 0.0);
        let expected = (v1 * ub + c1 * ub.signum() * d.sqrt()) / (c1 * c1 - v1 * v1);
        let m = eigenmodes(&fr, &FrequencyPoint::real(0.0, 1.0)).unwrap();
        assert!(m.hyperbolic);
        assert!((m.omega_minus - cx(expected)).norm() < 1e-12 * expected.abs());
    }

    #[test]
    fn glancing_is_reported() {
        let fr = frame();
        let (zl, _) = fr.glancing_points(1.0);
        assert!(matches!(
            omega_minus(&fr, &FrequencyPoint::real(zl, 1.0)),
            Err(Error::Glancing { .. })
        ));
    }

    #[test]
    fn coincidence_is_reported() {
        let fr = frame();
        // omega_0 = omega_- where zeta = i v1 eta.
        let z = Complex64::new(-fr.u_bar, fr.v1);
        assert!(matches!(
            eigenmodes(&fr, &FrequencyPoint::new(z, 1.0)),
            Err(Error::Coincidence)
        ));
    }

    #[test]
    fn interior_system_annihilates_modes() {
        let fr = frame();
        for &(re, im) in &[(0.4, -0.3), (6.0, 0.0), (-1.0, -2.0)] {
            let f = FrequencyPoint::new(Complex64::new(re, im), 1.0);
            let m = eigenmodes(&fr, &f).unwrap();
            let a0 = interior_symbol(&fr, f.z, f.eta, m.omega0);
            for b in m.basis_e0 {
                assert!((a0 * b).norm() < 1e-12 * b.norm() * a0.norm());
            }
            let am = interior_symbol(&fr, f.z, f.eta, m.omega_minus);
            let b = m.basis_eminus;
            assert!((am * b).norm() < 1e-12 * b.norm() * am.norm());
            let basis = CMatrix4::from_columns(&[
                m.basis_e0[0],
                m.basis_e0[1],
                m.basis_eminus,
                CVector4::zeros(),
            ]);
            let sv = basis.svd(false, false).singular_values;
            assert!(sv[2] > 1e-8 * sv[0]);
        }
    }

    #[test]
    fn causal_angle_solves_eikonal() {
        let (u, v, c) = (-3.0, -1.5, 2.0);
        for psi in [
            causal_angle(u, v, c).unwrap(),
            rejected_angle(u, v, c).unwrap(),
        ] {
            assert!((-u * psi.sin() + v * psi.cos() + c).abs() < 1e-14);
        }
        let a = causal_angle(u, v, c).unwrap();
        let b = rejected_angle(u, v, c).unwrap();
        assert!(a.cos() < b.cos());
        assert!(u * a.cos() + v * a.sin() >= 0.0);
    }
}
