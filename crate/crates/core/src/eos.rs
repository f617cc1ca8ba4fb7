//! Complete equations of state `e(tau, s)`.
//!
//! Both families carry closed-form derivatives up to third order in `tau`,
//! from which pressure, temperature, sound speed, Grüneisen coefficient and the
//! genuine-nonlinearity measure follow through `de = -p dtau + T ds`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::FluidState;
use crate::shock::{solve_downstream, PlanarShock, ShockStrength};
use crate::stability::{classify, StabilityClass, StabilityRegime};

/// Equation of state, read from JSON as `{"type": "ideal" | "mie_gruneisen", ...}`.
///
/// * `ideal`: `e = e_ref (tau/tau_ref)^(1-gamma) exp((s - s_ref)/cv)`.
/// * `mie_gruneisen`: constant Grüneisen coefficient with a power-law cold curve,
///   `e = A (tau/tau_ref)^(-gruneisen) exp((s - s_ref)/cv) + K (tau/tau_ref)^(1-n)/(n-1)`
///   where `A = thermal_amplitude`, `K = cold_modulus`, `n = cold_exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum EosSpec {
    #[serde(rename = "ideal")]
    IdealPolytropic {
        gamma: f64,
        cv: f64,
        tau_ref: f64,
        s_ref: f64,
        e_ref: f64,
    },
    #[serde(rename = "mie_gruneisen")]
    ConstantGruneisen {
        gruneisen: f64,
        cv: f64,
        thermal_amplitude: f64,
        cold_modulus: f64,
        cold_exponent: f64,
        tau_ref: f64,
        s_ref: f64,
    },
}

/// The five Bethe-Weyl inequalities assumed on `e(tau, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BetheWeylCondition {
    /// `p > 0`
    PositivePressure,
    /// `T > 0`
    PositiveTemperature,
    /// `e_tt > 0`
    Convexity,
    /// `e_st < 0`
    PositiveGruneisen,
    /// `e_ttt < 0`
    GenuineNonlinearity,
}

impl BetheWeylCondition {
    pub const ALL: [BetheWeylCondition; 5] = [
        BetheWeylCondition::PositivePressure,
        BetheWeylCondition::PositiveTemperature,
        BetheWeylCondition::Convexity,
        BetheWeylCondition::PositiveGruneisen,
        BetheWeylCondition::GenuineNonlinearity,
    ];

    fn holds(self, d: &EnergyDerivatives) -> bool {
        match self {
            BetheWeylCondition::PositivePressure => -d.e_t > 0.0,
            BetheWeylCondition::PositiveTemperature => d.e_s > 0.0,
            BetheWeylCondition::Convexity => d.e_tt > 0.0,
            BetheWeylCondition::PositiveGruneisen => d.e_st < 0.0,
            BetheWeylCondition::GenuineNonlinearity => d.e_ttt < 0.0,
        }
    }
}

/// Partial derivatives of `e(tau, s)` at one point, without admissibility checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDerivatives {
    pub e: f64,
    pub e_t: f64,
    pub e_s: f64,
    pub e_tt: f64,
    pub e_st: f64,
    pub e_ttt: f64,
}

/// Thermodynamic quantities derived from `e(tau, s)` at an admissible point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub tau: f64,
    pub s: f64,
    pub e: f64,
    pub pressure: f64,
    pub temperature: f64,
    pub sound_speed: f64,
    pub gruneisen: f64,
    pub density: f64,
    /// `G = -(tau/2) e_ttt / e_tt`
    pub nonlinearity: f64,
    pub e_tt: f64,
    pub e_st: f64,
    pub e_ttt: f64,
}

impl ThermoPoint {
    /// `dp/dtau` at fixed entropy, i.e. `-c^2/tau^2`.
    pub fn dp_dtau(&self) -> f64 {
        -self.e_tt
    }

    /// `dp/ds` at fixed volume, i.e. `Gamma T / tau`.
    pub fn dp_ds(&self) -> f64 {
        -self.e_st
    }

    /// `dc/dtau` at fixed entropy, `(1 - G) c / tau`.
    pub fn dc_dtau(&self) -> f64 {
        (1.0 - self.nonlinearity) * self.sound_speed / self.tau
    }
}

impl EosSpec {
    /// The diatomic ideal gas used throughout the examples: `gamma = 1.4`, `cv = 1`,
    /// with the reference state chosen so that `p = 1` at `tau = 1, s = 0`.
    pub fn ideal_gas(gamma: f64) -> Self {
        EosSpec::IdealPolytropic {
            gamma,
            cv: 1.0,
            tau_ref: 1.0,
            s_ref: 0.0,
            e_ref: 1.0 / (gamma - 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be finite")))
            }
        };
        let positive = |name: &str, x: f64| {
            finite(name, x)?;
            if x > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be positive, got {x}")))
            }
        };
        match *self {
            EosSpec::IdealPolytropic {
                gamma,
                cv,
                tau_ref,
                s_ref,
                e_ref,
            } => {
                finite("gamma", gamma)?;
                if gamma <= 1.0 {
                    return Err(Error::domain(format!("gamma must exceed 1, got {gamma}")));
                }
                positive("cv", cv)?;
                positive("tau_ref", tau_ref)?;
                finite("s_ref", s_ref)?;
                positive("e_ref", e_ref)
            }
            EosSpec::ConstantGruneisen {
                gruneisen,
                cv,
                thermal_amplitude,
                cold_modulus,
                cold_exponent,
                tau_ref,
                s_ref,
            } => {
                positive("gruneisen", gruneisen)?;
                positive("cv", cv)?;
                finite("thermal_amplitude", thermal_amplitude)?;
                finite("cold_modulus", cold_modulus)?;
                if cold_modulus < 0.0 {
                    return Err(Error::domain("cold_modulus must be nonnegative"));
                }
                finite("cold_exponent", cold_exponent)?;
                if cold_exponent <= 1.0 {
                    return Err(Error::domain(format!(
                        "cold_exponent must exceed 1, got {cold_exponent}"
                    )));
                }
                positive("tau_ref", tau_ref)?;
                finite("s_ref", s_ref)
            }
        }
    }

    /// Closed-form derivatives of `e` at `(tau, s)`. Requires `tau > 0`.
    pub fn derivatives(&self, tau: f64, s: f64) -> Result<EnergyDerivatives> {
        if !(tau > 0.0) || !tau.is_finite() || !s.is_finite() {
            return Err(Error::domain(format!(
                "specific volume must be positive and finite (tau = {tau}, s = {s})"
            )));
        }
        let d = match *self {
            EosSpec::IdealPolytropic {
                gamma,
                cv,
                tau_ref,
                s_ref,
                e_ref,
            } => {
                let e = e_ref * (tau / tau_ref).powf(1.0 - gamma) * ((s - s_ref) / cv).exp();
                EnergyDerivatives {
                    e,
                    e_t: (1.0 - gamma) * e / tau,
                    e_s: e / cv,
                    e_tt: gamma * (gamma - 1.0) * e / (tau * tau),
                    e_st: (1.0 - gamma) * e / (tau * cv),
                    e_ttt: -(gamma + 1.0) * gamma * (gamma - 1.0) * e / (tau * tau * tau),
                }
            }
            EosSpec::ConstantGruneisen {
                gruneisen: g,
                cv,
                thermal_amplitude,
                cold_modulus: k,
                cold_exponent: n,
                tau_ref,
                s_ref,
            } => {
                let r = tau / tau_ref;
                let thermal = thermal_amplitude * r.powf(-g) * ((s - s_ref) / cv).exp();
                let cold = k * r.powf(1.0 - n) / (n - 1.0);
                let cold_t = -k * r.powf(-n) / tau_ref;
                let cold_tt = n * k * r.powf(-n - 1.0) / (tau_ref * tau_ref);
                let cold_ttt =
                    -n * (n + 1.0) * k * r.powf(-n - 2.0) / (tau_ref * tau_ref * tau_ref);
                EnergyDerivatives {
                    e: thermal + cold,
                    e_t: -g * thermal / tau + cold_t,
                    e_s: thermal / cv,
                    e_tt: g * (g + 1.0) * thermal / (tau * tau) + cold_tt,
                    e_st: -g * thermal / (tau * cv),
                    e_ttt: -g * (g + 1.0) * (g + 2.0) * thermal / (tau * tau * tau) + cold_ttt,
                }
            }
        };
        Ok(d)
    }

    pub fn energy(&self, tau: f64, s: f64) -> Result<f64> {
        Ok(self.derivatives(tau, s)?.e)
    }
}

/// Evaluates every derived quantity at `(tau, s)`, rejecting points where a
/// Bethe-Weyl inequality fails.
pub fn thermo_eval(eos: &EosSpec, tau: f64, s: f64) -> Result<ThermoPoint> {
    let d = eos.derivatives(tau, s)?;
    let violated: Vec<_> = BetheWeylCondition::ALL
        .into_iter()
        .filter(|c| !c.holds(&d))
        .collect();
    if !violated.is_empty() {
        return Err(Error::Inadmissible { tau, s, violated });
    }
    let temperature = d.e_s;
    Ok(ThermoPoint {
        tau,
        s,
        e: d.e,
        pressure: -d.e_t,
        temperature,
        sound_speed: tau * d.e_tt.sqrt(),
        gruneisen: -tau * d.e_st / temperature,
        density: 1.0 / tau,
        nonlinearity: -0.5 * tau * d.e_ttt / d.e_tt,
        e_tt: d.e_tt,
        e_st: d.e_st,
        e_ttt: d.e_ttt,
    })
}

/// Pass/fail map of one inequality over the grid, stored row-major with the
/// entropy index running fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionMap {
    pub condition: BetheWeylCondition,
    pub pass: Vec<bool>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheWeylReport {
    pub tau_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub conditions: Vec<ConditionMap>,
    pub passes: bool,
}

impl BetheWeylReport {
    pub fn condition(&self, which: BetheWeylCondition) -> &ConditionMap {
        self.conditions
            .iter()
            .find(|m| m.condition == which)
            .expect("every condition is reported")
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Checks all five Bethe-Weyl inequalities on a uniform `(tau, s)` grid.
pub fn bethe_weyl_report(
    eos: &EosSpec,
    tau_range: (f64, f64),
    s_range: (f64, f64),
    grid_counts: (usize, usize),
) -> Result<BetheWeylReport> {
    eos.validate()?;
    let (tau_lo, tau_hi) = tau_range;
    let (s_lo, s_hi) = s_range;
    if !(tau_lo > 0.0 && tau_hi > tau_lo && tau_hi.is_finite()) {
        return Err(Error::domain(format!(
            "tau range must satisfy 0 < lo < hi, got [{tau_lo}, {tau_hi}]"
        )));
    }
    if !(s_hi > s_lo && s_lo.is_finite() && s_hi.is_finite()) {
        return Err(Error::domain(format!(
            "entropy range must satisfy lo < hi, got [{s_lo}, {s_hi}]"
        )));
    }
    if grid_counts.0 < 2 || grid_counts.1 < 2 {
        return Err(Error::domain(
            "grid counts must be at least 2 in each direction",
        ));
    }
    let tau_grid = linspace(tau_lo, tau_hi, grid_counts.0);
    let s_grid = linspace(s_lo, s_hi, grid_counts.1);
    let mut conditions: Vec<ConditionMap> = BetheWeylCondition::ALL
        .into_iter()
        .map(|condition| ConditionMap {
            condition,
            pass: Vec::with_capacity(tau_grid.len() * s_grid.len()),
            failures: 0,
        })
        .collect();
    for &tau in &tau_grid {
        for &s in &s_grid {
            let d = eos.derivatives(tau, s)?;
            for map in conditions.iter_mut() {
                let ok = map.condition.holds(&d);
                map.pass.push(ok);
                if !ok {
                    map.failures += 1;
                }
            }
        }
    }
    let passes = conditions.iter().all(|m| m.failures == 0);
    Ok(BetheWeylReport {
        tau_grid,
        s_grid,
        conditions,
        passes,
    })
}

/// Box of upstream thermodynamic states scanned by [`find_weak_regime`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpstreamBox {
    pub tau: (f64, f64),
    pub s: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakCandidate {
    pub shock: PlanarShock,
    pub pressure_ratio: f64,
    pub class: StabilityClass,
    /// `min(lower, upper margin) / (M1^2 nu)`, positive in the weak regime.
    pub relative_margin: f64,
}

fn box_axis(lo: f64, hi: f64) -> Vec<f64> {
    if hi > lo {
        linspace(lo, hi, 3)
    } else {
        vec![lo]
    }
}

/// Scans upstream states in `upstream_box` and pressure ratios in
/// `pressure_ratio_range` (log-spaced, `samples` values) for a shock strictly
/// inside the weak stability regime, returning the candidate with the largest
/// relative margin.
pub fn find_weak_regime(
    eos: &EosSpec,
    upstream_box: UpstreamBox,
    pressure_ratio_range: (f64, f64),
    samples: usize,
) -> Result<WeakCandidate> {
    eos.validate()?;
    let (pr_lo, pr_hi) = pressure_ratio_range;
    if !(pr_lo > 1.0 && pr_hi >= pr_lo && pr_hi.is_finite()) {
        return Err(Error::domain(format!(
            "pressure ratio range must satisfy 1 < lo <= hi, got [{pr_lo}, {pr_hi}]"
        )));
    }
    let (tau_lo, tau_hi) = upstream_box.tau;
    let (s_lo, s_hi) = upstream_box.s;
    if !(tau_lo > 0.0 && tau_hi >= tau_lo && s_hi >= s_lo) {
        return Err(Error::domain("upstream box is empty"));
    }
    if samples == 0 {
        return Err(Error::domain("at least one strength sample is required"));
    }
    let ratios: Vec<f64> = if samples == 1 || pr_hi == pr_lo {
        vec![pr_lo]
    } else {
        let (a, b) = (pr_lo.ln(), pr_hi.ln());
        (0..samples)
            .map(|i| (a + (b - a) * i as f64 / (samples - 1) as f64).exp())
            .collect()
    };

    let mut best: Option<WeakCandidate> = None;
    for tau0 in box_axis(tau_lo, tau_hi) {
        for s0 in box_axis(s_lo, s_hi) {
            // Flow direction only; the strength fixes the normal velocity.
            let upstream = FluidState::new(tau0, 0.0, -1.0, s0);
            for &ratio in &ratios {
                let shock =
                    match solve_downstream(eos, &upstream, ShockStrength::PressureRatio(ratio)) {
                        Ok(shock) => shock,
                        Err(Error::Convergence { .. }) | Err(Error::Inadmissible { .. }) => {
                            continue
                        }
                        Err(e) => return Err(e),
                    };
                let ws = shock.stability_inputs()?;
                let class = classify(ws.m1, ws.gamma1, ws.nu)?;
                let x = ws.m1 * ws.m1 * ws.nu;
                let relative_margin = class.lower_margin.min(class.upper_margin) / x;
                if best
                    .as_ref()
                    .is_none_or(|b| relative_margin > b.relative_margin)
                {
                    best = Some(WeakCandidate {
                        shock,
                        pressure_ratio: ratio,
                        class,
                        relative_margin,
                    });
                }
            }
        }
    }
    match best {
        Some(c) if c.class.regime == StabilityRegime::Weak => Ok(c),
        Some(c) => Err(Error::NotFound {
            closest_margin: c.relative_margin,
        }),
        None => Err(Error::NotFound {
            closest_margin: f64::NEG_INFINITY,
        }),
    }
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

    fn fd_check(eos: &EosSpec, tau: f64, s: f64) {
        let h_t = 1e-5 * tau;
        let h_s = 1e-5;
        let e = |t: f64, s: f64| eos.energy(t, s).unwrap();
        let tp = thermo_eval(eos, tau, s).unwrap();
        let p_fd = -(e(tau + h_t, s) - e(tau - h_t, s)) / (2.0 * h_t);
        let t_fd = (e(tau, s + h_s) - e(tau, s - h_s)) / (2.0 * h_s);
        let ett_fd = (e(tau + h_t, s) - 2.0 * e(tau, s) + e(tau - h_t, s)) / (h_t * h_t);
        let (m_t, m_s) = (1e-4 * tau, 1e-4);
        let est_fd = (e(tau + m_t, s + m_s) - e(tau + m_t, s - m_s) - e(tau - m_t, s + m_s)
            + e(tau - m_t, s - m_s))
            / (4.0 * m_t * m_s);
        let ett = |t: f64| eos.derivatives(t, s).unwrap().e_tt;
        let ettt_fd = (ett(tau + h_t) - ett(tau - h_t)) / (2.0 * h_t);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(p_fd, tp.pressure) < 1e-6);
        assert!(rel(t_fd, tp.temperature) < 1e-6);
        assert!(rel(tau * tau * ett_fd, tp.sound_speed.powi(2)) < 1e-4);
        assert!(rel(-tau / tp.temperature * est_fd, tp.gruneisen) < 1e-5);
        assert!(rel(-0.5 * tau * ettt_fd / tp.e_tt, tp.nonlinearity) < 1e-5);
    }

    #[test]
    fn ideal_gas_identities() {
        let eos = EosSpec::ideal_gas(1.4);
        let tp = thermo_eval(&eos, 1.0, 0.0).unwrap();
        assert!((tp.pressure - 1.0).abs() < 1e-15);
        assert!((tp.e - 2.5).abs() < 1e-15);
        assert!((tp.sound_speed.powi(2) - 1.4).abs() < 1e-14);
        assert!((tp.gruneisen - 0.4).abs() < 1e-15);
        assert!((tp.nonlinearity - 1.2).abs() < 1e-14);
        fd_check(&eos, 1.0, 0.0);
        fd_check(&eos, 0.3, -0.7);
    }

    #[test]
    fn constant_gruneisen_is_constant() {
        let eos = mie();
        for &(tau, s) in &[(0.5, -1.0), (0.8, 0.0), (1.0, 0.3), (2.5, 1.0)] {
            let tp = thermo_eval(&eos, tau, s).unwrap();
            assert!((tp.gruneisen - 5.0).abs() < 1e-13);
            assert_eq!(tp.density * tp.tau, 1.0);
            fd_check(&eos, tau, s);
        }
    }

    #[test]
    fn rejects_nonpositive_volume() {
        assert!(matches!(
            thermo_eval(&mie(), 0.0, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            thermo_eval(&mie(), -1.0, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn negative_thermal_amplitude_is_reported() {
        let eos = EosSpec::ConstantGruneisen {
            gruneisen: 2.0,
            cv: 1.0,
            thermal_amplitude: -1.0,
            cold_modulus: 0.0,
            cold_exponent: 2.0,
            tau_ref: 1.0,
            s_ref: 0.0,
        };
        match thermo_eval(&eos, 1.0, 0.0) {
            Err(Error::Inadmissible { violated, .. }) => {
                assert!(violated.contains(&BetheWeylCondition::PositivePressure));
                assert!(violated.contains(&BetheWeylCondition::PositiveTemperature));
            }
            other => panic!("unexpected {other:?}"),
        }
        let report = bethe_weyl_report(&eos, (0.5, 2.0), (-1.0, 1.0), (4, 4)).unwrap();
        assert!(!report.passes);
        assert_eq!(
            report
                .condition(BetheWeylCondition::PositivePressure)
                .failures,
            16
        );
    }

    #[test]
    fn ideal_gas_report_passes() {
        let report =
            bethe_weyl_report(&EosSpec::ideal_gas(1.4), (0.1, 10.0), (-1.0, 1.0), (25, 9)).unwrap();
        assert!(report.passes);
        assert_eq!(report.conditions.len(), 5);
        assert!(report.conditions.iter().all(|m| m.pass.len() == 225));
    }

    #[test]
    fn degenerate_cold_curve_passes() {
        let eos = EosSpec::ConstantGruneisen {
            gruneisen: 5.0,
            cv: 1.0,
            thermal_amplitude: 1.0,
            cold_modulus: 0.0,
            cold_exponent: 2.0,
            tau_ref: 1.0,
            s_ref: 0.0,
        };
        let report = bethe_weyl_report(&eos, (0.2, 5.0), (-2.0, 2.0), (10, 10)).unwrap();
        assert!(report.passes);
    }

    #[test]
    fn report_rejects_single_point_grid() {
        let eos = EosSpec::ideal_gas(1.4);
        assert!(matches!(
            bethe_weyl_report(&eos, (0.5, 2.0), (0.0, 1.0), (1, 1)),
            Err(Error::Domain(_))
        ));
        assert!(bethe_weyl_report(&eos, (2.0, 0.5), (0.0, 1.0), (3, 3)).is_err());
    }

    #[test]
    fn json_rejects_unknown_keys() {
        let ok = serde_json::to_string(&EosSpec::ideal_gas(1.4)).unwrap();
        assert!(ok.contains(r#""type":"ideal""#));
        let eos: EosSpec = serde_json::from_str(&ok).unwrap();
        assert_eq!(eos, EosSpec::ideal_gas(1.4));
        let bad = r#"{"type":"ideal","gamma":1.4,"cv":1.0,"tau_ref":1.0,"s_ref":0.0,"e_ref":2.5,"extra":1}"#;
        assert!(serde_json::from_str::<EosSpec>(bad).is_err());
        let unknown = r#"{"type":"tabulated"}"#;
        assert!(serde_json::from_str::<EosSpec>(unknown).is_err());
    }

    #[test]
    fn weak_regime_search() {
        let ideal = find_weak_regime(
            &EosSpec::ideal_gas(1.4),
            UpstreamBox {
                tau: (0.5, 2.0),
                s: (-0.5, 0.5),
            },
            (1.5, 1e4),
            30,
        );
        match ideal {
            Err(Error::NotFound { closest_margin }) => assert!(closest_margin < 0.0),
            other => panic!("ideal gas cannot be weakly stable: {other:?}"),
        }
        let found = find_weak_regime(
            &mie(),
            UpstreamBox {
                tau: (1.0, 1.0),
                s: (0.0, 0.0),
            },
            (1.5, 50.0),
            40,
        )
        .unwrap();
        assert_eq!(found.class.regime, StabilityRegime::Weak);
        let ws = found.shock.stability_inputs().unwrap();
        let x = ws.m1 * ws.m1 * ws.nu;
        assert!(x > 1.0 / 6.0 && x < (1.0 + ws.m1) / 5.0);
        assert!(find_weak_regime(
            &mie(),
            UpstreamBox {
                tau: (1.0, 1.0),
                s: (0.0, 0.0)
            },
            (3.0, 2.0),
            10
        )
        .is_err());
    }
}
