use std::fmt::Write as _;

use anyhow::Result;
use serde::Serialize;

use shockstab::{AsymptoticReport, PlanarShock, ThermoPoint};

use crate::commands::{
    regime_label, FamilyFile, ScanReport, StabilityReport, SweepReport, VerifyReport,
};
use crate::Format;

pub enum Report {
    Thermo(ThermoPoint),
    Shock(PlanarShock),
    Stability(StabilityReport),
    Sweep(SweepReport),
    Scan(ScanReport),
    Family(FamilyFile),
    Verify(VerifyReport),
    Asymptotics(AsymptoticReport),
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => match report {
            Report::Thermo(t) => json(t),
            Report::Shock(s) => json(s),
            Report::Stability(s) => json(s),
            Report::Sweep(s) => json(s),
            Report::Scan(s) => json(s),
            Report::Family(f) => json(f),
            Report::Verify(v) => json(v),
            Report::Asymptotics(a) => json(a),
        },
        Format::Csv => csv_of(report),
        Format::Text => Ok(text_of(report)),
    }
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn key_values(pairs: Vec<(&str, String)>) -> Result<String> {
    csv_string(
        &["key", "value"],
        pairs
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), v])
            .collect(),
    )
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_pattern_csv(f: &FamilyFile) -> Result<String> {
    let rows = f
        .patterns
        .iter()
        .map(|p| {
            let d = &p.diagnostics;
            [
                p.eps,
                p.theta,
                p.phi,
                p.psi,
                p.lambda,
                d.pressures[0],
                d.pressures[1],
                d.pressures[2],
                d.pressures[3],
            ]
            .iter()
            .map(|v| v.to_string())
            .collect()
        })
        .collect();
    csv_string(
        &[
            "eps", "theta", "phi", "psi", "lambda", "p0", "p1", "p2", "p3",
        ],
        rows,
    )
}

fn csv_of(report: &Report) -> Result<String> {
    match report {
        Report::Thermo(t) => key_values(vec![
            ("tau", t.tau.to_string()),
            ("s", t.s.to_string()),
            ("e", t.e.to_string()),
            ("pressure", t.pressure.to_string()),
            ("temperature", t.temperature.to_string()),
            ("sound_speed", t.sound_speed.to_string()),
            ("gruneisen", t.gruneisen.to_string()),
            ("nonlinearity", t.nonlinearity.to_string()),
        ]),
        Report::Shock(s) => {
            let states = [("upstream", s.upstream), ("downstream", s.downstream)];
            csv_string(
                &["side", "tau", "u", "v", "s"],
                states
                    .iter()
                    .map(|(n, u)| {
                        vec![
                            n.to_string(),
                            u.tau.to_string(),
                            u.u.to_string(),
                            u.v.to_string(),
                            u.s.to_string(),
                        ]
                    })
                    .collect(),
            )
        }
        Report::Stability(s) => key_values(vec![
            ("m1", s.m1.to_string()),
            ("gamma1", s.gamma1.to_string()),
            ("nu", s.nu.to_string()),
            ("c1", s.c1.to_string()),
            ("class", regime_label(s.class.regime).to_string()),
            ("lower_margin", s.class.lower_margin.to_string()),
            ("upper_margin", s.class.upper_margin.to_string()),
            ("v", opt(s.v.map(|v| v.v))),
            ("c_star", opt(s.c_star.map(|c| c.c_star))),
            ("gap", opt(s.gap)),
        ]),
        Report::Sweep(s) => csv_string(
            &["m1", "gamma1", "nu", "c1", "v", "c_star", "gap"],
            s.samples
                .iter()
                .map(|r| {
                    [r.m1, r.gamma1, r.nu, r.c1, r.v, r.c_star, r.gap]
                        .iter()
                        .map(|v| v.to_string())
                        .collect()
                })
                .collect(),
        ),
        Report::Scan(s) => csv_string(
            &["z", "re", "im", "normalized"],
            s.samples
                .iter()
                .map(|p| {
                    [p.z, p.re, p.im, p.normalized]
                        .iter()
                        .map(|v| v.to_string())
                        .collect()
                })
                .collect(),
        ),
        Report::Family(f) => write_pattern_csv(f),
        Report::Verify(v) => csv_string(
            &["eps", "valid", "failures"],
            v.patterns
                .iter()
                .map(|e| {
                    vec![
                        e.eps.to_string(),
                        e.valid.to_string(),
                        e.failures.join("; "),
                    ]
                })
                .collect(),
        ),
        Report::Asymptotics(a) => csv_string(
            &["quantity", "closed_form", "finite_difference", "gap"],
            asymptotic_rows(a)
                .into_iter()
                .map(|(n, c, f, g)| vec![n.to_string(), c.to_string(), opt(f), opt(g)])
                .collect(),
        ),
    }
}

fn asymptotic_rows(a: &AsymptoticReport) -> Vec<(&'static str, f64, Option<f64>, Option<f64>)> {
    vec![
        (
            "lambda/eps",
            a.alpha_minus,
            a.lambda_over_eps_limit,
            a.lambda_gap,
        ),
        (
            "Psi'(0)",
            a.psi_prime_0_closed.unwrap_or(f64::NAN),
            a.psi_prime_0_fd,
            a.psi_prime_gap,
        ),
        (
            "d2 delta / deps du",
            a.d2_delta_closed,
            a.d2_delta_fd,
            a.d2_delta_gap,
        ),
        (
            "S3 upstream Lax margin'",
            a.lax_upstream_derivative_closed,
            a.lax_upstream_derivative_fd,
            a.lax_upstream_gap,
        ),
        (
            "S3 downstream Lax margin'",
            a.lax_downstream_derivative_closed,
            a.lax_downstream_derivative_fd,
            a.lax_downstream_gap,
        ),
    ]
}

fn badge(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn text_of(report: &Report) -> String {
    let mut o = String::new();
    match report {
        Report::Thermo(t) => {
            for (k, v) in [
                ("tau", t.tau),
                ("s", t.s),
                ("e", t.e),
                ("pressure", t.pressure),
                ("temperature", t.temperature),
                ("sound speed", t.sound_speed),
                ("Gruneisen", t.gruneisen),
                ("nonlinearity", t.nonlinearity),
            ] {
                let _ = writeln!(o, "{k:<14} {v:>22.15e}");
            }
        }
        Report::Shock(s) => {
            let _ = writeln!(
                o,
                "{:<11} {:>22} {:>22} {:>22} {:>22}",
                "", "tau", "u", "v", "s"
            );
            for (n, u) in [("upstream", s.upstream), ("downstream", s.downstream)] {
                let _ = writeln!(
                    o,
                    "{n:<11} {:>22.15e} {:>22.15e} {:>22.15e} {:>22.15e}",
                    u.tau, u.u, u.v, u.s
                );
            }
            let _ = writeln!(
                o,
                "j = {:.15e}  M1 = {:.15e}  nu = {:.15e}",
                s.j, s.m1, s.nu
            );
        }
        Report::Stability(s) => {
            let _ = writeln!(
                o,
                "M1 = {}  Gamma1 = {}  nu = {}  c1 = {}",
                s.m1, s.gamma1, s.nu, s.c1
            );
            let _ = writeln!(o, "{:<14} {}", "class", regime_label(s.class.regime));
            let _ = writeln!(o, "{:<14} {:>22.15e}", "lower margin", s.class.lower_margin);
            let _ = writeln!(o, "{:<14} {:>22.15e}", "upper margin", s.class.upper_margin);
            if let Some(v) = s.v {
                let _ = writeln!(o, "{:<14} {:>22.15e}", "V", v.v);
            }
            if let Some(c) = s.c_star {
                let _ = writeln!(o, "{:<14} {:>22.15e}", "c_star", c.c_star);
            }
            if let (Some(g), Some(p)) = (s.gap, s.passes) {
                let _ = writeln!(o, "{:<14} {:>22.3e}  {}", "gap", g, badge(p));
            }
        }
        Report::Sweep(s) => {
            let _ = writeln!(o, "{} samples, seed {}", s.samples.len(), s.seed);
            let _ = writeln!(
                o,
                "{:>12} {:>12} {:>12} {:>9}",
                "min gap", "median gap", "max gap", "failures"
            );
            let m = &s.summary;
            let _ = writeln!(
                o,
                "{:>12.3e} {:>12.3e} {:>12.3e} {:>9}  {}",
                m.min_gap,
                m.median_gap,
                m.max_gap,
                m.failures,
                badge(m.failures == 0)
            );
        }
        Report::Scan(s) => {
            let _ = writeln!(
                o,
                "u_bar = {}  eta = {}  z in [{}, {}]",
                s.u_bar, s.eta, s.z_interval.0, s.z_interval.1
            );
            let mut roots = s.scan.roots.clone();
            roots.sort_by(f64::total_cmp);
            if roots.is_empty() {
                let _ = writeln!(
                    o,
                    "no real roots; min normalized |Delta| = {:.3e}",
                    s.scan.min_normalized
                );
            }
            for r in roots {
                let _ = writeln!(o, "root {r:>24.15e}");
            }
        }
        Report::Family(f) => {
            if f.patterns.is_empty() {
                let _ = writeln!(o, "no patterns");
            } else {
                let _ = writeln!(
                    o,
                    "{:>10} {:>18} {:>18} {:>18} {:>14} {:>10}",
                    "eps", "Theta", "Phi", "Psi", "lambda", ""
                );
                for p in &f.patterns {
                    let _ = writeln!(
                        o,
                        "{:>10.3e} {:>18.15} {:>18.15} {:>18.15} {:>14.6e} {:>10}",
                        p.eps,
                        p.theta,
                        p.phi,
                        p.psi,
                        p.lambda,
                        badge(p.is_valid())
                    );
                }
            }
            if let Some(fail) = &f.failure {
                let _ = writeln!(o, "stopped at eps = {}: {}", fail.eps, fail.message);
            }
        }
        Report::Verify(v) => {
            if v.patterns.is_empty() {
                let _ = writeln!(o, "no patterns");
            }
            for e in &v.patterns {
                let _ = writeln!(
                    o,
                    "{:>10.3e} {}  {}",
                    e.eps,
                    badge(e.valid),
                    e.failures.join("; ")
                );
            }
        }
        Report::Asymptotics(a) => {
            let _ = writeln!(
                o,
                "alpha_0 = {:.15e}  alpha_- = {:.15e}  mu_0 = {:.15e}  G1 = {:.15e}",
                a.alpha0, a.alpha_minus, a.mu0, a.g1
            );
            let _ = writeln!(
                o,
                "Omega_0 = {:.15e}  Omega_1 = {:.15e}",
                a.omega0, a.omega1
            );
            let _ = writeln!(
                o,
                "{:<26} {:>22} {:>22} {:>10}",
                "quantity", "closed form", "finite difference", "gap"
            );
            for (n, c, f, g) in asymptotic_rows(a) {
                let f = f
                    .map(|v| format!("{v:.15e}"))
                    .unwrap_or_else(|| "n/a".into());
                let g = g
                    .map(|v| format!("{v:.2e}"))
                    .unwrap_or_else(|| "n/a".into());
                let _ = writeln!(o, "{n:<26} {c:>22.15e} {f:>22} {g:>10}");
            }
            for n in &a.notes {
                let _ = writeln!(o, "note: {n}");
            }
        }
    }
    o
}
