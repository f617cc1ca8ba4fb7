use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use shockstab::machstem::{FamilyFailure, FamilyResult, MachStemProblem, ValidationTolerances};
use shockstab::stability::{
    c_star, classify, proposition1_check, scan_real_roots, solve_v, CStar, Proposition1Report,
    RootScan, StabilityClass, VSolution,
};
use shockstab::{
    galilean_shift, lopatinskii, solve_downstream, thermo_eval, weak_reference_shock,
    AsymptoticReport, EosSpec, FluidState, FrequencyPoint, MachStemPattern, PlanarShock,
    ShockStrength, StabilityRegime,
};

use crate::render::{render, write_pattern_csv, Report};
use crate::{
    Cli, Command, LopatinskiiCommand, MachstemCommand, ShockCommand, Spacing, StabilityCommand,
    StabilityInputs, ToleranceArgs,
};

pub const GENERATOR: &str = concat!("shockstab ", env!("CARGO_PKG_VERSION"));

/// Bad input or configuration (exit code 4).
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    use shockstab::Error as E;
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<E>() {
            return match err {
                E::Validation { .. } => 2,
                E::Convergence { .. }
                | E::SingularMatrix
                | E::BranchJump { .. }
                | E::SeedTooFar { .. }
                | E::NotFound { .. } => 3,
                _ => 4,
            };
        }
    }
    4
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| input_error(format!("cannot parse {}: {e}", path.display())))
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub m1: f64,
    pub gamma1: f64,
    pub nu: f64,
    pub c1: f64,
    pub class: StabilityClass,
    pub v: Option<VSolution>,
    pub c_star: Option<CStar>,
    pub gap: Option<f64>,
    pub passes: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub min_gap: f64,
    pub median_gap: f64,
    pub max_gap: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub generator: String,
    pub seed: u64,
    pub c1: f64,
    pub samples: Vec<Proposition1Report>,
    pub summary: SweepSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub z: f64,
    pub re: f64,
    pub im: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub u_bar: f64,
    pub eta: f64,
    pub z_interval: (f64, f64),
    pub grid: usize,
    pub scan: RootScan,
    #[serde(skip)]
    pub samples: Vec<ScanPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub generator: String,
    pub reference: PlanarShock,
    pub tolerances: ValidationTolerances,
    pub patterns: Vec<MachStemPattern>,
    pub failure: Option<FamilyFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub eps: f64,
    pub valid: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub patterns: Vec<VerifyEntry>,
    pub all_valid: bool,
}

pub fn run(cli: &Cli) -> Result<u8> {
    let (report, code) = match &cli.command {
        Command::Thermo { eos, tau, s } => {
            let eos: EosSpec = read_json(eos)?;
            eos.validate()?;
            (Report::Thermo(thermo_eval(&eos, *tau, *s)?), 0)
        }
        Command::Shock(ShockCommand::Solve(args)) => {
            let eos: EosSpec = read_json(&args.eos)?;
            eos.validate()?;
            let st = &args.strength;
            let strength = if let Some(t) = st.tau1 {
                ShockStrength::DownstreamVolume(t)
            } else if let Some(j) = st.mass_flux {
                ShockStrength::MassFlux(j)
            } else if let Some(r) = st.pressure_ratio {
                ShockStrength::PressureRatio(r)
            } else {
                ShockStrength::UpstreamVelocity
            };
            let up = FluidState::new(args.tau0, args.u, args.v0, args.s0);
            (Report::Shock(solve_downstream(&eos, &up, strength)?), 0)
        }
        Command::Stability(cmd) => stability(cmd)?,
        Command::Lopatinskii(LopatinskiiCommand::Scan {
            shock,
            u_bar,
            critical,
            eta,
            z_min,
            z_max,
            grid,
        }) => {
            let mut sh: PlanarShock = read_json(shock)?;
            sh.validate(1e-10)?;
            if *critical {
                sh = weak_reference_shock(&sh)?;
            } else if let Some(u) = u_bar {
                sh = galilean_shift(&sh, *u);
            }
            if !(z_max > z_min) || *grid < 2 {
                return Err(input_error("need z_min < z_max and at least 2 grid points"));
            }
            let scan = scan_real_roots(&sh, *eta, (*z_min, *z_max), *grid)?;
            let samples = (0..*grid)
                .filter_map(|i| {
                    let z = z_min + (z_max - z_min) * i as f64 / (*grid - 1) as f64;
                    lopatinskii(&sh, &FrequencyPoint::real(z, *eta))
                        .ok()
                        .map(|v| ScanPoint {
                            z,
                            re: v.value.re,
                            im: v.value.im,
                            normalized: v.normalized,
                        })
                })
                .collect();
            (
                Report::Scan(ScanReport {
                    u_bar: sh.u_bar,
                    eta: *eta,
                    z_interval: (*z_min, *z_max),
                    grid: *grid,
                    scan,
                    samples,
                }),
                0,
            )
        }
        Command::Machstem(MachstemCommand::Build {
            shock,
            eps_grid,
            spacing,
            csv,
            tol,
        }) => {
            let tol = tolerances(tol)?;
            let grid = parse_grid(eps_grid, *spacing)?;
            let sh: PlanarShock = read_json(shock)?;
            sh.validate(1e-10)?;
            let problem = MachStemProblem::new(weak_reference_shock(&sh)?)?;
            let family = build_family(&problem, &grid, tol)?;
            let code = match &family.failure {
                None => 0,
                Some(f) if f.pattern.is_some() => 2,
                Some(_) => 3,
            };
            if let Some(f) = &family.failure {
                eprintln!("family stopped at eps = {}: {}", f.eps, f.message);
            }
            let file = FamilyFile {
                generator: GENERATOR.into(),
                reference: problem.shock,
                tolerances: tol,
                patterns: family.patterns,
                failure: family.failure,
            };
            if let Some(path) = csv {
                let text = write_pattern_csv(&file)?;
                fs::write(path, text)
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            (Report::Family(file), code)
        }
        Command::Machstem(MachstemCommand::Verify { family, tol }) => {
            let tol = tolerances(tol)?;
            let file: FamilyFile = read_json(family)?;
            let problem = MachStemProblem::new(file.reference)?;
            let mut entries = Vec::new();
            for p in &file.patterns {
                let fresh = problem.verify(p, tol)?;
                entries.push(VerifyEntry {
                    eps: p.eps,
                    valid: fresh.failures.is_empty(),
                    failures: fresh.failures,
                });
            }
            let all_valid = entries.iter().all(|e| e.valid);
            for e in entries.iter().filter(|e| !e.valid) {
                eprintln!("eps = {}: {}", e.eps, e.failures.join("; "));
            }
            (
                Report::Verify(VerifyReport {
                    patterns: entries,
                    all_valid,
                }),
                if all_valid { 0 } else { 2 },
            )
        }
        Command::Asymptotics { shock } => {
            let sh: PlanarShock = read_json(shock)?;
            sh.validate(1e-10)?;
            let problem = MachStemProblem::new(weak_reference_shock(&sh)?)?;
            let report: AsymptoticReport = problem.asymptotic_checks()?;
            (Report::Asymptotics(report), 0)
        }
    };
    emit(cli, &render(&report, cli.format)?)?;
    Ok(code)
}

fn tolerances(t: &ToleranceArgs) -> Result<ValidationTolerances> {
    let d = ValidationTolerances::default();
    let pick = |v: Option<f64>, default: f64, name: &str| -> Result<f64> {
        match v {
            None => Ok(default),
            Some(x) if x > 0.0 && x.is_finite() => Ok(x),
            Some(x) => Err(input_error(format!("{name} must be positive, got {x}"))),
        }
    };
    Ok(ValidationTolerances {
        rh: pick(t.rh_tol, d.rh, "rh-tol")?,
        pressure: pick(t.pressure_tol, d.pressure, "pressure-tol")?,
        delta: pick(t.delta_tol, d.delta, "delta-tol")?,
        contact: pick(t.contact_tol, d.contact, "contact-tol")?,
    })
}

/// Parses `a:b:n`.
pub fn parse_grid(spec: &str, spacing: Spacing) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(input_error(format!("eps grid must be a:b:n, got {spec:?}")));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| input_error(format!("bad number {s:?} in eps grid")))
    };
    let (a, b) = (num(parts[0])?, num(parts[1])?);
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| input_error(format!("bad count {:?} in eps grid", parts[2])))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(input_error("eps grid must be finite and nonempty"));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let t = |i: usize| i as f64 / (n - 1) as f64;
    let grid: Vec<f64> = match spacing {
        Spacing::Linear => (0..n).map(|i| a + (b - a) * t(i)).collect(),
        Spacing::Log => {
            if !(a * b > 0.0) {
                return Err(input_error("log spacing needs endpoints of the same sign"));
            }
            let (la, lb) = (a.abs().ln(), b.abs().ln());
            (0..n)
                .map(|i| a.signum() * (la + (lb - la) * t(i)).exp())
                .collect()
        }
    };
    if grid.contains(&0.0) {
        return Err(input_error("eps grid must not contain 0"));
    }
    Ok(grid)
}

fn build_family(
    problem: &MachStemProblem,
    grid: &[f64],
    tol: ValidationTolerances,
) -> Result<FamilyResult> {
    if grid.iter().all(|e| *e > 0.0) && grid.windows(2).all(|w| w[1] > w[0]) {
        return Ok(problem.continue_family_with(grid, tol)?);
    }
    // Independent solves, each seeded with the reference tangential velocity.
    let mut patterns = Vec::new();
    for &eps in grid {
        match problem.solve_pattern_with(eps, problem.shock.u_bar, tol) {
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

fn stability_inputs(inputs: &StabilityInputs) -> Result<(f64, f64, f64, f64)> {
    if let Some(path) = &inputs.shock {
        let sh: PlanarShock = read_json(path)?;
        sh.validate(1e-10)?;
        let p = sh.stability_inputs()?;
        return Ok((p.m1, p.gamma1, p.nu, p.c1));
    }
    match (inputs.m1, inputs.gamma1, inputs.nu) {
        (Some(m1), Some(g), Some(nu)) => Ok((m1, g, nu, inputs.c1)),
        _ => bail!(input_error("give --m1, --gamma1 and --nu, or --shock")),
    }
}

fn stability(cmd: &StabilityCommand) -> Result<(Report, u8)> {
    let single =
        |inputs: &StabilityInputs, want_v: bool, want_c: bool| -> Result<StabilityReport> {
            let (m1, gamma1, nu, c1) = stability_inputs(inputs)?;
            let class = classify(m1, gamma1, nu)?;
            let v = if want_v {
                Some(solve_v(m1, gamma1, nu, c1)?)
            } else {
                None
            };
            let cs = if want_c {
                Some(c_star(m1, gamma1, nu, c1)?)
            } else {
                None
            };
            let gap = match (v, cs) {
                (Some(v), Some(c)) => Some((c.c_star - v.v).abs() / v.v),
                _ => None,
            };
            Ok(StabilityReport {
                m1,
                gamma1,
                nu,
                c1,
                class,
                v,
                c_star: cs,
                gap,
                passes: gap.map(|g| g < 1e-10),
            })
        };
    Ok(match cmd {
        StabilityCommand::Classify(i) => (Report::Stability(single(i, false, false)?), 0),
        StabilityCommand::V(i) => (Report::Stability(single(i, true, false)?), 0),
        StabilityCommand::Cstar(i) => (Report::Stability(single(i, false, true)?), 0),
        StabilityCommand::Prop1 {
            inputs,
            samples: None,
            ..
        } => {
            let r = single(inputs, true, true)?;
            let code = if r.passes == Some(true) { 0 } else { 2 };
            (Report::Stability(r), code)
        }
        StabilityCommand::Prop1 {
            inputs,
            samples: Some(n),
            seed,
        } => {
            let r = sweep(*n, *seed, inputs.c1)?;
            let code = if r.summary.failures == 0 { 0 } else { 2 };
            (Report::Sweep(r), code)
        }
    })
}

fn worker_count() -> Result<Option<usize>> {
    match std::env::var("MACHSTEM_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(input_error(format!(
                "MACHSTEM_THREADS must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Weak-regime triples drawn uniformly in `M1`, `Gamma1` and the position of
/// `M1^2 nu` between the two regime boundaries.
pub fn weak_triples(n: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let m1 = rng.gen_range(0.05..0.95);
            let g = rng.gen_range(0.2..10.0);
            let t: f64 = rng.gen_range(1e-6..1.0 - 1e-6);
            let lo = 1.0 / (1.0 + g);
            let hi = (1.0 + m1) / g;
            (m1, g, (lo + t * (hi - lo)) / (m1 * m1))
        })
        .collect()
}

fn sweep(n: usize, seed: u64, c1: f64) -> Result<SweepReport> {
    if n == 0 {
        return Err(input_error("--samples must be positive"));
    }
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(input_error("--c1 must be positive"));
    }
    let triples = weak_triples(n, seed);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = worker_count()? {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().context("cannot start the worker pool")?;
    let results: Vec<Proposition1Report> = pool.install(|| {
        triples
            .par_iter()
            .map(|&(m1, g, nu)| proposition1_check(m1, g, nu, c1))
            .collect::<shockstab::Result<_>>()
    })?;
    let mut gaps: Vec<f64> = results.iter().map(|r| r.gap).collect();
    gaps.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        gaps[n / 2]
    } else {
        0.5 * (gaps[n / 2 - 1] + gaps[n / 2])
    };
    Ok(SweepReport {
        generator: GENERATOR.into(),
        seed,
        c1,
        summary: SweepSummary {
            min_gap: gaps[0],
            median_gap: median,
            max_gap: gaps[n - 1],
            failures: results.iter().filter(|r| !r.passes).count(),
        },
        samples: results,
    })
}

pub fn regime_label(r: StabilityRegime) -> &'static str {
    match r {
        StabilityRegime::Uniform => "uniform",
        StabilityRegime::Weak => "weak",
        StabilityRegime::Violent => "violent",
        StabilityRegime::LimitGlancing => "limit (glancing)",
        StabilityRegime::LimitOneDimensional => "limit (one-dimensional)",
    }
}
