//! Uniform / weak / violent classification of planar shocks, the critical
//! tangential velocity `V` and the alternative construction `c_star`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real_quadratic_roots, winding_number};
use crate::modes::{FrequencyPoint, LopatinskiiProblem};
use crate::shock::PlanarShock;

/// Relative width of the band around each regime boundary reported as a limit case.
pub const LIMIT_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityRegime {
    Uniform,
    Weak,
    Violent,
    /// `M1^2 nu = 1/(1 + Gamma1)`: `V` reaches the glancing value.
    LimitGlancing,
    /// `M1^2 nu = (1 + M1)/Gamma1`: the determinant vanishes at `(z, eta) = (1, 0)`.
    LimitOneDimensional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityClass {
    pub regime: StabilityRegime,
    /// `M1^2 nu - 1/(1 + Gamma1)`
    pub lower_margin: f64,
    /// `(1 + M1)/Gamma1 - M1^2 nu`
    pub upper_margin: f64,
}

fn check_inputs(m1: f64, gamma1: f64, nu: f64) -> Result<()> {
    if !(m1 > 0.0 && m1 < 1.0) {
        return Err(Error::domain(format!("M1 must lie in (0, 1), got {m1}")));
    }
    if !(gamma1 > 0.0 && gamma1.is_finite()) {
        return Err(Error::domain(format!(
            "Gamma1 must be positive, got {gamma1}"
        )));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::domain(format!("nu must be positive, got {nu}")));
    }
    Ok(())
}

pub fn classify(m1: f64, gamma1: f64, nu: f64) -> Result<StabilityClass> {
    check_inputs(m1, gamma1, nu)?;
    let x = m1 * m1 * nu;
    let lo = 1.0 / (1.0 + gamma1);
    let hi = (1.0 + m1) / gamma1;
    let lower_margin = x - lo;
    let upper_margin = hi - x;
    let regime = if lower_margin.abs() <= LIMIT_BAND * lo {
        StabilityRegime::LimitGlancing
    } else if upper_margin.abs() <= LIMIT_BAND * hi {
        StabilityRegime::LimitOneDimensional
    } else if lower_margin < 0.0 {
        StabilityRegime::Uniform
    } else if upper_margin < 0.0 {
        StabilityRegime::Violent
    } else {
        StabilityRegime::Weak
    };
    Ok(StabilityClass {
        regime,
        lower_margin,
        upper_margin,
    })
}

fn require_weak(m1: f64, gamma1: f64, nu: f64, c1: f64) -> Result<()> {
    let class = classify(m1, gamma1, nu)?;
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(Error::domain(format!("c1 must be positive, got {c1}")));
    }
    if class.regime != StabilityRegime::Weak {
        return Err(Error::RegimeMismatch(class.regime));
    }
    Ok(())
}

/// Root `V` of the quartic together with the checks of the characterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VSolution {
    pub v: f64,
    /// Roots `X = V^2` of the quadratic in `X` (equal when the leading coefficient vanishes).
    pub x_roots: (f64, f64),
    /// `V^2 - (c1^2 - v1^2)`, condition (i).
    pub glancing_margin: f64,
    /// `v1^2 (1 - M1^2)(1 + nu) - (1 + M1^2 - M1^2 Gamma1 nu) V^2`, condition (ii).
    pub inequality_margin: f64,
    /// Residual of the squared relation relative to the size of its terms, condition (iii).
    pub relation_residual: f64,
    pub linear_fallback: bool,
}

/// `(lhs, rhs, scale)` of the squared relation characterizing `V`; `scale`
/// bounds the magnitude of the terms on either side.
fn squared_relation(m1: f64, gamma1: f64, nu: f64, c1: f64, x: f64) -> (f64, f64, f64) {
    let v1sq = m1 * m1 * c1 * c1;
    let m2 = m1 * m1;
    let k = 2.0 - m2 * gamma1 * nu;
    let a = (k - 1.0 + m2) * x;
    let b = v1sq * (1.0 - m2) * (1.0 + nu);
    let lhs = (a - b).powi(2);
    let rhs = k * k * x * (m2 * x - v1sq * (1.0 - m2));
    let scale = (a.abs() + b).powi(2) + k * k * x.abs() * (m2 * x.abs() + v1sq * (1.0 - m2));
    (lhs, rhs, scale)
}

pub fn solve_v(m1: f64, gamma1: f64, nu: f64, c1: f64) -> Result<VSolution> {
    require_weak(m1, gamma1, nu, c1)?;
    let m2 = m1 * m1;
    let v1sq = m2 * c1 * c1;
    let k = 2.0 - m2 * gamma1 * nu;
    let a = (k - 1.0).powi(2) - m2;
    let b = ((k - 1.0).powi(2) + 1.0 - 2.0 * m2 - 2.0 * nu * (k - 1.0 + m2)) * v1sq;
    let c = v1sq * v1sq * (1.0 - m2) * (1.0 + nu).powi(2);
    let degenerate = a.abs() <= 1e-12 * ((k - 1.0).powi(2) + m2);
    let roots = if degenerate {
        if b == 0.0 {
            return Err(Error::DegenerateQuartic);
        }
        let r = -c / b;
        (r, r)
    } else {
        real_quadratic_roots(a, b, c).ok_or(Error::NoAdmissibleRoot)?
    };

    let glancing = c1 * c1 - v1sq;
    let ii_rhs = v1sq * (1.0 - m2) * (1.0 + nu);
    let ii_coef = 1.0 + m2 - m2 * gamma1 * nu;
    let mut best: Option<VSolution> = None;
    for x in [roots.0, roots.1] {
        if !(x > 0.0) {
            continue;
        }
        let glancing_margin = x - glancing;
        let inequality_margin = ii_rhs - ii_coef * x;
        let (lhs, rhs, scale) = squared_relation(m1, gamma1, nu, c1, x);
        let relation_residual = (lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE);
        // (i) is tested with a round-off band: near the glancing limit V^2
        // approaches c1^2 - v1^2 quadratically in the regime margin.
        let ok = glancing_margin > -1e-12 * glancing
            && inequality_margin > 0.0
            && relation_residual < 1e-8;
        if ok && best.is_none_or(|b| b.relation_residual > relation_residual) {
            best = Some(VSolution {
                v: x.sqrt(),
                x_roots: roots,
                glancing_margin,
                inequality_margin,
                relation_residual,
                linear_fallback: degenerate,
            });
        }
    }
    match best {
        Some(s) => Ok(s),
        None if degenerate => Err(Error::DegenerateQuartic),
        None => Err(Error::NoAdmissibleRoot),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CStar {
    pub c_star: f64,
    pub phi: f64,
    pub beta: f64,
}

pub fn c_star(m1: f64, gamma1: f64, nu: f64, c1: f64) -> Result<CStar> {
    require_weak(m1, gamma1, nu, c1)?;
    let m2 = m1 * m1;
    let (r1, r2) = real_quadratic_roots(1.0, m1 * gamma1, -1.0 - gamma1 + (1.0 - m2) / (nu * m2))
        .ok_or(Error::NoRootInInterval)?;
    let phi = [r2, r1]
        .into_iter()
        .find(|&r| r > m1 && r < 1.0)
        .ok_or(Error::NoRootInInterval)?;
    let beta = (2.0 * m1 - (1.0 + m2) * phi) / (1.0 + m2 - 2.0 * m1 * phi);
    let c_star = c1 * (1.0 - m1 * beta) / (1.0 - beta * beta).sqrt();
    Ok(CStar { c_star, phi, beta })
}

/// All dimensionless quantities of the weak-regime analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakStabilityWorksheet {
    pub m1: f64,
    pub gamma1: f64,
    pub nu: f64,
    pub c1: f64,
    pub v1: f64,
    pub k: f64,
    pub phi: f64,
    pub y: f64,
    pub beta: f64,
    /// `u_bar / c1` for `u_bar = -V`.
    pub upsilon: f64,
    pub v: f64,
    pub c_star: f64,
    /// `Q(y)` with `Q(Y) = Y^2 + M1^2 Gamma1 Y - M1^2 (1 + Gamma1) + (1 - M1^2)/nu`.
    pub q_of_y: f64,
    /// `y` minus the lower bound `(M1^2 - 1 + nu M1^2 (2 + Gamma1)) / (nu (1 + M1^2 + M1^2 Gamma1))`.
    pub y_bound_margin: f64,
    /// `upsilon + (1 - M1 beta)/sqrt(1 - beta^2)`.
    pub upsilon_identity_gap: f64,
}

pub fn q_polynomial(m1: f64, gamma1: f64, nu: f64, y: f64) -> f64 {
    let m2 = m1 * m1;
    y * y + m2 * gamma1 * y - m2 * (1.0 + gamma1) + (1.0 - m2) / nu
}

pub fn worksheet(m1: f64, gamma1: f64, nu: f64, c1: f64) -> Result<WeakStabilityWorksheet> {
    let vs = solve_v(m1, gamma1, nu, c1)?;
    let cs = c_star(m1, gamma1, nu, c1)?;
    let m2 = m1 * m1;
    let y = m1 * cs.phi;
    let bound = (m2 - 1.0 + nu * m2 * (2.0 + gamma1)) / (nu * (1.0 + m2 + m2 * gamma1));
    let upsilon = -vs.v / c1;
    Ok(WeakStabilityWorksheet {
        m1,
        gamma1,
        nu,
        c1,
        v1: -m1 * c1,
        k: 2.0 - m2 * gamma1 * nu,
        phi: cs.phi,
        y,
        beta: cs.beta,
        upsilon,
        v: vs.v,
        c_star: cs.c_star,
        q_of_y: q_polynomial(m1, gamma1, nu, y),
        y_bound_margin: y - bound,
        upsilon_identity_gap: upsilon + (1.0 - m1 * cs.beta) / (1.0 - cs.beta * cs.beta).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proposition1Report {
    pub m1: f64,
    pub gamma1: f64,
    pub nu: f64,
    pub c1: f64,
    pub v: f64,
    pub c_star: f64,
    pub gap: f64,
    pub passes: bool,
}

pub fn proposition1_check(m1: f64, gamma1: f64, nu: f64, c1: f64) -> Result<Proposition1Report> {
    let v = solve_v(m1, gamma1, nu, c1)?.v;
    let cs = c_star(m1, gamma1, nu, c1)?.c_star;
    let gap = (cs - v).abs() / v;
    Ok(Proposition1Report {
        m1,
        gamma1,
        nu,
        c1,
        v,
        c_star: cs,
        gap,
        passes: gap < 1e-10,
    })
}

/// Real zeros of `z -> Delta(u_bar, z, eta)` and the smallest normalized value seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootScan {
    pub roots: Vec<f64>,
    /// Minimum of `|Delta| / (row-norm product)` over the grid.
    pub min_normalized: f64,
    pub glancing_points: (f64, f64),
}

/// Locates real zeros of the Lopatinskii determinant on `z_interval`.
///
/// The interval is split at the glancing points. On hyperbolic pieces the
/// determinant is real and zeros are bracketed by sign changes and bisected;
/// on the elliptic piece a zero is reported where a local minimum of the
/// normalized modulus falls below `1e-10`.
pub fn scan_real_roots(
    shock: &PlanarShock,
    eta: f64,
    z_interval: (f64, f64),
    grid_count: usize,
) -> Result<RootScan> {
    let problem = LopatinskiiProblem::from_shock(shock)?;
    scan_problem(&problem, eta, z_interval, grid_count)
}

pub fn scan_problem(
    problem: &LopatinskiiProblem,
    eta: f64,
    z_interval: (f64, f64),
    grid_count: usize,
) -> Result<RootScan> {
    if eta == 0.0 || !eta.is_finite() {
        return Err(Error::domain("eta must be nonzero"));
    }
    let (a, b) = z_interval;
    if !(b > a) || grid_count < 2 {
        return Err(Error::domain(
            "scan needs a nonempty interval and at least 2 grid points",
        ));
    }
    let (g_lo, g_hi) = problem.frame.glancing_points(eta);
    let scale = (problem.frame.c1 + problem.frame.u_bar.abs()) * eta.abs();
    let gap = 1e-9 * scale;
    let eval = |z: f64| problem.evaluate(&FrequencyPoint::real(z, eta));

    let mut pieces = Vec::new();
    let mut cuts = vec![a];
    for g in [g_lo, g_hi] {
        if g > a && g < b {
            cuts.push(g);
        }
    }
    cuts.push(b);
    for w in cuts.windows(2) {
        let lo = if w[0] == g_lo || w[0] == g_hi {
            w[0] + gap
        } else {
            w[0]
        };
        let hi = if w[1] == g_lo || w[1] == g_hi {
            w[1] - gap
        } else {
            w[1]
        };
        if hi > lo {
            let mid = 0.5 * (lo + hi);
            let hyperbolic = mid < g_lo || mid > g_hi;
            pieces.push((lo, hi, hyperbolic));
        }
    }

    let total = b - a;
    let mut roots = Vec::new();
    let mut min_normalized = f64::INFINITY;
    for (lo, hi, hyperbolic) in pieces {
        let n = ((grid_count as f64) * (hi - lo) / total).ceil().max(8.0) as usize;
        let zs: Vec<f64> = (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect();
        let vals = zs.iter().map(|&z| eval(z)).collect::<Result<Vec<_>>>()?;
        for v in &vals {
            min_normalized = min_normalized.min(v.normalized);
        }
        if hyperbolic {
            for i in 0..n {
                let (fa, fb) = (vals[i].value.re, vals[i + 1].value.re);
                if fa == 0.0 {
                    roots.push(zs[i]);
                } else if fa * fb < 0.0 {
                    roots.push(bisect(|z| Ok(eval(z)?.value.re), zs[i], zs[i + 1], fa)?);
                }
            }
            if vals[n].value.re == 0.0 {
                roots.push(zs[n]);
            }
        } else {
            for i in 1..n {
                let (p, c, q) = (
                    vals[i - 1].normalized,
                    vals[i].normalized,
                    vals[i + 1].normalized,
                );
                if c <= p && c <= q {
                    let (z, m) = golden_min(|z| Ok(eval(z)?.normalized), zs[i - 1], zs[i + 1])?;
                    min_normalized = min_normalized.min(m);
                    if m < 1e-10 {
                        roots.push(z);
                    }
                }
            }
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * scale);
    Ok(RootScan {
        roots,
        min_normalized,
        glancing_points: (g_lo, g_hi),
    })
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

fn golden_min<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..100 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}

/// Argument-principle count of zeros of `z -> Delta(u_bar, z, eta)` in `Im z < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCount {
    /// Winding of `Delta` along the clockwise boundary of the half disc.
    pub winding_delta: f64,
    /// Same for `omega_- - omega_0`, whose zero `Delta` shares.
    pub winding_coincidence: f64,
    pub zeros: i64,
}

/// Counts zeros in the half disc `{|z| < radius, Im z < -offset}` using the
/// winding of `Delta` minus that of `omega_- - omega_0`: at `omega_0 = omega_-`
/// the stable basis degenerates and `Delta` has a zero that is not a mode.
pub fn count_unstable_modes(
    problem: &LopatinskiiProblem,
    eta: f64,
    radius: f64,
    offset: f64,
) -> Result<ZeroCount> {
    if !(radius > offset && offset > 0.0) {
        return Err(Error::domain("need radius > offset > 0"));
    }
    let mut path: Vec<Complex64> = Vec::new();
    let n_line = 4000;
    for i in 0..n_line {
        let x = -radius + 2.0 * radius * i as f64 / n_line as f64;
        path.push(Complex64::new(x, -offset));
    }
    let n_arc = 4000;
    for i in 0..n_arc {
        let th = std::f64::consts::PI * i as f64 / n_arc as f64;
        path.push(Complex64::new(
            radius * th.cos(),
            -offset - radius * th.sin(),
        ));
    }
    let f = |z: Complex64| -> Result<(Complex64, Complex64)> {
        let v = problem.evaluate(&FrequencyPoint::new(z, eta))?;
        Ok((v.value, v.omega_gap))
    };
    let mut d_vals = Vec::new();
    let mut g_vals = Vec::new();
    for k in 0..path.len() {
        let a = path[k];
        let b = path[(k + 1) % path.len()];
        refine_segment(&f, a, b, 0, &mut d_vals, &mut g_vals)?;
    }
    let wd = winding_number(&d_vals);
    let wg = winding_number(&g_vals);
    Ok(ZeroCount {
        winding_delta: wd,
        winding_coincidence: wg,
        zeros: -(wd - wg).round() as i64,
    })
}

fn refine_segment<F>(
    f: &F,
    a: Complex64,
    b: Complex64,
    depth: usize,
    d_vals: &mut Vec<Complex64>,
    g_vals: &mut Vec<Complex64>,
) -> Result<()>
where
    F: Fn(Complex64) -> Result<(Complex64, Complex64)>,
{
    let (da, ga) = f(a)?;
    let (db, gb) = f(b)?;
    let jump = (db / da).arg().abs().max((gb / ga).arg().abs());
    if jump > 0.3 && depth < 20 {
        let m = (a + b) * 0.5;
        refine_segment(f, a, m, depth + 1, d_vals, g_vals)?;
        refine_segment(f, m, b, depth + 1, d_vals, g_vals)?;
    } else {
        d_vals.push(da);
        g_vals.push(ga);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_examples() {
        assert_eq!(
            classify(0.5, 0.4, 1.0).unwrap().regime,
            StabilityRegime::Uniform
        );
        assert_eq!(
            classify(0.8, 5.0, 0.5).unwrap().regime,
            StabilityRegime::Weak
        );
        assert_eq!(
            classify(0.8, 10.0, 0.5).unwrap().regime,
            StabilityRegime::Violent
        );
        assert!(classify(1.2, 1.0, 1.0).is_err());
        let glancing = classify(0.8, 5.0, 1.0 / 3.84).unwrap();
        assert_eq!(glancing.regime, StabilityRegime::LimitGlancing);
    }

    #[test]
    fn v_and_c_star_agree() {
        let r = proposition1_check(0.8, 5.0, 0.5, 1.0).unwrap();
        assert!(r.gap < 1e-10, "{r:?}");
        let v2 = solve_v(0.8, 5.0, 0.5, 2.0).unwrap().v;
        assert!((v2 - 2.0 * r.v).abs() < 1e-12 * v2);
        let ws = worksheet(0.8, 5.0, 0.5, 1.0).unwrap();
        assert!(ws.q_of_y.abs() < 1e-12);
        assert!(ws.y_bound_margin > 0.0);
        assert!(ws.phi > 0.8 && ws.phi < 1.0);
        assert!(ws.beta > -1.0 && ws.beta < 0.8);
        assert!(ws.upsilon_identity_gap.abs() < 1e-12);
    }

    #[test]
    fn outside_weak_regime_errors() {
        assert!(matches!(
            solve_v(0.5, 0.4, 1.0, 1.0),
            Err(Error::RegimeMismatch(StabilityRegime::Uniform))
        ));
        assert!(matches!(
            c_star(0.5, 0.4, 1.0, 1.0),
            Err(Error::RegimeMismatch(StabilityRegime::Uniform))
        ));
        assert!(proposition1_check(0.8, 10.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn reduced_determinant_vanishes_at_v() {
        let v = solve_v(0.8, 5.0, 0.5, 1.0).unwrap().v;
        let p = LopatinskiiProblem::reduced(0.8, 5.0, 0.5, 0.0);
        let scan = scan_problem(&p, 1.0, (-3.0, 3.0), 600).unwrap();
        assert_eq!(scan.roots.len(), 2, "{scan:?}");
        assert!((scan.roots[0] + v).abs() < 1e-9);
        assert!((scan.roots[1] - v).abs() < 1e-9);
    }

    #[test]
    fn zero_counts_by_regime() {
        for (m1, g1, nu, expected) in [(0.5, 0.4, 1.0, 0), (0.8, 5.0, 0.5, 0), (0.8, 10.0, 0.5, 1)]
        {
            let p = LopatinskiiProblem::reduced(m1, g1, nu, 0.0);
            let count = count_unstable_modes(&p, 1.0, 60.0, 1e-4).unwrap();
            assert_eq!(count.zeros, expected, "({m1}, {g1}, {nu}): {count:?}");
        }
    }
}
