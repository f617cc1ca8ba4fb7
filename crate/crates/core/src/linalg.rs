//! Small numerical kernels: Gauss-Legendre rules, damped Newton, winding numbers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes in decreasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            x = 0.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iter: 50,
            max_halvings: 30,
        }
    }
}

pub struct NewtonOutcome {
    pub x: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Damped Newton iteration. `system` returns the scaled residual and its
/// Jacobian; a trial point where `system` errors or the residual grows is
/// rejected and the step halved. After the tolerance is met, up to two more
/// steps are taken while they keep reducing the residual.
pub fn damped_newton<F>(
    solver: &'static str,
    mut system: F,
    x0: DVector<f64>,
    opts: NewtonOptions,
) -> Result<NewtonOutcome>
where
    F: FnMut(&DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)>,
{
    let mut x = x0;
    let (mut f, mut jac) = system(&x)?;
    let mut norm = f.norm();
    let mut polish = 0;
    for iter in 0..opts.max_iter {
        if !norm.is_finite() {
            break;
        }
        if norm <= opts.tol {
            if polish >= 2 || norm == 0.0 {
                return Ok(NewtonOutcome {
                    x,
                    residual: norm,
                    iterations: iter,
                });
            }
            polish += 1;
        }
        let step = match jac.clone().lu().solve(&(-&f)) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => return Err(Error::SingularMatrix),
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial = &x + &step * scale;
            if let Ok((ft, jt)) = system(&trial) {
                let nt = ft.norm();
                if nt.is_finite() && (nt < norm || (nt <= opts.tol && norm <= opts.tol)) {
                    x = trial;
                    f = ft;
                    jac = jt;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            if norm <= opts.tol {
                return Ok(NewtonOutcome {
                    x,
                    residual: norm,
                    iterations: iter,
                });
            }
            return Err(Error::Convergence {
                solver,
                iterations: iter,
                residual: norm,
            });
        }
    }
    if norm <= opts.tol {
        return Ok(NewtonOutcome {
            x,
            residual: norm,
            iterations: opts.max_iter,
        });
    }
    Err(Error::Convergence {
        solver,
        iterations: opts.max_iter,
        residual: norm,
    })
}

/// Net number of turns of the closed polyline through `values` (last point
/// joined back to the first), in units of full revolutions.
pub fn winding_number(values: &[Complex64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..values.len() {
        let a = values[i];
        let b = values[(i + 1) % values.len()];
        total += (b / a).arg();
    }
    total / (2.0 * std::f64::consts::PI)
}

/// Roots of `a x^2 + b x + c = 0` for real coefficients, computed with the
/// cancellation-free form. Returns `None` for complex roots. When `a` is
/// negligible, the single linear root is returned twice.
pub fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    if a == 0.0 {
        if b == 0.0 {
            return None;
        }
        let r = -c / b;
        return Some((r, r));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return Some((0.0, 0.0));
    }
    let (r1, r2) = (q / a, c / q);
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

/// Both roots of `a w^2 + b w + c = 0` for complex coefficients, `a != 0`.
pub fn complex_quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> (Complex64, Complex64) {
    let disc = (b * b - a * c * 4.0).sqrt();
    // Pick the sign that avoids cancellation in b + sqrt(disc).
    let q = if (b.conj() * disc).re >= 0.0 {
        -(b + disc) * 0.5
    } else {
        -(b - disc) * 0.5
    };
    if q.norm() == 0.0 {
        return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    }
    (q / a, c / q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 8, 16, 64] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n = {n}");
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                assert!((q - exact).abs() < 1e-13, "n = {n}, deg = {deg}");
            }
            for i in 0..n {
                assert_eq!(x[i], -x[n - 1 - i]);
                assert_eq!(w[i], w[n - 1 - i]);
            }
        }
    }

    #[test]
    fn quadratic_roots_are_accurate() {
        let (a, b) = real_quadratic_roots(1.0, -1e8, 1.0).unwrap();
        assert!((a - 1e-8).abs() < 1e-22);
        assert!((b - 1e8).abs() < 1e-6);
        assert!(real_quadratic_roots(1.0, 0.0, 1.0).is_none());
        let (r1, r2) = complex_quadratic_roots(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        );
        assert!((r1 * r2 - 1.0).norm() < 1e-15);
        assert!((r1 + r2).norm() < 1e-15);
    }

    #[test]
    fn winding_of_circle() {
        let n = 400;
        let pts: Vec<_> = (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        assert!((winding_number(&pts) - 1.0).abs() < 1e-12);
        let sq: Vec<_> = pts.iter().map(|z| z * z).collect();
        assert!((winding_number(&sq) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn newton_solves_simple_system() {
        let out = damped_newton(
            "test",
            |x: &DVector<f64>| {
                let f = DVector::from_vec(vec![x[0] * x[0] - 2.0, x[1] - x[0]]);
                let j = DMatrix::from_row_slice(2, 2, &[2.0 * x[0], 0.0, -1.0, 1.0]);
                Ok((f, j))
            },
            DVector::from_vec(vec![10.0, 0.0]),
            NewtonOptions::default(),
        )
        .unwrap();
        assert!((out.x[0] - 2f64.sqrt()).abs() < 1e-14);
        assert!((out.x[1] - 2f64.sqrt()).abs() < 1e-14);
    }
}
