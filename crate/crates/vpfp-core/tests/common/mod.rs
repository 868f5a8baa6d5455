//! Oracles shared by the integration tests. They deliberately avoid the
//! library's quadrature rules and recurrences.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite trapezoid of `f` over `[-a, a]`; spectrally accurate for
/// integrands with Gaussian decay.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, n: usize) -> f64 {
    let h = 2.0 * a / n as f64;
    let inner: f64 = (1..n).map(|j| f(-a + j as f64 * h)).sum();
    h * (inner + 0.5 * (f(-a) + f(a)))
}

/// `∫ f(v) dv` over the real line for Gaussian-weighted integrands.
pub fn integrate_v(f: impl Fn(f64) -> f64) -> f64 {
    trapezoid(f, 18.0, 7200)
}

pub fn gaussian(v: f64) -> f64 {
    (-0.5 * v * v).exp() / (2.0 * PI).sqrt()
}

/// Probabilists' Hermite polynomial `He_k` and its first two derivatives.
pub fn hermite_with_derivatives(k: usize, v: f64) -> (f64, f64, f64) {
    let he = |n: usize| -> f64 {
        let (mut prev, mut cur) = (0.0, 1.0);
        for j in 0..n {
            let next = v * cur - j as f64 * prev;
            prev = cur;
            cur = next;
        }
        cur
    };
    let kf = k as f64;
    let d1 = if k >= 1 { kf * he(k - 1) } else { 0.0 };
    let d2 = if k >= 2 { kf * (kf - 1.0) * he(k - 2) } else { 0.0 };
    (he(k), d1, d2)
}

fn factorial_sqrt(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product::<f64>().sqrt()
}

/// Polynomial part `p` of `h = p √M` and its derivatives for a coefficient
/// vector in the Hermite-function basis.
pub fn polynomial_part(coeffs: &[f64], v: f64) -> (f64, f64, f64) {
    coeffs.iter().enumerate().fold((0.0, 0.0, 0.0), |acc, (k, &c)| {
        let (p, d1, d2) = hermite_with_derivatives(k, v);
        let s = c / factorial_sqrt(k);
        (acc.0 + s * p, acc.1 + s * d1, acc.2 + s * d2)
    })
}

/// `h(v)` for a coefficient vector.
pub fn hermite_function(coeffs: &[f64], v: f64) -> f64 {
    polynomial_part(coeffs, v).0 * gaussian(v).sqrt()
}

/// `∂_v h(v)` for a coefficient vector.
pub fn hermite_function_dv(coeffs: &[f64], v: f64) -> f64 {
    let (p, dp, _) = polynomial_part(coeffs, v);
    (dp - 0.5 * v * p) * gaussian(v).sqrt()
}

/// Coefficients of `g` in the first `n` Hermite functions.
pub fn project(g: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let mut e = vec![0.0; j + 1];
            e[j] = 1.0;
            integrate_v(|v| g(v) * hermite_function(&e, v))
        })
        .collect()
}

pub fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!((got - want).abs() <= tol, "{what}: got {got:e}, want {want:e}, tol {tol:e}");
}

pub fn assert_vec_close(got: &[f64], want: &[f64], tol: f64, what: &str) {
    assert_eq!(got.len(), want.len(), "{what}: length");
    for (j, (g, w)) in got.iter().zip(want).enumerate() {
        assert!((g - w).abs() <= tol, "{what}[{j}]: got {g:e}, want {w:e}, tol {tol:e}");
    }
}

/// Least-squares slope of `log y` against `x`.
pub fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let num: f64 = points.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}
