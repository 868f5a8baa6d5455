//! Hermite-function representation of velocity space.
//!
//! ```text
//! phi_k(v) = He_k(v) sqrt(M(v)) / sqrt(k!),     M(v) = exp(-v^2/2) / sqrt(2 pi)
//!
//! v phi_k          = sqrt(k+1) phi_{k+1} + sqrt(k) phi_{k-1}
//! d/dv phi_k       = (sqrt(k) phi_{k-1} - sqrt(k+1) phi_{k+1}) / 2
//! (d/dv - v/2) phi_k = -sqrt(k+1) phi_{k+1}
//! L phi_k          = -k phi_k,     L h = M^{-1/2} d/dv (M d/dv (h M^{-1/2}))
//! ```
//!
//! The `phi_k` are orthonormal in `L^2(dv)`, so coefficient 0 carries the
//! density perturbation and coefficient 1 the momentum.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::quadrature::{gauss_hermite, gauss_laguerre, GaussRule};

/// Coercivity constant of the linearized Fokker–Planck operator in one dimension.
pub const LAMBDA0: f64 = 1.0 / 7.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityVector {
    pub coeffs: Vec<f64>,
}

impl VelocityVector {
    pub fn zeros(n: usize) -> Self {
        Self { coeffs: vec![0.0; n] }
    }

    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.coeffs[k] = 1.0;
        v
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(contract("velocity coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub sigma: f64,
    pub u: f64,
    pub remainder: VelocityVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentSpec {
    /// `int M dv`
    Mass,
    /// `int v^2 M dv`
    SecondMoment,
    /// `int v^4 M dv`
    FourthMoment,
    /// `int |v|^3 M dv`
    AbsThirdMoment,
    /// `int (d/dv (v sqrt M))^2 dv`
    GradientOfMomentumMode,
}

impl FromStr for MomentSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mass" => Ok(Self::Mass),
            "v2" => Ok(Self::SecondMoment),
            "v4" => Ok(Self::FourthMoment),
            "abs_v3" => Ok(Self::AbsThirdMoment),
            "dv_v_sqrt_m" => Ok(Self::GradientOfMomentumMode),
            other => Err(contract(format!("unsupported moment spec '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HermiteBasis {
    n_modes: usize,
    rule: GaussRule,
    sqrt_k: Vec<f64>,
    /// `table[i * n_modes + k] = He_k(v_i) / sqrt(k!)` at quadrature node `i`.
    table: Vec<f64>,
}

impl HermiteBasis {
    /// Basis with `n_modes` Hermite functions and `2 n_modes` quadrature nodes.
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes < 2 {
            return Err(contract(format!("need at least 2 Hermite modes, got {n_modes}")));
        }
        let rule = gauss_hermite(2 * n_modes);
        let sqrt_k: Vec<f64> = (0..=n_modes + 1).map(|k| (k as f64).sqrt()).collect();
        let mut table = Vec::with_capacity(rule.len() * n_modes);
        for &v in &rule.nodes {
            table.extend(orthonormal_hermite(n_modes, v));
        }
        Ok(Self { n_modes, rule, sqrt_k, table })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn quad_nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.rule.weights
    }

    /// `sqrt(k)` for `0 <= k <= n_modes + 1`.
    pub fn sqrt_k(&self) -> &[f64] {
        &self.sqrt_k
    }

    /// Value of the polynomial parts `He_k(v)/sqrt(k!)` at quadrature node `i`.
    pub fn polynomial_row(&self, i: usize) -> &[f64] {
        &self.table[i * self.n_modes..(i + 1) * self.n_modes]
    }

    /// Pointwise value `h(v)`.
    pub fn evaluate(&self, h: &VelocityVector, v: f64) -> f64 {
        let p = orthonormal_hermite(h.len(), v);
        let poly: f64 = p.iter().zip(&h.coeffs).map(|(a, b)| a * b).sum();
        poly * maxwellian(v).sqrt()
    }

    fn check_len(&self, h: &VelocityVector) -> Result<()> {
        if h.len() != self.n_modes {
            return Err(contract(format!(
                "velocity vector has {} coefficients, basis has {}",
                h.len(),
                self.n_modes
            )));
        }
        Ok(())
    }

    pub fn apply_l(&self, h: &VelocityVector) -> Result<VelocityVector> {
        self.check_len(h)?;
        let coeffs = h.coeffs.iter().enumerate().map(|(k, c)| -(k as f64) * c).collect();
        Ok(VelocityVector { coeffs })
    }

    /// `L h` evaluated pointwise at the Gauss–Hermite nodes and projected back.
    ///
    /// With `h = p sqrt(M)` the operator acts on the polynomial part as
    /// `p'' - v p'`.
    pub fn apply_l_quadrature(&self, h: &VelocityVector) -> Result<VelocityVector> {
        self.check_len(h)?;
        let n = self.n_modes;
        let mut out = vec![0.0; n];
        for (i, (&v, &w)) in self.rule.nodes.iter().zip(&self.rule.weights).enumerate() {
            let row = self.polynomial_row(i);
            let mut dp = 0.0;
            let mut ddp = 0.0;
            for k in 1..n {
                dp += h.coeffs[k] * self.sqrt_k[k] * row[k - 1];
                if k >= 2 {
                    ddp += h.coeffs[k] * self.sqrt_k[k] * self.sqrt_k[k - 1] * row[k - 2];
                }
            }
            let lp = ddp - v * dp;
            for (o, r) in out.iter_mut().zip(row) {
                *o += w * lp * r;
            }
        }
        Ok(VelocityVector { coeffs: out })
    }

    /// `v h` with the outflow of the top mode dropped.
    pub fn multiply_v(&self, h: &VelocityVector) -> Result<VelocityVector> {
        self.check_len(h)?;
        let mut exact = self.multiply_v_exact(&h.coeffs);
        exact.truncate(self.n_modes);
        Ok(VelocityVector { coeffs: exact })
    }

    /// `v h` of the truncated expansion, `n + 1` coefficients.
    pub fn multiply_v_exact(&self, c: &[f64]) -> Vec<f64> {
        let n = c.len();
        let s = &self.sqrt_k;
        (0..=n)
            .map(|j| {
                let lower = if j >= 1 { s[j] * c[j - 1] } else { 0.0 };
                let upper = if j + 1 < n { s[j + 1] * c[j + 1] } else { 0.0 };
                lower + upper
            })
            .collect()
    }

    /// `d/dv h` of the truncated expansion, `n + 1` coefficients.
    pub fn dv_exact(&self, c: &[f64]) -> Vec<f64> {
        let n = c.len();
        let s = &self.sqrt_k;
        (0..=n)
            .map(|j| {
                let lower = if j >= 1 { s[j] * c[j - 1] } else { 0.0 };
                let upper = if j + 1 < n { s[j + 1] * c[j + 1] } else { 0.0 };
                0.5 * (upper - lower)
            })
            .collect()
    }

    pub fn project_pi(&self, h: &VelocityVector) -> Projection {
        let sigma = h.coeffs.first().copied().unwrap_or(0.0);
        let u = h.coeffs.get(1).copied().unwrap_or(0.0);
        let mut remainder = h.clone();
        for c in remainder.coeffs.iter_mut().take(2) {
            *c = 0.0;
        }
        Projection { sigma, u, remainder }
    }

    pub fn nu_norm_sq(&self, h: &VelocityVector) -> f64 {
        nu_norm_sq_coeffs(&h.coeffs, &self.sqrt_k)
    }

    /// `int (1+v^2) h^2 + (d/dv h)^2 dv` by Gauss–Hermite quadrature.
    pub fn nu_norm_sq_quadrature(&self, h: &VelocityVector) -> Result<f64> {
        self.check_len(h)?;
        let n = self.n_modes;
        let mut total = 0.0;
        for (i, (&v, &w)) in self.rule.nodes.iter().zip(&self.rule.weights).enumerate() {
            let row = self.polynomial_row(i);
            let p: f64 = row.iter().zip(&h.coeffs).map(|(r, c)| r * c).sum();
            let dp: f64 = (1..n).map(|k| h.coeffs[k] * self.sqrt_k[k] * row[k - 1]).sum();
            let dh = dp - 0.5 * v * p;
            total += w * ((1.0 + v * v) * p * p + dh * dh);
        }
        Ok(total)
    }

    /// `-<L h, h>`.
    pub fn dissipation(&self, h: &VelocityVector) -> f64 {
        h.coeffs.iter().enumerate().map(|(k, c)| k as f64 * c * c).sum()
    }

    /// `-<L h, h> - lambda_0 |(1-Pi) h|_nu^2 - u^2`.
    pub fn coercivity_margin(&self, h: &VelocityVector) -> f64 {
        let proj = self.project_pi(h);
        self.dissipation(h) - LAMBDA0 * self.nu_norm_sq(&proj.remainder) - proj.u * proj.u
    }

    pub fn maxwellian_moment(&self, spec: MomentSpec) -> f64 {
        let rule = &self.rule;
        match spec {
            MomentSpec::Mass => rule.integrate(|_| 1.0),
            MomentSpec::SecondMoment => rule.integrate(|v| v * v),
            MomentSpec::FourthMoment => rule.integrate(|v| v.powi(4)),
            MomentSpec::AbsThirdMoment => {
                // Symmetric halves; t = v^2/2 turns v^3 e^{-v^2/2} dv into 2 t e^{-t} dt.
                let half = gauss_laguerre(self.n_modes).integrate(|t| 2.0 * t);
                2.0 * half / (2.0 * std::f64::consts::PI).sqrt()
            }
            MomentSpec::GradientOfMomentumMode => rule.integrate(|v| (1.0 - 0.5 * v * v).powi(2)),
        }
    }
}

/// Global Maxwellian density.
pub fn maxwellian(v: f64) -> f64 {
    (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `He_k(v)/sqrt(k!)` for `k < n`.
pub fn orthonormal_hermite(n: usize, v: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n);
    if n == 0 {
        return p;
    }
    p.push(1.0);
    if n > 1 {
        p.push(v);
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        let next = (v * p[k] - kf.sqrt() * p[k - 1]) / (kf + 1.0).sqrt();
        p.push(next);
    }
    p
}

/// Closed-form `|h|_nu^2` of a truncated coefficient vector; `sqrt_k` must
/// hold at least `c.len() + 1` entries.
pub fn nu_norm_sq_coeffs(c: &[f64], sqrt_k: &[f64]) -> f64 {
    let n = c.len();
    let mut total = 0.0;
    for j in 0..=n {
        let lower = if j >= 1 { sqrt_k[j] * c[j - 1] } else { 0.0 };
        let upper = if j + 1 < n { sqrt_k[j + 1] * c[j + 1] } else { 0.0 };
        let vh = lower + upper;
        let dh = 0.5 * (upper - lower);
        let plain = if j < n { c[j] * c[j] } else { 0.0 };
        total += plain + vh * vh + dh * dh;
    }
    total
}
