//! Energy and dissipation functionals at one instant.
//!
//! With `∂^{l,i} = ∂_z^l ∂_x^i` and norms in `dμ`:
//!
//! ```text
//! E^{m,i}_h = Σ_{l≤m} ‖∂^{l,i} h‖²          E^{m,i}_φ = Σ_{l≤m} ‖∂^{l,i} ∂xφ‖²
//! D^{m,i}_h = Σ_{l≤m} ‖(1−Π) ∂^{l,i} h‖²_ν   D^{m,i}_u, D^{m,i}_σ likewise, D_φ = E_φ
//! G^m  = ε Σ_{l≤m−1} ⟨∂_z^l u, ∂_z^l ∂xφ⟩ + ε Σ_{l≤m} ⟨∂_z^l ∂x u, ∂_z^l ∂x²φ⟩ + ½ E^m_φ
//! F^m  = ε E^m_h + δ E^m_φ
//! Ê^m  = F^m + (2 λ0 δ / ε) G^m
//! E^m  = ε E^m_h + (δ / ε) E^m_φ
//! ```
//!
//! For `δ = 1` and `δ = ε` these are the high-field and parabolic
//! combinations. The weighted family multiplies every `l`-term by
//! `((l+1)/l!)²`.

use serde::{Deserialize, Serialize};

use super::calculus::{dx, dz, field, inner, moment, norm_sq, remainder_norms};
use crate::discretization::Discretization;
use crate::error::{contract, Error, Result};
use crate::kinetic_solver::{HermiteCoefField, RegimeTag, ScalingRegime};
use crate::velocity_basis::LAMBDA0;

/// Norms of one derivative `∂_z^l ∂_x^i`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RawNorms {
    pub h: f64,
    pub sigma: f64,
    pub u: f64,
    pub remainder: f64,
    pub remainder_nu: f64,
    pub field: f64,
    /// `⟨∂^{l,i} u, ∂^{l,i} ∂xφ⟩`
    pub cross: f64,
}

impl RawNorms {
    fn visit(&mut self, f: &mut dyn FnMut(&str, &mut f64)) {
        f("h", &mut self.h);
        f("sigma", &mut self.sigma);
        f("u", &mut self.u);
        f("rem", &mut self.remainder);
        f("rem_nu", &mut self.remainder_nu);
        f("field", &mut self.field);
        f("cross", &mut self.cross);
    }
}

/// Ledger entries for `m = 0..=m_max`; `[_; 2]` holds `i = 0, 1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerTerms {
    pub e_h: Vec<[f64; 2]>,
    pub e_phi: Vec<[f64; 2]>,
    pub d_h: Vec<[f64; 2]>,
    pub d_u: Vec<[f64; 2]>,
    pub d_sigma: Vec<[f64; 2]>,
    pub d_phi: Vec<[f64; 2]>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    pub e_hat: Vec<f64>,
    /// Regime-scaled `E^m`.
    pub e_scaled: Vec<f64>,
    /// Dissipation `𝒟^m` of the Lyapunov inequality `dÊ/dt + (λ0/2) 𝒟 ≤ 0`.
    pub dissipation: Vec<f64>,
}

fn total(v: &[[f64; 2]], m: usize) -> f64 {
    v[m][0] + v[m][1]
}

impl LedgerTerms {
    fn zeros(m_max: usize) -> Self {
        let n = m_max + 1;
        Self {
            e_h: vec![[0.0; 2]; n],
            e_phi: vec![[0.0; 2]; n],
            d_h: vec![[0.0; 2]; n],
            d_u: vec![[0.0; 2]; n],
            d_sigma: vec![[0.0; 2]; n],
            d_phi: vec![[0.0; 2]; n],
            g: vec![0.0; n],
            f: vec![0.0; n],
            e_hat: vec![0.0; n],
            e_scaled: vec![0.0; n],
            dissipation: vec![0.0; n],
        }
    }

    /// `E^m_h = E^{m,0}_h + E^{m,1}_h`.
    pub fn e_h_total(&self, m: usize) -> f64 {
        total(&self.e_h, m)
    }

    pub fn e_phi_total(&self, m: usize) -> f64 {
        total(&self.e_phi, m)
    }

    pub fn d_h_total(&self, m: usize) -> f64 {
        total(&self.d_h, m)
    }

    pub fn d_u_total(&self, m: usize) -> f64 {
        total(&self.d_u, m)
    }

    pub fn d_sigma_total(&self, m: usize) -> f64 {
        total(&self.d_sigma, m)
    }

    fn visit(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut f64)) {
        let pairs: [(&str, &mut Vec<[f64; 2]>); 6] = [
            ("e_h", &mut self.e_h),
            ("e_phi", &mut self.e_phi),
            ("d_h", &mut self.d_h),
            ("d_u", &mut self.d_u),
            ("d_sigma", &mut self.d_sigma),
            ("d_phi", &mut self.d_phi),
        ];
        for (name, v) in pairs {
            for (m, entry) in v.iter_mut().enumerate() {
                for (i, x) in entry.iter_mut().enumerate() {
                    f(&format!("{prefix}{name}_m{m}_i{i}"), x);
                }
            }
        }
        let scalars: [(&str, &mut Vec<f64>); 5] = [
            ("g", &mut self.g),
            ("f", &mut self.f),
            ("e_hat", &mut self.e_hat),
            ("e_scaled", &mut self.e_scaled),
            ("diss", &mut self.dissipation),
        ];
        for (name, v) in scalars {
            for (m, x) in v.iter_mut().enumerate() {
                f(&format!("{prefix}{name}_m{m}"), x);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub time: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub tag: RegimeTag,
    /// `raw[l][i]` for `l ≤ m_max`.
    pub raw: Vec<[RawNorms; 2]>,
    pub plain: LedgerTerms,
    pub weighted: LedgerTerms,
}

/// Weight `((l+1)/l!)²` of the z-derivative of order `l`.
pub fn z_weight(l: usize) -> f64 {
    let factorial: f64 = (1..=l).map(|j| j as f64).product();
    ((l as f64 + 1.0) / factorial).powi(2)
}

/// `8 · sqrt(Σ_{i≥0} 1/(i+1)²) = 8π/√6`.
pub fn weighted_constant() -> f64 {
    8.0 * std::f64::consts::PI / 6.0_f64.sqrt()
}

impl EnergyLedger {
    pub fn m_max(&self) -> usize {
        self.raw.len() - 1
    }

    pub fn terms(&self, weighted: bool) -> &LedgerTerms {
        if weighted {
            &self.weighted
        } else {
            &self.plain
        }
    }

    fn visit(&mut self, f: &mut dyn FnMut(&str, &mut f64)) {
        f("time", &mut self.time);
        f("epsilon", &mut self.epsilon);
        f("delta", &mut self.delta);
        for (l, pair) in self.raw.iter_mut().enumerate() {
            for (i, r) in pair.iter_mut().enumerate() {
                r.visit(&mut |name, x| f(&format!("raw_{name}_l{l}_i{i}"), x));
            }
        }
        self.plain.visit("", f);
        self.weighted.visit("w_", f);
    }

    /// Flat named columns, `time` first.
    pub fn columns(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        self.clone().visit(&mut |name, x| out.push((name.to_string(), *x)));
        out
    }

    /// Inverse of [`columns`](Self::columns).
    pub fn from_columns(names: &[String], values: &[f64], tag: RegimeTag) -> Result<Self> {
        if names.len() != values.len() {
            return Err(contract("column names and values differ in length"));
        }
        let m_count = names.iter().filter(|n| n.starts_with("g_m")).count();
        if m_count == 0 {
            return Err(contract("no ledger columns found"));
        }
        let m_max = m_count - 1;
        let mut ledger = Self::zeros(m_max, tag);
        let lookup: std::collections::HashMap<&str, f64> =
            names.iter().map(String::as_str).zip(values.iter().copied()).collect();
        let mut missing = None;
        ledger.visit(&mut |name, x| match lookup.get(name) {
            Some(v) => *x = *v,
            None => missing = Some(name.to_string()),
        });
        if let Some(name) = missing {
            return Err(contract(format!("ledger column '{name}' missing")));
        }
        Ok(ledger)
    }

    fn zeros(m_max: usize, tag: RegimeTag) -> Self {
        Self {
            time: 0.0,
            epsilon: 0.0,
            delta: 0.0,
            tag,
            raw: vec![[RawNorms::default(); 2]; m_max + 1],
            plain: LedgerTerms::zeros(m_max),
            weighted: LedgerTerms::zeros(m_max),
        }
    }
}

pub fn compute_ledger(
    disc: &Discretization,
    state: &HermiteCoefField,
    regime: &ScalingRegime,
    m_max: usize,
) -> Result<EnergyLedger> {
    if m_max >= disc.n_z() {
        return Err(Error::InsufficientResolution { order: m_max, n_z: disc.n_z() });
    }
    let n_v = disc.n_v();
    let e = field(disc, state)?;
    let mut raw = Vec::with_capacity(m_max + 1);
    for l in 0..=m_max {
        let h_l = dz(disc, state.coeffs(), n_v, l)?;
        let e_l = dz(disc, &e, 1, l)?;
        let mut pair = [RawNorms::default(); 2];
        for (i, slot) in pair.iter_mut().enumerate() {
            let h_li = dx(disc, &h_l, n_v, i as u32);
            let e_li = dx(disc, &e_l, 1, i as u32);
            let sigma = moment(disc, &h_li, 0);
            let u = moment(disc, &h_li, 1);
            let (remainder, remainder_nu) = remainder_norms(disc, &h_li);
            *slot = RawNorms {
                h: norm_sq(disc, &h_li, n_v),
                sigma: norm_sq(disc, &sigma, 1),
                u: norm_sq(disc, &u, 1),
                remainder,
                remainder_nu,
                field: norm_sq(disc, &e_li, 1),
                cross: inner(disc, &u, &e_li, 1),
            };
        }
        raw.push(pair);
    }
    Ok(EnergyLedger {
        time: state.time,
        epsilon: regime.epsilon(),
        delta: regime.delta(),
        tag: regime.tag(),
        plain: assemble(&raw, regime, |_| 1.0),
        weighted: assemble(&raw, regime, z_weight),
        raw,
    })
}

fn assemble(raw: &[[RawNorms; 2]], regime: &ScalingRegime, weight: impl Fn(usize) -> f64) -> LedgerTerms {
    let m_max = raw.len() - 1;
    let eps = regime.epsilon();
    let delta = regime.delta();
    let mut t = LedgerTerms::zeros(m_max);
    let mut acc = RawSums::default();
    let mut cross_lower = 0.0;
    for m in 0..=m_max {
        let w = weight(m);
        for (i, r) in raw[m].iter().enumerate() {
            acc.h[i] += w * r.h;
            acc.field[i] += w * r.field;
            acc.rem_nu[i] += w * r.remainder_nu;
            acc.u[i] += w * r.u;
            acc.sigma[i] += w * r.sigma;
        }
        acc.cross_x += w * raw[m][1].cross;
        if m >= 1 {
            cross_lower += weight(m - 1) * raw[m - 1][0].cross;
        }
        t.e_h[m] = acc.h;
        t.e_phi[m] = acc.field;
        t.d_h[m] = acc.rem_nu;
        t.d_u[m] = acc.u;
        t.d_sigma[m] = acc.sigma;
        t.d_phi[m] = acc.field;

        let e_h = t.e_h_total(m);
        let e_phi = t.e_phi_total(m);
        t.g[m] = eps * cross_lower + eps * acc.cross_x + 0.5 * e_phi;
        t.f[m] = eps * e_h + delta * e_phi;
        t.e_hat[m] = t.f[m] + 2.0 * LAMBDA0 * delta / eps * t.g[m];
        t.e_scaled[m] = eps * e_h + delta / eps * e_phi;

        let (d_h, d_u, d_s, d_p) = (t.d_h_total(m), t.d_u_total(m), t.d_sigma_total(m), e_phi);
        t.dissipation[m] = match regime.tag() {
            RegimeTag::HighField => d_h + d_u + d_s + d_p / eps,
            RegimeTag::Parabolic => (d_h + d_u) / eps + d_s + 2.0 * d_p,
            RegimeTag::Custom => (d_h + d_u) / delta + d_s + d_p / eps,
        };
    }
    t
}

#[derive(Default)]
struct RawSums {
    h: [f64; 2],
    field: [f64; 2],
    rem_nu: [f64; 2],
    u: [f64; 2],
    sigma: [f64; 2],
    cross_x: f64,
}
