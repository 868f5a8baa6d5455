use std::collections::HashMap;

use rand::Rng;

use super::calculus::{dx, dz, field, inner, moment, norm_sq, remainder_norms};
use super::ledger::EnergyLedger;
use super::report::{CheckReport, Locator};
use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::kinetic_solver::{HermiteCoefField, RegimeTag, ScalingRegime};
use crate::velocity_basis::{HermiteBasis, VelocityVector, LAMBDA0};

const IDENTITY_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-8;

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Structural invariants of one ledger: positivity, orthogonal splitting,
/// ν-domination, the `Ê`/`E` sandwich and both forms of the `G` bounds.
pub fn ledger_invariants(ledger: &EnergyLedger) -> CheckReport {
    let mut report = CheckReport::new();
    let loc = Locator::at(ledger.time, None);
    let eps = ledger.epsilon;
    for pair in &ledger.raw {
        for r in pair {
            let split = r.sigma + r.u + r.remainder;
            report.record("ledger.pythagoras", -rel_err(r.h, split), IDENTITY_TOL, loc);
            let scale = r.remainder_nu.max(f64::MIN_POSITIVE);
            report.record("ledger.nu_dominates", (r.remainder_nu - r.remainder) / scale, IDENTITY_TOL, loc);
        }
    }
    for (family, terms) in [("plain", &ledger.plain), ("weighted", &ledger.weighted)] {
        for m in 0..=ledger.m_max() {
            let entries = [
                terms.e_h[m],
                terms.e_phi[m],
                terms.d_h[m],
                terms.d_u[m],
                terms.d_sigma[m],
                terms.d_phi[m],
            ];
            let min_entry = entries.iter().flat_map(|p| p.iter()).fold(f64::INFINITY, |a, &b| a.min(b));
            report.record(&format!("ledger.{family}.nonnegative"), min_entry, 0.0, loc);

            let e = terms.e_scaled[m];
            let e_hat = terms.e_hat[m];
            let scale = e.max(f64::MIN_POSITIVE);
            report.record(&format!("ledger.{family}.sandwich_lower"), (e_hat - 0.5 * LAMBDA0 * e) / scale, IDENTITY_TOL, loc);
            report.record(&format!("ledger.{family}.sandwich_upper"), (1.5 * e - e_hat) / scale, IDENTITY_TOL, loc);

            let e_h = terms.e_h_total(m);
            let e_phi = terms.e_phi_total(m);
            let g = terms.g[m];
            let g_scale = (e_h + e_phi).max(f64::MIN_POSITIVE);
            let sq = eps * eps;
            report.record(&format!("ledger.{family}.g_lower_eps2"), (g - (-sq * e_h + 0.25 * e_phi)) / g_scale, IDENTITY_TOL, loc);
            report.record(&format!("ledger.{family}.g_upper_eps2"), (sq * e_h + 0.75 * e_phi - g) / g_scale, IDENTITY_TOL, loc);
            report.record(&format!("ledger.{family}.g_lower_eps"), (g - (-eps * e_h + 0.25 * e_phi)) / g_scale, IDENTITY_TOL, loc);
            report.record(&format!("ledger.{family}.g_upper_eps"), (eps * e_h + 0.75 * e_phi - g) / g_scale, IDENTITY_TOL, loc);
        }
    }
    report
}

/// Random velocity slice: uniform entries, optionally with `1/(1+k)` decay.
pub fn random_slice(n: usize, rng: &mut impl Rng) -> VelocityVector {
    let decay = rng.gen_bool(0.5);
    let coeffs = (0..n)
        .map(|k| {
            let c: f64 = rng.gen_range(-1.0..1.0);
            if decay { c / (1.0 + k as f64) } else { c }
        })
        .collect();
    VelocityVector { coeffs }
}

/// Properties of `L` on `n_samples` random slices: splitting identities,
/// remainder coercivity, hypocoercivity with `λ0 = 1/7`, and agreement of
/// the closed-form ν-norm with quadrature.
pub fn proposition_check(basis: &HermiteBasis, n_samples: usize, rng: &mut impl Rng) -> CheckReport {
    let mut report = CheckReport::new();
    let loc = Locator::default();
    let n = basis.n_modes();
    for _ in 0..n_samples {
        let h = random_slice(n, rng);
        let proj = basis.project_pi(&h);
        let r = &proj.remainder;

        let full = basis.dissipation(&h);
        let rem = basis.dissipation(r);
        report.record("prop.a_split", -rel_err(full, rem + proj.u * proj.u), IDENTITY_TOL, loc);

        let dv = basis.dv_exact(&r.coeffs);
        let vr = basis.multiply_v_exact(&r.coeffs);
        let sq = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
        let rhs_b = sq(&dv) + 0.25 * sq(&vr) - 0.5 * r.norm_sq();
        report.record("prop.b_identity", -rel_err(rem, rhs_b), IDENTITY_TOL, loc);

        let r_sq = r.norm_sq();
        let c_scale = r_sq.max(f64::MIN_POSITIVE);
        report.record("prop.c_remainder", (rem - r_sq) / c_scale, IDENTITY_TOL, loc);

        let nu = basis.nu_norm_sq(&h);
        let d_scale = nu.max(f64::MIN_POSITIVE);
        report.record("prop.d_coercivity", basis.coercivity_margin(&h) / d_scale, IDENTITY_TOL, loc);

        if let Ok(q) = basis.nu_norm_sq_quadrature(&h) {
            report.record("prop.nu_quadrature", -rel_err(nu, q), ORACLE_TOL, loc);
        }
    }
    report
}

/// Multi-index `∂_z^{.0} ∂_x^{.1}`.
pub type MultiIndex = (usize, u32);

struct DerivCache<'a> {
    disc: &'a Discretization,
    h: &'a [f64],
    e: Vec<f64>,
    h_cache: HashMap<MultiIndex, Vec<f64>>,
    e_cache: HashMap<MultiIndex, Vec<f64>>,
}

impl<'a> DerivCache<'a> {
    fn new(disc: &'a Discretization, state: &'a HermiteCoefField) -> Result<Self> {
        Ok(Self { disc, h: state.coeffs(), e: field(disc, state)?, h_cache: HashMap::new(), e_cache: HashMap::new() })
    }

    /// The interpolant in z has degree `n_z − 1`, so higher z-derivatives vanish.
    fn derive(disc: &Discretization, base: &[f64], width: usize, (zo, xo): MultiIndex) -> Result<Vec<f64>> {
        let zd = if zo >= disc.n_z() { vec![0.0; base.len()] } else { dz(disc, base, width, zo)? };
        Ok(dx(disc, &zd, width, xo))
    }

    fn h(&mut self, idx: MultiIndex) -> Result<&Vec<f64>> {
        if !self.h_cache.contains_key(&idx) {
            let d = Self::derive(self.disc, self.h, self.disc.n_v(), idx)?;
            self.h_cache.insert(idx, d);
        }
        Ok(&self.h_cache[&idx])
    }

    fn e(&mut self, idx: MultiIndex) -> Result<&Vec<f64>> {
        if !self.e_cache.contains_key(&idx) {
            let d = Self::derive(self.disc, &self.e, 1, idx)?;
            self.e_cache.insert(idx, d);
        }
        Ok(&self.e_cache[&idx])
    }

    fn h_norm(&mut self, idx: MultiIndex) -> Result<f64> {
        let disc = self.disc;
        Ok(norm_sq(disc, self.h(idx)?, disc.n_v()))
    }

    fn e_norm(&mut self, idx: MultiIndex) -> Result<f64> {
        let disc = self.disc;
        Ok(norm_sq(disc, self.e(idx)?, 1))
    }

    fn sigma_norm(&mut self, idx: MultiIndex) -> Result<f64> {
        let disc = self.disc;
        let s = moment(disc, self.h(idx)?, 0);
        Ok(norm_sq(disc, &s, 1))
    }

    fn u_norm(&mut self, idx: MultiIndex) -> Result<f64> {
        let disc = self.disc;
        let u = moment(disc, self.h(idx)?, 1);
        Ok(norm_sq(disc, &u, 1))
    }

    fn rem_nu(&mut self, idx: MultiIndex) -> Result<f64> {
        let disc = self.disc;
        Ok(remainder_norms(disc, self.h(idx)?).1)
    }

    fn h_h1h1(&mut self, (zo, xo): MultiIndex) -> Result<f64> {
        let mut s = 0.0;
        for a in 0..=1 {
            for b in 0..=1 {
                s += self.h_norm((zo + a, xo + b))?;
            }
        }
        Ok(s.sqrt())
    }

    fn e_h1h1(&mut self, (zo, xo): MultiIndex) -> Result<f64> {
        let mut s = 0.0;
        for a in 0..=1 {
            for b in 0..=1 {
                s += self.e_norm((zo + a, xo + b))?;
            }
        }
        Ok(s.sqrt())
    }
}

/// `⟨Φ (∂v − v/2) H_i, H_l⟩` by Gauss–Hermite quadrature in v, where
/// `(∂v − v/2)(p√M) = (p' − v p)√M`.
fn field_term_quadrature(disc: &Discretization, phi: &[f64], hi: &[f64], hl: &[f64]) -> f64 {
    let basis = &disc.basis;
    let n_v = disc.n_v();
    let sqrt_k = basis.sqrt_k();
    let nodes = basis.quad_nodes();
    let weights = basis.quad_weights();
    let mut per_point = vec![0.0; phi.len()];
    for (p, out) in per_point.iter_mut().enumerate() {
        let ci = &hi[p * n_v..(p + 1) * n_v];
        let cl = &hl[p * n_v..(p + 1) * n_v];
        let mut acc = 0.0;
        for (q, (&v, &w)) in nodes.iter().zip(weights).enumerate() {
            let row = basis.polynomial_row(q);
            let mut pi = 0.0;
            let mut dpi = 0.0;
            let mut pl = 0.0;
            for k in 0..n_v {
                pi += ci[k] * row[k];
                pl += cl[k] * row[k];
                if k >= 1 {
                    dpi += ci[k] * sqrt_k[k] * row[k - 1];
                }
            }
            acc += w * (dpi - v * pi) * pl;
        }
        *out = phi[p] * acc;
    }
    let ones = vec![1.0; phi.len()];
    inner(disc, &per_point, &ones, 1)
}

/// Same bilinear form in closed Hermite form, `−Σ_n sqrt(n+1) H_i[n] H_l[n+1]`.
pub fn field_term_closed_form(disc: &Discretization, phi: &[f64], hi: &[f64], hl: &[f64]) -> f64 {
    let n_v = disc.n_v();
    let sqrt_k = disc.basis.sqrt_k();
    let per_point: Vec<f64> = (0..phi.len())
        .map(|p| {
            let ci = &hi[p * n_v..(p + 1) * n_v];
            let cl = &hl[p * n_v..(p + 1) * n_v];
            let s: f64 = (0..n_v - 1).map(|n| -sqrt_k[n + 1] * ci[n] * cl[n + 1]).sum();
            phi[p] * s
        })
        .collect();
    let ones = vec![1.0; phi.len()];
    inner(disc, &per_point, &ones, 1)
}

/// Left-hand side of the field-term inequalities for `(k, i, l)`.
pub fn field_term(disc: &Discretization, state: &HermiteCoefField, k: MultiIndex, i: MultiIndex, l: MultiIndex) -> Result<f64> {
    let mut c = DerivCache::new(disc, state)?;
    let phi = c.e(k)?.clone();
    let hi = c.h(i)?.clone();
    let hl = c.h(l)?.clone();
    Ok(field_term_quadrature(disc, &phi, &hi, &hl))
}

/// RHS − LHS of the four field-term bounds at the diagonal index
/// `k = i = l = 0` and the mixed index `k = (1,0), i = 0, l = (1,0)`.
/// With `C1 = 1` misses are informational.
pub fn static_inequality_check(
    disc: &Discretization,
    state: &HermiteCoefField,
    a: f64,
    c1: f64,
) -> Result<CheckReport> {
    if a.is_nan() || a <= 0.0 {
        return Err(crate::error::contract(format!("a must be positive, got {a}")));
    }
    let mut c = DerivCache::new(disc, state)?;
    let mut report = CheckReport::new();
    let informational = (c1 - 1.0).abs() < 1e-12;
    let cases: [(&str, MultiIndex, MultiIndex, MultiIndex); 2] =
        [("base", (0, 0), (0, 0), (0, 0)), ("mixed", (1, 0), (0, 0), (1, 0))];
    for (name, k, i, l) in cases {
        let phi = c.e(k)?.clone();
        let hi = c.h(i)?.clone();
        let hl = c.h(l)?.clone();
        let lhs = field_term_quadrature(disc, &phi, &hi, &hl);

        let l_u = c.u_norm(l)?;
        let l_rem = c.rem_nu(l)?;
        let tail_bc = (2.0 + 1.0 / a) * l_u + 2.0 * l_rem;
        let tail_de = 3.0 / a * l_u + 2.0 / a * l_rem;

        let rhs_b = c1
            * c.e_h1h1(k)?
            * (a * c.sigma_norm(i)? + 2.0 * c.u_norm(i)? + 2.0 * c.rem_nu(i)? + tail_bc);

        let mut sum_c = 0.0;
        for j in 0..=1 {
            let ij = (i.0 + j, i.1);
            sum_c += a * c.sigma_norm(ij)? + 2.0 * c.u_norm(ij)? + 2.0 * c.rem_nu(ij)?;
        }
        let rhs_c = c1 * c1 * (c.e_norm(k)? + c.e_norm((k.0, k.1 + 1))?).sqrt() * (sum_c + tail_bc);

        let rhs_d = c1 * c.h_h1h1(i)? * (tail_de + a * c.e_norm(k)?);

        let mut sum_e = 0.0;
        for j in 0..=1 {
            sum_e += a * c.e_norm((k.0 + j, k.1))?;
        }
        let rhs_e = c1 * c1 * (c.h_norm(i)? + c.h_norm((i.0, i.1 + 1))?).sqrt() * (sum_e + tail_de);

        for (bound, rhs) in [("b", rhs_b), ("c", rhs_c), ("d", rhs_d), ("e", rhs_e)] {
            let scale = rhs.abs().max(lhs.abs()).max(f64::MIN_POSITIVE);
            let id = format!("static.{name}.{bound}");
            let margin = (rhs - lhs) / scale;
            if informational {
                report.record_info(&id, margin, IDENTITY_TOL, Locator::at(state.time, None));
            } else {
                report.record(&id, margin, IDENTITY_TOL, Locator::at(state.time, None));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy)]
pub struct LyapunovOptions {
    /// Ledger order `m`.
    pub m: usize,
    pub weighted: bool,
    /// The Lyapunov inequality is only claimed under the smallness condition.
    pub smallness_held: bool,
}

/// Trajectory checks of `Ê^m`: monotonicity after the first interval,
/// `dÊ/dt + (λ0/2) 𝒟 ≤ 0` by centered differences, and the decay envelopes
/// against the trajectory's own initial ledger.
pub fn lyapunov_check(ledgers: &[EnergyLedger], regime: &ScalingRegime, opts: LyapunovOptions) -> Result<CheckReport> {
    let mut report = CheckReport::new();
    if ledgers.len() < 2 {
        return Ok(report);
    }
    let eps = regime.epsilon();
    let spacing_limit = 0.01 * eps;
    let spacing = ledgers.windows(2).map(|w| w[1].time - w[0].time).fold(0.0_f64, f64::max);
    if spacing > spacing_limit * (1.0 + 1e-9) {
        return Err(Error::UndersampledRecord { spacing, limit: spacing_limit });
    }
    let m = opts.m;
    let terms = |l: &EnergyLedger| l.terms(opts.weighted).clone();
    let series: Vec<_> = ledgers.iter().map(terms).collect();
    let times: Vec<f64> = ledgers.iter().map(|l| l.time).collect();
    let e_hat: Vec<f64> = series.iter().map(|t| t.e_hat[m]).collect();
    let e_hat0 = e_hat[0].abs().max(f64::MIN_POSITIVE);

    for n in 1..e_hat.len() - 1 {
        let loc = Locator::at(times[n + 1], None);
        report.record("monotonicity", (e_hat[n] - e_hat[n + 1]) / e_hat0, IDENTITY_TOL, loc);
    }
    if e_hat.len() < 3 {
        report.record("monotonicity", 0.0, IDENTITY_TOL, Locator::default());
    }

    let second: Vec<f64> = (1..e_hat.len() - 1)
        .map(|n| {
            let (h0, h1) = (times[n] - times[n - 1], times[n + 1] - times[n]);
            2.0 * (h0 * e_hat[n + 1] - (h0 + h1) * e_hat[n] + h1 * e_hat[n - 1]) / (h0 * h1 * (h0 + h1))
        })
        .collect();
    let curvature = second.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let mut lyap_rows = Vec::new();
    for n in 1..e_hat.len() - 1 {
        let deriv = (e_hat[n + 1] - e_hat[n - 1]) / (times[n + 1] - times[n - 1]);
        let dissipation = 0.5 * LAMBDA0 * series[n].dissipation[m];
        lyap_rows.push((n, deriv, dissipation));
    }
    let rate_scale = lyap_rows
        .iter()
        .map(|(_, d, s)| d.abs().max(*s))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for (n, deriv, dissipation) in lyap_rows {
        let tol = spacing * curvature / rate_scale + IDENTITY_TOL;
        let value = -(deriv + dissipation) / rate_scale;
        let loc = Locator::at(times[n], None);
        if opts.smallness_held {
            report.record("lyapunov", value, tol, loc);
        } else {
            report.record_info("lyapunov", value, tol, loc);
        }
    }

    if regime.tag() != RegimeTag::Custom {
        let (h0, p0) = (series[0].e_h_total(m), series[0].e_phi_total(m));
        let (pref_h, pref_phi) = match regime.tag() {
            RegimeTag::HighField => (h0 + p0 / (eps * eps), eps * eps * h0 + p0),
            _ => (h0 + p0 / eps, eps * h0 + p0),
        };
        let t0 = times[0];
        for (n, t) in series.iter().enumerate() {
            let s = times[n] - t0;
            let env_h = 3.0 / LAMBDA0 * (-s / eps).exp() * pref_h;
            let env_phi = 3.0 / LAMBDA0 * (-s).exp() * pref_phi;
            let loc = Locator::at(times[n], None);
            report.record("envelope_h", normalized_gap(env_h, t.e_h_total(m)), IDENTITY_TOL, loc);
            report.record("envelope_phi", normalized_gap(env_phi, t.e_phi_total(m)), IDENTITY_TOL, loc);
        }
    }
    Ok(report)
}

/// `(bound − value) / max(bound, value)`, in `[−1, 1]`.
fn normalized_gap(bound: f64, value: f64) -> f64 {
    let scale = bound.abs().max(value.abs());
    if scale == 0.0 {
        0.0
    } else {
        (bound - value) / scale
    }
}
