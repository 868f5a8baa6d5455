//! Initial perturbations and the smallness gate
//! `E^m_h(0) + ε^{-p} E^m_φ(0) ≤ 2λ0³ / (80 A C1)² · ε^{1-p}`,
//! `p = 2` (high-field) or `p = 1` (parabolic).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::regime::{RegimeTag, ScalingRegime};
use super::state::HermiteCoefField;
use crate::discretization::Discretization;
use crate::error::{contract, Result};
use crate::hypo_diagnostics::compute_ledger;
use crate::velocity_basis::LAMBDA0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    /// `cos(kx) φ_0`
    SigmaBump,
    /// `cos(kx) φ_1`
    Shear,
    /// `cos(kx) φ_0 + sin(kx) φ_1 + cos(kx) φ_2`
    Mixed,
    /// x-independent `φ_mode`, `mode ≥ 1`.
    HomogeneousMode { mode: usize },
    /// Random low Fourier and Hermite modes with decaying coefficients.
    RandomSmooth { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindTag {
    SigmaBump,
    Shear,
    Mixed,
    HomogeneousMode,
    RandomSmooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplitude {
    Absolute(f64),
    /// Fraction of the smallness threshold taken by the measure.
    SmallnessFraction(f64),
}

fn default_wavenumber() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InitialRepr", into = "InitialRepr")]
pub struct InitialData {
    pub kind: InitialKind,
    pub amplitude: Amplitude,
    /// Profile `1 + β z` in the random variable.
    pub z_beta: f64,
    pub wavenumber: u32,
}

/// Flat config form: `kind = "homogeneous_mode"` with `mode = 2`, etc.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialRepr {
    kind: KindTag,
    amplitude: Amplitude,
    #[serde(default)]
    z_beta: f64,
    #[serde(default = "default_wavenumber")]
    wavenumber: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl TryFrom<InitialRepr> for InitialData {
    type Error = crate::error::Error;

    fn try_from(r: InitialRepr) -> Result<Self> {
        let extra = |name: &str, present: bool| -> Result<()> {
            if present {
                Err(contract(format!("'{name}' does not apply to initial kind {:?}", r.kind)))
            } else {
                Ok(())
            }
        };
        let kind = match r.kind {
            KindTag::HomogeneousMode => {
                extra("seed", r.seed.is_some())?;
                InitialKind::HomogeneousMode { mode: r.mode.ok_or_else(|| contract("homogeneous_mode needs 'mode'"))? }
            }
            KindTag::RandomSmooth => {
                extra("mode", r.mode.is_some())?;
                InitialKind::RandomSmooth { seed: r.seed.ok_or_else(|| contract("random_smooth needs 'seed'"))? }
            }
            tag => {
                extra("mode", r.mode.is_some())?;
                extra("seed", r.seed.is_some())?;
                match tag {
                    KindTag::SigmaBump => InitialKind::SigmaBump,
                    KindTag::Shear => InitialKind::Shear,
                    _ => InitialKind::Mixed,
                }
            }
        };
        Ok(Self { kind, amplitude: r.amplitude, z_beta: r.z_beta, wavenumber: r.wavenumber })
    }
}

impl From<InitialData> for InitialRepr {
    fn from(d: InitialData) -> Self {
        let (kind, mode, seed) = match d.kind {
            InitialKind::SigmaBump => (KindTag::SigmaBump, None, None),
            InitialKind::Shear => (KindTag::Shear, None, None),
            InitialKind::Mixed => (KindTag::Mixed, None, None),
            InitialKind::HomogeneousMode { mode } => (KindTag::HomogeneousMode, Some(mode), None),
            InitialKind::RandomSmooth { seed } => (KindTag::RandomSmooth, None, Some(seed)),
        };
        Self { kind, amplitude: d.amplitude, z_beta: d.z_beta, wavenumber: d.wavenumber, mode, seed }
    }
}

impl InitialData {
    pub fn new(kind: InitialKind, amplitude: Amplitude) -> Self {
        Self { kind, amplitude, z_beta: 0.0, wavenumber: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialReport {
    pub amplitude: f64,
    pub e_h: f64,
    pub e_phi: f64,
    pub measure: f64,
    pub threshold: f64,
    /// `threshold − measure`.
    pub margin: f64,
    pub smallness_held: bool,
}

/// `A(m) = 2 sqrt(m+1) C(m, ⌈m/2⌉) + sqrt(m+1)`.
pub fn smallness_constant_a(m: usize) -> f64 {
    let r = m.div_ceil(2);
    let binom: f64 = (0..r).map(|j| (m - j) as f64 / (j + 1) as f64).product();
    let s = ((m + 1) as f64).sqrt();
    2.0 * s * binom + s
}

pub fn smallness_threshold(regime: &ScalingRegime, m: usize, c1: f64) -> f64 {
    let base = 2.0 * LAMBDA0.powi(3) / (80.0 * smallness_constant_a(m) * c1).powi(2);
    match regime.tag() {
        RegimeTag::Parabolic => base / regime.epsilon(),
        _ => base,
    }
}

/// `E^m_h + ε^{-2} E^m_φ` (high-field) or `E^m_h + ε^{-1} E^m_φ` otherwise.
pub fn smallness_measure(regime: &ScalingRegime, e_h: f64, e_phi: f64) -> f64 {
    let eps = regime.epsilon();
    match regime.tag() {
        RegimeTag::HighField => e_h + e_phi / (eps * eps),
        _ => e_h + e_phi / eps,
    }
}

/// Unit-amplitude profile before the `1 + βz` factor, `[x][k]`.
fn unit_profile(disc: &Discretization, data: &InitialData) -> Result<Vec<f64>> {
    let n_x = disc.n_x();
    let n_v = disc.n_v();
    let k = disc.grid.length().recip() * std::f64::consts::TAU * f64::from(data.wavenumber);
    let nodes = disc.grid.nodes();
    let mut out = vec![0.0; n_x * n_v];
    let mut put = |x: usize, mode: usize, value: f64| -> Result<()> {
        if mode >= n_v {
            return Err(contract(format!("mode {mode} exceeds basis size {n_v}")));
        }
        out[x * n_v + mode] = value;
        Ok(())
    };
    if data.wavenumber == 0 && !matches!(data.kind, InitialKind::HomogeneousMode { .. } | InitialKind::RandomSmooth { .. }) {
        return Err(contract("wavenumber must be at least 1"));
    }
    match data.kind {
        InitialKind::SigmaBump => {
            for (x, &p) in nodes.iter().enumerate() {
                put(x, 0, (k * p).cos())?;
            }
        }
        InitialKind::Shear => {
            for (x, &p) in nodes.iter().enumerate() {
                put(x, 1, (k * p).cos())?;
            }
        }
        InitialKind::Mixed => {
            for (x, &p) in nodes.iter().enumerate() {
                put(x, 0, (k * p).cos())?;
                put(x, 1, (k * p).sin())?;
                put(x, 2, (k * p).cos())?;
            }
        }
        InitialKind::HomogeneousMode { mode } => {
            if mode == 0 {
                return Err(contract("a homogeneous density mode violates neutrality"));
            }
            for x in 0..n_x {
                put(x, mode, 1.0)?;
            }
        }
        InitialKind::RandomSmooth { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k1 = std::f64::consts::TAU / disc.grid.length();
            for mode in 0..n_v.min(4) {
                for j in 1..=3u32 {
                    let decay = 1.0 / ((1 + mode) as f64 * f64::from(j)).powi(2);
                    let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    for (x, &p) in nodes.iter().enumerate() {
                        let arg = k1 * f64::from(j) * p;
                        out[x * n_v + mode] += decay * (a * arg.cos() + b * arg.sin());
                    }
                }
            }
        }
    }
    Ok(out)
}

fn scaled_state(disc: &Discretization, profile: &[f64], amplitude: f64, z_beta: f64) -> Result<HermiteCoefField> {
    let mut coeffs = Vec::with_capacity(disc.n_z() * profile.len());
    for &z in disc.colloc.nodes() {
        let factor = amplitude * (1.0 + z_beta * z);
        coeffs.extend(profile.iter().map(|c| factor * c));
    }
    HermiteCoefField::from_coeffs(disc.n_z(), disc.n_x(), disc.n_v(), coeffs, 0.0)
}

/// Builds `h(0)` and reports the smallness margin at ledger order `m`.
/// A violated margin is logged; the run may still proceed.
pub fn initial_data(
    disc: &Discretization,
    regime: &ScalingRegime,
    data: &InitialData,
    m: usize,
    c1: f64,
) -> Result<(HermiteCoefField, InitialReport)> {
    if c1.is_nan() || c1 <= 0.0 {
        return Err(contract(format!("C1 must be positive, got {c1}")));
    }
    let profile = unit_profile(disc, data)?;
    let threshold = smallness_threshold(regime, m, c1);
    let amplitude = match data.amplitude {
        Amplitude::Absolute(a) => {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(contract(format!("amplitude must be non-negative, got {a}")));
            }
            a
        }
        Amplitude::SmallnessFraction(f) => {
            if !(f >= 0.0 && f.is_finite()) {
                return Err(contract(format!("smallness fraction must be non-negative, got {f}")));
            }
            let unit = compute_ledger(disc, &scaled_state(disc, &profile, 1.0, data.z_beta)?, regime, m)?;
            let s = smallness_measure(regime, unit.plain.e_h_total(m), unit.plain.e_phi_total(m));
            if s > 0.0 { (f * threshold / s).sqrt() } else { 0.0 }
        }
    };
    let state = scaled_state(disc, &profile, amplitude, data.z_beta)?;
    let ledger = compute_ledger(disc, &state, regime, m)?;
    let e_h = ledger.plain.e_h_total(m);
    let e_phi = ledger.plain.e_phi_total(m);
    let measure = smallness_measure(regime, e_h, e_phi);
    // A measure set to exactly the threshold must count as held.
    let smallness_held = measure <= threshold * (1.0 + 1e-12);
    if !smallness_held {
        log::warn!("initial data violates the smallness condition: measure {measure:e} > threshold {threshold:e}");
    }
    let report = InitialReport { amplitude, e_h, e_phi, measure, threshold, margin: threshold - measure, smallness_held };
    Ok((state, report))
}
