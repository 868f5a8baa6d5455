use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::initial::{initial_data, InitialData, InitialReport};
use super::regime::ScalingRegime;
use super::solver::KineticSolver;
use super::state::HermiteCoefField;
use crate::discretization::Discretization;
use crate::error::{contract, Error, Result};
use crate::hypo_diagnostics::calculus::{dx, field, norm_sq};
use crate::hypo_diagnostics::{
    compute_ledger, fit_decay_rate, ledger_invariants, lyapunov_check, CheckReport, EnergyLedger, Fit, Locator,
    LyapunovOptions,
};
use crate::random_space::Distribution;

fn default_n_x() -> usize {
    64
}
fn default_length() -> f64 {
    std::f64::consts::TAU
}
fn default_n_v() -> usize {
    64
}
fn default_n_z() -> usize {
    8
}
fn default_cfl() -> f64 {
    0.5
}
fn default_m_max() -> usize {
    2
}
fn default_c1() -> f64 {
    1.0
}

/// Everything needed to reproduce a run. All defaults are written back on
/// serialization, so a stored config is self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_n_x")]
    pub n_x: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_n_v")]
    pub n_v: usize,
    #[serde(default = "default_n_z")]
    pub n_z: usize,
    #[serde(default)]
    pub distribution: Distribution,
    pub regime: ScalingRegime,
    /// Step size; when absent, the stability bound capped at `0.01 ε`.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Caps `dt / (εδ)`, bounding the splitting error of the collision step.
    #[serde(default)]
    pub collision_resolution: Option<f64>,
    pub initial: InitialData,
    /// Steps between diagnostics; `max(1, ⌊0.01 ε / dt⌋)` when absent.
    #[serde(default)]
    pub stride: Option<usize>,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default = "default_c1")]
    pub c1: f64,
    /// Samples before this time are left out of rate fits.
    #[serde(default)]
    pub fit_t_min: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(regime: ScalingRegime, t_end: f64, initial: InitialData) -> Self {
        Self {
            n_x: default_n_x(),
            length: default_length(),
            n_v: default_n_v(),
            n_z: default_n_z(),
            distribution: Distribution::Uniform,
            regime,
            dt: None,
            t_end,
            cfl: default_cfl(),
            collision_resolution: None,
            initial,
            stride: None,
            m_max: default_m_max(),
            c1: default_c1(),
            fit_t_min: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(contract(format!("{name} must be positive and finite, got {v}")))
            }
        };
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(contract(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        positive("length", self.length)?;
        positive("cfl", self.cfl)?;
        positive("c1", self.c1)?;
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if let Some(k) = self.collision_resolution {
            positive("collision_resolution", k)?;
        }
        if self.stride == Some(0) {
            return Err(contract("stride must be at least 1"));
        }
        if self.m_max >= self.n_z {
            return Err(Error::InsufficientResolution { order: self.m_max, n_z: self.n_z });
        }
        Ok(())
    }

    pub fn discretization(&self) -> Result<Discretization> {
        Discretization::new(self.n_x, self.length, self.n_v, self.n_z, self.distribution)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex_digest(json.as_bytes())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationSample {
    pub time: f64,
    /// `max_z |∫σ(t) dx − ∫σ(0) dx|`
    pub mass_drift: f64,
    /// `max_z |mean_x u|`
    pub mean_u: f64,
    /// `‖δ ∂tσ + ∂x u‖` with a centered time difference.
    pub continuity_residual: Option<f64>,
    /// `‖∂x u‖`, the scale of the continuity residual.
    pub continuity_scale: f64,
    /// `‖∂t ∂xφ‖` with a centered time difference.
    pub field_rate: Option<f64>,
    /// `‖u‖ / δ`
    pub field_rate_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: SolverConfig,
    pub initial: InitialReport,
    pub dt: f64,
    pub stride: usize,
    pub steps_taken: usize,
    pub ledgers: Vec<EnergyLedger>,
    pub conservation: Vec<ConservationSample>,
    pub checks: CheckReport,
    /// `None` where the series cannot be fitted, e.g. identically zero.
    pub rates: BTreeMap<String, Option<Fit>>,
    pub provenance: Provenance,
    #[serde(skip)]
    pub final_state: Option<HermiteCoefField>,
}

impl RunRecord {
    /// `(t, E^m_h)` or `(t, E^m_φ)` series.
    pub fn energy_series(&self, m: usize, field_energy: bool) -> Vec<(f64, f64)> {
        self.ledgers
            .iter()
            .map(|l| (l.time, if field_energy { l.plain.e_phi_total(m) } else { l.plain.e_h_total(m) }))
            .collect()
    }

    pub fn max_mass_drift(&self) -> f64 {
        self.conservation.iter().map(|c| c.mass_drift).fold(0.0, f64::max)
    }
}

/// A failed run together with everything recorded before the failure.
#[derive(Debug)]
pub struct RunAbort {
    pub record: RunRecord,
    pub error: Error,
}

impl std::fmt::Display for RunAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "run aborted at t = {}: {}", self.record.ledgers.last().map_or(0.0, |l| l.time), self.error)
    }
}

impl std::error::Error for RunAbort {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// σ, u and ∂xφ laid out `[z][x]`.
struct Macro {
    sigma: Vec<f64>,
    u: Vec<f64>,
    field: Vec<f64>,
}

impl Macro {
    fn of(disc: &Discretization, state: &HermiteCoefField) -> Result<Self> {
        let n_v = disc.n_v();
        let h = state.coeffs();
        Ok(Self {
            sigma: h.chunks(n_v).map(|c| c[0]).collect(),
            u: h.chunks(n_v).map(|c| c[1]).collect(),
            field: field(disc, state)?,
        })
    }
}

/// Sample waiting for the step after it to form centered differences.
struct Pending {
    before: Macro,
    at: Macro,
    index: usize,
}

struct Runner<'a> {
    disc: &'a Discretization,
    solver: KineticSolver,
    regime: ScalingRegime,
    m_max: usize,
    dt: f64,
    mass0: Vec<f64>,
    ledgers: Vec<EnergyLedger>,
    conservation: Vec<ConservationSample>,
}

impl Runner<'_> {
    fn masses(&self, sigma: &[f64]) -> Vec<f64> {
        sigma.chunks(self.disc.n_x()).map(|s| self.disc.grid.integrate(s)).collect()
    }

    fn sample(&mut self, state: &HermiteCoefField) -> Result<Macro> {
        let disc = self.disc;
        let mac = Macro::of(disc, state)?;
        self.ledgers.push(compute_ledger(disc, state, &self.regime, self.m_max)?);
        let mass_drift = self
            .masses(&mac.sigma)
            .iter()
            .zip(&self.mass0)
            .map(|(m, m0)| (m - m0).abs())
            .fold(0.0, f64::max);
        let mean_u = mac.u.chunks(disc.n_x()).map(|u| disc.grid.mean(u).abs()).fold(0.0, f64::max);
        self.conservation.push(ConservationSample {
            time: state.time,
            mass_drift,
            mean_u,
            continuity_residual: None,
            continuity_scale: norm_sq(disc, &dx(disc, &mac.u, 1, 1), 1).sqrt(),
            field_rate: None,
            field_rate_bound: norm_sq(disc, &mac.u, 1).sqrt() / self.regime.delta(),
        });
        Ok(mac)
    }

    fn finalize(&mut self, p: &Pending, after: &Macro) {
        let disc = self.disc;
        let inv = 1.0 / (2.0 * self.dt);
        let delta = self.regime.delta();
        let du = dx(disc, &p.at.u, 1, 1);
        let residual: Vec<f64> = (0..du.len())
            .map(|j| delta * (after.sigma[j] - p.before.sigma[j]) * inv + du[j])
            .collect();
        let rate: Vec<f64> = (0..du.len()).map(|j| (after.field[j] - p.before.field[j]) * inv).collect();
        let sample = &mut self.conservation[p.index];
        sample.continuity_residual = Some(norm_sq(disc, &residual, 1).sqrt());
        sample.field_rate = Some(norm_sq(disc, &rate, 1).sqrt());
    }
}

/// Time step, step count and stride for a config.
pub fn schedule(config: &SolverConfig, solver: &KineticSolver, h0: &HermiteCoefField) -> Result<(f64, usize, usize)> {
    let regime = config.regime;
    let limit = solver.stability_limit(h0)?;
    let mut dt = match config.dt {
        Some(dt) if dt > limit => return Err(Error::StepTooLarge { dt, limit }),
        Some(dt) => dt,
        // Derived steps also resolve the sampling scale of the Lyapunov check.
        None => limit.min(0.01 * regime.epsilon()),
    };
    if let Some(kappa) = config.collision_resolution {
        dt = dt.min(kappa * regime.epsilon() * regime.delta());
    }
    if config.t_end == 0.0 {
        return Ok((dt, 0, 1));
    }
    let n_steps = (config.t_end / dt).ceil().max(1.0) as usize;
    let dt = config.t_end / n_steps as f64;
    let stride = config.stride.unwrap_or_else(|| ((0.01 * regime.epsilon() / dt).floor() as usize).max(1));
    Ok((dt, n_steps, stride))
}

/// Integrates `config` to `t_end`, sampling the ledger every `stride` steps
/// and at `t_end`.
pub fn run(config: &SolverConfig) -> std::result::Result<RunRecord, Box<RunAbort>> {
    let started = Instant::now();
    let provenance = |wall: f64| Provenance {
        config_hash: config.hash(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        wall_time_s: wall,
    };
    let empty = |error: Error| {
        Box::new(RunAbort {
            record: RunRecord {
                config: config.clone(),
                initial: InitialReport {
                    amplitude: 0.0,
                    e_h: 0.0,
                    e_phi: 0.0,
                    measure: 0.0,
                    threshold: 0.0,
                    margin: 0.0,
                    smallness_held: false,
                },
                dt: 0.0,
                stride: 0,
                steps_taken: 0,
                ledgers: Vec::new(),
                conservation: Vec::new(),
                checks: CheckReport::new(),
                rates: BTreeMap::new(),
                provenance: provenance(started.elapsed().as_secs_f64()),
                final_state: None,
            },
            error,
        })
    };

    let setup = (|| -> Result<_> {
        config.validate()?;
        let disc = config.discretization()?;
        let (h0, report) = initial_data(&disc, &config.regime, &config.initial, config.m_max, config.c1)?;
        let solver = KineticSolver::new(disc.clone(), config.regime).with_cfl(config.cfl);
        let (dt, n_steps, stride) = schedule(config, &solver, &h0)?;
        Ok((disc, h0, report, solver, dt, n_steps, stride))
    })();
    let (disc, h0, initial, solver, dt, n_steps, stride) = setup.map_err(empty)?;

    let mut runner = Runner {
        disc: &disc,
        solver,
        regime: config.regime,
        m_max: config.m_max,
        dt,
        mass0: Vec::new(),
        ledgers: Vec::new(),
        conservation: Vec::new(),
    };
    let sigma0: Vec<f64> = h0.coeffs().chunks(disc.n_v()).map(|c| c[0]).collect();
    runner.mass0 = runner.masses(&sigma0);
    let mut state = h0;
    let mut steps_done = 0usize;

    let outcome = (|| -> Result<()> {
        runner.sample(&state)?;
        let mut pending: Option<Pending> = None;
        let mut target = 0;
        while target < n_steps {
            target = (target + stride).min(n_steps);
            // Macro state one step before `target`.
            let mut before: Option<Macro> = None;
            if let Some(p) = pending.take() {
                runner.solver.step(&mut state, dt)?;
                steps_done += 1;
                let after = Macro::of(&disc, &state)?;
                runner.finalize(&p, &after);
                before = Some(if steps_done == target { p.at } else { after });
            }
            if steps_done + 1 < target {
                runner.solver.advance(&mut state, dt, target - 1 - steps_done)?;
                steps_done = target - 1;
                before = None;
            }
            if steps_done < target {
                let b = match before.take() {
                    Some(m) => m,
                    None => Macro::of(&disc, &state)?,
                };
                runner.solver.step(&mut state, dt)?;
                steps_done += 1;
                before = Some(b);
            }
            if steps_done == n_steps {
                // Exact final time, free of accumulated rounding.
                state.time = config.t_end;
            }
            let at = runner.sample(&state)?;
            let before = before.expect("every branch above leaves the state one step past `before`");
            pending = Some(Pending { before, at, index: runner.ledgers.len() - 1 });
        }
        if let Some(p) = pending {
            let mut probe = state.clone();
            if runner.solver.step(&mut probe, dt).is_ok() {
                let after = Macro::of(&disc, &probe)?;
                runner.finalize(&p, &after);
            }
        }
        Ok(())
    })();

    let Runner { ledgers, conservation, .. } = runner;
    let mut record = RunRecord {
        config: config.clone(),
        initial,
        dt,
        stride,
        steps_taken: steps_done,
        ledgers,
        conservation,
        checks: CheckReport::new(),
        rates: BTreeMap::new(),
        provenance: provenance(0.0),
        final_state: Some(state),
    };
    record.checks = evaluate(&record);
    record.rates = fit_rates(&record);
    record.provenance.wall_time_s = started.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => Ok(record),
        Err(error) => Err(Box::new(RunAbort { record, error })),
    }
}

/// Rate fits of `E^m_h` and `E^m_φ` for every recorded `m`.
pub fn fit_rates(record: &RunRecord) -> BTreeMap<String, Option<Fit>> {
    let mut rates = BTreeMap::new();
    for m in 0..=record.config.m_max {
        for (name, field_energy) in [("e_h", false), ("e_phi", true)] {
            let series = record.energy_series(m, field_energy);
            rates.insert(format!("{name}_m{m}"), fit_decay_rate(&series, record.config.fit_t_min).ok());
        }
    }
    rates
}

/// Conservation, field-rate, ledger and Lyapunov checks of a record.
pub fn evaluate(record: &RunRecord) -> CheckReport {
    let mut report = CheckReport::new();
    let delta = record.config.regime.delta();
    for c in &record.conservation {
        let loc = Locator::at(c.time, None);
        report.record("mass", -c.mass_drift, 1e-10, loc);
        if let (Some(res), Some(rate)) = (c.continuity_residual, c.field_rate) {
            let tol = res / delta + 1e-8 * c.field_rate_bound.max(rate);
            report.record("field_rate", c.field_rate_bound - rate, tol, loc);
            // Strang splitting transports σ with cosh(κ/2)·u, κ = dt/(εδ),
            // so the relative defect is κ²/8 to leading order.
            let kappa = record.dt / (record.config.regime.epsilon() * delta);
            let scale = c.continuity_scale.max(f64::MIN_POSITIVE);
            report.record("continuity", -res / scale, 0.25 * kappa * kappa + 1e-6, loc);
        }
    }
    for ledger in &record.ledgers {
        report.merge(&ledger_invariants(ledger));
    }
    let regime = record.config.regime;
    for weighted in [false, true] {
        for m in 0..=record.config.m_max {
            let opts = LyapunovOptions { m, weighted, smallness_held: record.initial.smallness_held };
            let family = if weighted { "weighted" } else { "plain" };
            let prefix = format!("lyapunov.{family}.m{m}.");
            match lyapunov_check(&record.ledgers, &regime, opts) {
                Ok(r) => report.merge_prefixed(&prefix, &r),
                Err(Error::UndersampledRecord { spacing, limit }) => {
                    report.record_info(&format!("{prefix}sampling"), limit - spacing, 0.0, Locator::default());
                }
                Err(e) => {
                    log::warn!("lyapunov check skipped: {e}");
                }
            }
        }
    }
    report
}
