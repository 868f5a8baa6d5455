//! Subcommand bodies. Each returns the process exit code: 0 success,
//! 1 a failed run or check, 2 a schema error (or, for `verify`, deviations
//! that are informational only).

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use vpfp_core::hypo_diagnostics::{ledger_invariants, proposition_check, static_inequality_check, CheckReport, Locator};
use vpfp_core::kinetic_solver::{
    initial_data, run, Amplitude, InitialData, InitialKind, RegimeTag, RunRecord, ScalingRegime, SolverConfig,
};
use vpfp_core::limit_solvers::{DensityState, LimitScheme, LimitSolver};
use vpfp_core::random_space::Distribution;
use vpfp_core::velocity_basis::{HermiteBasis, MomentSpec};
use vpfp_core::{Discretization, Error};

use crate::artifacts::write_run;
use crate::config::{RunFile, SweepSpec};
use crate::plot::plot_csv;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;

/// Flags shared by `run` and `sweep`.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// Recorded in provenance; also reseeds `random_smooth` initial data.
    pub seed: Option<u64>,
    pub stride: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut SolverConfig) {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
            if let InitialKind::RandomSmooth { .. } = cfg.initial.kind {
                cfg.initial.kind = InitialKind::RandomSmooth { seed };
            }
        }
        if let Some(stride) = self.stride {
            cfg.stride = Some(stride);
        }
    }
}

/// One finished or aborted member run.
pub struct MemberOutcome {
    pub dir: PathBuf,
    pub record: RunRecord,
    pub error: Option<String>,
}

fn load(config: &Path, overrides: &Overrides) -> Result<RunFile, i32> {
    let mut file = RunFile::load(config).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_SCHEMA
    })?;
    overrides.apply(&mut file.solver);
    if let Err(e) = file.solver.validate() {
        eprintln!("error: {}: overridden config is invalid: {e}", config.display());
        return Err(EXIT_SCHEMA);
    }
    Ok(file)
}

fn member_dir(out_dir: &Path, file: &RunFile, index: usize, cfg: &SolverConfig) -> PathBuf {
    if file.sweep.is_none() {
        out_dir.to_path_buf()
    } else {
        out_dir.join(format!("member_{index:02}_eps_{:e}", cfg.regime.epsilon()))
    }
}

/// Runs every member in parallel and writes its artifacts.
pub fn run_members(file: &RunFile, out_dir: &Path) -> std::io::Result<Vec<MemberOutcome>> {
    let members = file.members();
    members
        .par_iter()
        .enumerate()
        .map(|(index, cfg)| {
            let dir = member_dir(out_dir, file, index, cfg);
            let (record, error, state) = match run(cfg) {
                Ok(mut record) => {
                    let state = record.final_state.take();
                    (record, None, state)
                }
                Err(abort) => {
                    let abort = *abort;
                    let mut record = abort.record;
                    let state = match abort.error {
                        Error::Blowup { ref last_finite } => Some((**last_finite).clone()),
                        _ => record.final_state.take(),
                    };
                    (record, Some(abort.error.to_string()), state)
                }
            };
            if let Some(e) = &error {
                log::error!("member {index} (ε = {}) aborted: {e}", cfg.regime.epsilon());
            }
            write_run(&dir, file, &record, state.as_ref(), error.as_deref())?;
            let mut record = record;
            record.final_state = state;
            Ok(MemberOutcome { dir, record, error })
        })
        .collect()
}

pub fn cmd_run(config: &Path, out_dir: &Path, overrides: &Overrides) -> i32 {
    let file = match load(config, overrides) {
        Ok(f) => f,
        Err(code) => return code,
    };
    match run_members(&file, out_dir) {
        Ok(outcomes) => {
            for o in &outcomes {
                let status = o.error.as_deref().unwrap_or("completed");
                println!("{}: {status}, {} samples", o.dir.display(), o.record.ledgers.len());
            }
            if outcomes.iter().any(|o| o.error.is_some()) { EXIT_FAILURE } else { EXIT_OK }
        }
        Err(e) => {
            eprintln!("error: writing artifacts under {}: {e}", out_dir.display());
            EXIT_FAILURE
        }
    }
}

/// Max over z-nodes of `‖σ_kin(t_end) − σ_lim(t_end)‖₂`, the limit started
/// from the kinetic `σ(0)`. `None` for custom regimes or when the limit
/// solve fails.
pub fn limit_gap(cfg: &SolverConfig, record: &RunRecord, limit_dt: f64) -> Option<f64> {
    let parabolic = match cfg.regime.tag() {
        RegimeTag::Parabolic => true,
        RegimeTag::HighField => false,
        RegimeTag::Custom => return None,
    };
    let state = record.final_state.as_ref()?;
    let disc = cfg.discretization().ok()?;
    let (h0, _) = initial_data(&disc, &cfg.regime, &cfg.initial, cfg.m_max, cfg.c1).ok()?;
    let sigma0: Vec<Vec<f64>> = (0..disc.n_z()).map(|z| h0.moment(z, 0)).collect();
    let mut limit = DensityState::from_perturbation(sigma0).ok()?;
    let solver = LimitSolver::new(disc.grid.clone(), LimitScheme::Spectral);
    solver.advance_to(&mut limit, state.time, limit_dt, parabolic).ok()?;
    (0..disc.n_z())
        .map(|z| {
            let diff: Vec<f64> = state.moment(z, 0).iter().zip(limit.perturbation(z)).map(|(k, l)| k - l).collect();
            disc.grid.inner(&diff, &diff).sqrt()
        })
        .reduce(f64::max)
}

fn rate_of(record: &RunRecord, key: &str) -> Option<f64> {
    record.rates.get(key).copied().flatten().map(|f| f.rate)
}

/// Cross-run comparison of rates and limit gaps.
pub fn sweep_report(file: &RunFile, outcomes: &[MemberOutcome]) -> Value {
    let spec = file.sweep.clone().unwrap_or(SweepSpec { epsilons: vec![file.solver.regime.epsilon()], limit_dt: 1e-3 });
    let m = file.solver.m_max;
    let (h_key, phi_key) = (format!("e_h_m{m}"), format!("e_phi_m{m}"));
    let members: Vec<Value> = outcomes
        .iter()
        .map(|o| {
            let cfg = &o.record.config;
            json!({
                "epsilon": cfg.regime.epsilon(),
                "dir": o.dir.display().to_string(),
                "status": if o.error.is_some() { "aborted" } else { "completed" },
                "error": o.error,
                "rate_e_h": rate_of(&o.record, &h_key),
                "rate_e_phi": rate_of(&o.record, &phi_key),
                "limit_gap_l2": if o.error.is_none() { limit_gap(cfg, &o.record, spec.limit_dt) } else { None },
            })
        })
        .collect();

    let phi_rates: Option<Vec<f64>> = outcomes.iter().map(|o| rate_of(&o.record, &phi_key)).collect();
    let phi_spread = phi_rates.filter(|r| !r.is_empty()).map(|r| {
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let (lo, hi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        (hi - lo) / mean.abs()
    });
    // Rate at the smallest ε over the rate at the largest.
    let by_eps = |pick_min: bool| {
        outcomes.iter().min_by(|a, b| {
            let (ea, eb) = (a.record.config.regime.epsilon(), b.record.config.regime.epsilon());
            if pick_min { ea.total_cmp(&eb) } else { eb.total_cmp(&ea) }
        })
    };
    let h_ratio = match (by_eps(true), by_eps(false)) {
        (Some(small), Some(large)) => match (rate_of(&small.record, &h_key), rate_of(&large.record, &h_key)) {
            (Some(a), Some(b)) if b != 0.0 => Some(a / b),
            _ => None,
        },
        _ => None,
    };
    json!({
        "m": m,
        "members": members,
        "e_phi_rate_spread": phi_spread,
        "e_h_rate_ratio_smallest_to_largest_eps": h_ratio,
        "failed_members": outcomes.iter().filter(|o| o.error.is_some()).count(),
    })
}

fn display(x: &Value) -> String {
    x.as_f64().map_or_else(|| "undefined".to_string(), |v| format!("{v:.4e}"))
}

pub fn cmd_sweep(config: &Path, out_dir: &Path, overrides: &Overrides) -> i32 {
    let file = match load(config, overrides) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let outcomes = match run_members(&file, out_dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: writing artifacts under {}: {e}", out_dir.display());
            return EXIT_FAILURE;
        }
    };
    let report = sweep_report(&file, &outcomes);
    println!("{:>10}  {:>10}  {:>12}  {:>12}  {:>12}", "epsilon", "status", "rate E_h", "rate E_phi", "limit gap");
    for m in report["members"].as_array().into_iter().flatten() {
        println!(
            "{:>10}  {:>10}  {:>12}  {:>12}  {:>12}",
            display(&m["epsilon"]),
            m["status"].as_str().unwrap_or(""),
            display(&m["rate_e_h"]),
            display(&m["rate_e_phi"]),
            display(&m["limit_gap_l2"]),
        );
    }
    println!("E_phi rate spread: {}", display(&report["e_phi_rate_spread"]));
    println!("E_h rate ratio (smallest/largest ε): {}", display(&report["e_h_rate_ratio_smallest_to_largest_eps"]));
    let path = out_dir.join("sweep.json");
    let written = std::fs::create_dir_all(out_dir).and_then(|()| {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(&path, text + "\n")
    });
    if let Err(e) = written {
        eprintln!("error: writing {}: {e}", path.display());
        return EXIT_FAILURE;
    }
    if outcomes.iter().any(|o| o.error.is_some()) { EXIT_FAILURE } else { EXIT_OK }
}

/// The no-dynamics property suite.
pub fn verify_report(seed: u64) -> vpfp_core::Result<CheckReport> {
    let mut report = CheckReport::new();
    let basis = HermiteBasis::new(64)?;
    let table = [
        (MomentSpec::Mass, 1.0, "mass"),
        (MomentSpec::SecondMoment, 1.0, "v2"),
        (MomentSpec::FourthMoment, 3.0, "v4"),
        (MomentSpec::AbsThirdMoment, 4.0 / std::f64::consts::TAU.sqrt(), "abs_v3"),
        (MomentSpec::GradientOfMomentumMode, 0.75, "dv_v_sqrt_m"),
    ];
    for (spec, exact, name) in table {
        let err = (basis.maxwellian_moment(spec) - exact).abs();
        report.record(&format!("moment.{name}"), -err, 1e-12, Locator::default());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in [16, 32, 64] {
        report.merge_prefixed(&format!("n{n}."), &proposition_check(&HermiteBasis::new(n)?, 1000, &mut rng));
    }

    let disc = Discretization::new(32, std::f64::consts::TAU, 16, 3, Distribution::Uniform)?;
    for (name, regime) in [("high_field.", ScalingRegime::high_field(0.1)?), ("parabolic.", ScalingRegime::parabolic(0.1)?)] {
        for j in 0..25u64 {
            let amplitude = [1e-3, 0.1, 1.0][j as usize % 3];
            let mut data = InitialData::new(InitialKind::RandomSmooth { seed: seed.wrapping_add(j) }, Amplitude::Absolute(amplitude));
            data.z_beta = 0.5;
            let (h, _) = initial_data(&disc, &regime, &data, 0, 1.0)?;
            let ledger = vpfp_core::hypo_diagnostics::compute_ledger(&disc, &h, &regime, 2)?;
            report.merge_prefixed(name, &ledger_invariants(&ledger));
            if amplitude == 0.1 {
                report.merge_prefixed("c1_10.", &static_inequality_check(&disc, &h, 1.0, 10.0)?);
                report.merge_prefixed("c1_1.", &static_inequality_check(&disc, &h, 1.0, 1.0)?);
            }
        }
    }
    Ok(report)
}

pub fn cmd_verify(seed: u64, out_dir: Option<&Path>) -> i32 {
    // The random states ignore the smallness gate by design; its warnings are noise here.
    log::set_max_level(log::LevelFilter::Error);
    let report = match verify_report(seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    print!("{}", report.table());
    if let Some(dir) = out_dir {
        let path = dir.join("verify.toml");
        if let Err(e) = std::fs::create_dir_all(dir).and_then(|()| std::fs::write(&path, report.to_text())) {
            eprintln!("error: writing {}: {e}", path.display());
            return EXIT_FAILURE;
        }
    }
    report.exit_code()
}

pub fn cmd_plot(input: &Path, output: &Path, columns: &[String]) -> i32 {
    match plot_csv(input, output, columns) {
        Ok(()) => {
            println!("{}", output.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
