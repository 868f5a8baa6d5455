mod common;

use std::f64::consts::TAU;

use common::*;
use vpfp_core::checkpoint::{read_checkpoint, write_checkpoint};
use vpfp_core::kinetic_solver::*;
use vpfp_core::random_space::Distribution;
use vpfp_core::velocity_basis::LAMBDA0;
use vpfp_core::{Discretization, Error};

fn disc(n_x: usize, n_v: usize, n_z: usize) -> Discretization {
    Discretization::new(n_x, TAU, n_v, n_z, Distribution::Uniform).unwrap()
}

fn homogeneous(d: &Discretization, mode: usize, value: f64) -> HermiteCoefField {
    let mut h = HermiteCoefField::zeros(d.n_z(), d.n_x(), d.n_v());
    for z in 0..d.n_z() {
        for x in 0..d.n_x() {
            h.set(z, x, mode, value);
        }
    }
    h
}

fn small_config(regime: ScalingRegime, t_end: f64, initial: InitialData) -> SolverConfig {
    let mut c = SolverConfig::new(regime, t_end, initial);
    c.n_x = 16;
    c.n_v = 8;
    c.n_z = 1;
    c.m_max = 0;
    c
}

#[test]
fn regime_invariants() {
    let hf = ScalingRegime::high_field(0.1).unwrap();
    assert_eq!((hf.delta(), hf.epsilon(), hf.tag()), (1.0, 0.1, RegimeTag::HighField));
    let p = ScalingRegime::parabolic(0.1).unwrap();
    assert_eq!((p.delta(), p.epsilon(), p.tag()), (0.1, 0.1, RegimeTag::Parabolic));
    assert_eq!(p.a_param(), 0.1f64.sqrt());
    assert_eq!(hf.a_param(), 1.0);
    for bad in [0.0, -0.1, 1.5, f64::NAN] {
        assert!(ScalingRegime::high_field(bad).is_err());
        assert!(ScalingRegime::parabolic(bad).is_err());
    }
    assert!(ScalingRegime::custom(0.0, 0.5).is_err());
    assert_eq!(p.with_epsilon(0.01).unwrap().delta(), 0.01);
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let d = disc(16, 8, 2);
    let solver = KineticSolver::new(d.clone(), ScalingRegime::high_field(0.1).unwrap());
    let mut h = HermiteCoefField::zeros(2, 16, 8);
    solver.advance(&mut h, 1e-3, 20).unwrap();
    assert!(h.coeffs().iter().all(|&c| c == 0.0));
    assert_close(h.time, 0.02, 1e-15, "time");
}

#[test]
fn homogeneous_modes_decay_by_the_collision_exponential() {
    let d = disc(16, 8, 1);
    for regime in [ScalingRegime::high_field(0.1).unwrap(), ScalingRegime::parabolic(0.3).unwrap()] {
        let solver = KineticSolver::new(d.clone(), regime);
        let ed = regime.epsilon() * regime.delta();
        let dt = 1e-3;
        for mode in [1usize, 2] {
            let mut h = homogeneous(&d, mode, 0.7);
            solver.step(&mut h, dt).unwrap();
            let want = 0.7 * (-(mode as f64) * dt / ed).exp();
            for x in 0..16 {
                assert_close(h.get(0, x, mode), want, 1e-14, &format!("mode {mode}"));
            }
            let others: f64 = (0..8).filter(|&k| k != mode).map(|k| h.moment(0, k).iter().map(|v| v.abs()).sum::<f64>()).sum();
            assert_eq!(others, 0.0);
        }
    }
}

#[test]
fn mass_is_conserved_by_nonlinear_steps() {
    let d = disc(32, 16, 3);
    let regime = ScalingRegime::high_field(0.1).unwrap();
    let mut data = InitialData::new(InitialKind::Mixed, Amplitude::Absolute(0.2));
    data.z_beta = 0.5;
    let (mut h, _) = initial_data(&d, &regime, &data, 0, 1.0).unwrap();
    let mass = |h: &HermiteCoefField, z: usize| d.grid.integrate(&h.moment(z, 0));
    let before: Vec<f64> = (0..3).map(|z| mass(&h, z)).collect();
    let solver = KineticSolver::new(d.clone(), regime);
    let dt = solver.stability_limit(&h).unwrap();
    solver.advance(&mut h, dt, 200).unwrap();
    for (z, m0) in before.iter().enumerate() {
        assert!((mass(&h, z) - m0).abs() < 1e-10, "node {z}");
    }
    h.check_neutral().unwrap();
}

#[test]
fn oversized_steps_are_rejected_before_stepping() {
    let d = disc(16, 8, 1);
    let solver = KineticSolver::new(d.clone(), ScalingRegime::high_field(0.5).unwrap());
    let data = InitialData::new(InitialKind::SigmaBump, Amplitude::Absolute(0.1));
    let (mut h, _) = initial_data(&d, &solver.regime(), &data, 0, 1.0).unwrap();
    let limit = solver.stability_limit(&h).unwrap();
    let original = h.clone();
    assert!(matches!(solver.step(&mut h, 2.0 * limit), Err(Error::StepTooLarge { .. })));
    assert_eq!(h, original);
    assert!(matches!(solver.step(&mut h, -1.0), Err(Error::StepTooLarge { .. })));
}

#[test]
fn stability_limit_follows_the_transport_and_field_bounds() {
    let d = disc(16, 8, 1);
    let regime = ScalingRegime::parabolic(0.2).unwrap();
    let solver = KineticSolver::new(d.clone(), regime).with_cfl(0.5);
    let zero = HermiteCoefField::zeros(1, 16, 8);
    let transport = 0.5 * 0.2 * d.grid.dx() / 16f64.sqrt();
    assert_close(solver.stability_limit(&zero).unwrap(), transport, 1e-15, "field-free");

    let data = InitialData::new(InitialKind::SigmaBump, Amplitude::Absolute(1.0));
    let (h, _) = initial_data(&d, &regime, &data, 0, 1.0).unwrap();
    // σ = cos x gives ∂xφ = sin x.
    let e_max = solver.max_field(&h).unwrap();
    assert_close(e_max, (0..16).map(|j| (j as f64 * d.grid.dx()).sin().abs()).fold(0.0, f64::max), 1e-13, "E max");
    let field = 0.5 * 0.2 / (e_max * 8f64.sqrt());
    assert_close(solver.stability_limit(&h).unwrap(), transport.min(field), 1e-15, "with field");
}

#[test]
fn non_finite_states_report_blowup_with_the_last_finite_state() {
    let d = disc(16, 8, 1);
    let solver = KineticSolver::new(d.clone(), ScalingRegime::high_field(0.5).unwrap());
    let mut h = HermiteCoefField::zeros(1, 16, 8);
    for x in 0..16 {
        h.set(0, x, 3, 0.5 * f64::MAX * (6.0 * x as f64 * d.grid.dx()).cos());
    }
    let original = h.clone();
    match solver.step(&mut h, 1e-3) {
        Err(Error::Blowup { last_finite }) => assert_eq!(*last_finite, original),
        other => panic!("expected blowup, got {other:?}"),
    }
}

#[test]
fn sigma_bump_energy_and_smallness_report() {
    let d = disc(32, 8, 1);
    let regime = ScalingRegime::high_field(0.1).unwrap();
    let a = 0.3;
    let (h, report) = initial_data(&d, &regime, &InitialData::new(InitialKind::SigmaBump, Amplitude::Absolute(a)), 0, 1.0).unwrap();
    let ledger = vpfp_core::hypo_diagnostics::compute_ledger(&d, &h, &regime, 0).unwrap();
    assert_close(ledger.plain.e_h[0][0], a * a * TAU / 2.0, 1e-12, "E^{0,0}_h of cos x φ_0");
    // ∂x cos = −sin carries the same energy.
    assert_close(report.e_h, a * a * TAU, 1e-12, "E^0_h");
    // Brute-force oracle: Σ_x cos²(x_j)·a²·dx over the grid, mode 0 only.
    let brute: f64 = (0..32).map(|x| h.get(0, x, 0).powi(2)).sum::<f64>() * d.grid.dx();
    assert_close(ledger.plain.e_h[0][0], brute, 1e-12, "grid sum");
    // −φ'' = a cos x gives ∂xφ = a sin x and ∂x²φ = a cos x.
    assert_close(ledger.plain.e_phi[0][0], a * a * TAU / 2.0, 1e-12, "E^{0,0}_φ");
    assert_close(report.e_phi, a * a * TAU, 1e-12, "E^0_φ");
    assert!(!report.smallness_held);
    assert!(report.margin < 0.0);
}

#[test]
fn zero_amplitude_gives_the_zero_state() {
    let d = disc(16, 8, 2);
    let regime = ScalingRegime::parabolic(0.1).unwrap();
    for kind in [InitialKind::SigmaBump, InitialKind::Shear, InitialKind::Mixed, InitialKind::RandomSmooth { seed: 3 }] {
        for amp in [Amplitude::Absolute(0.0), Amplitude::SmallnessFraction(0.0)] {
            let (h, report) = initial_data(&d, &regime, &InitialData::new(kind, amp), 1, 1.0).unwrap();
            assert!(h.coeffs().iter().all(|&c| c == 0.0));
            assert_eq!((report.e_h, report.e_phi, report.measure), (0.0, 0.0, 0.0));
            assert!(report.smallness_held);
        }
    }
}

#[test]
fn smallness_threshold_values() {
    assert_close(smallness_constant_a(1), 3.0 * 2f64.sqrt(), 1e-14, "A(1)");
    assert_close(smallness_constant_a(0), 3.0, 1e-14, "A(0)");
    // A(2) = 2√3·C(2,1) + √3.
    assert_close(smallness_constant_a(2), 5.0 * 3f64.sqrt(), 1e-14, "A(2)");
    let hf = ScalingRegime::high_field(0.1).unwrap();
    let threshold = smallness_threshold(&hf, 1, 1.0);
    let direct = 2.0 * LAMBDA0.powi(3) / (80.0 * 3.0 * 2f64.sqrt()).powi(2);
    assert_close(threshold, direct, 1e-22, "direct formula");
    assert!((threshold - 5.06e-8).abs() < 0.01e-8, "≈ 5.06e-8: {threshold:e}");
    let p = ScalingRegime::parabolic(0.1).unwrap();
    assert_close(smallness_threshold(&p, 1, 1.0), direct / 0.1, 1e-21, "parabolic");
    assert_close(smallness_threshold(&hf, 1, 10.0), direct / 100.0, 1e-23, "C1 = 10");
    assert_close(smallness_measure(&hf, 1.0, 2.0), 1.0 + 200.0, 1e-12, "high-field measure");
    assert_close(smallness_measure(&p, 1.0, 2.0), 1.0 + 20.0, 1e-12, "parabolic measure");
}

#[test]
fn smallness_fraction_sets_the_measure() {
    let d = disc(32, 8, 3);
    for regime in [ScalingRegime::high_field(0.1).unwrap(), ScalingRegime::parabolic(0.01).unwrap()] {
        let mut data = InitialData::new(InitialKind::Mixed, Amplitude::SmallnessFraction(0.5));
        data.z_beta = 0.5;
        let (_, report) = initial_data(&d, &regime, &data, 2, 1.0).unwrap();
        assert_close(report.measure / report.threshold, 0.5, 1e-12, "fraction");
        assert!(report.smallness_held);
        assert_close(report.margin, 0.5 * report.threshold, 1e-12 * report.threshold, "margin");
    }
}

#[test]
fn initial_data_rejects_bad_descriptors() {
    let d = disc(16, 8, 1);
    let regime = ScalingRegime::high_field(0.1).unwrap();
    let bad = [
        InitialData::new(InitialKind::HomogeneousMode { mode: 0 }, Amplitude::Absolute(1.0)),
        InitialData::new(InitialKind::HomogeneousMode { mode: 8 }, Amplitude::Absolute(1.0)),
        InitialData::new(InitialKind::SigmaBump, Amplitude::Absolute(-1.0)),
        InitialData::new(InitialKind::SigmaBump, Amplitude::SmallnessFraction(f64::NAN)),
    ];
    for data in bad {
        assert!(matches!(initial_data(&d, &regime, &data, 0, 1.0), Err(Error::ContractViolation(_))), "{data:?}");
    }
    let ok = InitialData::new(InitialKind::SigmaBump, Amplitude::Absolute(1.0));
    assert!(initial_data(&d, &regime, &ok, 0, 0.0).is_err());
}

#[test]
fn z_profile_scales_each_node() {
    let d = disc(16, 8, 3);
    let regime = ScalingRegime::high_field(0.1).unwrap();
    let mut data = InitialData::new(InitialKind::Shear, Amplitude::Absolute(0.2));
    data.z_beta = 0.5;
    let (h, _) = initial_data(&d, &regime, &data, 0, 1.0).unwrap();
    for (z, &node) in d.colloc.nodes().iter().enumerate() {
        for x in 0..16 {
            let want = 0.2 * (1.0 + 0.5 * node) * (x as f64 * d.grid.dx()).cos();
            assert_close(h.get(z, x, 1), want, 1e-15, "shear profile");
        }
    }
}

#[test]
fn random_smooth_data_is_seeded_and_neutral() {
    let d = disc(32, 8, 1);
    let regime = ScalingRegime::high_field(0.1).unwrap();
    let make = |seed| initial_data(&d, &regime, &InitialData::new(InitialKind::RandomSmooth { seed }, Amplitude::Absolute(1.0)), 0, 1.0).unwrap().0;
    assert_eq!(make(7), make(7));
    assert_ne!(make(7), make(8));
    make(7).check_neutral().unwrap();
}

#[test]
fn run_with_zero_duration_records_the_initial_ledger() {
    let cfg = small_config(ScalingRegime::high_field(0.1).unwrap(), 0.0, InitialData::new(InitialKind::SigmaBump, Amplitude::Absolute(0.01)));
    let rec = run(&cfg).unwrap();
    assert_eq!(rec.ledgers.len(), 1);
    assert_eq!(rec.ledgers[0].time, 0.0);
    assert_eq!(rec.steps_taken, 0);
    assert_close(rec.ledgers[0].plain.e_h[0][0], 1e-4 * TAU / 2.0, 1e-16, "E^{0,0}_h(0)");
}

#[test]
fn zero_data_gives_zero_ledgers() {
    let cfg = small_config(ScalingRegime::parabolic(0.2).unwrap(), 0.05, InitialData::new(InitialKind::Mixed, Amplitude::Absolute(0.0)));
    let rec = run(&cfg).unwrap();
    assert!(rec.ledgers.len() > 2);
    for l in &rec.ledgers {
        assert!(l.columns().iter().filter(|(n, _)| !matches!(n.as_str(), "time" | "epsilon" | "delta")).all(|(_, v)| *v == 0.0));
    }
    assert!(rec.rates.values().all(Option::is_none));
    assert!(rec.checks.all_pass(), "{}", rec.checks.to_text());
}

#[test]
fn run_samples_are_strictly_increasing_and_end_at_t_end() {
    let mut cfg = small_config(ScalingRegime::high_field(0.2).unwrap(), 0.1, InitialData::new(InitialKind::SigmaBump, Amplitude::Absolute(0.01)));
    cfg.stride = Some(3);
    let rec = run(&cfg).unwrap();
    assert!(rec.ledgers.windows(2).all(|w| w[1].time > w[0].time));
    assert_eq!(rec.ledgers.last().unwrap().time, 0.1);
    assert_eq!(rec.steps_taken, (0.1 / rec.dt).round() as usize);
    let expected = rec.steps_taken.div_ceil(3) + 1;
    assert_eq!(rec.ledgers.len(), expected);
    assert_eq!(rec.final_state.as_ref().unwrap().time, 0.1);
    assert!(rec.max_mass_drift() < 1e-10);
}

#[test]
fn run_records_conservation_and_continuity() {
    let cfg = small_config(ScalingRegime::parabolic(0.1).unwrap(), 0.2, InitialData::new(InitialKind::Mixed, Amplitude::Absolute(0.01)));
    let rec = run(&cfg).unwrap();
    for id in ["mass", "continuity", "field_rate"] {
        let e = rec.checks.get(id).unwrap_or_else(|| panic!("missing {id}"));
        assert!(e.passes(), "{id}: {e:?}");
    }
    // Centered differences need a sample on each side; t = 0 has none.
    assert!(rec.conservation[0].continuity_residual.is_none());
    assert!(rec.conservation[1..].iter().all(|c| c.continuity_residual.is_some()));
    assert!(rec.conservation.iter().all(|c| c.mean_u < 1e-12));
}

#[test]
fn explicit_step_above_the_limit_aborts_with_a_partial_record() {
    let mut cfg = small_config(ScalingRegime::high_field(0.1).unwrap(), 0.1, InitialData::new(InitialKind::SigmaBump, Amplitude::Absolute(0.01)));
    cfg.dt = Some(1.0);
    let abort = run(&cfg).unwrap_err();
    assert!(matches!(abort.error, Error::StepTooLarge { .. }));
    assert!(abort.record.ledgers.is_empty());
    assert_eq!(abort.record.provenance.config_hash, cfg.hash());
}

#[test]
fn collision_resolution_caps_the_step() {
    let mut cfg = small_config(ScalingRegime::parabolic(0.1).unwrap(), 0.01, InitialData::new(InitialKind::SigmaBump, Amplitude::Absolute(0.01)));
    cfg.collision_resolution = Some(0.05);
    let rec = run(&cfg).unwrap();
    assert!(rec.dt <= 0.05 * 0.1 * 0.1 * (1.0 + 1e-12));
}

#[test]
fn config_hash_is_stable_under_reserialization() {
    let cfg = SolverConfig::new(ScalingRegime::parabolic(0.03).unwrap(), 1.0, InitialData::new(InitialKind::RandomSmooth { seed: 4 }, Amplitude::SmallnessFraction(0.5)));
    let json = serde_json::to_string(&cfg).unwrap();
    let back: SolverConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.hash(), cfg.hash());
    assert_eq!(cfg.hash().len(), 64);
    let mut other = cfg.clone();
    other.seed = 1;
    assert_ne!(other.hash(), cfg.hash());
}

#[test]
fn config_validation() {
    let base = small_config(ScalingRegime::high_field(0.5).unwrap(), 1.0, InitialData::new(InitialKind::SigmaBump, Amplitude::Absolute(0.1)));
    base.validate().unwrap();
    let mut c = base.clone();
    c.m_max = 1;
    assert!(matches!(c.validate(), Err(Error::InsufficientResolution { .. })));
    let mut c = base.clone();
    c.t_end = -1.0;
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.stride = Some(0);
    assert!(c.validate().is_err());
    let mut c = base;
    c.dt = Some(0.0);
    assert!(c.validate().is_err());
}

#[test]
fn checkpoint_round_trip() {
    let d = disc(16, 8, 2);
    let regime = ScalingRegime::high_field(0.1).unwrap();
    let (mut h, _) = initial_data(&d, &regime, &InitialData::new(InitialKind::RandomSmooth { seed: 1 }, Amplitude::Absolute(0.3)), 0, 1.0).unwrap();
    h.time = 0.375;
    let hash = "ab".repeat(32);
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, &h, &hash).unwrap();
    assert_eq!(buf.len(), 112 + 8 * 2 * 16 * 8);
    assert_eq!(&buf[..8], b"VPFPCKPT");
    // First coefficient sits right after the header, little-endian.
    assert_eq!(f64::from_le_bytes(buf[112..120].try_into().unwrap()), h.get(0, 0, 0));
    let (back, back_hash) = read_checkpoint(buf.as_slice()).unwrap();
    assert_eq!(back, h);
    assert_eq!(back_hash, hash);

    let mut corrupt = buf.clone();
    corrupt[0] = b'X';
    assert!(read_checkpoint(corrupt.as_slice()).is_err());
    assert!(read_checkpoint(&buf[..buf.len() - 8]).is_err());
    assert!(write_checkpoint(Vec::new(), &h, "short").is_err());
}

/// E^0_h(t_end) moves by less than 1% when dt halves and n_x, N_v double.
#[test]
fn self_convergence_of_the_sigma_bump() {
    let energy = |n_x: usize, n_v: usize, dt: f64| {
        let mut cfg = SolverConfig::new(ScalingRegime::parabolic(0.1).unwrap(), 0.5, InitialData::new(InitialKind::SigmaBump, Amplitude::SmallnessFraction(0.5)));
        cfg.n_x = n_x;
        cfg.n_v = n_v;
        cfg.n_z = 1;
        cfg.m_max = 0;
        cfg.dt = Some(dt);
        cfg.stride = Some(1_000_000);
        run(&cfg).unwrap().ledgers.last().unwrap().plain.e_h_total(0)
    };
    let coarse = energy(32, 32, 4e-4);
    let fine = energy(64, 64, 2e-4);
    assert!(((coarse - fine) / fine).abs() < 0.01, "coarse {coarse:e}, fine {fine:e}");
}
