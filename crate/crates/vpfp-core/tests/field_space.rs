mod common;

use std::f64::consts::TAU;

use common::*;
use proptest::prelude::*;
use vpfp_core::field_space::{ScalarField, SpatialGrid};
use vpfp_core::Error;

fn grid() -> SpatialGrid {
    SpatialGrid::new(64, TAU).unwrap()
}

#[test]
fn grid_geometry() {
    let g = grid();
    assert_close(g.dx(), TAU / 64.0, 1e-15, "dx");
    let nodes = g.nodes();
    assert_eq!(nodes.len(), 64);
    assert_eq!(nodes[0], 0.0);
    for w in nodes.windows(2) {
        assert_close(w[1] - w[0], g.dx(), 1e-14, "spacing");
    }
    assert!(SpatialGrid::new(6, TAU).is_err());
    assert!(SpatialGrid::new(33, TAU).is_err());
    assert!(SpatialGrid::new(16, -1.0).is_err());
}

#[test]
fn spectral_derivative_examples() {
    let g = grid();
    let d = g.spectral_dx(&g.sample(f64::sin), 1);
    assert_vec_close(&d.values, &g.sample(f64::cos).values, 1e-12, "d sin");

    let c = g.sample(|_| 3.5);
    for order in 1..4 {
        assert!(g.spectral_dx(&c, order).max_abs() < 1e-12, "constant, order {order}");
    }

    let d2 = g.spectral_dx(&g.sample(|x| (3.0 * x).sin()), 2);
    assert_vec_close(&d2.values, &g.sample(|x| -9.0 * (3.0 * x).sin()).values, 1e-11, "d² sin 3x");
}

#[test]
fn spectral_derivative_on_a_nonstandard_length() {
    let length = 3.0;
    let g = SpatialGrid::new(32, length).unwrap();
    let k = TAU / length;
    let d = g.spectral_dx(&g.sample(|x| (2.0 * k * x).cos()), 1);
    assert_vec_close(&d.values, &g.sample(|x| -2.0 * k * (2.0 * k * x).sin()).values, 1e-11, "d cos");
}

#[test]
fn poisson_examples() {
    let g = grid();
    let (phi, e) = g.solve_poisson(&g.sample(f64::sin)).unwrap();
    assert_vec_close(&phi.values, &g.sample(f64::sin).values, 1e-13, "φ of sin");
    assert_vec_close(&e.values, &g.sample(f64::cos).values, 1e-13, "E of sin");

    let (phi, e) = g.solve_poisson(&ScalarField::zeros(64)).unwrap();
    assert!(phi.max_abs() == 0.0 && e.max_abs() == 0.0);

    let (phi, _) = g.solve_poisson(&g.sample(|x| (2.0 * x).sin())).unwrap();
    assert_vec_close(&phi.values, &g.sample(|x| (2.0 * x).sin() / 4.0).values, 1e-13, "φ of sin 2x");
}

#[test]
fn poisson_rejects_charged_data() {
    let g = grid();
    let sigma = g.sample(|x| 0.1 + x.sin());
    assert!(matches!(g.solve_poisson(&sigma), Err(Error::MassImbalance { .. })));
    let mut e = vec![0.0; 64];
    assert!(g.field_into(&sigma.values, &mut e, &mut g.scratch()).is_err());
}

#[test]
fn field_into_matches_solve_poisson() {
    let g = grid();
    let sigma = g.sample(|x| (x).cos() - 0.3 * (5.0 * x).sin());
    let (_, e) = g.solve_poisson(&sigma).unwrap();
    let mut e2 = vec![0.0; 64];
    g.field_into(&sigma.values, &mut e2, &mut g.scratch()).unwrap();
    assert_vec_close(&e2, &e.values, 1e-14, "field");
}

#[test]
fn integrals_are_exact_on_trigonometric_polynomials() {
    let g = grid();
    let c = g.sample(|x| (3.0 * x).cos());
    assert_close(g.inner(&c.values, &c.values), TAU / 2.0, 1e-12, "∫cos²");
    assert_close(g.integrate(&c.values), 0.0, 1e-13, "∫cos");
}

fn neutral_field() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 32).prop_map(|mut v| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        v
    })
}

proptest! {
    #[test]
    fn poisson_residual_and_gauge(sigma in neutral_field()) {
        let g = SpatialGrid::new(32, TAU).unwrap();
        let s = ScalarField::from_values(sigma).unwrap();
        let (phi, e) = g.solve_poisson(&s).unwrap();
        prop_assert!(g.mean(&phi.values).abs() < 1e-14);
        let lap = g.spectral_dx(&phi, 2);
        let scale = s.max_abs();
        for (l, v) in lap.values.iter().zip(&s.values) {
            prop_assert!((l + v).abs() <= 1e-10 * scale);
        }
        let de = g.spectral_dx(&phi, 1);
        for (a, b) in de.values.iter().zip(&e.values) {
            prop_assert!((a - b).abs() <= 1e-12 * scale.max(1.0));
        }
    }
}
