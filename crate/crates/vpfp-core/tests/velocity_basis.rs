mod common;

use common::*;
use proptest::prelude::*;
use vpfp_core::velocity_basis::{HermiteBasis, MomentSpec, VelocityVector, LAMBDA0};
use vpfp_core::Error;

fn basis(n: usize) -> HermiteBasis {
    HermiteBasis::new(n).unwrap()
}

/// `L h` by the trapezoid oracle on `(p'' − v p') √M`, projected on `φ_j`.
fn l_oracle(coeffs: &[f64]) -> Vec<f64> {
    project(
        |v| {
            let (_, dp, ddp) = polynomial_part(coeffs, v);
            (ddp - v * dp) * gaussian(v).sqrt()
        },
        coeffs.len(),
    )
}

fn nu_oracle(coeffs: &[f64]) -> f64 {
    integrate_v(|v| {
        let h = hermite_function(coeffs, v);
        let dh = hermite_function_dv(coeffs, v);
        (1.0 + v * v) * h * h + dh * dh
    })
}

#[test]
fn gram_matrix_is_identity() {
    let n = 12;
    for i in 0..n {
        for j in 0..n {
            let g = integrate_v(|v| hermite_function(&unit(n, i), v) * hermite_function(&unit(n, j), v));
            assert_close(g, if i == j { 1.0 } else { 0.0 }, 1e-10, &format!("gram[{i}][{j}]"));
        }
    }
}

#[test]
fn library_quadrature_integrates_polynomials_against_maxwellian() {
    let b = basis(8);
    // Exact for degree ≤ 31 with 16 nodes; ∫v^{2k} M = (2k−1)!!.
    let mut odd_double_factorial = 1.0;
    for k in 0..16 {
        let moment: f64 = b.quad_nodes().iter().zip(b.quad_weights()).map(|(v, w)| w * v.powi(2 * k)).sum();
        assert_close(moment / odd_double_factorial, 1.0, 1e-12, &format!("v^{}", 2 * k));
        odd_double_factorial *= (2 * k + 1) as f64;
    }
}

#[test]
fn l_annihilates_maxwellian_mode() {
    let b = basis(8);
    let lh = b.apply_l(&VelocityVector::unit(8, 0)).unwrap();
    assert!(lh.coeffs.iter().all(|&c| c == 0.0));
}

#[test]
fn l_on_first_modes_matches_oracle() {
    let b = basis(8);
    for (k, eig) in [(1, -1.0), (2, -2.0)] {
        let want: Vec<f64> = unit(8, k).iter().map(|c| c * eig).collect();
        assert_vec_close(&l_oracle(&unit(8, k)), &want, 1e-9, "oracle sanity");
        let fast = b.apply_l(&VelocityVector::unit(8, k)).unwrap();
        let quad = b.apply_l_quadrature(&VelocityVector::unit(8, k)).unwrap();
        assert_vec_close(&fast.coeffs, &want, 1e-12, "diagonal L");
        assert_vec_close(&quad.coeffs, &want, 1e-8, "quadrature L");
    }
}

#[test]
fn l_is_diagonal_at_every_retained_mode() {
    let n = 64;
    let b = basis(n);
    for k in 0..n {
        let quad = b.apply_l_quadrature(&VelocityVector::unit(n, k)).unwrap();
        let scale = (k as f64).max(1.0);
        for (j, c) in quad.coeffs.iter().enumerate() {
            let want = if j == k { -(k as f64) } else { 0.0 };
            assert!((c - want).abs() / scale < 1e-8, "mode {k}, coefficient {j}: {c:e}");
        }
    }
}

#[test]
fn l_agrees_with_oracle_on_a_mixed_vector() {
    let coeffs = [0.3, -0.7, 0.2, 0.05, -0.4, 0.1];
    let b = basis(coeffs.len());
    let fast = b.apply_l(&VelocityVector::from_coeffs(coeffs.to_vec()).unwrap()).unwrap();
    assert_vec_close(&fast.coeffs, &l_oracle(&coeffs), 1e-8, "L mixed");
}

#[test]
fn multiply_v_examples() {
    let n = 6;
    let b = basis(n);
    for k in [0, 1] {
        let oracle = project(|v| v * hermite_function(&unit(n, k), v), n);
        let got = b.multiply_v(&VelocityVector::unit(n, k)).unwrap();
        assert_vec_close(&got.coeffs, &oracle, 1e-9, &format!("v φ_{k}"));
    }
    let v1 = b.multiply_v(&VelocityVector::unit(n, 1)).unwrap();
    assert_vec_close(&v1.coeffs, &[1.0, 0.0, 2f64.sqrt(), 0.0, 0.0, 0.0], 1e-15, "v φ_1");
    let zero = b.multiply_v(&VelocityVector::zeros(n)).unwrap();
    assert!(zero.coeffs.iter().all(|&c| c == 0.0));
}

#[test]
fn multiply_v_drops_the_top_outflow() {
    let n = 4;
    let b = basis(n);
    let got = b.multiply_v(&VelocityVector::unit(n, n - 1)).unwrap();
    assert_vec_close(&got.coeffs, &[0.0, 0.0, 3f64.sqrt(), 0.0], 1e-15, "v φ_3 truncated");
    assert_eq!(b.multiply_v_exact(&unit(n, n - 1)).len(), n + 1);
}

#[test]
fn dimension_mismatch_is_a_contract_violation() {
    let b = basis(8);
    let short = VelocityVector::zeros(5);
    assert!(matches!(b.apply_l(&short), Err(Error::ContractViolation(_))));
    assert!(matches!(b.apply_l_quadrature(&short), Err(Error::ContractViolation(_))));
    assert!(matches!(b.multiply_v(&short), Err(Error::ContractViolation(_))));
    assert!(matches!(HermiteBasis::new(1), Err(Error::ContractViolation(_))));
    assert!(VelocityVector::from_coeffs(vec![1.0, f64::NAN]).is_err());
}

#[test]
fn projection_examples() {
    let b = basis(6);
    let p0 = b.project_pi(&VelocityVector::unit(6, 0));
    assert_eq!((p0.sigma, p0.u), (1.0, 0.0));
    assert!(p0.remainder.coeffs.iter().all(|&c| c == 0.0));

    let p1 = b.project_pi(&VelocityVector::unit(6, 1));
    assert_eq!((p1.sigma, p1.u), (0.0, 1.0));
    assert!(p1.remainder.coeffs.iter().all(|&c| c == 0.0));
    // v√M has unit norm because ∫v²M = 1.
    assert_close(integrate_v(|v| v * v * gaussian(v)), 1.0, 1e-12, "∫v²M");

    let p2 = b.project_pi(&VelocityVector::unit(6, 2));
    assert_eq!((p2.sigma, p2.u), (0.0, 0.0));
    assert_eq!(p2.remainder.coeffs, unit(6, 2));
}

#[test]
fn nu_norm_examples() {
    let n = 8;
    let b = basis(n);
    assert_close(nu_oracle(&unit(n, 0)), 9.0 / 4.0, 1e-10, "oracle √M");
    assert_close(nu_oracle(&unit(n, 2)), 7.25, 1e-10, "oracle φ_2");
    assert_close(b.nu_norm_sq(&VelocityVector::unit(n, 0)), 9.0 / 4.0, 1e-12, "√M");
    assert_close(b.nu_norm_sq(&VelocityVector::unit(n, 2)), 7.25, 1e-12, "φ_2");
    assert_eq!(b.nu_norm_sq(&VelocityVector::zeros(n)), 0.0);
}

#[test]
fn nu_norm_of_the_top_mode_is_the_untruncated_norm() {
    let n = 5;
    let b = basis(n);
    let h = VelocityVector::unit(n, n - 1);
    let want = nu_oracle(&unit(n, n - 1));
    assert_close(b.nu_norm_sq(&h), want, 1e-9, "closed form");
    assert_close(b.nu_norm_sq_quadrature(&h).unwrap(), want, 1e-9, "quadrature");
}

#[test]
fn maxwellian_moment_table() {
    let b = basis(32);
    let cases = [
        ("mass", 1.0),
        ("v2", 1.0),
        ("v4", 3.0),
        ("abs_v3", 4.0 / (2.0 * std::f64::consts::PI).sqrt()),
        ("dv_v_sqrt_m", 0.75),
    ];
    for (name, want) in cases {
        let spec: MomentSpec = name.parse().unwrap();
        assert_close(b.maxwellian_moment(spec), want, 1e-12, name);
    }
    assert!(4.0 / (2.0 * std::f64::consts::PI).sqrt() <= 2.0);
    assert!(matches!("v6".parse::<MomentSpec>(), Err(Error::ContractViolation(_))));
}

#[test]
fn abs_third_moment_matches_an_independent_integral() {
    let b = basis(16);
    let want = integrate_v(|v| v.abs().powi(3) * gaussian(v));
    assert_close(b.maxwellian_moment(MomentSpec::AbsThirdMoment), want, 1e-10, "|v|³");
}

#[test]
fn coercivity_margin_examples() {
    let n = 8;
    let b = basis(n);
    assert_close(b.coercivity_margin(&VelocityVector::unit(n, 1)), 0.0, 1e-14, "v√M");
    assert_close(b.coercivity_margin(&VelocityVector::unit(n, 0)), 0.0, 1e-14, "√M");
    let want = 2.0 - LAMBDA0 * nu_oracle(&unit(n, 2));
    assert_close(b.coercivity_margin(&VelocityVector::unit(n, 2)), want, 1e-10, "φ_2");
    assert_close(want, 2.0 - 7.25 / 7.0, 1e-10, "φ_2 closed form");
}

fn coeff_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #[test]
    fn pythagoras_of_projection(c in coeff_vector(16)) {
        let b = basis(16);
        let h = VelocityVector::from_coeffs(c).unwrap();
        let p = b.project_pi(&h);
        let total = h.norm_sq();
        let parts = p.sigma * p.sigma + p.u * p.u + p.remainder.norm_sq();
        prop_assert!((total - parts).abs() <= 1e-12 * total.max(1e-300));
    }

    #[test]
    fn nu_norm_dominates_and_matches_quadrature(c in coeff_vector(12)) {
        let b = basis(12);
        let h = VelocityVector::from_coeffs(c).unwrap();
        let nu = b.nu_norm_sq(&h);
        prop_assert!(nu >= h.norm_sq());
        let q = b.nu_norm_sq_quadrature(&h).unwrap();
        prop_assert!((nu - q).abs() <= 1e-10 * nu.max(1.0));
    }

    #[test]
    fn coercivity_margin_is_nonnegative(c in coeff_vector(24)) {
        let b = basis(24);
        let h = VelocityVector::from_coeffs(c).unwrap();
        prop_assert!(b.coercivity_margin(&h) >= -1e-10 * b.nu_norm_sq(&h));
    }

    #[test]
    fn dissipation_identity_on_the_remainder(c in coeff_vector(16)) {
        let b = basis(16);
        let h = VelocityVector::from_coeffs(c).unwrap();
        let r = b.project_pi(&h).remainder;
        let lhs = b.dissipation(&r);
        let dv: f64 = b.dv_exact(&r.coeffs).iter().map(|x| x * x).sum();
        let vh: f64 = b.multiply_v_exact(&r.coeffs).iter().map(|x| x * x).sum();
        let rhs = dv + 0.25 * vh - 0.5 * r.norm_sq();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1e-12));
        prop_assert!(lhs >= r.norm_sq() - 1e-10);
    }
}
