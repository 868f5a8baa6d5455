//! Gauss rules for probability measures from the three-term recurrence of
//! their orthonormal polynomials,
//!
//! ```text
//! x p_k(x) = b_{k+1} p_{k+1}(x) + a_k p_k(x) + b_k p_{k-1}(x),   p_0 = 1.
//! ```
//!
//! Nodes are eigenvalues of the Jacobi matrix, polished by Newton on `p_n`.
//! Weights use the Christoffel formula `w_i = 1 / sum_{k<n} p_k(x_i)^2`,
//! which sums to one for a probability measure.

use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `diag(k) = a_k`, `offdiag(k) = b_k` for `k >= 1`.
pub fn gauss_rule(n: usize, diag: impl Fn(usize) -> f64, offdiag: impl Fn(usize) -> f64) -> GaussRule {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag(i)
        } else if i + 1 == j {
            offdiag(j)
        } else if j + 1 == i {
            offdiag(i)
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    let eval = |x: f64| -> (f64, f64, f64) {
        // (p_n, p_n', sum_{k<n} p_k^2)
        let (mut p_prev, mut p) = (0.0, 1.0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        let mut sum_sq = 0.0;
        for k in 0..n {
            sum_sq += p * p;
            let b_k = if k == 0 { 0.0 } else { offdiag(k) };
            let b_next = offdiag(k + 1);
            let p_next = ((x - diag(k)) * p - b_k * p_prev) / b_next;
            let d_next = ((x - diag(k)) * d + p - b_k * d_prev) / b_next;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
        }
        (p, d, sum_sq)
    };

    let scale = nodes.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, d, _) = eval(*x);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let step = p / d;
            if !step.is_finite() || step.abs() > 1e-6 * scale {
                break;
            }
            *x -= step;
        }
        weights.push(1.0 / eval(*x).2);
    }
    GaussRule { nodes, weights }
}

/// Gauss–Hermite rule for the standard normal weight.
pub fn gauss_hermite(n: usize) -> GaussRule {
    gauss_rule(n, |_| 0.0, |k| (k as f64).sqrt())
}

/// Gauss–Legendre rule for the uniform probability density on [-1, 1].
pub fn gauss_legendre(n: usize) -> GaussRule {
    gauss_rule(n, |_| 0.0, |k| {
        let k = k as f64;
        k / (4.0 * k * k - 1.0).sqrt()
    })
}

/// Gauss–Laguerre rule for the weight `e^{-t}` on [0, inf).
pub fn gauss_laguerre(n: usize) -> GaussRule {
    gauss_rule(n, |k| 2.0 * k as f64 + 1.0, |k| k as f64)
}
