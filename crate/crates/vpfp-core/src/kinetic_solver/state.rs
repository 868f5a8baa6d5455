use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Hermite coefficients of `h`, laid out `[z][x][k]` (Hermite index fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteCoefField {
    n_z: usize,
    n_x: usize,
    n_v: usize,
    coeffs: Vec<f64>,
    pub time: f64,
}

impl HermiteCoefField {
    pub fn zeros(n_z: usize, n_x: usize, n_v: usize) -> Self {
        Self { n_z, n_x, n_v, coeffs: vec![0.0; n_z * n_x * n_v], time: 0.0 }
    }

    pub fn from_coeffs(n_z: usize, n_x: usize, n_v: usize, coeffs: Vec<f64>, time: f64) -> Result<Self> {
        if coeffs.len() != n_z * n_x * n_v {
            return Err(contract(format!(
                "{} coefficients for a {n_z}x{n_x}x{n_v} tensor",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !time.is_finite() {
            return Err(contract("coefficients and time must be finite"));
        }
        Ok(Self { n_z, n_x, n_v, coeffs, time })
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn node_len(&self) -> usize {
        self.n_x * self.n_v
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn index(&self, z: usize, x: usize, k: usize) -> usize {
        (z * self.n_x + x) * self.n_v + k
    }

    pub fn get(&self, z: usize, x: usize, k: usize) -> f64 {
        self.coeffs[self.index(z, x, k)]
    }

    pub fn set(&mut self, z: usize, x: usize, k: usize, value: f64) {
        let i = self.index(z, x, k);
        self.coeffs[i] = value;
    }

    pub fn node(&self, z: usize) -> &[f64] {
        let len = self.node_len();
        &self.coeffs[z * len..(z + 1) * len]
    }

    /// x-profile of Hermite coefficient `k` at node `z`; `k = 0` is σ, `k = 1` is u.
    pub fn moment(&self, z: usize, k: usize) -> Vec<f64> {
        (0..self.n_x).map(|x| self.get(z, x, k)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        crate::field_space::max_abs(&self.coeffs)
    }

    /// Zero x-mean of σ at every node.
    pub fn check_neutral(&self) -> Result<()> {
        for z in 0..self.n_z {
            let sigma = self.moment(z, 0);
            let mean = sigma.iter().sum::<f64>() / self.n_x as f64;
            let scale = crate::field_space::max_abs(&sigma).max(1.0);
            if mean.abs() > 1e-10 * scale {
                return Err(Error::MassImbalance { mean, z_node: z });
            }
        }
        Ok(())
    }
}
