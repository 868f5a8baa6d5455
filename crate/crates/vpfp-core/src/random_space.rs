//! Collocation in the random variable `z ∈ [-1, 1]`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    #[default]
    Uniform,
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            other => Err(contract(format!("unsupported z-distribution '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CollocationSet {
    n_z: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Row-major `n_z × n_z`.
    diff: Vec<f64>,
}

impl CollocationSet {
    pub fn new(n_z: usize, dist: Distribution) -> Result<Self> {
        if n_z == 0 {
            return Err(contract("need at least one collocation node"));
        }
        let Distribution::Uniform = dist;
        let rule = gauss_legendre(n_z);
        let nodes = rule.nodes;
        let weights = rule.weights;

        let bary: Vec<f64> = (0..n_z)
            .map(|j| {
                let prod: f64 = (0..n_z).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product();
                1.0 / prod
            })
            .collect();
        let mut diff = vec![0.0; n_z * n_z];
        for i in 0..n_z {
            let mut diag = 0.0;
            for j in 0..n_z {
                if i != j {
                    let d = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                    diff[i * n_z + j] = d;
                    diag -= d;
                }
            }
            diff[i * n_z + i] = diag;
        }
        Ok(Self { n_z, nodes, weights, diff })
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn diff_matrix(&self) -> &[f64] {
        &self.diff
    }

    pub fn integrate(&self, samples: &[f64]) -> f64 {
        samples.iter().zip(&self.weights).map(|(s, w)| s * w).sum()
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order >= self.n_z {
            return Err(Error::InsufficientResolution { order, n_z: self.n_z });
        }
        Ok(())
    }

    pub fn z_derivative(&self, samples: &[f64], order: usize) -> Result<Vec<f64>> {
        if samples.len() != self.n_z {
            return Err(contract(format!(
                "{} samples for {} collocation nodes",
                samples.len(),
                self.n_z
            )));
        }
        self.derivative_blocks(samples, 1, order)
    }

    /// `∂_z^order` of data laid out as `n_z` contiguous blocks of `block` values.
    pub fn derivative_blocks(&self, data: &[f64], block: usize, order: usize) -> Result<Vec<f64>> {
        self.check_order(order)?;
        debug_assert_eq!(data.len(), self.n_z * block);
        let mut cur = data.to_vec();
        for _ in 0..order {
            let mut next = vec![0.0; cur.len()];
            for i in 0..self.n_z {
                let out = &mut next[i * block..(i + 1) * block];
                for j in 0..self.n_z {
                    let d = self.diff[i * self.n_z + j];
                    if d != 0.0 {
                        for (o, c) in out.iter_mut().zip(&cur[j * block..(j + 1) * block]) {
                            *o += d * c;
                        }
                    }
                }
            }
            cur = next;
        }
        Ok(cur)
    }
}
