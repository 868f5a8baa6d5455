use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    /// Slope of `ln(value)` against `t`.
    pub rate: f64,
    pub r_squared: f64,
    pub n_samples: usize,
}

/// Least-squares exponential rate of the samples with `t ≥ t_min`.
pub fn fit_decay_rate(series: &[(f64, f64)], t_min: f64) -> Result<Fit> {
    let window: Vec<(f64, f64)> = series.iter().copied().filter(|(t, _)| *t >= t_min).collect();
    if window.len() < 10 {
        return Err(contract(format!("rate fit needs at least 10 samples, got {}", window.len())));
    }
    if let Some((t, v)) = window.iter().find(|(_, v)| !v.is_finite() || *v <= 0.0) {
        return Err(Error::Domain(format!("cannot fit log of {v} at t = {t}")));
    }
    let n = window.len() as f64;
    let pts: Vec<(f64, f64)> = window.iter().map(|(t, v)| (*t, v.ln())).collect();
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let s_tt: f64 = pts.iter().map(|(t, _)| (t - t_mean).powi(2)).sum();
    let s_ty: f64 = pts.iter().map(|(t, y)| (t - t_mean) * (y - y_mean)).sum();
    if s_tt == 0.0 {
        return Err(contract("rate fit needs distinct sample times"));
    }
    let rate = s_ty / s_tt;
    let s_yy: f64 = pts.iter().map(|(_, y)| (y - y_mean).powi(2)).sum();
    let s_res: f64 = pts
        .iter()
        .map(|(t, y)| (y - y_mean - rate * (t - t_mean)).powi(2))
        .sum();
    // A constant series is fitted exactly.
    let r_squared = if s_yy <= f64::EPSILON * y_mean.abs().max(1.0) * n { 1.0 } else { 1.0 - s_res / s_yy };
    Ok(Fit { rate, r_squared, n_samples: window.len() })
}
