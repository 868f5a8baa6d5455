//! Periodic grid on `[0, L)` with Fourier differentiation and the Poisson
//! solve `-φ'' = σ` in the zero-mean gauge.
//!
//! Odd-order derivatives zero the Nyquist mode so they map real fields to
//! real fields; even orders keep it.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(contract("scalar field entries must be finite"));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Reusable FFT buffers for the allocation-free kernels.
#[derive(Debug, Clone)]
pub struct SpectralScratch {
    buf: Vec<Complex<f64>>,
    work: Vec<Complex<f64>>,
}

#[derive(Clone)]
pub struct SpatialGrid {
    n_x: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for SpatialGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpatialGrid")
            .field("n_x", &self.n_x)
            .field("length", &self.length)
            .finish()
    }
}

impl SpatialGrid {
    pub fn new(n_x: usize, length: f64) -> Result<Self> {
        if n_x < 8 || !n_x.is_multiple_of(2) {
            return Err(contract(format!("n_x must be even and at least 8, got {n_x}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(contract(format!("domain length must be positive, got {length}")));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_x);
        let inverse = planner.plan_fft_inverse(n_x);
        let base = 2.0 * PI / length;
        let wavenumbers = (0..n_x)
            .map(|j| {
                let signed = if j <= n_x / 2 { j as f64 } else { j as f64 - n_x as f64 };
                base * signed
            })
            .collect();
        Ok(Self { n_x, length, forward, inverse, wavenumbers })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_x as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_x).map(|j| j as f64 * self.dx()).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { values: self.nodes().into_iter().map(f).collect() }
    }

    /// Signed angular wavenumber of FFT bin `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        self.wavenumbers[j]
    }

    pub fn scratch(&self) -> SpectralScratch {
        let zero = Complex::new(0.0, 0.0);
        let work_len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        SpectralScratch { buf: vec![zero; self.n_x], work: vec![zero; work_len] }
    }

    /// `sum f dx`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.dx() * f.iter().sum::<f64>()
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.dx() * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() / f.len() as f64
    }

    fn transform(&self, f: &[f64], s: &mut SpectralScratch) {
        for (b, &v) in s.buf.iter_mut().zip(f) {
            *b = Complex::new(v, 0.0);
        }
        self.forward.process_with_scratch(&mut s.buf, &mut s.work);
    }

    fn inverse_into(&self, out: &mut [f64], s: &mut SpectralScratch) {
        self.inverse.process_with_scratch(&mut s.buf, &mut s.work);
        let norm = 1.0 / self.n_x as f64;
        for (o, b) in out.iter_mut().zip(&s.buf) {
            *o = b.re * norm;
        }
    }

    /// DFT of a real field, unnormalized.
    pub(crate) fn spectrum(&self, f: &[f64], s: &mut SpectralScratch) -> Vec<Complex<f64>> {
        self.transform(f, s);
        s.buf.clone()
    }

    /// Real part of the normalized inverse DFT.
    pub(crate) fn inverse_spectrum(&self, hat: &[Complex<f64>], out: &mut [f64], s: &mut SpectralScratch) {
        s.buf.copy_from_slice(hat);
        self.inverse_into(out, s);
    }

    fn derivative_symbol(&self, j: usize, order: u32) -> Complex<f64> {
        if order % 2 == 1 && j == self.n_x / 2 {
            return Complex::new(0.0, 0.0);
        }
        Complex::new(0.0, self.wavenumbers[j]).powu(order)
    }

    /// `d^order f / dx^order` written into `out`.
    pub fn dx_into(&self, f: &[f64], order: u32, out: &mut [f64], s: &mut SpectralScratch) {
        debug_assert_eq!(f.len(), self.n_x);
        if order == 0 {
            out.copy_from_slice(f);
            return;
        }
        self.transform(f, s);
        for j in 0..self.n_x {
            s.buf[j] *= self.derivative_symbol(j, order);
        }
        self.inverse_into(out, s);
    }

    pub fn spectral_dx(&self, f: &ScalarField, order: u32) -> ScalarField {
        let mut out = vec![0.0; self.n_x];
        self.dx_into(&f.values, order, &mut out, &mut self.scratch());
        ScalarField { values: out }
    }

    fn check_neutral(&self, sigma: &[f64]) -> Result<()> {
        if sigma.len() != self.n_x {
            return Err(contract(format!("field has {} values, grid has {}", sigma.len(), self.n_x)));
        }
        let mean = self.mean(sigma);
        if mean.abs() > 1e-10 * max_abs(sigma).max(1.0) {
            return Err(Error::MassImbalance { mean, z_node: 0 });
        }
        Ok(())
    }

    /// Electric field `∂xφ` of `-φ'' = σ` written into `e_out`.
    pub fn field_into(&self, sigma: &[f64], e_out: &mut [f64], s: &mut SpectralScratch) -> Result<()> {
        self.check_neutral(sigma)?;
        self.transform(sigma, s);
        s.buf[0] = Complex::new(0.0, 0.0);
        for j in 1..self.n_x {
            let k = self.wavenumbers[j];
            // ik / k^2 = i / k
            s.buf[j] *= if j == self.n_x / 2 { Complex::new(0.0, 0.0) } else { Complex::new(0.0, 1.0 / k) };
        }
        self.inverse_into(e_out, s);
        Ok(())
    }

    /// `(φ, ∂xφ)` with `mean(φ) = 0`.
    pub fn solve_poisson(&self, sigma: &ScalarField) -> Result<(ScalarField, ScalarField)> {
        self.check_neutral(&sigma.values)?;
        let mut s = self.scratch();
        self.transform(&sigma.values, &mut s);
        s.buf[0] = Complex::new(0.0, 0.0);
        for j in 1..self.n_x {
            let k = self.wavenumbers[j];
            s.buf[j] /= k * k;
        }
        let mut phi = vec![0.0; self.n_x];
        let hat_phi = s.buf.clone();
        self.inverse_into(&mut phi, &mut s);
        s.buf = hat_phi;
        for j in 0..self.n_x {
            s.buf[j] *= self.derivative_symbol(j, 1);
        }
        let mut e = vec![0.0; self.n_x];
        self.inverse_into(&mut e, &mut s);
        Ok((ScalarField { values: phi }, ScalarField { values: e }))
    }
}
