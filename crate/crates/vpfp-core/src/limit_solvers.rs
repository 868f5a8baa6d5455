//! Macroscopic limits of the kinetic system for `ε → 0`, with the field
//! sign of the kinetic equation (acceleration `−∂xφ/ε`):
//!
//! ```text
//! high-field:  ∂t ρ = ∂x(ρ ∂xφ)
//! parabolic:   ∂t ρ = ∂x(∂x ρ + ρ ∂xφ)
//! −∂x²φ = ρ − 1
//! ```
//!
//! Two schemes are offered. `FiniteVolume` is first-order upwind for the
//! drift, with centered diffusion solved implicitly by FFT. `Spectral` is a
//! Fourier-collocation integrating-factor RK4 for `σ = ρ − 1`, exact on the
//! linear part `−σ` (high-field) or `∂x²σ − σ` (parabolic); it serves as the
//! high-accuracy reference for kinetic comparisons.

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::field_space::{max_abs, ScalarField, SpatialGrid, SpectralScratch};

#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    /// `ρ = 1 + σ` per z-node.
    pub rho: Vec<ScalarField>,
    pub time: f64,
    /// Cells clamped to zero density so far.
    pub clamped_cells: usize,
}

impl DensityState {
    /// `ρ = 1 + σ` from per-node perturbations.
    pub fn from_perturbation(sigma: Vec<Vec<f64>>) -> Result<Self> {
        let rho = sigma
            .into_iter()
            .map(|s| ScalarField::from_values(s.into_iter().map(|v| 1.0 + v).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rho, time: 0.0, clamped_cells: 0 })
    }

    pub fn perturbation(&self, z: usize) -> Vec<f64> {
        self.rho[z].values.iter().map(|r| r - 1.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LimitScheme {
    #[default]
    FiniteVolume,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Limit {
    HighField,
    Parabolic,
}

#[derive(Debug, Clone)]
pub struct LimitSolver {
    grid: SpatialGrid,
    scheme: LimitScheme,
    with_field: bool,
}

impl LimitSolver {
    pub fn new(grid: SpatialGrid, scheme: LimitScheme) -> Self {
        Self { grid, scheme, with_field: true }
    }

    /// Drops the self-consistent field, leaving pure transport or diffusion.
    pub fn with_field(mut self, on: bool) -> Self {
        self.with_field = on;
        self
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn scheme(&self) -> LimitScheme {
        self.scheme
    }

    pub fn step_high_field(&self, state: &mut DensityState, dt: f64) -> Result<()> {
        self.step(state, dt, Limit::HighField)
    }

    pub fn step_parabolic(&self, state: &mut DensityState, dt: f64) -> Result<()> {
        self.step(state, dt, Limit::Parabolic)
    }

    /// Steps of size at most `dt` ending exactly at `t_end`.
    pub fn advance_to(&self, state: &mut DensityState, t_end: f64, dt: f64, parabolic: bool) -> Result<()> {
        let remaining = t_end - state.time;
        if remaining <= 0.0 {
            return Ok(());
        }
        let n = (remaining / dt).ceil().max(1.0) as usize;
        let h = remaining / n as f64;
        let t0 = state.time;
        for j in 0..n {
            if parabolic {
                self.step_parabolic(state, h)?;
            } else {
                self.step_high_field(state, h)?;
            }
            state.time = t0 + (j + 1) as f64 * h;
        }
        state.time = t_end;
        Ok(())
    }

    /// `∂xφ` of `−φ'' = ρ − 1`; zero when the field is switched off.
    pub fn field(&self, rho: &[f64], s: &mut SpectralScratch) -> Result<Vec<f64>> {
        let mut e = vec![0.0; rho.len()];
        if self.with_field {
            let sigma: Vec<f64> = rho.iter().map(|r| r - 1.0).collect();
            self.grid.field_into(&sigma, &mut e, s)?;
        }
        Ok(e)
    }

    /// `∫ρ log ρ + ½ ∫(∂xφ)²` per node.
    pub fn free_energy(&self, state: &DensityState) -> Result<Vec<f64>> {
        let mut s = self.grid.scratch();
        state
            .rho
            .iter()
            .map(|r| {
                if r.values.iter().any(|&v| v <= 0.0) {
                    return Err(Error::Domain("free energy needs a positive density".into()));
                }
                let entropy: f64 = self.grid.integrate(&r.values.iter().map(|v| v * v.ln()).collect::<Vec<_>>());
                let e = self.field(&r.values, &mut s)?;
                Ok(entropy + 0.5 * self.grid.inner(&e, &e))
            })
            .collect()
    }

    fn step(&self, state: &mut DensityState, dt: f64, limit: Limit) -> Result<()> {
        if dt.is_nan() || dt <= 0.0 {
            return Err(contract(format!("time step must be positive, got {dt}")));
        }
        let mut s = self.grid.scratch();
        for (z, rho) in state.rho.iter_mut().enumerate() {
            if rho.values.len() != self.grid.n_x() {
                return Err(contract(format!("density at node {z} has {} values", rho.values.len())));
            }
            let e = self.field(&rho.values, &mut s).map_err(|err| crate::kinetic_solver::solver::with_node(err, z))?;
            let speed = max_abs(&e);
            let limit_dt = if speed > 0.0 { self.grid.dx() / speed } else { f64::INFINITY };
            if dt > limit_dt {
                return Err(Error::StepTooLarge { dt, limit: limit_dt });
            }
            match self.scheme {
                LimitScheme::FiniteVolume => self.finite_volume(&mut rho.values, &e, dt, limit, &mut s),
                LimitScheme::Spectral => self.spectral(&mut rho.values, dt, limit, &mut s)?,
            }
            for v in rho.values.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                    state.clamped_cells += 1;
                }
            }
            if rho.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("non-finite density at node {z}")));
            }
        }
        state.time += dt;
        Ok(())
    }

    /// `∂x(ρ E)` by upwind fluxes with interface field `(E_j + E_{j+1})/2`.
    fn upwind_drift(&self, rho: &[f64], e: &[f64]) -> Vec<f64> {
        let n = rho.len();
        let inv_dx = 1.0 / self.grid.dx();
        // Flux of ∂t ρ + ∂x(ρ a) = 0 with velocity a = −E.
        let flux: Vec<f64> = (0..n)
            .map(|j| {
                let r = (j + 1) % n;
                let a = -0.5 * (e[j] + e[r]);
                if a >= 0.0 { a * rho[j] } else { a * rho[r] }
            })
            .collect();
        (0..n).map(|j| -(flux[j] - flux[(j + n - 1) % n]) * inv_dx).collect()
    }

    fn finite_volume(&self, rho: &mut [f64], e: &[f64], dt: f64, limit: Limit, s: &mut SpectralScratch) {
        let drift = self.upwind_drift(rho, e);
        for (r, d) in rho.iter_mut().zip(&drift) {
            *r += dt * d;
        }
        if limit == Limit::Parabolic {
            // (1 − dt Δ_h) ρ⁺ = ρ with the centered three-point Laplacian.
            let dx = self.grid.dx();
            let mut hat = self.grid.spectrum(rho, s);
            for (j, c) in hat.iter_mut().enumerate() {
                let k = self.grid.wavenumber(j);
                let symbol = 4.0 / (dx * dx) * (0.5 * k * dx).sin().powi(2);
                *c /= 1.0 + dt * symbol;
            }
            self.grid.inverse_spectrum(&hat, rho, s);
        }
    }

    /// Linear symbol of the `σ` equation at bin `j`.
    fn linear_symbol(&self, j: usize, limit: Limit) -> f64 {
        let k = self.grid.wavenumber(j);
        let n = self.grid.n_x();
        // The field operator vanishes on the mean and on the Nyquist bin.
        let field = if self.with_field && j != 0 && j != n / 2 { -1.0 } else { 0.0 };
        match limit {
            Limit::HighField => field,
            Limit::Parabolic => field - k * k,
        }
    }

    /// Spectrum of `∂x(σ E)`.
    fn nonlinear(&self, hat: &[Complex<f64>], s: &mut SpectralScratch) -> Result<Vec<Complex<f64>>> {
        let n = hat.len();
        if !self.with_field {
            return Ok(vec![Complex::new(0.0, 0.0); n]);
        }
        let mut sigma = vec![0.0; n];
        self.grid.inverse_spectrum(hat, &mut sigma, s);
        let mut e = vec![0.0; n];
        self.grid.field_into(&sigma, &mut e, s)?;
        let product: Vec<f64> = sigma.iter().zip(&e).map(|(a, b)| a * b).collect();
        let mut out = self.grid.spectrum(&product, s);
        for (j, c) in out.iter_mut().enumerate() {
            let k = if j == n / 2 { 0.0 } else { self.grid.wavenumber(j) };
            *c *= Complex::new(0.0, k);
        }
        Ok(out)
    }

    fn spectral(&self, rho: &mut [f64], dt: f64, limit: Limit, s: &mut SpectralScratch) -> Result<()> {
        let n = rho.len();
        let sigma: Vec<f64> = rho.iter().map(|r| r - 1.0).collect();
        let u = self.grid.spectrum(&sigma, s);
        let full: Vec<f64> = (0..n).map(|j| (self.linear_symbol(j, limit) * dt).exp()).collect();
        let half: Vec<f64> = (0..n).map(|j| (self.linear_symbol(j, limit) * 0.5 * dt).exp()).collect();

        // Lawson RK4 in the integrating-factor variable.
        let k1 = self.nonlinear(&u, s)?;
        let ua: Vec<_> = (0..n).map(|j| half[j] * (u[j] + 0.5 * dt * k1[j])).collect();
        let k2 = self.nonlinear(&ua, s)?;
        let ub: Vec<_> = (0..n).map(|j| half[j] * u[j] + 0.5 * dt * k2[j]).collect();
        let k3 = self.nonlinear(&ub, s)?;
        let uc: Vec<_> = (0..n).map(|j| full[j] * u[j] + dt * half[j] * k3[j]).collect();
        let k4 = self.nonlinear(&uc, s)?;
        let next: Vec<_> = (0..n)
            .map(|j| full[j] * u[j] + dt / 6.0 * (full[j] * k1[j] + 2.0 * half[j] * (k2[j] + k3[j]) + k4[j]))
            .collect();
        let mut sigma_next = vec![0.0; n];
        self.grid.inverse_spectrum(&next, &mut sigma_next, s);
        for (r, sg) in rho.iter_mut().zip(&sigma_next) {
            *r = 1.0 + sg;
        }
        Ok(())
    }
}
