//! Strang-split time stepping of
//!
//! ```text
//! ∂t h = −(1/δ) v ∂x h + (1/ε) ∂xφ (∂v − v/2) h − (1/ε) ∂xφ v√M + (1/(εδ)) L h,
//! −∂x²φ = σ.
//! ```
//!
//! One step is `C(dt/2) ∘ T(dt) ∘ C(dt/2)`: `C` integrates `L` exactly,
//! `T` integrates transport and field terms with classical RK4, solving
//! Poisson from each stage's σ. In coefficients `(∂v − v/2)` is the pure
//! raising map `h_k ↦ −sqrt(k+1) h_{k+1}` and `v√M = φ_1`.

use rayon::prelude::*;

use super::regime::ScalingRegime;
use super::state::HermiteCoefField;
use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::field_space::{max_abs, SpectralScratch};

#[derive(Debug, Clone)]
pub struct KineticSolver {
    disc: Discretization,
    regime: ScalingRegime,
    cfl: f64,
}

struct Workspace {
    y: Vec<f64>,
    stage: Vec<f64>,
    acc: Vec<f64>,
    k: Vec<f64>,
    aux: Aux,
}

struct Aux {
    sigma: Vec<f64>,
    field: Vec<f64>,
    mix: Vec<f64>,
    dmix: Vec<f64>,
    scratch: SpectralScratch,
}

impl KineticSolver {
    pub fn new(disc: Discretization, regime: ScalingRegime) -> Self {
        Self { disc, regime, cfl: 0.5 }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn disc(&self) -> &Discretization {
        &self.disc
    }

    pub fn regime(&self) -> ScalingRegime {
        self.regime
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }

    /// Velocity scale of the transport bound, `sqrt(2 N_v)`.
    pub fn v_max(&self) -> f64 {
        (2.0 * self.disc.n_v() as f64).sqrt()
    }

    fn transport_limit(&self) -> f64 {
        self.regime.delta() * self.disc.grid.dx() / self.v_max()
    }

    fn field_limit(&self, e_max: f64) -> f64 {
        if e_max == 0.0 {
            f64::INFINITY
        } else {
            self.regime.epsilon() / (e_max * (self.disc.n_v() as f64).sqrt())
        }
    }

    /// `c · min(δ Δx / v_max, ε / (‖∂xφ‖∞ sqrt(N_v)))` at the current state.
    pub fn stability_limit(&self, state: &HermiteCoefField) -> Result<f64> {
        let e_max = self.max_field(state)?;
        Ok(self.cfl * self.transport_limit().min(self.field_limit(e_max)))
    }

    pub fn max_field(&self, state: &HermiteCoefField) -> Result<f64> {
        let grid = &self.disc.grid;
        let mut scratch = grid.scratch();
        let mut e = vec![0.0; grid.n_x()];
        let mut e_max = 0.0_f64;
        for z in 0..state.n_z() {
            grid.field_into(&state.moment(z, 0), &mut e, &mut scratch)
                .map_err(|err| with_node(err, z))?;
            e_max = e_max.max(max_abs(&e));
        }
        Ok(e_max)
    }

    pub fn step(&self, state: &mut HermiteCoefField, dt: f64) -> Result<()> {
        self.advance(state, dt, 1)
    }

    /// `n_steps` steps of size `dt`; nodes evolve independently.
    pub fn advance(&self, state: &mut HermiteCoefField, dt: f64, n_steps: usize) -> Result<()> {
        if n_steps == 0 {
            return Ok(());
        }
        self.check_shape(state)?;
        let limit = self.stability_limit(state)?;
        if dt.is_nan() || dt <= 0.0 || dt > limit {
            return Err(Error::StepTooLarge { dt, limit });
        }
        let snapshot = state.clone();
        let node_len = self.disc.node_len();
        let n_z = state.n_z();
        let results: Vec<std::result::Result<(), NodeFailure>> = if n_z == 1 {
            vec![self.advance_node(state.coeffs_mut(), dt, n_steps)]
        } else {
            state
                .coeffs_mut()
                .par_chunks_mut(node_len)
                .map(|node| self.advance_node(node, dt, n_steps))
                .collect()
        };
        for (z, r) in results.into_iter().enumerate() {
            match r {
                Ok(()) => {}
                Err(NodeFailure::NonFinite) => {
                    return Err(Error::Blowup { last_finite: Box::new(snapshot) });
                }
                Err(NodeFailure::Error(err)) => {
                    *state = snapshot;
                    return Err(with_node(err, z));
                }
            }
        }
        state.time = snapshot.time + n_steps as f64 * dt;
        Ok(())
    }

    fn check_shape(&self, state: &HermiteCoefField) -> Result<()> {
        let d = &self.disc;
        if state.n_z() != d.n_z() || state.n_x() != d.n_x() || state.n_v() != d.n_v() {
            return Err(crate::error::contract(format!(
                "state shape {}x{}x{} does not match discretization {}x{}x{}",
                state.n_z(),
                state.n_x(),
                state.n_v(),
                d.n_z(),
                d.n_x(),
                d.n_v()
            )));
        }
        Ok(())
    }

    fn workspace(&self) -> Workspace {
        let len = self.disc.node_len();
        let n_x = self.disc.n_x();
        Workspace {
            y: vec![0.0; len],
            stage: vec![0.0; len],
            acc: vec![0.0; len],
            k: vec![0.0; len],
            aux: Aux {
                sigma: vec![0.0; n_x],
                field: vec![0.0; n_x],
                mix: vec![0.0; n_x],
                dmix: vec![0.0; n_x],
                scratch: self.disc.grid.scratch(),
            },
        }
    }

    fn advance_node(&self, node: &mut [f64], dt: f64, n_steps: usize) -> std::result::Result<(), NodeFailure> {
        let n_v = self.disc.n_v();
        let rate = 0.5 * dt / (self.regime.epsilon() * self.regime.delta());
        let half_collision: Vec<f64> = (0..n_v).map(|k| (-(k as f64) * rate).exp()).collect();
        let Workspace { y, stage, acc, k, aux } = &mut self.workspace();

        for _ in 0..n_steps {
            y.copy_from_slice(node);
            collide(y, &half_collision);

            // The field can grow between a-priori checks; beyond c = 1 RK4 is unstable.
            let e_max = self.rhs(y, k, aux)?;
            let hard = self.transport_limit().min(self.field_limit(e_max));
            if dt > hard {
                return Err(NodeFailure::Error(Error::StepTooLarge { dt, limit: hard }));
            }
            acc.copy_from_slice(k);
            combine(stage, y, 0.5 * dt, k);
            self.rhs(stage, k, aux)?;
            accumulate(acc, 2.0, k);
            combine(stage, y, 0.5 * dt, k);
            self.rhs(stage, k, aux)?;
            accumulate(acc, 2.0, k);
            combine(stage, y, dt, k);
            self.rhs(stage, k, aux)?;
            accumulate(acc, 1.0, k);
            accumulate(y, dt / 6.0, acc);

            collide(y, &half_collision);
            if y.iter().any(|c| !c.is_finite()) {
                return Err(NodeFailure::NonFinite);
            }
            node.copy_from_slice(y);
        }
        Ok(())
    }

    /// Transport and field right-hand side of `y` into `out`; returns `‖∂xφ‖∞`.
    fn rhs(&self, y: &[f64], out: &mut [f64], aux: &mut Aux) -> Result<f64> {
        let grid = &self.disc.grid;
        let sqrt_k = self.disc.basis.sqrt_k();
        let n_x = grid.n_x();
        let n_v = self.disc.n_v();
        let inv_delta = 1.0 / self.regime.delta();
        let inv_eps = 1.0 / self.regime.epsilon();

        for x in 0..n_x {
            aux.sigma[x] = y[x * n_v];
        }
        grid.field_into(&aux.sigma, &mut aux.field, &mut aux.scratch)?;

        for k in 0..n_v {
            for x in 0..n_x {
                let base = x * n_v;
                let lower = if k >= 1 { sqrt_k[k] * y[base + k - 1] } else { 0.0 };
                let upper = if k + 1 < n_v { sqrt_k[k + 1] * y[base + k + 1] } else { 0.0 };
                aux.mix[x] = lower + upper;
            }
            grid.dx_into(&aux.mix, 1, &mut aux.dmix, &mut aux.scratch);
            for x in 0..n_x {
                let base = x * n_v;
                let e = aux.field[x];
                let raised = if k >= 1 { -sqrt_k[k] * y[base + k - 1] } else { 0.0 };
                let source = if k == 1 { -e } else { 0.0 };
                out[base + k] = -inv_delta * aux.dmix[x] + inv_eps * (e * raised + source);
            }
        }
        Ok(max_abs(&aux.field))
    }
}

enum NodeFailure {
    NonFinite,
    Error(Error),
}

impl From<Error> for NodeFailure {
    fn from(e: Error) -> Self {
        Self::Error(e)
    }
}

fn collide(y: &mut [f64], factors: &[f64]) {
    for slice in y.chunks_mut(factors.len()) {
        for (c, f) in slice.iter_mut().zip(factors) {
            *c *= f;
        }
    }
}

/// `out = base + a·x`
fn combine(out: &mut [f64], base: &[f64], a: f64, x: &[f64]) {
    for ((o, b), xi) in out.iter_mut().zip(base).zip(x) {
        *o = b + a * xi;
    }
}

/// `acc += a·x`
fn accumulate(acc: &mut [f64], a: f64, x: &[f64]) {
    for (o, xi) in acc.iter_mut().zip(x) {
        *o += a * xi;
    }
}

pub(crate) fn with_node(err: Error, z: usize) -> Error {
    match err {
        Error::MassImbalance { mean, .. } => Error::MassImbalance { mean, z_node: z },
        other => other,
    }
}
