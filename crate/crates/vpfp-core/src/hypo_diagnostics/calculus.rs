//! Derivatives and `dμ = π(z) dx dv dz` integrals of `[z][x][k]` tensors.

use crate::discretization::Discretization;
use crate::error::Result;
use crate::kinetic_solver::solver::with_node;
use crate::kinetic_solver::HermiteCoefField;
use crate::velocity_basis::nu_norm_sq_coeffs;

/// `∂_z^order` of a tensor with `width` trailing entries per x-point.
pub(crate) fn dz(disc: &Discretization, data: &[f64], width: usize, order: usize) -> Result<Vec<f64>> {
    disc.colloc.derivative_blocks(data, disc.n_x() * width, order)
}

/// `∂_x^order` of a tensor with `width` trailing entries per x-point.
pub(crate) fn dx(disc: &Discretization, data: &[f64], width: usize, order: u32) -> Vec<f64> {
    if order == 0 {
        return data.to_vec();
    }
    let grid = &disc.grid;
    let n_x = grid.n_x();
    let mut scratch = grid.scratch();
    let mut line = vec![0.0; n_x];
    let mut dline = vec![0.0; n_x];
    let mut out = vec![0.0; data.len()];
    for z in 0..disc.n_z() {
        let base = z * n_x * width;
        for k in 0..width {
            for x in 0..n_x {
                line[x] = data[base + x * width + k];
            }
            grid.dx_into(&line, order, &mut dline, &mut scratch);
            for x in 0..n_x {
                out[base + x * width + k] = dline[x];
            }
        }
    }
    out
}

/// `∂xφ` at every node, laid out `[z][x]`.
pub(crate) fn field(disc: &Discretization, state: &HermiteCoefField) -> Result<Vec<f64>> {
    let grid = &disc.grid;
    let n_x = grid.n_x();
    let mut scratch = grid.scratch();
    let mut out = vec![0.0; disc.n_z() * n_x];
    for z in 0..disc.n_z() {
        grid.field_into(&state.moment(z, 0), &mut out[z * n_x..(z + 1) * n_x], &mut scratch)
            .map_err(|e| with_node(e, z))?;
    }
    Ok(out)
}

/// `Σ_z w_z Σ_x Δx Σ_k f g`.
pub(crate) fn inner(disc: &Discretization, f: &[f64], g: &[f64], width: usize) -> f64 {
    let block = disc.n_x() * width;
    let dx = disc.grid.dx();
    disc.colloc
        .weights()
        .iter()
        .enumerate()
        .map(|(z, w)| {
            let r = z * block..(z + 1) * block;
            w * dx * f[r.clone()].iter().zip(&g[r]).map(|(a, b)| a * b).sum::<f64>()
        })
        .sum()
}

pub(crate) fn norm_sq(disc: &Discretization, f: &[f64], width: usize) -> f64 {
    inner(disc, f, f, width)
}

/// Coefficient `k` of a `[z][x][n_v]` tensor as a `[z][x]` tensor.
pub(crate) fn moment(disc: &Discretization, h: &[f64], k: usize) -> Vec<f64> {
    let n_v = disc.n_v();
    h.chunks(n_v).map(|c| c[k]).collect()
}

/// `(‖(1−Π)h‖², ‖(1−Π)h‖²_ν)`.
pub(crate) fn remainder_norms(disc: &Discretization, h: &[f64]) -> (f64, f64) {
    let n_v = disc.n_v();
    let n_x = disc.n_x();
    let sqrt_k = disc.basis.sqrt_k();
    let dx = disc.grid.dx();
    let mut slice = vec![0.0; n_v];
    let (mut plain, mut nu) = (0.0, 0.0);
    for (z, w) in disc.colloc.weights().iter().enumerate() {
        let (mut p, mut q) = (0.0, 0.0);
        for x in 0..n_x {
            let base = (z * n_x + x) * n_v;
            slice.copy_from_slice(&h[base..base + n_v]);
            slice[0] = 0.0;
            slice[1] = 0.0;
            p += slice.iter().map(|c| c * c).sum::<f64>();
            q += nu_norm_sq_coeffs(&slice, sqrt_k);
        }
        plain += w * dx * p;
        nu += w * dx * q;
    }
    (plain, nu)
}
