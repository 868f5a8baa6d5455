use crate::error::Result;
use crate::field_space::SpatialGrid;
use crate::random_space::{CollocationSet, Distribution};
use crate::velocity_basis::HermiteBasis;

/// Velocity basis, periodic x-grid and z-collocation shared by the solver
/// and the diagnostics.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub basis: HermiteBasis,
    pub grid: SpatialGrid,
    pub colloc: CollocationSet,
}

impl Discretization {
    pub fn new(n_x: usize, length: f64, n_v: usize, n_z: usize, dist: Distribution) -> Result<Self> {
        Ok(Self {
            basis: HermiteBasis::new(n_v)?,
            grid: SpatialGrid::new(n_x, length)?,
            colloc: CollocationSet::new(n_z, dist)?,
        })
    }

    pub fn n_x(&self) -> usize {
        self.grid.n_x()
    }

    pub fn n_v(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn n_z(&self) -> usize {
        self.colloc.n_z()
    }

    /// Coefficients per z-node.
    pub fn node_len(&self) -> usize {
        self.n_x() * self.n_v()
    }
}
