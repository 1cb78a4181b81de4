//! Phase-space distributions and fluid states on a 1D spatial lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};
use crate::grid::VelocityGrid;
use crate::moments::CellMoments;
use crate::params::Species;

/// Nodes x_j = −X + jΔx, j = 0..N_x−1, on [−X, X].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub nx: usize,
    pub half_length: f64,
}

impl SpatialGrid {
    pub fn new(nx: usize, half_length: f64) -> Result<Self> {
        if nx < 2 || !(half_length > 0.0) {
            return Err(VpbError::Domain(format!("invalid spatial grid: N_x = {nx}, X = {half_length}")));
        }
        Ok(Self { nx, half_length })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / (self.nx - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.x(j)).collect()
    }
}

/// F_A(x_j, ξ) for all cells, stored cell-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    species: Species,
    grid: VelocityGrid,
    nx: usize,
    values: Vec<f64>,
}

impl DistributionField {
    pub fn zeros(species: Species, grid: VelocityGrid, nx: usize) -> Self {
        Self { species, grid, nx, values: vec![0.0; nx * grid.len()] }
    }

    /// Builds a field from per-cell values; rejects negative or non-finite entries.
    pub fn from_cells(species: Species, grid: VelocityGrid, cells: &[Vec<f64>]) -> Result<Self> {
        let mut f = Self::zeros(species, grid, cells.len());
        for (j, c) in cells.iter().enumerate() {
            if c.len() != grid.len() {
                return Err(VpbError::Configuration("cell length does not match the velocity grid".into()));
            }
            if c.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(VpbError::Domain("distribution values must be finite and nonnegative".into()));
            }
            f.cell_mut(j).copy_from_slice(c);
        }
        Ok(f)
    }

    pub fn species(&self) -> Species {
        self.species
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn cell(&self, j: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn cell_mut(&mut self, j: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.values[j * n..(j + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Two-component fluid quantities per spatial cell, plus the potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    pub n_i: Vec<f64>,
    pub n_e: Vec<f64>,
    pub u: Vec<[f64; 3]>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl FluidState {
    pub fn zeros(nx: usize) -> Self {
        Self { n_i: vec![0.0; nx], n_e: vec![0.0; nx], u: vec![[0.0; 3]; nx], theta: vec![0.0; nx], phi: vec![0.0; nx] }
    }

    pub fn len(&self) -> usize {
        self.n_i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_i.is_empty()
    }

    pub fn set_cell(&mut self, j: usize, c: &CellMoments) {
        self.n_i[j] = c.n.ion;
        self.n_e[j] = c.n.electron;
        self.u[j] = c.u;
        self.theta[j] = c.theta;
    }

    /// Checks n_i, n_e, θ > 0 in every cell.
    pub fn validate(&self) -> Result<()> {
        for j in 0..self.len() {
            if !(self.n_i[j] > 0.0 && self.n_e[j] > 0.0 && self.theta[j] > 0.0) {
                return Err(VpbError::Numerical(format!(
                    "invalid fluid state at cell {j}: n_i = {}, n_e = {}, θ = {}",
                    self.n_i[j], self.n_e[j], self.theta[j]
                )));
            }
            if !(self.u[j].iter().all(|v| v.is_finite()) && self.phi[j].is_finite()) {
                return Err(VpbError::Numerical(format!("non-finite fluid state at cell {j}")));
            }
        }
        Ok(())
    }
}
