//! Maxwellian evaluators.
//!
//! Besides plain sampling, Maxwellians can be *calibrated* to a grid: their
//! parameters are adjusted until the discrete grid moments reproduce the
//! requested (n, u, θ) to rounding. Calibrated samples make the discrete
//! macro-micro algebra exact instead of quadrature-limited.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};
use crate::grid::VelocityGrid;
use crate::moments::{moments_single_species, SpeciesMoments};
use crate::params::{PlasmaParams, Species, SpeciesParams, BOLTZMANN};
use crate::Pair;

/// M(ξ) = n (m/(2π k_B θ))^{3/2} exp(−m|ξ−u|²/(2 k_B θ)).
pub fn maxwellian_eval(sp: &SpeciesParams, n: f64, u: [f64; 3], theta: f64, xi: [f64; 3]) -> Result<f64> {
    if !(n > 0.0) || !(theta > 0.0) {
        return Err(VpbError::Domain(format!("Maxwellian needs n > 0 and θ > 0, got n = {n}, θ = {theta}")));
    }
    Ok(maxwellian_unchecked(sp.mass, n, u, theta, xi))
}

#[inline]
pub(crate) fn maxwellian_unchecked(mass: f64, n: f64, u: [f64; 3], theta: f64, xi: [f64; 3]) -> f64 {
    let a = mass / (2.0 * BOLTZMANN * theta);
    let d2 = (xi[0] - u[0]).powi(2) + (xi[1] - u[1]).powi(2) + (xi[2] - u[2]).powi(2);
    n * (a / std::f64::consts::PI).powf(1.5) * (-a * d2).exp()
}

/// Maxwellian of a single species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleMaxwellian {
    pub species: Species,
    pub n: f64,
    pub u: [f64; 3],
    pub theta: f64,
}

impl SingleMaxwellian {
    pub fn new(species: Species, n: f64, u: [f64; 3], theta: f64) -> Result<Self> {
        if !(n > 0.0 && theta > 0.0) {
            return Err(VpbError::Domain(format!("need n > 0 and θ > 0, got n = {n}, θ = {theta}")));
        }
        Ok(Self { species, n, u, theta })
    }

    /// Pointwise samples of the analytic function.
    pub fn sample_analytic(&self, grid: &VelocityGrid, mass: f64) -> Vec<f64> {
        grid.sample(|xi| maxwellian_unchecked(mass, self.n, self.u, self.theta, xi))
    }

    /// Samples whose discrete moments equal (n, u, θ) to rounding.
    pub fn sample(&self, grid: &VelocityGrid, mass: f64) -> Result<Vec<f64>> {
        calibrated(grid, mass, self.n, self.u, self.theta)
    }
}

/// Pair of Maxwellians with individual densities and a shared u and θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiMaxwellian {
    pub n: Pair<f64>,
    pub u: [f64; 3],
    pub theta: f64,
}

impl BiMaxwellian {
    pub fn new(n_i: f64, n_e: f64, u: [f64; 3], theta: f64) -> Result<Self> {
        if !(n_i > 0.0 && n_e > 0.0 && theta > 0.0) {
            return Err(VpbError::Domain(format!("need n_i, n_e, θ > 0, got {n_i}, {n_e}, {theta}")));
        }
        Ok(Self { n: Pair::new(n_i, n_e), u, theta })
    }

    pub fn component(&self, s: Species) -> SingleMaxwellian {
        SingleMaxwellian { species: s, n: self.n[s], u: self.u, theta: self.theta }
    }

    pub fn sample_analytic(&self, grids: &Pair<VelocityGrid>, params: &PlasmaParams) -> Pair<Vec<f64>> {
        grids.map(|s, g| self.component(s).sample_analytic(g, params.mass(s)))
    }

    /// Grid-calibrated samples of both components.
    pub fn sample(&self, grids: &Pair<VelocityGrid>, params: &PlasmaParams) -> Result<Pair<Vec<f64>>> {
        Ok(Pair::new(
            self.component(Species::Ion).sample(&grids.ion, params.ion.mass)?,
            self.component(Species::Electron).sample(&grids.electron, params.electron.mass)?,
        ))
    }
}

fn calibrated(grid: &VelocityGrid, mass: f64, n: f64, u: [f64; 3], theta: f64) -> Result<Vec<f64>> {
    let (mut ne, mut ue, mut te) = (n, u, theta);
    let thermal = (BOLTZMANN * theta / mass).sqrt();
    let mut last = f64::INFINITY;
    for _ in 0..200 {
        let vals = grid.sample(|xi| maxwellian_unchecked(mass, ne, ue, te, xi));
        let SpeciesMoments { n: nd, u: ud, theta: td } = moments_single_species(&vals, grid, mass)?;
        let err = (nd / n - 1.0)
            .abs()
            .max((td / theta - 1.0).abs())
            .max((0..3).map(|a| (ud[a] - u[a]).abs() / thermal).fold(0.0, f64::max));
        if err <= 2e-16 || (err >= last && err < 1e-13) {
            return Ok(vals);
        }
        last = err;
        ne *= n / nd;
        te *= theta / td;
        for a in 0..3 {
            ue[a] += u[a] - ud[a];
        }
    }
    if last < 1e-12 {
        return Ok(grid.sample(|xi| maxwellian_unchecked(mass, ne, ue, te, xi)));
    }
    Err(VpbError::Numerical(format!(
        "grid too coarse to calibrate a Maxwellian (n = {n}, θ = {theta}, residual {last:e})"
    )))
}
