//! Velocity moments of gridded distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};
use crate::field::{DistributionField, FluidState};
use crate::grid::VelocityGrid;
use crate::params::{PlasmaParams, Species, BOLTZMANN};
use crate::Pair;

/// Densities below this are treated as vacuum.
pub const VACUUM_DENSITY: f64 = 1e-14;

/// Default number of thermal radii covered by a velocity box.
pub const R_CUT: f64 = 5.0;

/// Density, mean velocity and temperature of one species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciesMoments {
    pub n: f64,
    pub u: [f64; 3],
    pub theta: f64,
}

/// The six two-component fluid quantities of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellMoments {
    pub n: Pair<f64>,
    pub u: [f64; 3],
    pub theta: f64,
}

/// Raw sums Σ F, Σ ξF, Σ |ξ|²F (times Δv³), accumulated in flat-index order.
fn raw_sums(values: &[f64], grid: &VelocityGrid) -> (f64, [f64; 3], f64) {
    let mut s0 = 0.0;
    let mut s1 = [0.0; 3];
    let mut s2 = 0.0;
    for (idx, &f) in values.iter().enumerate() {
        let xi = grid.node(idx);
        s0 += f;
        s1[0] += xi[0] * f;
        s1[1] += xi[1] * f;
        s1[2] += xi[2] * f;
        s2 += (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) * f;
    }
    let w = grid.cell_volume();
    (s0 * w, [s1[0] * w, s1[1] * w, s1[2] * w], s2 * w)
}

/// n_A = ∫F, u_A = ∫ξF / n_A, θ_A = ∫|ξ−u_A|²F / (3 k_A n_A).
pub fn moments_single_species(values: &[f64], grid: &VelocityGrid, mass: f64) -> Result<SpeciesMoments> {
    if values.len() != grid.len() {
        return Err(VpbError::Configuration("field length does not match its grid".into()));
    }
    let (n, mom, _) = raw_sums(values, grid);
    if !(n >= VACUUM_DENSITY) {
        return Err(VpbError::DegenerateCell(format!("species density {n:e} below vacuum tolerance")));
    }
    let u = [mom[0] / n, mom[1] / n, mom[2] / n];
    let mut c2 = 0.0;
    for (idx, &f) in values.iter().enumerate() {
        let xi = grid.node(idx);
        c2 += ((xi[0] - u[0]).powi(2) + (xi[1] - u[1]).powi(2) + (xi[2] - u[2]).powi(2)) * f;
    }
    c2 *= grid.cell_volume();
    let k = BOLTZMANN / mass;
    let theta = c2 / (3.0 * k * n);
    if !(theta > 0.0) {
        return Err(VpbError::MomentConsistency(format!("extracted temperature {theta:e} is not positive")));
    }
    Ok(SpeciesMoments { n, u, theta })
}

/// Solves the six two-component moment equations of one cell.
pub fn moments_two_component(
    f: Pair<&[f64]>,
    grids: &Pair<VelocityGrid>,
    params: &PlasmaParams,
) -> Result<CellMoments> {
    let mut n = Pair::new(0.0, 0.0);
    let mut rho = 0.0;
    let mut mom = [0.0; 3];
    let mut energy = 0.0;
    for s in Species::BOTH {
        if f[s].len() != grids[s].len() {
            return Err(VpbError::Configuration("field length does not match its grid".into()));
        }
        let m = params.mass(s);
        let (s0, s1, s2) = raw_sums(f[s], &grids[s]);
        n[s] = s0;
        rho += m * s0;
        for a in 0..3 {
            mom[a] += m * s1[a];
        }
        energy += 0.5 * m * s2;
    }
    let total = n.ion + n.electron;
    if !(total >= VACUUM_DENSITY) || !(rho > 0.0) {
        return Err(VpbError::DegenerateCell(format!("total density {total:e} below vacuum tolerance")));
    }
    if n.ion < 0.0 || n.electron < 0.0 {
        return Err(VpbError::MomentConsistency("negative species density".into()));
    }
    let u = [mom[0] / rho, mom[1] / rho, mom[2] / rho];
    let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let theta = (energy - 0.5 * rho * u2) / total;
    if !(theta > 0.0) {
        return Err(VpbError::MomentConsistency(format!("extracted temperature {theta:e} is not positive")));
    }
    Ok(CellMoments { n, u, theta })
}

/// Cellwise two-component moments of a pair of fields; φ is left at zero.
pub fn moments_fields(f: &Pair<DistributionField>, params: &PlasmaParams) -> Result<FluidState> {
    let nx = f.ion.nx();
    if f.electron.nx() != nx {
        return Err(VpbError::Configuration("species fields live on different spatial lattices".into()));
    }
    let grids = Pair::new(*f.ion.grid(), *f.electron.grid());
    let mut state = FluidState::zeros(nx);
    for j in 0..nx {
        let c = moments_two_component(Pair::new(f.ion.cell(j), f.electron.cell(j)), &grids, params)?;
        state.set_cell(j, &c);
    }
    Ok(state)
}

/// L_v = |u_max| + R_cut·sqrt(k_A θ_max).
pub fn recommended_extent(mass: f64, u_max: f64, theta_max: f64) -> f64 {
    recommended_extent_with(mass, u_max, theta_max, R_CUT)
}

pub fn recommended_extent_with(mass: f64, u_max: f64, theta_max: f64, r_cut: f64) -> f64 {
    u_max.abs() + r_cut * (BOLTZMANN / mass * theta_max).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extent_formula_and_scaling() {
        assert!((recommended_extent(1.0, 0.0, 1.0) - 5.0 * (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let le = recommended_extent(1.0, 0.0, 2.0);
        let li = recommended_extent(16.0, 0.0, 2.0);
        assert!((li - le / 4.0).abs() < 1e-15);
        assert!(recommended_extent(4.0, 0.0, 1.0) < recommended_extent(2.0, 0.0, 1.0));
    }

    #[test]
    fn vacuum_is_rejected() {
        let g = VelocityGrid::new(4, 1.0).unwrap();
        let z = vec![0.0; g.len()];
        assert!(matches!(moments_single_species(&z, &g, 1.0), Err(VpbError::DegenerateCell(_))));
    }
}
