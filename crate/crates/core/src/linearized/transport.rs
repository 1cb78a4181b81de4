use serde::Serialize;

use super::LinearizedOperator;
use crate::collision::CollisionConfig;
use crate::error::{Result, VpbError};
use crate::grid::VelocityGrid;
use crate::maxwellian::SingleMaxwellian;
use crate::moments::R_CUT;
use crate::params::{Pair, PlasmaParams, Species};

/// Viscosity and heat conduction of one species with its diagnostic variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeciesTransport {
    /// μ from the ξ₁ξ₂ source.
    pub mu: f64,
    /// μ from the ξ₁ξ₃ source (isotropy check).
    pub mu_13: f64,
    /// The ξ₁² form divided by 3. On N^⊥ its source is ξ₁² − |ξ|²/3, whose norm
    /// is 4/3 that of ξ₁ξ₂, so this equals 4μ/9 rather than μ.
    pub mu_11_over_3: f64,
    /// κ from the |ξ−u|²ξ₁ source.
    pub kappa: f64,
}

/// μ_A(θ), κ_A(θ) for both species at one temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportCoefficients {
    pub theta: f64,
    pub u: [f64; 3],
    pub ion: SpeciesTransport,
    pub electron: SpeciesTransport,
}

impl TransportCoefficients {
    pub fn mu(&self) -> Pair<f64> {
        Pair::new(self.ion.mu, self.electron.mu)
    }

    pub fn kappa(&self) -> Pair<f64> {
        Pair::new(self.ion.kappa, self.electron.kappa)
    }
}

/// Velocity grid used for a species' transport anchor: centered at u, extent
/// R_CUT thermal speeds, so results are exactly self-similar in θ.
pub fn transport_grid(
    params: &PlasmaParams,
    species: Species,
    theta: f64,
    u: [f64; 3],
    n_v: usize,
) -> Result<VelocityGrid> {
    VelocityGrid::centered(n_v, R_CUT * (params.k(species) * theta).sqrt(), u)
}

/// Coefficients of one species around M_[1,u,θ;m_A].
pub fn species_transport(
    params: &PlasmaParams,
    species: Species,
    theta: f64,
    u: [f64; 3],
    n_v: usize,
    config: &CollisionConfig,
) -> Result<SpeciesTransport> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(VpbError::Domain(format!("temperature must be positive, got {theta}")));
    }
    let grid = transport_grid(params, species, theta, u, n_v)?;
    let anchor = SingleMaxwellian::new(species, 1.0, u, theta)?;
    let op = LinearizedOperator::single_species(&anchor, &grid, params, config)?;
    let m = params.mass(species);
    let k = params.k(species);
    let dv3 = grid.cell_volume();
    let mvals = op.anchor_flat();
    let nodes = grid.nodes();
    let rel = |xi: &[f64; 3]| [xi[0] - u[0], xi[1] - u[1], xi[2] - u[2]];

    // −∫ s L⁻¹ P₁ (s M) dξ for a polynomial weight s.
    let quad = |s: &dyn Fn([f64; 3]) -> f64| -> Result<f64> {
        let src: Vec<f64> = nodes.iter().zip(&mvals).map(|(xi, mv)| s(rel(xi)) * mv).collect();
        let h = op.project_p1(&src);
        let (g, _) = op.solve_linv(&h)?;
        Ok(-nodes.iter().zip(&g).map(|(xi, gv)| s(rel(xi)) * gv).sum::<f64>() * dv3)
    };

    let mu = quad(&|c| m * c[0] * c[1])? / (k * theta);
    let mu_13 = quad(&|c| m * c[0] * c[2])? / (k * theta);
    let mu_11_over_3 = quad(&|c| m * c[0] * c[0])? / (3.0 * k * theta);
    let kappa = quad(&|c| m * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) * c[0])? / (4.0 * k * theta * theta);
    Ok(SpeciesTransport { mu, mu_13, mu_11_over_3, kappa })
}

/// μ_A, κ_A for both species at temperature θ and reference velocity u.
pub fn transport_coefficients(
    params: &PlasmaParams,
    theta: f64,
    u: [f64; 3],
    n_v: usize,
    config: &CollisionConfig,
) -> Result<TransportCoefficients> {
    Ok(TransportCoefficients {
        theta,
        u,
        ion: species_transport(params, Species::Ion, theta, u, n_v, config)?,
        electron: species_transport(params, Species::Electron, theta, u, n_v, config)?,
    })
}
