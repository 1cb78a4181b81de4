use super::LinearizedOperator;
use crate::error::{Result, VpbError};

/// x-derivatives of the rarefaction profile at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WaveGradients {
    pub dn_i: f64,
    pub dn_e: f64,
    pub du1: f64,
    pub dtheta: f64,
}

impl WaveGradients {
    fn is_finite(&self) -> bool {
        [self.dn_i, self.dn_e, self.du1, self.dtheta].iter().all(|v| v.is_finite())
    }
}

/// Background non-fluid profile
/// Ḡ = (3/2θ) L⁻¹P₁[m M ξ₁(ξ₁ ∂u₁ + |ξ−u|²/(2θ) ∂θ)] + L⁻¹P₁[n_A⁻¹ M_A ξ₁ ∂n_A] − (3/2θ) L⁻¹P₁[M ξ₁ ∂θ]
/// for a two-species operator. The four sources are summed before a single inversion.
pub fn background_g(op: &LinearizedOperator, grad: &WaveGradients) -> Result<Vec<f64>> {
    if !grad.is_finite() {
        return Err(VpbError::Domain("wave gradients must be finite".into()));
    }
    if op.components.len() != 2 {
        return Err(VpbError::Configuration("background profile needs a two-species operator".into()));
    }
    let theta = op.anchor_theta;
    let u = op.anchor_u;
    let a = 1.5 / theta;
    let mut src = vec![0.0; op.dim];
    for (c, n) in op.components.iter().zip(&op.anchor_density) {
        let dn = match c.species {
            crate::Species::Ion => grad.dn_i,
            crate::Species::Electron => grad.dn_e,
        };
        for (i, mv) in c.m.iter().enumerate() {
            let xi = c.grid.node(i);
            let c2 = (xi[0] - u[0]).powi(2) + (xi[1] - u[1]).powi(2) + (xi[2] - u[2]).powi(2);
            let velocity = a * c.mass * xi[0] * xi[0] * grad.du1;
            let temperature = a * c.mass * xi[0] * c2 / (2.0 * theta) * grad.dtheta;
            let density = xi[0] * dn / n;
            let mixed = -a * xi[0] * grad.dtheta;
            src[c.offset + i] = (velocity + temperature + density + mixed) * mv;
        }
    }
    let h = op.project_p1(&src);
    Ok(op.solve_linv(&h)?.0)
}
