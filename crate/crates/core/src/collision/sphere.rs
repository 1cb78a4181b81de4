//! Product quadrature on the unit sphere.

use gauss_quad::GaussLegendre;

use crate::error::{Result, VpbError};

/// Unit vectors ω_p with weights w_p, Σ w_p = 4π.
///
/// The polar axis is the ξ₁ direction and azimuths sit at (k + ½)·2π/N_φ, so the
/// node set is invariant under ξ₂ ↔ ξ₃, under each reflection, and under ω ↦ −ω
/// (for an even azimuth count). That keeps the discrete operators isotropic in
/// the transverse plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    pub n_polar: usize,
    pub n_azimuth: usize,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    folded: Vec<([f64; 3], f64)>,
}

impl SphereQuadrature {
    pub fn new(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_polar == 0 || n_azimuth == 0 {
            return Err(VpbError::Domain("sphere quadrature needs at least one node per angle".into()));
        }
        let gl = GaussLegendre::new(n_polar.try_into().expect("nonzero"));
        let dphi = 2.0 * std::f64::consts::PI / n_azimuth as f64;
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for &(c, wc) in gl.iter() {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for k in 0..n_azimuth {
                let phi = (k as f64 + 0.5) * dphi;
                let w = [c, s * phi.cos(), s * phi.sin()];
                let norm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
                nodes.push([w[0] / norm, w[1] / norm, w[2] / norm]);
                weights.push(wc * dphi);
            }
        }
        let folded = fold_antipodes(&nodes, &weights);
        Ok(Self { n_polar, n_azimuth, nodes, weights, folded })
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// One node of each antipodal pair with doubled weight. Integrands of the
    /// collision operator are even in ω, so this halves the work exactly.
    pub fn folded(&self) -> &[([f64; 3], f64)] {
        &self.folded
    }
}

impl Default for SphereQuadrature {
    /// 4 polar × 8 azimuthal nodes.
    fn default() -> Self {
        Self::new(4, 8).expect("default quadrature is valid")
    }
}

fn fold_antipodes(nodes: &[[f64; 3]], weights: &[f64]) -> Vec<([f64; 3], f64)> {
    let mut partner = vec![usize::MAX; nodes.len()];
    for (i, a) in nodes.iter().enumerate() {
        for (j, b) in nodes.iter().enumerate() {
            let d = (a[0] + b[0]).abs() + (a[1] + b[1]).abs() + (a[2] + b[2]).abs();
            if d < 1e-12 && (weights[i] - weights[j]).abs() < 1e-14 {
                partner[i] = j;
            }
        }
    }
    if partner.contains(&usize::MAX) {
        return nodes.iter().copied().zip(weights.iter().copied()).collect();
    }
    (0..nodes.len()).filter(|&i| i < partner[i]).map(|i| (nodes[i], 2.0 * weights[i])).collect()
}
