//! Hard-sphere two-component Boltzmann collision operator on velocity grids.
//!
//! Post-collision values are read from the grids by trilinear interpolation
//! (zero outside the box); ω runs over the full unit sphere. Interpolation
//! breaks exact discrete conservation, which [`conservative_fix`] restores.

mod forms;
mod sphere;

pub use forms::{entropy_production, i_forms, EntropyProduction, IForms};
pub use sphere::SphereQuadrature;

use nalgebra::{Matrix6, Vector6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};
use crate::grid::{Interpolant, VelocityGrid};
use crate::params::{PlasmaParams, Species};
use crate::Pair;

/// Off-grid evaluation scheme for post-collision velocities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interpolation {
    Trilinear,
}

/// Settings of the discrete collision operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionConfig {
    pub interpolation: Interpolation,
    /// Apply [`conservative_fix`] where the caller supports it.
    pub conservative_fix: bool,
    pub sphere: SphereQuadrature,
}

impl Default for CollisionConfig {
    fn default() -> Self {
        Self { interpolation: Interpolation::Trilinear, conservative_fix: true, sphere: SphereQuadrature::default() }
    }
}

/// ξ′ = ξ − 2m_B/(m_A+m_B)[(ξ−ξ*)·ω]ω and ξ*′ = ξ* + 2m_A/(m_A+m_B)[(ξ−ξ*)·ω]ω.
pub fn post_collision(
    xi: [f64; 3],
    xi_star: [f64; 3],
    omega: [f64; 3],
    m_a: f64,
    m_b: f64,
) -> Result<([f64; 3], [f64; 3])> {
    let norm = (omega[0] * omega[0] + omega[1] * omega[1] + omega[2] * omega[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(VpbError::Domain(format!("ω must be a unit vector, |ω| = {norm}")));
    }
    let d = (xi[0] - xi_star[0]) * omega[0] + (xi[1] - xi_star[1]) * omega[1] + (xi[2] - xi_star[2]) * omega[2];
    let ca = 2.0 * m_b / (m_a + m_b) * d;
    let cb = 2.0 * m_a / (m_a + m_b) * d;
    Ok((
        [xi[0] - ca * omega[0], xi[1] - ca * omega[1], xi[2] - ca * omega[2]],
        [xi_star[0] + cb * omega[0], xi_star[1] + cb * omega[1], xi_star[2] + cb * omega[2]],
    ))
}

/// Geometry of one species pair (A, B): grids, masses and kernel prefactor.
#[derive(Debug, Clone, Copy)]
pub struct CollisionPair<'a> {
    pub grid_a: &'a VelocityGrid,
    pub grid_b: &'a VelocityGrid,
    pub m_a: f64,
    pub m_b: f64,
    pub prefactor: f64,
    pub sphere: &'a SphereQuadrature,
}

impl<'a> CollisionPair<'a> {
    pub fn new(
        params: &PlasmaParams,
        a: Species,
        b: Species,
        grids: &'a Pair<VelocityGrid>,
        sphere: &'a SphereQuadrature,
    ) -> Self {
        Self {
            grid_a: &grids[a],
            grid_b: &grids[b],
            m_a: params.mass(a),
            m_b: params.mass(b),
            prefactor: params.kernel_prefactor(a, b),
            sphere,
        }
    }

    fn check(&self, f_a: &[f64], f_b: &[f64]) -> Result<()> {
        if f_a.len() != self.grid_a.len() || f_b.len() != self.grid_b.len() {
            return Err(VpbError::Configuration(format!(
                "field sizes {}/{} do not match grids {}/{}",
                f_a.len(),
                f_b.len(),
                self.grid_a.len(),
                self.grid_b.len()
            )));
        }
        Ok(())
    }

    /// Gain and loss parts of Q_AB(F_A, F_B) on the nodes of grid A.
    pub fn parts(&self, f_a: &[f64], f_b: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(f_a, f_b)?;
        let ia = Interpolant::new(self.grid_a, f_a);
        let ib = Interpolant::new(self.grid_b, f_b);
        let nodes_b = self.grid_b.nodes();
        let ca = 2.0 * self.m_b / (self.m_a + self.m_b);
        let cb = 2.0 * self.m_a / (self.m_a + self.m_b);
        let omegas = self.sphere.folded();
        let scale = self.prefactor * self.grid_b.cell_volume();
        let out: Vec<(f64, f64)> = (0..self.grid_a.len())
            .into_par_iter()
            .map(|i| {
                let xi = self.grid_a.node(i);
                let mut gain = 0.0;
                let mut loss = 0.0;
                for (j, xs) in nodes_b.iter().enumerate() {
                    let g = [xi[0] - xs[0], xi[1] - xs[1], xi[2] - xs[2]];
                    let mut kern = 0.0;
                    let mut gj = 0.0;
                    for &(w, wt) in omegas {
                        let d = g[0] * w[0] + g[1] * w[1] + g[2] * w[2];
                        let k = wt * d.abs();
                        if k == 0.0 {
                            continue;
                        }
                        kern += k;
                        let (da, db) = (ca * d, cb * d);
                        let fa = ia.eval([xi[0] - da * w[0], xi[1] - da * w[1], xi[2] - da * w[2]]);
                        if fa == 0.0 {
                            continue;
                        }
                        let fb = ib.eval([xs[0] + db * w[0], xs[1] + db * w[1], xs[2] + db * w[2]]);
                        gj += k * fa * fb;
                    }
                    gain += gj;
                    loss += kern * f_b[j];
                }
                (gain * scale, loss * scale * f_a[i])
            })
            .collect();
        Ok(out.into_iter().unzip())
    }

    /// Q_AB(F_A, F_B) = gain − loss.
    pub fn q(&self, f_a: &[f64], f_b: &[f64]) -> Result<Vec<f64>> {
        let (gain, loss) = self.parts(f_a, f_b)?;
        Ok(gain.iter().zip(&loss).map(|(g, l)| g - l).collect())
    }

    /// Collision frequency Σ_ξ* B_AB w Δv³ · F_B(ξ*) without the F_A factor.
    pub fn loss_frequency(&self, f_b: &[f64]) -> Vec<f64> {
        let nodes_b = self.grid_b.nodes();
        let omegas = self.sphere.folded();
        let scale = self.prefactor * self.grid_b.cell_volume();
        (0..self.grid_a.len())
            .into_par_iter()
            .map(|i| {
                let xi = self.grid_a.node(i);
                let mut acc = 0.0;
                for (j, xs) in nodes_b.iter().enumerate() {
                    let g = [xi[0] - xs[0], xi[1] - xs[1], xi[2] - xs[2]];
                    let kern: f64 =
                        omegas.iter().map(|&(w, wt)| wt * (g[0] * w[0] + g[1] * w[1] + g[2] * w[2]).abs()).sum();
                    acc += kern * f_b[j];
                }
                acc * scale
            })
            .collect()
    }
}

/// Q_AB(F_A, F_B) evaluated on the nodes of species A's grid.
pub fn q_ab(
    f_a: &[f64],
    f_b: &[f64],
    a: Species,
    b: Species,
    grids: &Pair<VelocityGrid>,
    params: &PlasmaParams,
    config: &CollisionConfig,
) -> Result<Vec<f64>> {
    CollisionPair::new(params, a, b, grids, &config.sphere).q(f_a, f_b)
}

/// (Q_ii(F_i,F_i) + Q_ie(F_i,F_e), Q_ee(F_e,F_e) + Q_ei(F_e,F_i)), without conservation fix.
pub fn q_full(
    f: Pair<&[f64]>,
    grids: &Pair<VelocityGrid>,
    params: &PlasmaParams,
    config: &CollisionConfig,
) -> Result<Pair<Vec<f64>>> {
    let mut out = Pair::new(Vec::new(), Vec::new());
    for a in Species::BOTH {
        let b = a.other();
        let same = q_ab(f[a], f[a], a, a, grids, params, config)?;
        let cross = q_ab(f[a], f[b], a, b, grids, params, config)?;
        out[a] = same.iter().zip(&cross).map(|(x, y)| x + y).collect();
    }
    Ok(out)
}

/// ψ_j(ξ) for species `s`: [m_i,0], [0,m_e], m_Aξ₁, m_Aξ₂, m_Aξ₃, m_A|ξ|²/2.
#[inline]
pub fn invariant(j: usize, s: Species, mass: f64, xi: [f64; 3]) -> f64 {
    match j {
        0 => (s == Species::Ion) as u8 as f64 * mass,
        1 => (s == Species::Electron) as u8 as f64 * mass,
        2..=4 => mass * xi[j - 2],
        5 => 0.5 * mass * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]),
        _ => unreachable!("six collision invariants"),
    }
}

/// ∫ψ_j·Q dξ for the six collision invariants.
pub fn collision_invariant_moments(q: Pair<&[f64]>, grids: &Pair<VelocityGrid>, params: &PlasmaParams) -> [f64; 6] {
    let mut out = [0.0; 6];
    for s in Species::BOTH {
        let m = params.mass(s);
        let g = &grids[s];
        let mut acc = [0.0; 6];
        for (idx, &v) in q[s].iter().enumerate() {
            let xi = g.node(idx);
            for (j, a) in acc.iter_mut().enumerate() {
                *a += invariant(j, s, m, xi) * v;
            }
        }
        for j in 0..6 {
            out[j] += acc[j] * g.cell_volume();
        }
    }
    out
}

/// Output of [`conservative_fix`].
#[derive(Debug, Clone)]
pub struct FixedCollision {
    pub q: Pair<Vec<f64>>,
    /// Invariant moments of the input.
    pub raw_moments: [f64; 6],
    /// ‖correction‖ in the weighted norm Σ∫|·|²/M_A.
    pub correction_norm: f64,
}

/// Removes the component of Q in span{ψ_j M} so that all six invariant moments
/// vanish. The correction is the ⟨·,·⟩_M-orthogonal projection, hence of minimal
/// weighted norm. Two passes bring the moments to rounding level.
pub fn conservative_fix(
    q: Pair<&[f64]>,
    weight: Pair<&[f64]>,
    grids: &Pair<VelocityGrid>,
    params: &PlasmaParams,
) -> Result<FixedCollision> {
    let gram = invariant_gram(weight, grids, params);
    let chol = gram
        .cholesky()
        .ok_or_else(|| VpbError::Numerical("singular invariant Gram matrix (degenerate weight)".into()))?;
    let raw_moments = collision_invariant_moments(q, grids, params);
    let mut out = Pair::new(q.ion.to_vec(), q.electron.to_vec());
    let mut total = Vector6::zeros();
    for _ in 0..2 {
        let mom = collision_invariant_moments(out.as_ref().map(|_, v| v.as_slice()), grids, params);
        let c = chol.solve(&Vector6::from_column_slice(&mom));
        total += c;
        for s in Species::BOTH {
            let m = params.mass(s);
            let g = &grids[s];
            for (idx, v) in out[s].iter_mut().enumerate() {
                let xi = g.node(idx);
                let mut corr = 0.0;
                for j in 0..6 {
                    corr += c[j] * invariant(j, s, m, xi);
                }
                *v -= corr * weight[s][idx];
            }
        }
    }
    let correction_norm = total.dot(&(gram * total)).max(0.0).sqrt();
    Ok(FixedCollision { q: out, raw_moments, correction_norm })
}

/// G_jk = Σ_A ∫ψ_j ψ_k M_A dξ.
pub fn invariant_gram(weight: Pair<&[f64]>, grids: &Pair<VelocityGrid>, params: &PlasmaParams) -> Matrix6<f64> {
    let mut gram = Matrix6::zeros();
    for s in Species::BOTH {
        let m = params.mass(s);
        let g = &grids[s];
        let mut acc = Matrix6::zeros();
        for (idx, &w) in weight[s].iter().enumerate() {
            let xi = g.node(idx);
            let psi: [f64; 6] = std::array::from_fn(|j| invariant(j, s, m, xi));
            for j in 0..6 {
                for k in 0..6 {
                    acc[(j, k)] += psi[j] * psi[k] * w;
                }
            }
        }
        gram += acc * g.cell_volume();
    }
    gram
}

/// ‖h‖ = (Σ_A ∫ h_A²/M_A dξ)^{1/2}.
pub fn weighted_norm(h: Pair<&[f64]>, weight: Pair<&[f64]>, grids: &Pair<VelocityGrid>) -> f64 {
    let mut acc = 0.0;
    for s in Species::BOTH {
        let part: f64 = h[s].iter().zip(weight[s]).map(|(v, w)| v * v / w).sum();
        acc += part * grids[s].cell_volume();
    }
    acc.sqrt()
}
