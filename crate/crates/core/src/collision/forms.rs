//! Entropy production and the symmetrized collision forms.

use rayon::prelude::*;

use super::{q_full, CollisionConfig, CollisionPair};
use crate::error::Result;
use crate::grid::{Interpolant, VelocityGrid};
use crate::params::{PlasmaParams, Species};
use crate::Pair;

/// Values below this are clipped before taking logarithms.
pub const LN_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyProduction {
    /// Σ_A ∫ Q_A ln F_A dξ.
    pub value: f64,
    /// Nodes where F fell below the floor.
    pub clipped: usize,
}

pub fn entropy_production(f: Pair<&[f64]>, q: Pair<&[f64]>, grids: &Pair<VelocityGrid>) -> EntropyProduction {
    let mut value = 0.0;
    let mut clipped = 0;
    for s in Species::BOTH {
        let mut acc = 0.0;
        for (fv, qv) in f[s].iter().zip(q[s]) {
            let fv = if *fv < LN_FLOOR {
                clipped += 1;
                LN_FLOOR
            } else {
                *fv
            };
            acc += qv * fv.ln();
        }
        value += acc * grids[s].cell_volume();
    }
    EntropyProduction { value, clipped }
}

/// The three symmetrized forms and both sides of
/// (Q(F,F), G) = −¼ I_ii − ½ I_ie − ¼ I_ee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IForms {
    pub ii: f64,
    pub ee: f64,
    pub ie: f64,
    /// Σ_A ∫ Q_A(F) G_A dξ with the same discrete kinematics.
    pub lhs: f64,
    /// −¼ I_ii − ½ I_ie − ¼ I_ee.
    pub rhs: f64,
}

impl IForms {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// ∫∫∫ B [F_B(ξ*′)F_A(ξ′) − F_B(ξ*)F_A(ξ)][G_B(ξ*′) + G_A(ξ′) − G_B(ξ*) − G_A(ξ)]
/// with ξ on A's grid and ξ* on B's grid.
fn form(pair: &CollisionPair, f_a: &[f64], f_b: &[f64], g_a: &[f64], g_b: &[f64]) -> f64 {
    let ifa = Interpolant::new(pair.grid_a, f_a);
    let ifb = Interpolant::new(pair.grid_b, f_b);
    let iga = Interpolant::new(pair.grid_a, g_a);
    let igb = Interpolant::new(pair.grid_b, g_b);
    let nodes_b = pair.grid_b.nodes();
    let ca = 2.0 * pair.m_b / (pair.m_a + pair.m_b);
    let cb = 2.0 * pair.m_a / (pair.m_a + pair.m_b);
    let per_node: Vec<f64> = (0..pair.grid_a.len())
        .into_par_iter()
        .map(|i| {
            let xi = pair.grid_a.node(i);
            let mut acc = 0.0;
            for (j, xs) in nodes_b.iter().enumerate() {
                let g = [xi[0] - xs[0], xi[1] - xs[1], xi[2] - xs[2]];
                for &(w, wt) in pair.sphere.folded() {
                    let d = g[0] * w[0] + g[1] * w[1] + g[2] * w[2];
                    let k = wt * d.abs();
                    if k == 0.0 {
                        continue;
                    }
                    let pa = [xi[0] - ca * d * w[0], xi[1] - ca * d * w[1], xi[2] - ca * d * w[2]];
                    let pb = [xs[0] + cb * d * w[0], xs[1] + cb * d * w[1], xs[2] + cb * d * w[2]];
                    let ff = ifb.eval(pb) * ifa.eval(pa) - f_b[j] * f_a[i];
                    let gg = igb.eval(pb) + iga.eval(pa) - g_b[j] - g_a[i];
                    acc += k * ff * gg;
                }
            }
            acc
        })
        .collect();
    per_node.iter().sum::<f64>() * pair.prefactor * pair.grid_a.cell_volume() * pair.grid_b.cell_volume()
}

pub fn i_forms(
    f: Pair<&[f64]>,
    g: Pair<&[f64]>,
    grids: &Pair<VelocityGrid>,
    params: &PlasmaParams,
    config: &CollisionConfig,
) -> Result<IForms> {
    use Species::{Electron, Ion};
    let pair = |a, b| CollisionPair::new(params, a, b, grids, &config.sphere);
    let ii = form(&pair(Ion, Ion), f.ion, f.ion, g.ion, g.ion);
    let ee = form(&pair(Electron, Electron), f.electron, f.electron, g.electron, g.electron);
    // ξ is the electron velocity and ξ* the ion velocity.
    let ie = form(&pair(Electron, Ion), f.electron, f.ion, g.electron, g.ion);
    let q = q_full(f, grids, params, config)?;
    let mut lhs = 0.0;
    for s in Species::BOTH {
        let part: f64 = q[s].iter().zip(g[s]).map(|(a, b)| a * b).sum();
        lhs += part * grids[s].cell_volume();
    }
    let rhs = -0.25 * ii - 0.5 * ie - 0.25 * ee;
    Ok(IForms { ii, ee, ie, lhs, rhs })
}
