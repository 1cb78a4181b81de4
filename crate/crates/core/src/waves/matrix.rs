use nalgebra::Matrix4;
use serde::Serialize;

use super::EulerParams;
use crate::error::{Result, VpbError};
use crate::params::PlasmaParams;

/// The symmetric 4×4 quadratic form 𝕄 of the fluid energy estimate and its
/// leading principal minors Δ₁₁..Δ₄₄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityMatrix {
    pub m: Matrix4<f64>,
    pub minors: [f64; 4],
}

impl StabilityMatrix {
    pub fn positive_definite(&self) -> bool {
        self.minors.iter().all(|&d| d > 0.0)
    }

    /// Closed form Δ₂₂ = −(16/81) A² (q_i/q_e) n^{−2/3}.
    pub fn delta22_closed(params: &PlasmaParams, a: f64, n: f64) -> f64 {
        -16.0 / 81.0 * a * a * (params.ion.charge / params.electron.charge) * n.powf(-2.0 / 3.0)
    }
}

/// 𝕄 at wave density n (electron density) for adiabat constant A.
pub fn stability_matrix(params: &PlasmaParams, a: f64, n: f64) -> Result<StabilityMatrix> {
    if !(n > 0.0 && a > 0.0) {
        return Err(VpbError::Domain(format!("stability matrix needs n, A > 0 (got {n}, {a})")));
    }
    let euler = EulerParams::new(*params)?;
    let b = euler.b_const(a);
    let (qi, qe) = (params.ion.charge, params.electron.charge);
    let (mi, me) = (params.ion.mass, params.electron.mass);
    let den = me * qi - mi * qe;
    let n13 = n.cbrt();
    let mut m = Matrix4::zeros();
    m[(0, 0)] = -4.0 / 9.0 * a * (qi / qe) / n13;
    m[(0, 2)] = -2.0 * a / (9.0 * b) * mi * (qi - qe) / den * n13;
    m[(1, 1)] = 4.0 / 9.0 * a / n13;
    m[(1, 2)] = -2.0 * a / (9.0 * b) * me * (qi - qe) / den * n13;
    m[(2, 2)] = den / qi * n;
    m[(2, 3)] = (qi - qe) / (3.0 * qi * b) * n13 * n13;
    m[(3, 3)] = 2.0 * (qi - qe) / (3.0 * qi * a) * n13;
    for i in 0..4 {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
    let minors = [
        m[(0, 0)],
        m.fixed_view::<2, 2>(0, 0).determinant(),
        m.fixed_view::<3, 3>(0, 0).determinant(),
        m.determinant(),
    ];
    Ok(StabilityMatrix { m, minors })
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub q_ratio: f64,
    pub mass_ratio: f64,
    pub n: f64,
    pub minors: [f64; 4],
    pub posdef: bool,
}

/// 𝕄 over q_i/|q_e| × m_i/m_e × n with q_e = −1, m_e = 1 and unit diameter.
pub fn stability_sweep(q_ratios: &[f64], mass_ratios: &[f64], densities: &[f64], a: f64) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::new();
    for &q in q_ratios {
        for &mr in mass_ratios {
            let params = PlasmaParams::from_values(mr, 1.0, q, -1.0, 1.0)?;
            for &n in densities {
                let s = stability_matrix(&params, a, n)?;
                out.push(SweepPoint { q_ratio: q, mass_ratio: mr, n, minors: s.minors, posdef: s.positive_definite() });
            }
        }
    }
    Ok(out)
}
