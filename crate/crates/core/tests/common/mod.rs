//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use vpb_core::collision::SphereQuadrature;
use vpb_core::{recommended_extent, BiMaxwellian, Pair, PlasmaParams, VelocityGrid};

pub fn grids_for(params: &PlasmaParams, n: usize, u_max: f64, theta_max: f64) -> Pair<VelocityGrid> {
    Pair::new(
        VelocityGrid::new(n, recommended_extent(params.ion.mass, u_max, theta_max)).unwrap(),
        VelocityGrid::new(n, recommended_extent(params.electron.mass, u_max, theta_max)).unwrap(),
    )
}

pub fn slices(p: &Pair<Vec<f64>>) -> Pair<&[f64]> {
    Pair::new(p.ion.as_slice(), p.electron.as_slice())
}

pub fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn random_positive(grids: &Pair<VelocityGrid>, params: &PlasmaParams, rng: &mut ChaCha8Rng) -> Pair<Vec<f64>> {
    let bm = BiMaxwellian::new(1.0, 0.9, [0.1, 0.0, -0.05], 1.0).unwrap();
    let base = bm.sample_analytic(grids, params);
    base.map(|_, v| v.iter().map(|x| x * rng.random_range(0.5..1.5)).collect())
}

/// Trilinear value with zero beyond the nodes: index −1 and n count as zeros.
pub fn oracle_interp(grid: &VelocityGrid, f: &[f64], p: [f64; 3]) -> f64 {
    let n = grid.n as i64;
    let h = grid.dv();
    let mut lo = [0i64; 3];
    let mut t = [0.0; 3];
    for a in 0..3 {
        let s = (p[a] - (grid.center[a] - grid.half_width)) / h;
        if s <= -1.0 || s >= n as f64 {
            return 0.0;
        }
        lo[a] = s.floor() as i64;
        t[a] = s - s.floor();
    }
    let at = |i: i64, j: i64, k: i64| {
        if [i, j, k].iter().any(|&x| x < 0 || x >= n) {
            0.0
        } else {
            f[((i * n + j) * n + k) as usize]
        }
    };
    let mut acc = 0.0;
    for di in 0..2 {
        for dj in 0..2 {
            for dk in 0..2 {
                let w = (if di == 1 { t[0] } else { 1.0 - t[0] })
                    * (if dj == 1 { t[1] } else { 1.0 - t[1] })
                    * (if dk == 1 { t[2] } else { 1.0 - t[2] });
                acc += w * at(lo[0] + di, lo[1] + dj, lo[2] + dk);
            }
        }
    }
    acc
}

/// Full-sphere sum of the hard-sphere gain minus loss, no antipodal folding.
#[allow(clippy::too_many_arguments)]
pub fn oracle_q(
    f_a: &[f64],
    f_b: &[f64],
    ga: &VelocityGrid,
    gb: &VelocityGrid,
    m_a: f64,
    m_b: f64,
    sigma: f64,
    sphere: &SphereQuadrature,
) -> Vec<f64> {
    let pref = sigma * sigma;
    let dvb3 = gb.dv().powi(3);
    (0..ga.len())
        .map(|i| {
            let xi = ga.node(i);
            let mut acc = 0.0;
            for j in 0..gb.len() {
                let xs = gb.node(j);
                for (w, wt) in sphere.nodes().iter().zip(sphere.weights()) {
                    let d: f64 = (0..3).map(|k| (xi[k] - xs[k]) * w[k]).sum();
                    let a: [f64; 3] = std::array::from_fn(|k| xi[k] - 2.0 * m_b / (m_a + m_b) * d * w[k]);
                    let b: [f64; 3] = std::array::from_fn(|k| xs[k] + 2.0 * m_a / (m_a + m_b) * d * w[k]);
                    let gain = oracle_interp(ga, f_a, a) * oracle_interp(gb, f_b, b);
                    acc += wt * d.abs() * (gain - f_a[i] * f_b[j]);
                }
            }
            pref * acc * dvb3
        })
        .collect()
}
