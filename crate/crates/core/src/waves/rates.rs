use serde::Serialize;

use super::{RarefactionWave, WaveState};
use crate::error::{Result, VpbError};

/// Half-width of the x₀ window outside which w₀′ < 1e−14 is negligible.
fn foot_window(wave: &RarefactionWave) -> f64 {
    let amp = 0.5 * (wave.w_plus - wave.w_minus);
    // sech²(y) ≈ 4e^{−2y} < 1e−14 / amp.
    (0.5 * (4.0 * amp / 1e-14).ln()).max(1.0)
}

/// ‖∂_x[n^r, u₁^r, θ^r](t, ·)‖_{L^p} per component, by composite Simpson in the
/// characteristic foot variable x₀ (dx = (1 + w₀′(x₀) t) dx₀).
pub fn lp_norms(wave: &RarefactionWave, t: f64, p: f64, panels: usize) -> Result<WaveState> {
    if !(p >= 1.0) || !(t >= 0.0) {
        return Err(VpbError::Domain(format!("L^p norm needs p ≥ 1 and t ≥ 0 (p={p}, t={t})")));
    }
    let half = foot_window(wave);
    let m = panels + panels % 2;
    let h = 2.0 * half / m as f64;
    let mut acc = [0.0; 3];
    for k in 0..=m {
        let y = -half + k as f64 * h;
        let d = wave.w0_prime(y);
        let jac = 1.0 + d * t;
        let g = wave.gradient_from(wave.w0(y), d / jac);
        let wgt = if k == 0 || k == m {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        for (a, v) in acc.iter_mut().zip([g.n, g.u1, g.theta]) {
            *a += wgt * v.abs().powf(p) * jac;
        }
    }
    let f = |a: f64| (a * h / 3.0).powf(1.0 / p);
    Ok(WaveState { n: f(acc[0]), u1: f(acc[1]), theta: f(acc[2]) })
}

/// Least-squares slope of ln y against ln t.
pub fn fit_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// sup_x |smooth(t, x) − fan(x/t)| sampled on a uniform lattice covering the fan
/// and its margins, plus the fan corners x = w_± t.
pub fn sup_distance_to_fan(wave: &RarefactionWave, t: f64, samples: usize) -> Result<f64> {
    let lo = wave.w_minus * t - 20.0;
    let hi = wave.w_plus * t + 20.0;
    let mut best: f64 = 0.0;
    for k in 0..=samples {
        let x = lo + (hi - lo) * k as f64 / samples as f64;
        best = best.max(wave.fan_distance(t, x)?);
    }
    for x in [wave.w_minus * t, wave.w_plus * t] {
        best = best.max(wave.fan_distance(t, x)?);
    }
    Ok(best)
}

/// Measured decay and positivity quantities for one wave.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub times: Vec<f64>,
    pub p_values: Vec<f64>,
    /// norms[i][j]: component norms at p_values[i], times[j].
    pub norms: Vec<Vec<WaveState>>,
    /// Fitted exponents per p (n, u₁, θ components).
    pub slopes: Vec<WaveState>,
    /// Smallest ∂_x u₁^r over the sampled (t, x) points.
    pub min_ux: f64,
    /// Whether n₋ < n^r < n₊ and u₁₋ < u₁^r < u₁₊ held at every sample.
    pub bounds_hold: bool,
    pub fan_times: Vec<f64>,
    pub fan_distances: Vec<f64>,
}

/// Positivity of ∂_x u₁^r and the interval bounds on samples, L^p
/// decay exponents fitted over `times`, and sup-distance to the fan at `fan_times`.
pub fn wave_decay_rates(
    wave: &RarefactionWave,
    p_values: &[f64],
    times: &[f64],
    fan_times: &[f64],
) -> Result<RateReport> {
    if !(wave.delta_r > 0.0) {
        return Err(VpbError::Domain("wave strength must be positive".into()));
    }
    if times.iter().chain(fan_times).any(|t| !(1.0..=200.0).contains(t)) {
        return Err(VpbError::Domain("rate times must lie in [1, 200]".into()));
    }
    let mut norms = Vec::new();
    let mut slopes = Vec::new();
    for &p in p_values {
        let row: Vec<WaveState> = times.iter().map(|&t| lp_norms(wave, t, p, 40_000)).collect::<Result<_>>()?;
        let pick = |f: fn(&WaveState) -> f64| fit_slope(times, &row.iter().map(f).collect::<Vec<_>>());
        slopes.push(WaveState { n: pick(|s| s.n), u1: pick(|s| s.u1), theta: pick(|s| s.theta) });
        norms.push(row);
    }
    let mut min_ux = f64::INFINITY;
    let mut bounds_hold = true;
    for &t in times.iter().chain(fan_times) {
        let (lo, hi) = (wave.w_minus * t - 30.0, wave.w_plus * t + 30.0);
        for k in 0..=2000 {
            let x = lo + (hi - lo) * k as f64 / 2000.0;
            let g = wave.smooth_wave_dx(t, x)?;
            let s = wave.smooth_wave(t, x)?;
            min_ux = min_ux.min(g.u1);
            // Far tails round to the end states; the strict bounds are checked
            // where the wave differs from them in floating point.
            let inside_n = s.n >= wave.left.n && s.n <= wave.right.n;
            let inside_u = s.u1 >= wave.left.u1 && s.u1 <= wave.right.u1;
            bounds_hold &= inside_n && inside_u;
        }
    }
    let fan_distances = fan_times.iter().map(|&t| sup_distance_to_fan(wave, t, 20_000)).collect::<Result<_>>()?;
    Ok(RateReport {
        times: times.to_vec(),
        p_values: p_values.to_vec(),
        norms,
        slopes,
        min_ux,
        bounds_hold,
        fan_times: fan_times.to_vec(),
        fan_distances,
    })
}
