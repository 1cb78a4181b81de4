//! Quasineutral Euler structure behind the large-time profile: characteristics,
//! the 3-rarefaction curve, the self-similar fan, the Burgers-smoothed wave and
//! the entropy/pressure pair.
//!
//! Throughout, `n` is the electron density; the ion density follows from
//! quasineutrality as n_i = −(q_e/q_i) n and the total is n̄ = ((q_i−q_e)/q_i) n.

mod matrix;
mod rates;

pub use matrix::{stability_matrix, stability_sweep, StabilityMatrix, SweepPoint};
pub use rates::{fit_slope, lp_norms, sup_distance_to_fan, wave_decay_rates, RateReport};

use serde::Serialize;

use crate::error::{Result, VpbError};
use crate::params::PlasmaParams;

/// Entropy constant k = 1/(2πe).
pub const ENTROPY_K: f64 = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E);

/// Φ(y) = y − 1 − ln y.
pub fn phi_fn(y: f64) -> f64 {
    y - 1.0 - y.ln()
}

/// Entropy S(n̄, θ) and pressure P = (2/3) n̄ θ of the mixture.
pub fn entropy_pressure(n_bar: f64, theta: f64) -> Result<(f64, f64)> {
    if !(n_bar > 0.0 && theta > 0.0) {
        return Err(VpbError::Domain(format!("entropy needs n̄, θ > 0 (got {n_bar}, {theta})")));
    }
    let s = -(2.0 / 3.0) * n_bar.ln() + (4.0 * std::f64::consts::PI / 3.0 * theta).ln() + 1.0;
    Ok((s, 2.0 / 3.0 * n_bar * theta))
}

/// θ = (3/2) k e^S n̄^{2/3}.
pub fn temperature_from_entropy(n_bar: f64, s: f64) -> f64 {
    1.5 * ENTROPY_K * s.exp() * n_bar.powf(2.0 / 3.0)
}

/// Plasma parameters with the pressure coefficient c of P(n, S) = c n θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerParams {
    pub plasma: PlasmaParams,
    pub c: f64,
}

impl EulerParams {
    pub fn new(plasma: PlasmaParams) -> Result<Self> {
        let (qi, qe) = (plasma.ion.charge, plasma.electron.charge);
        let (mi, me) = (plasma.ion.mass, plasma.electron.mass);
        let c = 2.0 * (qi - qe) / (3.0 * (me * qi - mi * qe));
        if !(c > 0.0) {
            return Err(VpbError::Domain(format!("pressure coefficient must be positive, got {c}")));
        }
        Ok(Self { plasma, c })
    }

    /// (q_i − q_e)/q_i, the factor turning n into n̄.
    pub fn total_factor(&self) -> f64 {
        (self.plasma.ion.charge - self.plasma.electron.charge) / self.plasma.ion.charge
    }

    /// Quasineutral ion density for electron density n.
    pub fn ion_density(&self, n: f64) -> f64 {
        -self.plasma.electron.charge / self.plasma.ion.charge * n
    }

    /// Temperature on the isentrope S at electron density n.
    pub fn theta(&self, n: f64, s: f64) -> f64 {
        temperature_from_entropy(self.total_factor() * n, s)
    }

    pub fn entropy(&self, n: f64, theta: f64) -> Result<f64> {
        Ok(entropy_pressure(self.total_factor() * n, theta)?.0)
    }

    /// P(n, S) = c n θ(n, S).
    pub fn pressure(&self, n: f64, s: f64) -> f64 {
        self.c * n * self.theta(n, s)
    }

    /// ∂_n P at fixed S, i.e. (5/3) c θ.
    pub fn dpdn(&self, n: f64, s: f64) -> Result<f64> {
        if !(n > 0.0) {
            return Err(VpbError::Domain(format!("density must be positive, got {n}")));
        }
        let v = 5.0 / 3.0 * self.c * self.theta(n, s);
        if !(v > 0.0) || !v.is_finite() {
            return Err(VpbError::Domain(format!("nonpositive sound speed squared {v}")));
        }
        Ok(v)
    }

    /// (λ₁, λ₂, λ₃) = (u₁ − √∂_nP, u₁, u₁ + √∂_nP).
    pub fn characteristics(&self, n: f64, u1: f64, s: f64) -> Result<(f64, f64, f64)> {
        let a = self.dpdn(n, s)?.sqrt();
        Ok((u1 - a, u1, u1 + a))
    }

    /// B = √(10A(q_i−q_e)/(9(m_e q_i − m_i q_e))), so that √∂_nP = B n^{1/3} on θ = A n^{2/3}.
    pub fn b_const(&self, a: f64) -> f64 {
        (5.0 / 3.0 * self.c * a).sqrt()
    }
}

/// A point (n, u₁, θ) of the quasineutral Euler system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveState {
    pub n: f64,
    pub u1: f64,
    pub theta: f64,
}

impl WaveState {
    pub fn new(n: f64, u1: f64, theta: f64) -> Self {
        Self { n, u1, theta }
    }

    fn max_abs_diff(&self, o: &WaveState) -> f64 {
        (self.n - o.n).abs().max((self.u1 - o.u1).abs()).max((self.theta - o.theta).abs())
    }
}

/// Outcome of an R₃ membership test with its residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R3Check {
    pub member: bool,
    /// (n^{2/3}/θ)/(n₋^{2/3}/θ₋) − 1.
    pub adiabat_residual: f64,
    /// u₁ − u₁₋ − 3B(n^{1/3} − n₋^{1/3}).
    pub curve_residual: f64,
    pub ordered: bool,
}

/// Residual tolerance below which a state counts as on the curve.
pub const R3_TOL: f64 = 1e-10;

/// Whether `right` lies on the 3-rarefaction curve issued from `left`.
pub fn r3_membership(euler: &EulerParams, left: WaveState, right: WaveState) -> R3Check {
    let a = left.theta / left.n.powf(2.0 / 3.0);
    let b = euler.b_const(a);
    let adiabat_residual = (right.n.powf(2.0 / 3.0) / right.theta) / (left.n.powf(2.0 / 3.0) / left.theta) - 1.0;
    let curve_residual = right.u1 - left.u1 - 3.0 * b * (right.n.cbrt() - left.n.cbrt());
    let ordered = right.n > left.n && right.u1 > left.u1;
    let valid = left.n > 0.0 && left.theta > 0.0 && right.n > 0.0 && right.theta > 0.0;
    let member = valid && ordered && adiabat_residual.abs() <= R3_TOL && curve_residual.abs() <= R3_TOL;
    R3Check { member, adiabat_residual, curve_residual, ordered }
}

/// End states joined by a 3-rarefaction wave, with the derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RarefactionWave {
    pub euler: EulerParams,
    pub left: WaveState,
    pub right: WaveState,
    /// Entropy S₋ (= S₊).
    pub s_minus: f64,
    /// A = θ_±/n_±^{2/3}.
    pub a: f64,
    pub b: f64,
    pub w_minus: f64,
    pub w_plus: f64,
    /// δ_r = |n₊−n₋| + |u₊−u₋| + |θ₊−θ₋|.
    pub delta_r: f64,
}

impl RarefactionWave {
    /// Validates that `right` is on R₃(left).
    pub fn new(euler: EulerParams, left: WaveState, right: WaveState) -> Result<Self> {
        if !(left.n > 0.0 && left.theta > 0.0) {
            return Err(VpbError::Domain("left state needs n, θ > 0".into()));
        }
        let check = r3_membership(&euler, left, right);
        if !check.ordered {
            return Err(VpbError::Domain("R3 requires n_+ > n_− and u_+ > u_−".into()));
        }
        if !check.member {
            return Err(VpbError::Domain(format!(
                "right state is off the 3-rarefaction curve (adiabat residual {:.3e}, curve residual {:.3e})",
                check.adiabat_residual, check.curve_residual
            )));
        }
        Ok(Self::assemble(euler, left, right))
    }

    fn assemble(euler: EulerParams, left: WaveState, right: WaveState) -> Self {
        let a = left.theta / left.n.powf(2.0 / 3.0);
        let b = euler.b_const(a);
        let s_minus = euler.entropy(left.n, left.theta).unwrap_or(f64::NAN);
        let delta_r = (right.n - left.n).abs() + (right.u1 - left.u1).abs() + (right.theta - left.theta).abs();
        Self {
            euler,
            left,
            right,
            s_minus,
            a,
            b,
            w_minus: left.u1 + b * left.n.cbrt(),
            w_plus: right.u1 + b * right.n.cbrt(),
            delta_r,
        }
    }

    /// The state on R₃(left) with density `n_plus`.
    pub fn from_left(euler: EulerParams, left: WaveState, n_plus: f64) -> Result<Self> {
        if !(left.n > 0.0 && left.theta > 0.0) {
            return Err(VpbError::Domain("left state needs n, θ > 0".into()));
        }
        if !(n_plus > left.n) {
            return Err(VpbError::Domain("R3 requires n_+ > n_−".into()));
        }
        let a = left.theta / left.n.powf(2.0 / 3.0);
        let b = euler.b_const(a);
        let right = WaveState {
            n: n_plus,
            u1: left.u1 + 3.0 * b * (n_plus.cbrt() - left.n.cbrt()),
            theta: a * n_plus.powf(2.0 / 3.0),
        };
        Ok(Self::assemble(euler, left, right))
    }

    /// The wave from (n₋, θ₋ = A n₋^{2/3}) with strength `delta_r`, with u₋ chosen so
    /// that w₋ = −w₊ and the fan spreads symmetrically about x = 0.
    pub fn centered(euler: EulerParams, n_minus: f64, a: f64, delta_r: f64) -> Result<Self> {
        if !(n_minus > 0.0 && a > 0.0 && delta_r > 0.0) {
            return Err(VpbError::Domain("centered wave needs n_-, A, δ_r > 0".into()));
        }
        let b = euler.b_const(a);
        let strength = |np: f64| {
            (np - n_minus) + 3.0 * b * (np.cbrt() - n_minus.cbrt()) + a * (np.powf(2.0 / 3.0) - n_minus.powf(2.0 / 3.0))
        };
        let (mut lo, mut hi) = (n_minus, 2.0 * n_minus);
        while strength(hi) < delta_r {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if strength(mid) < delta_r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let n_plus = 0.5 * (lo + hi);
        let jump = 3.0 * b * (n_plus.cbrt() - n_minus.cbrt());
        let u_minus = -0.5 * (b * n_minus.cbrt() + jump + b * n_plus.cbrt());
        let left = WaveState { n: n_minus, u1: u_minus, theta: a * n_minus.powf(2.0 / 3.0) };
        Self::from_left(euler, left, n_plus)
    }

    /// λ₃ on the wave's isentrope.
    pub fn lambda3(&self, n: f64, u1: f64) -> f64 {
        u1 + self.b * n.cbrt()
    }

    /// The state on the curve where λ₃ = w (w clamped to [w₋, w₊]).
    pub fn state_at(&self, w: f64) -> WaveState {
        if w <= self.w_minus {
            return self.left;
        }
        if w >= self.w_plus {
            return self.right;
        }
        let c = (w - self.left.u1 + 3.0 * self.b * self.left.n.cbrt()) / (4.0 * self.b);
        let n = c * c * c;
        WaveState { n, u1: self.left.u1 + 3.0 * self.b * (c - self.left.n.cbrt()), theta: self.a * c * c }
    }

    /// The self-similar fan at z = x/t.
    pub fn fan(&self, z: f64) -> WaveState {
        self.state_at(z)
    }

    /// w₀(x) = ½(w₊ + w₋) + ½(w₊ − w₋) tanh x.
    pub fn w0(&self, x: f64) -> f64 {
        0.5 * (self.w_plus + self.w_minus) + 0.5 * (self.w_plus - self.w_minus) * x.tanh()
    }

    /// w₀′(x).
    pub fn w0_prime(&self, x: f64) -> f64 {
        let s = 1.0 / x.cosh();
        0.5 * (self.w_plus - self.w_minus) * s * s
    }

    /// Foot x₀ of the Burgers characteristic through (t, x): x = x₀ + w₀(x₀) t.
    pub fn burgers_foot(&self, t: f64, x: f64) -> Result<f64> {
        if !(t >= 0.0) || !x.is_finite() {
            return Err(VpbError::Domain(format!("Burgers evaluation needs t ≥ 0 and finite x (t={t}, x={x})")));
        }
        if t == 0.0 {
            return Ok(x);
        }
        let f = |y: f64| y + self.w0(y) * t - x;
        let (mut lo, mut hi) = (x - self.w_plus * t - 1.0, x - self.w_minus * t + 1.0);
        assert!(f(lo) <= 0.0 && f(hi) >= 0.0, "monotone Burgers data always brackets its root");
        let mut y = 0.5 * (lo + hi);
        for _ in 0..300 {
            let fy = f(y);
            if fy == 0.0 {
                return Ok(y);
            }
            if fy < 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let step = fy / (1.0 + self.w0_prime(y) * t);
            let mut next = y - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == y || hi - lo <= f64::EPSILON * y.abs().max(1.0) {
                break;
            }
            y = next;
        }
        // Polish: keep whichever neighbouring float has the smallest residual.
        let mut best = y;
        for cand in [lo, hi, y] {
            if f(cand).abs() < f(best).abs() {
                best = cand;
            }
        }
        Ok(best)
    }

    /// w(t, x) solving ∂_t w + w ∂_x w = 0 with w(0, ·) = w₀.
    pub fn burgers_w(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.w0(self.burgers_foot(t, x)?))
    }

    /// ∂_x w(t, x) = w₀′(x₀)/(1 + w₀′(x₀) t).
    pub fn burgers_wx(&self, t: f64, x: f64) -> Result<f64> {
        let y = self.burgers_foot(t, x)?;
        let d = self.w0_prime(y);
        Ok(d / (1.0 + d * t))
    }

    /// The smooth wave (n^r, u₁^r, θ^r)(t, x).
    pub fn smooth_wave(&self, t: f64, x: f64) -> Result<WaveState> {
        Ok(self.state_at(self.burgers_w(t, x)?))
    }

    /// ∂_x of (n^r, u₁^r, θ^r) in closed form.
    pub fn smooth_wave_dx(&self, t: f64, x: f64) -> Result<WaveState> {
        let y = self.burgers_foot(t, x)?;
        let d = self.w0_prime(y);
        let wx = d / (1.0 + d * t);
        Ok(self.gradient_from(self.w0(y), wx))
    }

    /// Gradients of the curve state at λ₃ = w when ∂_x w = wx.
    pub(crate) fn gradient_from(&self, w: f64, wx: f64) -> WaveState {
        let c = (w - self.left.u1 + 3.0 * self.b * self.left.n.cbrt()) / (4.0 * self.b);
        let cx = wx / (4.0 * self.b);
        WaveState { n: 3.0 * c * c * cx, u1: 3.0 * self.b * cx, theta: 2.0 * self.a * c * cx }
    }

    /// Ion/electron densities, velocity and temperature of the smooth wave.
    pub fn smooth_species(&self, t: f64, x: f64) -> Result<(f64, f64, f64, f64)> {
        let s = self.smooth_wave(t, x)?;
        Ok((self.euler.ion_density(s.n), s.n, s.u1, s.theta))
    }

    /// |smooth(t,x) − fan(x/t)| in the max over components.
    pub fn fan_distance(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.smooth_wave(t, x)?.max_abs_diff(&self.fan(x / t)))
    }
}
