//! Two-fluid Navier–Stokes–Poisson system on a truncated line, with the
//! zero-viscosity Euler–Poisson variant, used to watch a perturbed smooth
//! rarefaction wave settle onto the fan.

use serde::Serialize;

use crate::collision::CollisionConfig;
use crate::error::{Result, VpbError};
use crate::field::{FluidState, SpatialGrid};
use crate::linearized::transport_coefficients;
use crate::params::PlasmaParams;
use crate::waves::{phi_fn, RarefactionWave};

/// Solves −φ″ = ρ with φ(±X) = 0 by second-order differences and the Thomas
/// algorithm.
pub fn poisson_solve(rho: &[f64], grid: &SpatialGrid) -> Result<Vec<f64>> {
    let n = grid.nx;
    if rho.len() != n {
        return Err(VpbError::Configuration(format!("charge density has {} cells, grid has {n}", rho.len())));
    }
    if rho.iter().any(|v| !v.is_finite()) {
        return Err(VpbError::Numerical("non-finite charge density".into()));
    }
    let mut phi = vec![0.0; n];
    if n < 3 {
        return Ok(phi);
    }
    let h2 = grid.dx() * grid.dx();
    // Interior system: 2φ_j − φ_{j−1} − φ_{j+1} = h² ρ_j.
    let m = n - 2;
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut denom = 2.0;
    c[0] = -1.0 / denom;
    d[0] = h2 * rho[1] / denom;
    for k in 1..m {
        denom = 2.0 + c[k - 1];
        c[k] = -1.0 / denom;
        d[k] = (h2 * rho[k + 1] + d[k - 1]) / denom;
    }
    phi[m] = d[m - 1];
    for k in (0..m - 1).rev() {
        phi[k + 1] = d[k] - c[k] * phi[k + 2];
    }
    Ok(phi)
}

/// Where the viscosity and heat conduction come from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TransportLaw {
    /// μ_i + μ_e = μ₀√θ and κ_i + κ_e = κ₀√θ.
    Sqrt { mu0: f64, kappa0: f64 },
    /// Piecewise-linear interpolation of tabulated totals (clamped at the ends).
    Table { theta: Vec<f64>, mu: Vec<f64>, kappa: Vec<f64> },
    /// μ = κ = 0: the Euler–Poisson system.
    Off,
}

impl TransportLaw {
    /// The √θ law with constants from the linearized operator at θ = 1.
    pub fn calibrated(params: &PlasmaParams, n_v: usize, config: &CollisionConfig) -> Result<Self> {
        let tc = transport_coefficients(params, 1.0, [0.0; 3], n_v, config)?;
        Ok(TransportLaw::Sqrt { mu0: tc.ion.mu + tc.electron.mu, kappa0: tc.ion.kappa + tc.electron.kappa })
    }

    /// (μ_i + μ_e, κ_i + κ_e) at θ.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        match self {
            TransportLaw::Sqrt { mu0, kappa0 } => {
                let s = theta.sqrt();
                (mu0 * s, kappa0 * s)
            }
            TransportLaw::Table { theta: ts, mu, kappa } => {
                let k = ts.partition_point(|&t| t <= theta);
                if k == 0 {
                    return (mu[0], kappa[0]);
                }
                if k == ts.len() {
                    return (mu[k - 1], kappa[k - 1]);
                }
                let w = (theta - ts[k - 1]) / (ts[k] - ts[k - 1]);
                (mu[k - 1] + w * (mu[k] - mu[k - 1]), kappa[k - 1] + w * (kappa[k] - kappa[k - 1]))
            }
            TransportLaw::Off => (0.0, 0.0),
        }
    }

    pub fn is_off(&self) -> bool {
        matches!(self, TransportLaw::Off)
    }
}

/// Time derivatives of (n_i, n_e, u, θ); boundary entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidRhs {
    pub n_i: Vec<f64>,
    pub n_e: Vec<f64>,
    pub u: Vec<[f64; 3]>,
    pub theta: Vec<f64>,
}

/// Right-hand side of the two-fluid system with centered differences. The
/// electric force uses the supplied φ.
pub fn nsp_rhs(
    state: &FluidState,
    phi: &[f64],
    params: &PlasmaParams,
    grid: &SpatialGrid,
    law: &TransportLaw,
) -> Result<FluidRhs> {
    state.validate()?;
    let n = state.len();
    let dx = grid.dx();
    let (mi, me, qi, qe) = (params.ion.mass, params.electron.mass, params.ion.charge, params.electron.charge);
    let mut out = FluidRhs { n_i: vec![0.0; n], n_e: vec![0.0; n], u: vec![[0.0; 3]; n], theta: vec![0.0; n] };
    // Transport coefficients at half nodes.
    let half: Vec<(f64, f64)> =
        (0..n.saturating_sub(1)).map(|j| law.eval(0.5 * (state.theta[j] + state.theta[j + 1]))).collect();
    let centre: Vec<(f64, f64)> = state.theta.iter().map(|&t| law.eval(t)).collect();
    let d1 = |f: &dyn Fn(usize) -> f64, j: usize| (f(j + 1) - f(j - 1)) / (2.0 * dx);
    for j in 1..n.saturating_sub(1) {
        let ni = state.n_i[j];
        let ne = state.n_e[j];
        let nt = ni + ne;
        let rho_m = mi * ni + me * ne;
        let rho_c = qi * ni + qe * ne;
        let u1 = state.u[j][0];
        out.n_i[j] = -d1(&|k| state.n_i[k] * state.u[k][0], j);
        out.n_e[j] = -d1(&|k| state.n_e[k] * state.u[k][0], j);
        let pressure_x = 2.0 / 3.0 * d1(&|k| (state.n_i[k] + state.n_e[k]) * state.theta[k], j);
        let phi_x = (phi[j + 1] - phi[j - 1]) / (2.0 * dx);
        let (mu_c, _) = centre[j];
        let mut heating = 0.0;
        for a in 0..3 {
            let ua = |k: usize| state.u[k][a];
            let ux = d1(&ua, j);
            let visc = (half[j].0 * (ua(j + 1) - ua(j)) - half[j - 1].0 * (ua(j) - ua(j - 1))) / (dx * dx);
            let advect = u1 * ux;
            out.u[j][a] = if a == 0 {
                -advect - (pressure_x + rho_c * phi_x - 3.0 * visc) / rho_m
            } else {
                -advect + visc / rho_m
            };
            heating += if a == 0 { 3.0 } else { 1.0 } * mu_c * ux * ux;
        }
        let th = |k: usize| state.theta[k];
        let th_x = d1(&th, j);
        let u_x = d1(&|k| state.u[k][0], j);
        let cond = (half[j].1 * (th(j + 1) - th(j)) - half[j - 1].1 * (th(j) - th(j - 1))) / (dx * dx);
        out.theta[j] = -u1 * th_x - 2.0 / 3.0 * state.theta[j] * u_x + (cond + heating) / nt;
    }
    Ok(out)
}

/// Largest stable step: 0.4 min(Δx / max|λ₃|, Δx² / (2 ν_max)).
pub fn cfl_limit(state: &FluidState, params: &PlasmaParams, grid: &SpatialGrid, law: &TransportLaw) -> f64 {
    let euler_c = 2.0 * (params.ion.charge - params.electron.charge)
        / (3.0 * (params.electron.mass * params.ion.charge - params.ion.mass * params.electron.charge));
    let dx = grid.dx();
    let mut speed: f64 = 0.0;
    let mut diff: f64 = 0.0;
    for j in 0..state.len() {
        let sound = (5.0 / 3.0 * euler_c * state.theta[j]).sqrt();
        speed = speed.max(state.u[j][0].abs() + sound);
        let rho_m = params.ion.mass * state.n_i[j] + params.electron.mass * state.n_e[j];
        let (mu, kappa) = law.eval(state.theta[j]);
        diff = diff.max(3.0 * mu / rho_m).max(kappa / (state.n_i[j] + state.n_e[j]));
    }
    let adv = if speed > 0.0 { dx / speed } else { f64::INFINITY };
    let par = if diff > 0.0 { dx * dx / (2.0 * diff) } else { f64::INFINITY };
    0.4 * adv.min(par)
}

/// Fluid integrator state: grid, parameters, transport law.
#[derive(Debug, Clone)]
pub struct FluidSolver {
    pub params: PlasmaParams,
    pub grid: SpatialGrid,
    pub law: TransportLaw,
}

impl FluidSolver {
    pub fn new(params: PlasmaParams, grid: SpatialGrid, law: TransportLaw) -> Result<Self> {
        if grid.nx < 64 {
            return Err(VpbError::Configuration(format!("fluid grid needs N_x ≥ 64, got {}", grid.nx)));
        }
        Ok(Self { params, grid, law })
    }

    /// Charge density q_i n_i + q_e n_e.
    pub fn charge(&self, s: &FluidState) -> Vec<f64> {
        s.n_i.iter().zip(&s.n_e).map(|(a, b)| self.params.ion.charge * a + self.params.electron.charge * b).collect()
    }

    fn with_potential(&self, mut s: FluidState) -> Result<FluidState> {
        s.phi = poisson_solve(&self.charge(&s), &self.grid)?;
        Ok(s)
    }

    fn euler_update(&self, s: &FluidState, r: &FluidRhs, dt: f64) -> FluidState {
        let mut o = s.clone();
        for j in 0..s.len() {
            o.n_i[j] += dt * r.n_i[j];
            o.n_e[j] += dt * r.n_e[j];
            for a in 0..3 {
                o.u[j][a] += dt * r.u[j][a];
            }
            o.theta[j] += dt * r.theta[j];
        }
        o
    }

    /// Heun's two-stage Runge–Kutta step; Dirichlet ends stay fixed and φ is
    /// re-solved after each stage.
    pub fn step(&self, s: &FluidState, dt: f64) -> Result<FluidState> {
        let limit = cfl_limit(s, &self.params, &self.grid, &self.law);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(VpbError::Cfl(format!("fluid step {dt} exceeds the stability limit {limit}")));
        }
        let r1 = nsp_rhs(s, &s.phi, &self.params, &self.grid, &self.law)?;
        let s1 = self.with_potential(self.euler_update(s, &r1, dt))?;
        let r2 = nsp_rhs(&s1, &s1.phi, &self.params, &self.grid, &self.law)?;
        let mut out = s.clone();
        for j in 0..s.len() {
            out.n_i[j] += 0.5 * dt * (r1.n_i[j] + r2.n_i[j]);
            out.n_e[j] += 0.5 * dt * (r1.n_e[j] + r2.n_e[j]);
            for a in 0..3 {
                out.u[j][a] += 0.5 * dt * (r1.u[j][a] + r2.u[j][a]);
            }
            out.theta[j] += 0.5 * dt * (r1.theta[j] + r2.theta[j]);
        }
        let out = self.with_potential(out)?;
        out.validate()?;
        Ok(out)
    }

    /// Mass of species columns: Σ n_j Δx over all nodes.
    pub fn masses(&self, s: &FluidState) -> (f64, f64) {
        let dx = self.grid.dx();
        (s.n_i.iter().sum::<f64>() * dx, s.n_e.iter().sum::<f64>() * dx)
    }

    /// Net outflow rates ½(F₀ + F₁) − ½(F_{N−2} + F_{N−1}) of the centered
    /// continuity scheme, per species; d/dt Σ n Δx equals these exactly.
    pub fn boundary_flux(&self, s: &FluidState) -> (f64, f64) {
        let n = s.len();
        let f = |d: &[f64], j: usize| d[j] * s.u[j][0];
        let net = |d: &[f64]| 0.5 * (f(d, 0) + f(d, 1)) - 0.5 * (f(d, n - 2) + f(d, n - 1));
        (net(&s.n_i), net(&s.n_e))
    }
}

/// Perturbed smooth-wave experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluidExperiment {
    pub wave: RarefactionWave,
    pub grid: SpatialGrid,
    /// Perturbation amplitude ε₀.
    pub eps0: f64,
    /// Gaussian centre and width of the density and velocity bumps.
    pub bump_centers: [f64; 2],
    pub bump_width: f64,
    /// Wave time at which the run starts.
    pub t0: f64,
    pub t_end: f64,
    /// Spacing of the diagnostic series.
    pub diag_every: f64,
    /// Times at which full snapshots are kept.
    pub snapshot_times: Vec<f64>,
    pub law: TransportLaw,
}

/// One row of the fluid diagnostics series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluidDiagnostics {
    pub t: f64,
    pub sup_dist_fan: f64,
    pub l2_dist_fan: f64,
    pub quasineutral_defect: f64,
    pub eta_tilde: f64,
}

/// Snapshots and diagnostics of one run.
#[derive(Debug, Clone)]
pub struct FluidTrajectory {
    pub snapshots: Vec<(f64, FluidState)>,
    pub diagnostics: Vec<FluidDiagnostics>,
    pub steps: usize,
}

impl FluidTrajectory {
    /// Diagnostics row recorded at (or nearest to) time t.
    pub fn at(&self, t: f64) -> Option<&FluidDiagnostics> {
        self.diagnostics.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

impl FluidExperiment {
    /// Smooth wave at t₀ plus ε₀ times Gaussians in n_e (ion density matched for
    /// quasineutrality) and in u₁.
    pub fn initial_state(&self) -> Result<FluidState> {
        let e = &self.wave.euler;
        let mut s = FluidState::zeros(self.grid.nx);
        let (cn, cu) = (self.bump_centers[0], self.bump_centers[1]);
        let last = self.grid.nx - 1;
        for (j, x) in self.grid.xs().into_iter().enumerate() {
            let w = self.wave.smooth_wave(self.t0, x)?;
            let edge = j == 0 || j == last;
            let bump = |c: f64| {
                if edge {
                    0.0
                } else {
                    self.eps0 * (-((x - c) / self.bump_width).powi(2)).exp()
                }
            };
            let ne = w.n * (1.0 + bump(cn));
            s.n_e[j] = ne;
            s.n_i[j] = e.ion_density(ne);
            s.u[j] = [w.u1 + bump(cu), 0.0, 0.0];
            s.theta[j] = w.theta;
        }
        let end_l = self.wave.left;
        let end_r = self.wave.right;
        for (j, st) in [(0, end_l), (last, end_r)] {
            s.n_e[j] = st.n;
            s.n_i[j] = e.ion_density(st.n);
            s.u[j] = [st.u1, 0.0, 0.0];
            s.theta[j] = st.theta;
        }
        let solver = FluidSolver::new(self.wave.euler.plasma, self.grid, self.law.clone())?;
        solver.with_potential(s)
    }

    /// Distances to the fan, quasineutrality defect and η̃ at wave time t.
    pub fn diagnostics(&self, t: f64, s: &FluidState) -> Result<FluidDiagnostics> {
        let p = &self.wave.euler.plasma;
        let dx = self.grid.dx();
        let mut sup: f64 = 0.0;
        let mut l2 = 0.0;
        let mut defect = 0.0;
        let mut eta = 0.0;
        for (j, x) in self.grid.xs().into_iter().enumerate() {
            let f = self.wave.fan(x / t);
            let dn = s.n_e[j] - f.n;
            let du = s.u[j][0] - f.u1;
            let dth = s.theta[j] - f.theta;
            sup = sup.max(dn.abs()).max(du.abs()).max(dth.abs());
            l2 += (dn * dn + du * du + dth * dth) * dx;
            let rho = p.ion.charge * s.n_i[j] + p.electron.charge * s.n_e[j];
            defect += rho * rho * dx;
            let r = self.wave.smooth_wave(t, x)?;
            let nir = self.wave.euler.ion_density(r.n);
            let rho_m = p.ion.mass * s.n_i[j] + p.electron.mass * s.n_e[j];
            let du_r = [s.u[j][0] - r.u1, s.u[j][1], s.u[j][2]];
            let e = 0.5 * rho_m * du_r.iter().map(|v| v * v).sum::<f64>()
                + 2.0 / 3.0 * s.n_i[j] * r.theta * phi_fn(nir / s.n_i[j])
                + 2.0 / 3.0 * s.n_e[j] * r.theta * phi_fn(r.n / s.n_e[j])
                + (s.n_i[j] + s.n_e[j]) * r.theta * phi_fn(s.theta[j] / r.theta);
            eta += e * dx;
        }
        Ok(FluidDiagnostics {
            t,
            sup_dist_fan: sup,
            l2_dist_fan: l2.sqrt(),
            quasineutral_defect: defect.sqrt(),
            eta_tilde: eta,
        })
    }

    /// Integrates from t₀ to t_end, hitting every diagnostic and snapshot time exactly.
    pub fn run(&self) -> Result<FluidTrajectory> {
        if !(self.t_end > self.t0) || !(self.diag_every > 0.0) {
            return Err(VpbError::Configuration("fluid run needs t_end > t0 and a positive diagnostic spacing".into()));
        }
        let solver = FluidSolver::new(self.wave.euler.plasma, self.grid, self.law.clone())?;
        let mut s = self.initial_state()?;
        let mut t = self.t0;
        let mut marks: Vec<f64> = Vec::new();
        let mut k = 1u64;
        while self.t0 + k as f64 * self.diag_every < self.t_end {
            marks.push(self.t0 + k as f64 * self.diag_every);
            k += 1;
        }
        marks.push(self.t_end);
        marks.extend(self.snapshot_times.iter().copied().filter(|&x| x > self.t0 && x <= self.t_end));
        marks.sort_by(f64::total_cmp);
        marks.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let mut traj = FluidTrajectory { snapshots: Vec::new(), diagnostics: Vec::new(), steps: 0 };
        let wants_snapshot = |x: f64| self.snapshot_times.iter().any(|&y| (x - y).abs() < 1e-9);
        if t > 0.0 {
            traj.diagnostics.push(self.diagnostics(t, &s)?);
        }
        if wants_snapshot(t) {
            traj.snapshots.push((t, s.clone()));
        }
        for &mark in &marks {
            while t < mark {
                let limit = cfl_limit(&s, &solver.params, &solver.grid, &solver.law);
                let remaining = mark - t;
                let pieces = (remaining / limit).ceil().max(1.0);
                let dt = remaining / pieces;
                s = solver.step(&s, dt)?;
                t = if pieces == 1.0 { mark } else { t + dt };
                traj.steps += 1;
            }
            traj.diagnostics.push(self.diagnostics(t, &s)?);
            if wants_snapshot(t) {
                traj.snapshots.push((t, s.clone()));
            }
        }
        Ok(traj)
    }
}
