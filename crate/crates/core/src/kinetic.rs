//! Split-step 1D3V integrator for the two-species system: upwind free transport
//! in x, upwind acceleration in ξ₁ from the self-consistent potential, and an
//! explicit conservative collision step.

use rayon::prelude::*;
use serde::Serialize;

use crate::collision::{collision_invariant_moments, conservative_fix, q_full, CollisionConfig, CollisionPair};
use crate::error::{Result, VpbError};
use crate::field::{DistributionField, SpatialGrid};
use crate::fluid::poisson_solve;
use crate::grid::VelocityGrid;
use crate::macromicro::decompose;
use crate::maxwellian::{BiMaxwellian, SingleMaxwellian};
use crate::moments::moments_single_species;
use crate::params::{Pair, PlasmaParams, Species};
use crate::waves::{RarefactionWave, WaveState};

/// Clipped mass allowed per collision step, relative to the total.
pub const CLIP_BUDGET: f64 = 1e-8;

/// New cell values with the clipped mass and invariant drift of one cell.
type CellUpdate = (Pair<Vec<f64>>, f64, f64);

/// Distributions of both species on the spatial lattice, with φ and time.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub f: Pair<DistributionField>,
    pub phi: Vec<f64>,
    pub t: f64,
}

impl KineticState {
    pub fn nx(&self) -> usize {
        self.f.ion.nx()
    }

    fn cell(&self, j: usize) -> Pair<&[f64]> {
        Pair::new(self.f.ion.cell(j), self.f.electron.cell(j))
    }
}

/// Which split operators are active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Operators {
    pub transport: bool,
    pub field: bool,
    pub collision: bool,
}

impl Operators {
    pub const ALL: Operators = Operators { transport: true, field: true, collision: true };
    pub const HOMOGENEOUS: Operators = Operators { transport: false, field: false, collision: true };
}

/// Static data of a kinetic run.
#[derive(Debug, Clone)]
pub struct KineticSolver {
    pub params: PlasmaParams,
    pub grids: Pair<VelocityGrid>,
    pub space: SpatialGrid,
    pub config: CollisionConfig,
    /// Far-field cell distributions fed through the left and right faces.
    pub inflow: Pair<[Vec<f64>; 2]>,
    pub operators: Operators,
    /// Rescale the gain term by ν_M M / gain(M) with M = M[F] the bi-Maxwellian
    /// sharing F's conserved moments: the discrete operator then vanishes at
    /// equilibrium and Δt·ν ≤ 1 keeps F nonnegative.
    pub well_balanced: bool,
}

/// Outcome of one collision step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CollisionStepReport {
    pub clipped_mass: f64,
    /// Largest |∫ψ_j·ΔF| over cells and invariants.
    pub invariant_drift: f64,
}

/// Mass through the boundaries and the collision report of one split step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub boundary: Pair<f64>,
    pub collision: CollisionStepReport,
}

/// One diagnostics row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KineticDiagnostics {
    pub t: f64,
    pub mass_i: f64,
    pub mass_e: f64,
    pub momentum: f64,
    pub energy: f64,
    pub h: f64,
    pub du: f64,
    pub dtheta: f64,
    pub g_norm: f64,
    pub quasineutral_defect: f64,
}

impl KineticSolver {
    fn check_state(&self, s: &KineticState) -> Result<()> {
        for sp in Species::BOTH {
            if s.f[sp].nx() != self.space.nx || s.f[sp].grid() != &self.grids[sp] {
                return Err(VpbError::Configuration("state does not match the solver grids".into()));
            }
        }
        Ok(())
    }

    /// Largest |ξ₁| over both species' grids.
    pub fn max_speed(&self) -> f64 {
        Species::BOTH.iter().map(|&s| self.grids[s].half_width + self.grids[s].center[0].abs()).fold(0.0, f64::max)
    }

    /// First-order upwind ξ₁∂_x with inflow from the far-field cells. Returns
    /// the mass per species entering through the two faces during the step.
    pub fn transport_step(&self, s: &mut KineticState, dt: f64) -> Result<Pair<f64>> {
        self.check_state(s)?;
        let dx = self.space.dx();
        let cfl = dt * self.max_speed() / dx;
        if cfl > 0.9 {
            return Err(VpbError::Cfl(format!("transport CFL {cfl:.3} exceeds 0.9")));
        }
        let nx = self.space.nx;
        let mut influx = Pair::new(0.0, 0.0);
        for sp in Species::BOTH {
            let grid = self.grids[sp];
            let nv = grid.len();
            let [left, right] = &self.inflow[sp];
            let old = s.f[sp].values().to_vec();
            influx[sp] = (0..nv)
                .map(|k| {
                    let v = grid.node(k)[0];
                    if v > 0.0 {
                        dt * v * (left[k] - old[(nx - 1) * nv + k])
                    } else {
                        -dt * v * (right[k] - old[k])
                    }
                })
                .sum::<f64>()
                * grid.cell_volume();
            let vals = s.f[sp].values_mut();
            // Each velocity node is independent; columns are strided by nv.
            let cols: Vec<Vec<f64>> = (0..nv)
                .into_par_iter()
                .map(|k| {
                    let v = grid.node(k)[0];
                    let c = dt * v / dx;
                    (0..nx)
                        .map(|j| {
                            let here = old[j * nv + k];
                            if v > 0.0 {
                                let up = if j == 0 { left[k] } else { old[(j - 1) * nv + k] };
                                here - c * (here - up)
                            } else if v < 0.0 {
                                let up = if j + 1 == nx { right[k] } else { old[(j + 1) * nv + k] };
                                here - c * (up - here)
                            } else {
                                here
                            }
                        })
                        .collect()
                })
                .collect();
            for (k, col) in cols.into_iter().enumerate() {
                for (j, v) in col.into_iter().enumerate() {
                    vals[j * nv + k] = v;
                }
            }
        }
        s.phi = self.potential(s)?;
        Ok(influx)
    }

    /// φ from −φ″ = q_i n_i + q_e n_e with φ(±X) = 0.
    pub fn potential(&self, s: &KineticState) -> Result<Vec<f64>> {
        let rho: Vec<f64> = (0..s.nx())
            .map(|j| {
                Species::BOTH
                    .iter()
                    .map(|&sp| {
                        let g = &self.grids[sp];
                        self.params.charge(sp) * s.f[sp].cell(j).iter().sum::<f64>() * g.cell_volume()
                    })
                    .sum()
            })
            .collect();
        if s.nx() < 3 {
            return Ok(vec![0.0; s.nx()]);
        }
        poisson_solve(&rho, &self.space)
    }

    /// ∂_xφ by centered differences (one-sided at the ends).
    fn phi_x(&self, phi: &[f64]) -> Vec<f64> {
        let n = phi.len();
        if n < 2 {
            return vec![0.0; n];
        }
        let dx = self.space.dx();
        (0..n)
            .map(|j| {
                if j == 0 {
                    (phi[1] - phi[0]) / dx
                } else if j + 1 == n {
                    (phi[n - 1] - phi[n - 2]) / dx
                } else {
                    (phi[j + 1] - phi[j - 1]) / (2.0 * dx)
                }
            })
            .collect()
    }

    /// Upwind a_A ∂_{ξ₁} F with a_A = −(q_A/m_A) ∂_xφ and zero inflow at the
    /// velocity-box faces. Returns the (nonpositive) mass change per species
    /// through those faces.
    pub fn field_step(&self, s: &mut KineticState, dt: f64) -> Result<Pair<f64>> {
        self.check_state(s)?;
        let ex = self.phi_x(&s.phi);
        for sp in Species::BOTH {
            let grid = self.grids[sp];
            let qm = self.params.charge(sp) / self.params.mass(sp);
            let amax = ex.iter().fold(0.0f64, |m, e| m.max((qm * e).abs()));
            let cfl = dt * amax / grid.dv();
            if cfl > 0.9 {
                return Err(VpbError::Cfl(format!("field CFL {cfl:.3} exceeds 0.9")));
            }
        }
        let mut change = Pair::new(0.0, 0.0);
        let w = self.space_weight();
        for sp in Species::BOTH {
            let grid = self.grids[sp];
            let n = grid.n;
            let qm = self.params.charge(sp) / self.params.mass(sp);
            let dv = grid.dv();
            let nv = grid.len();
            let lost: Vec<f64> = s.f[sp]
                .values_mut()
                .par_chunks_mut(nv)
                .zip(ex.par_iter())
                .map(|(cell, &e)| {
                    let a = -qm * e;
                    if a == 0.0 {
                        return 0.0;
                    }
                    let c = dt * a / dv;
                    let old = cell.to_vec();
                    let face = if a > 0.0 { n - 1 } else { 0 };
                    let mut out = 0.0;
                    for j in 0..n {
                        for k in 0..n {
                            out += old[grid.index(face, j, k)];
                        }
                    }
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                let idx = grid.index(i, j, k);
                                let here = old[idx];
                                cell[idx] = if a > 0.0 {
                                    let up = if i == 0 { 0.0 } else { old[grid.index(i - 1, j, k)] };
                                    here - c * (here - up)
                                } else {
                                    let up = if i + 1 == n { 0.0 } else { old[grid.index(i + 1, j, k)] };
                                    here - c * (up - here)
                                };
                            }
                        }
                    }
                    -c.abs() * out * grid.cell_volume()
                })
                .collect();
            change[sp] = lost.iter().sum::<f64>() * w;
        }
        Ok(change)
    }

    /// Largest collision frequency over the nodes of a cell.
    pub fn max_frequency(&self, f: Pair<&[f64]>) -> f64 {
        let mut best: f64 = 0.0;
        for a in Species::BOTH {
            let mut nu = vec![0.0; self.grids[a].len()];
            for b in Species::BOTH {
                let pair = CollisionPair::new(&self.params, a, b, &self.grids, &self.config.sphere);
                for (x, y) in nu.iter_mut().zip(pair.loss_frequency(f[b])) {
                    *x += y;
                }
            }
            best = nu.iter().fold(best, |m, &v| m.max(v));
        }
        best
    }

    /// F ← F + Δt · fix(Q(F)) per cell, weight F; negative values are clipped
    /// and their mass reported.
    pub fn collision_step(&self, s: &mut KineticState, dt: f64) -> Result<CollisionStepReport> {
        let scaling = if self.well_balanced { Some(self.scalings(s)?) } else { None };
        self.collision_step_with(s, dt, scaling.as_deref())
    }

    /// Collision step with precomputed gain scalings (used when every cell's
    /// equilibrium is known to be fixed, as in homogeneous relaxation).
    pub fn collision_step_with(
        &self,
        s: &mut KineticState,
        dt: f64,
        scaling: Option<&[Pair<Vec<f64>>]>,
    ) -> Result<CollisionStepReport> {
        self.check_state(s)?;
        if scaling.is_some_and(|v| v.len() != s.nx()) {
            return Err(VpbError::Configuration("one gain scaling per cell is required".into()));
        }
        let nx = s.nx();
        let results: Vec<Result<CellUpdate>> = (0..nx)
            .into_par_iter()
            .map(|j| {
                let f = s.cell(j);
                let nu = self.max_frequency(f);
                if dt * nu > 0.5 {
                    return Err(VpbError::Cfl(format!("collision step Δt·ν = {:.3} exceeds 0.5", dt * nu)));
                }
                let q = if let Some(r) = scaling {
                    self.rescaled_q(f, &r[j])?
                } else {
                    q_full(f, &self.grids, &self.params, &self.config)?
                };
                let q = if self.config.conservative_fix {
                    conservative_fix(q.as_ref().map(|_, v| v.as_slice()), f, &self.grids, &self.params)?.q
                } else {
                    q
                };
                let drift = collision_invariant_moments(q.as_ref().map(|_, v| v.as_slice()), &self.grids, &self.params)
                    .iter()
                    .fold(0.0f64, |m, v| m.max((v * dt).abs()));
                let mut clipped = 0.0;
                let mut out = Pair::new(f.ion.to_vec(), f.electron.to_vec());
                for sp in Species::BOTH {
                    let dv3 = self.grids[sp].cell_volume();
                    for (v, dq) in out[sp].iter_mut().zip(&q[sp]) {
                        *v += dt * dq;
                        if *v < 0.0 {
                            clipped += -*v * dv3;
                            *v = 0.0;
                        }
                    }
                }
                Ok((out, clipped, drift))
            })
            .collect();
        let mut report = CollisionStepReport::default();
        let total_mass = self.total_mass(s);
        for (j, r) in results.into_iter().enumerate() {
            let (cell, clipped, drift) = r?;
            s.f.ion.cell_mut(j).copy_from_slice(&cell.ion);
            s.f.electron.cell_mut(j).copy_from_slice(&cell.electron);
            report.clipped_mass += clipped;
            report.invariant_drift = report.invariant_drift.max(drift);
        }
        if report.clipped_mass > CLIP_BUDGET * total_mass {
            return Err(VpbError::Numerical(format!(
                "collision step clipped {:.3e} of mass {:.3e} (budget {CLIP_BUDGET:e})",
                report.clipped_mass, total_mass
            )));
        }
        Ok(report)
    }

    /// Per-species gain and loss summed over both partners.
    fn gain_loss(&self, f: Pair<&[f64]>) -> Result<Pair<(Vec<f64>, Vec<f64>)>> {
        let mut out = Pair::new((Vec::new(), Vec::new()), (Vec::new(), Vec::new()));
        for a in Species::BOTH {
            let n = self.grids[a].len();
            let (mut gain, mut loss) = (vec![0.0; n], vec![0.0; n]);
            for b in Species::BOTH {
                let pair = CollisionPair::new(&self.params, a, b, &self.grids, &self.config.sphere);
                let (g, l) = pair.parts(f[a], f[b])?;
                gain.iter_mut().zip(&g).for_each(|(x, y)| *x += y);
                loss.iter_mut().zip(&l).for_each(|(x, y)| *x += y);
            }
            out[a] = (gain, loss);
        }
        Ok(out)
    }

    /// ν_M M / gain(M) at the equilibrium M = M[F] of a cell.
    pub fn gain_scaling(&self, f: Pair<&[f64]>) -> Result<Pair<Vec<f64>>> {
        let eq = self.equilibrium(f)?;
        let parts = self.gain_loss(eq.as_ref().map(|_, v| v.as_slice()))?;
        Ok(parts
            .map(|_, (gain, loss)| gain.iter().zip(loss).map(|(g, l)| if *g > 0.0 { l / g } else { 1.0 }).collect()))
    }

    /// gain(F)·r − ν_F F with r from [`Self::gain_scaling`]; zero at F = M[F].
    pub fn rescaled_q(&self, f: Pair<&[f64]>, scaling: &Pair<Vec<f64>>) -> Result<Pair<Vec<f64>>> {
        let parts = self.gain_loss(f)?;
        Ok(parts.map(|sp, (gain, loss)| gain.iter().zip(loss).zip(&scaling[sp]).map(|((g, l), r)| g * r - l).collect()))
    }

    /// Gain scalings of every cell.
    pub fn scalings(&self, s: &KineticState) -> Result<Vec<Pair<Vec<f64>>>> {
        (0..s.nx()).into_par_iter().map(|j| self.gain_scaling(s.cell(j))).collect()
    }

    /// Bi-Maxwellian with the conserved moments of a cell.
    pub fn equilibrium(&self, f: Pair<&[f64]>) -> Result<Pair<Vec<f64>>> {
        let c = crate::moments::moments_two_component(f, &self.grids, &self.params)?;
        let m = BiMaxwellian::new(c.n.ion, c.n.electron, c.u, c.theta)?;
        Ok(m.sample(&self.grids, &self.params).unwrap_or_else(|_| m.sample_analytic(&self.grids, &self.params)))
    }

    fn total_mass(&self, s: &KineticState) -> f64 {
        Species::BOTH
            .iter()
            .map(|&sp| s.f[sp].values().iter().sum::<f64>() * self.grids[sp].cell_volume() * self.space_weight())
            .sum()
    }

    /// Δx for spatial sums, or 1 for a single homogeneous cell.
    fn space_weight(&self) -> f64 {
        if self.space.nx > 1 {
            self.space.dx()
        } else {
            1.0
        }
    }

    /// Transport, then field (φ re-solved after transport), then collisions.
    pub fn step(&self, s: &mut KineticState, dt: f64) -> Result<StepReport> {
        let mut boundary = Pair::new(0.0, 0.0);
        if self.operators.transport {
            boundary = self.transport_step(s, dt)?;
        }
        if self.operators.field {
            let faces = self.field_step(s, dt)?;
            boundary.ion += faces.ion;
            boundary.electron += faces.electron;
        }
        let collision =
            if self.operators.collision { self.collision_step(s, dt)? } else { CollisionStepReport::default() };
        s.t += dt;
        Ok(StepReport { boundary, collision })
    }

    /// ∫∫F_A dξ₂dξ₃ on the (x, ξ₁) lattice, row-major in x.
    pub fn reduced_distribution(&self, s: &KineticState, sp: Species) -> Vec<f64> {
        let g = &self.grids[sp];
        let n = g.n;
        let dv2 = g.dv() * g.dv();
        let mut out = vec![0.0; s.nx() * n];
        for j in 0..s.nx() {
            let cell = s.f[sp].cell(j);
            for i in 0..n {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc += cell[g.index(i, a, b)];
                    }
                }
                out[j * n + i] = acc * dv2;
            }
        }
        out
    }

    /// Global invariants: mass per species, x-momentum and energy (spatially summed).
    pub fn invariants(&self, s: &KineticState) -> (f64, f64, f64, f64) {
        let w = self.space_weight();
        let mut mass = [0.0; 2];
        let mut mom = 0.0;
        let mut energy = 0.0;
        for (k, &sp) in Species::BOTH.iter().enumerate() {
            let g = &self.grids[sp];
            let m = self.params.mass(sp);
            let dv3 = g.cell_volume();
            for j in 0..s.nx() {
                for (idx, &v) in s.f[sp].cell(j).iter().enumerate() {
                    let xi = g.node(idx);
                    mass[k] += v * dv3 * w;
                    mom += m * xi[0] * v * dv3 * w;
                    energy += 0.5 * m * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) * v * dv3 * w;
                }
            }
        }
        (mass[0], mass[1], mom, energy)
    }

    /// H = Σ_A ∫∫ F ln F (0 ln 0 = 0).
    pub fn h_functional(&self, s: &KineticState) -> f64 {
        let w = self.space_weight();
        Species::BOTH
            .iter()
            .map(|&sp| {
                let dv3 = self.grids[sp].cell_volume();
                s.f[sp].values().iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>() * dv3 * w
            })
            .sum()
    }

    /// Diagnostics at the current state; `reference` is the M_* weight.
    pub fn diagnostics(&self, s: &KineticState, reference: &Pair<Vec<f64>>) -> Result<KineticDiagnostics> {
        let (mass_i, mass_e, momentum, energy) = self.invariants(s);
        let w = self.space_weight();
        let mut du: f64 = 0.0;
        let mut dtheta: f64 = 0.0;
        let mut g2 = 0.0;
        let mut defect = 0.0;
        for j in 0..s.nx() {
            let c = s.cell(j);
            let mi = moments_single_species(c.ion, &self.grids.ion, self.params.ion.mass)?;
            let me = moments_single_species(c.electron, &self.grids.electron, self.params.electron.mass)?;
            let gap = ((mi.u[0] - me.u[0]).powi(2) + (mi.u[1] - me.u[1]).powi(2) + (mi.u[2] - me.u[2]).powi(2)).sqrt();
            du = du.max(gap);
            dtheta = dtheta.max((mi.theta - me.theta).abs());
            let dec = decompose(c, &self.grids, &self.params)?;
            for sp in Species::BOTH {
                let dv3 = self.grids[sp].cell_volume();
                g2 += dec.g[sp].iter().zip(&reference[sp]).map(|(g, m)| g * g / m).sum::<f64>() * dv3 * w;
            }
            let rho = self.params.ion.charge * mi.n + self.params.electron.charge * me.n;
            defect += rho * rho * w;
        }
        Ok(KineticDiagnostics {
            t: s.t,
            mass_i,
            mass_e,
            momentum,
            energy,
            h: self.h_functional(s),
            du,
            dtheta,
            g_norm: g2.sqrt(),
            quasineutral_defect: defect.sqrt(),
        })
    }
}

/// Space-homogeneous relaxation from two species Maxwellians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneousSetup {
    pub params: PlasmaParams,
    pub n_v: usize,
    pub ion: (f64, [f64; 3], f64),
    pub electron: (f64, [f64; 3], f64),
    pub dt: f64,
    pub steps: usize,
    pub well_balanced: bool,
}

/// Output of a homogeneous run.
#[derive(Debug, Clone)]
pub struct HomogeneousRun {
    pub diagnostics: Vec<KineticDiagnostics>,
    pub reports: Vec<CollisionStepReport>,
    /// Mixture velocity (m_i n_i u_i + m_e n_e u_e)/(m_i n_i + m_e n_e) of the initial data.
    pub predicted_u: [f64; 3],
    /// Final mixture velocity from the discrete moments.
    pub final_u: [f64; 3],
    /// Largest relative per-step change of any global invariant.
    pub max_invariant_step: f64,
    pub final_state: KineticState,
}

impl HomogeneousSetup {
    /// Velocity boxes covering both initial Maxwellians.
    pub fn grids(&self) -> Result<Pair<VelocityGrid>> {
        let umax = self.ion.1.iter().chain(&self.electron.1).fold(0.0f64, |m, v| m.max(v.abs()));
        let tmax = self.ion.2.max(self.electron.2);
        Ok(Pair::new(
            VelocityGrid::new(self.n_v, crate::moments::recommended_extent(self.params.ion.mass, umax, tmax))?,
            VelocityGrid::new(self.n_v, crate::moments::recommended_extent(self.params.electron.mass, umax, tmax))?,
        ))
    }

    pub fn run(&self, config: &CollisionConfig) -> Result<HomogeneousRun> {
        let grids = self.grids()?;
        let space = SpatialGrid::new(2, 1.0)?;
        let ion = SingleMaxwellian::new(Species::Ion, self.ion.0, self.ion.1, self.ion.2)?
            .sample(&grids.ion, self.params.ion.mass)?;
        let electron = SingleMaxwellian::new(Species::Electron, self.electron.0, self.electron.1, self.electron.2)?
            .sample(&grids.electron, self.params.electron.mass)?;
        let f = Pair::new(
            DistributionField::from_cells(Species::Ion, grids.ion, std::slice::from_ref(&ion))?,
            DistributionField::from_cells(Species::Electron, grids.electron, std::slice::from_ref(&electron))?,
        );
        let solver = KineticSolver {
            params: self.params,
            grids,
            space: SpatialGrid { nx: 1, half_length: space.half_length },
            config: config.clone(),
            inflow: Pair::new([ion.clone(), ion], [electron.clone(), electron]),
            operators: Operators::HOMOGENEOUS,
            well_balanced: self.well_balanced,
        };
        let mut state = KineticState { f, phi: vec![0.0], t: 0.0 };
        let mi = moments_single_species(state.f.ion.cell(0), &grids.ion, self.params.ion.mass)?;
        let me = moments_single_species(state.f.electron.cell(0), &grids.electron, self.params.electron.mass)?;
        let rho = self.params.ion.mass * mi.n + self.params.electron.mass * me.n;
        let predicted_u: [f64; 3] = std::array::from_fn(|a| {
            (self.params.ion.mass * mi.n * mi.u[a] + self.params.electron.mass * me.n * me.u[a]) / rho
        });
        let mix = crate::moments::moments_two_component(state.cell(0), &grids, &self.params)?;
        let reference =
            BiMaxwellian::new(mix.n.ion, mix.n.electron, mix.u, mix.theta)?.sample_analytic(&grids, &self.params);
        let mut diagnostics = vec![solver.diagnostics(&state, &reference)?];
        let mut reports = Vec::new();
        let mut max_invariant_step: f64 = 0.0;
        let scaling = if self.well_balanced { Some(solver.scalings(&state)?) } else { None };
        for _ in 0..self.steps {
            let before = solver.invariants(&state);
            reports.push(solver.collision_step_with(&mut state, self.dt, scaling.as_deref())?);
            state.t += self.dt;
            let after = solver.invariants(&state);
            for (b, a) in [(before.0, after.0), (before.1, after.1), (before.2, after.2), (before.3, after.3)] {
                let scale = b.abs().max(before.0 + before.1).max(f64::MIN_POSITIVE);
                max_invariant_step = max_invariant_step.max((a - b).abs() / scale);
            }
            diagnostics.push(solver.diagnostics(&state, &reference)?);
        }
        let fin = crate::moments::moments_two_component(state.cell(0), &grids, &self.params)?;
        Ok(HomogeneousRun { diagnostics, reports, predicted_u, final_u: fin.u, max_invariant_step, final_state: state })
    }
}

/// Floating-point operations charged to one kernel evaluation (two trilinear
/// interpolations and the sphere weight) in the runtime estimate.
pub const FLOPS_PER_KERNEL_EVAL: f64 = 80.0;
/// Throughput assumed per thread when converting FLOPs to seconds.
pub const ASSUMED_FLOPS_PER_SECOND: f64 = 1.0e9;

/// Smoke-scale inhomogeneous run started from the smooth rarefaction wave.
#[derive(Debug, Clone)]
pub struct InhomogeneousSetup {
    pub params: PlasmaParams,
    pub wave: RarefactionWave,
    pub n_x: usize,
    pub half_length: f64,
    pub n_v: usize,
    pub sphere: crate::collision::SphereQuadrature,
    /// Time of the smooth wave used as initial data.
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    pub diag_every: usize,
    pub operators: Operators,
    pub well_balanced: bool,
    /// Temperature of the M_* weight; must lie in (½ sup θ^r, sup θ^r).
    pub theta_star: f64,
    /// Runs whose estimate exceeds this many seconds are refused.
    pub budget_seconds: f64,
    pub threads: usize,
}

/// Output of an inhomogeneous run.
#[derive(Debug, Clone)]
pub struct InhomogeneousRun {
    pub diagnostics: Vec<KineticDiagnostics>,
    pub final_state: KineticState,
    pub solver: KineticSolver,
    /// max_A |mass_A(T) − mass_A(0) − boundary inflow| / mass_A(0).
    pub mass_defect: f64,
    pub clipped_mass: f64,
    pub estimated_flops: f64,
}

impl InhomogeneousSetup {
    /// Bi-Maxwellian cell values for a wave state.
    fn cell(&self, grids: &Pair<VelocityGrid>, w: &WaveState) -> Result<Pair<Vec<f64>>> {
        let m = BiMaxwellian::new(self.wave.euler.ion_density(w.n), w.n, [w.u1, 0.0, 0.0], w.theta)?;
        Ok(m.sample(grids, &self.params).unwrap_or_else(|_| m.sample_analytic(grids, &self.params)))
    }

    /// Per-species boxes covering both end states.
    pub fn grids(&self) -> Result<Pair<VelocityGrid>> {
        let (l, r) = (&self.wave.left, &self.wave.right);
        let umax = l.u1.abs().max(r.u1.abs());
        let tmax = l.theta.max(r.theta);
        Ok(Pair::new(
            VelocityGrid::new(self.n_v, crate::moments::recommended_extent(self.params.ion.mass, umax, tmax))?,
            VelocityGrid::new(self.n_v, crate::moments::recommended_extent(self.params.electron.mass, umax, tmax))?,
        ))
    }

    /// FLOPs of the collision work: every step visits N_x cells, four pairs,
    /// N_v⁶ node pairs and the folded sphere; twice with the gain rescaling.
    pub fn estimated_flops(&self) -> f64 {
        if !self.operators.collision {
            return 0.0;
        }
        let nv3 = (self.n_v * self.n_v * self.n_v) as f64;
        let factor = if self.well_balanced { 2.0 } else { 1.0 };
        self.steps as f64
            * self.n_x as f64
            * 4.0
            * nv3
            * nv3
            * self.sphere.folded().len() as f64
            * FLOPS_PER_KERNEL_EVAL
            * factor
    }

    pub fn estimated_seconds(&self) -> f64 {
        self.estimated_flops() / (ASSUMED_FLOPS_PER_SECOND * self.threads.max(1) as f64)
    }

    /// Checks ½ sup θ^r < θ_* < sup θ^r.
    pub fn check_theta_star(&self) -> Result<()> {
        let sup = self.wave.left.theta.max(self.wave.right.theta);
        if !(self.theta_star > 0.5 * sup && self.theta_star < sup) {
            return Err(VpbError::Precondition(format!(
                "θ_* = {} must lie strictly between {} and {}",
                self.theta_star,
                0.5 * sup,
                sup
            )));
        }
        Ok(())
    }

    pub fn run(&self) -> Result<InhomogeneousRun> {
        self.check_theta_star()?;
        let estimate = self.estimated_seconds();
        if estimate > self.budget_seconds {
            return Err(VpbError::Budget(format!(
                "estimated {:.3e} FLOPs ({estimate:.0} s) exceed the budget of {} s",
                self.estimated_flops(),
                self.budget_seconds
            )));
        }
        let grids = self.grids()?;
        let space = SpatialGrid::new(self.n_x, self.half_length)?;
        let xs = space.xs();
        let mut ion = Vec::with_capacity(self.n_x);
        let mut electron = Vec::with_capacity(self.n_x);
        for &x in &xs {
            let c = self.cell(&grids, &self.wave.smooth_wave(self.t0, x)?)?;
            ion.push(c.ion);
            electron.push(c.electron);
        }
        let left = self.cell(&grids, &self.wave.left)?;
        let right = self.cell(&grids, &self.wave.right)?;
        let solver = KineticSolver {
            params: self.params,
            grids,
            space,
            config: CollisionConfig { sphere: self.sphere.clone(), ..CollisionConfig::default() },
            inflow: Pair::new([left.ion, right.ion], [left.electron, right.electron]),
            operators: self.operators,
            well_balanced: self.well_balanced,
        };
        let f = Pair::new(
            DistributionField::from_cells(Species::Ion, grids.ion, &ion)?,
            DistributionField::from_cells(Species::Electron, grids.electron, &electron)?,
        );
        let mut state = KineticState { f, phi: vec![0.0; self.n_x], t: self.t0 };
        state.phi = solver.potential(&state)?;

        // M_* at the mid density and velocity.
        let mid = WaveState {
            n: 0.5 * (self.wave.left.n + self.wave.right.n),
            u1: 0.5 * (self.wave.left.u1 + self.wave.right.u1),
            theta: self.theta_star,
        };
        let reference = self.cell(&grids, &mid)?;

        let (m0_i, m0_e, _, _) = solver.invariants(&state);
        let mut inflow = Pair::new(0.0, 0.0);
        let mut clipped = 0.0;
        let mut diagnostics = vec![solver.diagnostics(&state, &reference)?];
        for step in 1..=self.steps {
            let r = solver.step(&mut state, self.dt)?;
            inflow.ion += r.boundary.ion;
            inflow.electron += r.boundary.electron;
            clipped += r.collision.clipped_mass;
            if step % self.diag_every.max(1) == 0 || step == self.steps {
                diagnostics.push(solver.diagnostics(&state, &reference)?);
            }
        }
        let (m1_i, m1_e, _, _) = solver.invariants(&state);
        let mass_defect = ((m1_i - m0_i - inflow.ion).abs() / m0_i).max((m1_e - m0_e - inflow.electron).abs() / m0_e);
        Ok(InhomogeneousRun {
            diagnostics,
            final_state: state,
            solver,
            mass_defect,
            clipped_mass: clipped,
            estimated_flops: self.estimated_flops(),
        })
    }
}
