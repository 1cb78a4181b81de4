//! Macro-micro decomposition F = M + G, the χ-basis and the projections P₀, P₁.
//!
//! Vector functions [F_i, F_e] are handled in flat form (ion nodes first), with
//! the inner product ⟨F, H⟩ = Σ_A ∫ F_A H_A / M̂_A dξ realized as a weighted dot
//! product. Single-species objects use the same machinery with one component.

use crate::error::{Result, VpbError};
use crate::grid::VelocityGrid;
use crate::maxwellian::{BiMaxwellian, SingleMaxwellian};
use crate::moments::{moments_single_species, moments_two_component, CellMoments};
use crate::params::{PlasmaParams, Species, BOLTZMANN};
use crate::Pair;

/// Concatenates ion and electron values.
pub fn flatten(p: Pair<&[f64]>) -> Vec<f64> {
    let mut v = Vec::with_capacity(p.ion.len() + p.electron.len());
    v.extend_from_slice(p.ion);
    v.extend_from_slice(p.electron);
    v
}

/// Splits a flat vector after `n_ion` entries.
pub fn unflatten(v: &[f64], n_ion: usize) -> Pair<Vec<f64>> {
    Pair::new(v[..n_ion].to_vec(), v[n_ion..].to_vec())
}

/// An orthonormal family in a diagonally weighted inner product ⟨f, g⟩ = Σ f_k g_k w_k.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    weights: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    raw_gram: Vec<Vec<f64>>,
}

impl OrthoBasis {
    /// Orthonormalizes `raw` by two passes of modified Gram–Schmidt. The Gram
    /// matrix of the raw vectors is kept for diagnostics.
    pub fn new(weights: Vec<f64>, raw: Vec<Vec<f64>>) -> Result<Self> {
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(&weights).map(|((x, y), w)| x * y * w).sum() };
        let raw_gram = raw.iter().map(|a| raw.iter().map(|b| dot(a, b)).collect()).collect();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
        for mut v in raw {
            for _ in 0..2 {
                for q in &vectors {
                    let c = dot(&v, q);
                    v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if !(norm > 1e-300) || !norm.is_finite() {
                return Err(VpbError::Numerical("linearly dependent basis functions".into()));
            }
            v.iter_mut().for_each(|x| *x /= norm);
            vectors.push(v);
        }
        Ok(Self { weights, vectors, raw_gram })
    }

    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.weights).map(|((x, y), w)| x * y * w).sum()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Gram matrix of the basis as constructed, before orthonormalization.
    pub fn raw_gram(&self) -> &[Vec<f64>] {
        &self.raw_gram
    }

    /// Gram matrix of the orthonormalized basis.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        self.vectors.iter().map(|a| self.vectors.iter().map(|b| self.dot(a, b)).collect()).collect()
    }

    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|q| self.dot(f, q)).collect()
    }

    /// Σ ⟨f, χ_j⟩ χ_j.
    pub fn p0(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for q in &self.vectors {
            let c = self.dot(f, q);
            out.iter_mut().zip(q).for_each(|(o, y)| *o += c * y);
        }
        out
    }

    /// f − P₀ f.
    pub fn p1(&self, f: &[f64]) -> Vec<f64> {
        let p0 = self.p0(f);
        f.iter().zip(&p0).map(|(a, b)| a - b).collect()
    }
}

/// The six-function two-component basis attached to a bi-Maxwellian M̂.
#[derive(Debug, Clone)]
pub struct ChiBasis {
    pub anchor: BiMaxwellian,
    /// Gridded M̂ = [M̂_i, M̂_e].
    pub weight: Pair<Vec<f64>>,
    pub grids: Pair<VelocityGrid>,
    basis: OrthoBasis,
}

impl ChiBasis {
    /// Builds the basis on grid-calibrated samples of the anchor.
    pub fn new(anchor: &BiMaxwellian, grids: &Pair<VelocityGrid>, params: &PlasmaParams) -> Result<Self> {
        let weight = anchor.sample(grids, params)?;
        Self::from_weight(anchor, weight, grids, params)
    }

    /// Builds the basis on given gridded values of the anchor.
    pub fn from_weight(
        anchor: &BiMaxwellian,
        weight: Pair<Vec<f64>>,
        grids: &Pair<VelocityGrid>,
        params: &PlasmaParams,
    ) -> Result<Self> {
        if weight.ion.iter().chain(&weight.electron).any(|&v| !(v > 0.0)) {
            return Err(VpbError::Numerical("anchor Maxwellian underflows on the grid".into()));
        }
        let (n, u, th) = (anchor.n, anchor.u, anchor.theta);
        let rho = params.ion.mass * n.ion + params.electron.mass * n.electron;
        let ntot = n.ion + n.electron;
        let mut raw = vec![Vec::new(); 6];
        for s in Species::BOTH {
            let g = &grids[s];
            let m = params.mass(s);
            let k = params.k(s);
            let w = &weight[s];
            let mut cols: [Vec<f64>; 6] = Default::default();
            for (idx, &mv) in w.iter().enumerate() {
                let xi = g.node(idx);
                let c = [xi[0] - u[0], xi[1] - u[1], xi[2] - u[2]];
                let c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
                cols[0].push(if s == Species::Ion { mv / n.ion.sqrt() } else { 0.0 });
                cols[1].push(if s == Species::Electron { mv / n.electron.sqrt() } else { 0.0 });
                for j in 0..3 {
                    cols[2 + j].push((m / rho).sqrt() * c[j] / (k * th).sqrt() * mv);
                }
                cols[5].push((c2 / (k * th) - 3.0) * mv / (6.0 * ntot).sqrt());
            }
            for (r, c) in raw.iter_mut().zip(cols) {
                r.extend(c);
            }
        }
        let weights = flat_weights(weight.as_ref().map(|_, v| v.as_slice()), grids);
        let basis = OrthoBasis::new(weights, raw)?;
        Ok(Self { anchor: *anchor, weight, grids: *grids, basis })
    }

    pub fn basis(&self) -> &OrthoBasis {
        &self.basis
    }

    pub fn n_ion(&self) -> usize {
        self.grids.ion.len()
    }

    /// χ_j as a pair of gridded functions (j = 0..6).
    pub fn chi(&self, j: usize) -> Pair<Vec<f64>> {
        unflatten(&self.basis.vectors()[j], self.n_ion())
    }

    pub fn inner(&self, f: Pair<&[f64]>, h: Pair<&[f64]>) -> f64 {
        self.basis.dot(&flatten(f), &flatten(h))
    }

    pub fn project_p0(&self, f: Pair<&[f64]>) -> Pair<Vec<f64>> {
        unflatten(&self.basis.p0(&flatten(f)), self.n_ion())
    }

    pub fn project_p1(&self, f: Pair<&[f64]>) -> Pair<Vec<f64>> {
        unflatten(&self.basis.p1(&flatten(f)), self.n_ion())
    }
}

/// Per-node weights Δv_A³ / M̂_A in flat order.
pub fn flat_weights(m: Pair<&[f64]>, grids: &Pair<VelocityGrid>) -> Vec<f64> {
    let mut w = Vec::with_capacity(m.ion.len() + m.electron.len());
    for s in Species::BOTH {
        let dv3 = grids[s].cell_volume();
        w.extend(m[s].iter().map(|v| dv3 / v));
    }
    w
}

/// F = M + G at one cell.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub moments: CellMoments,
    pub maxwellian: BiMaxwellian,
    /// Gridded, grid-calibrated M.
    pub m: Pair<Vec<f64>>,
    pub g: Pair<Vec<f64>>,
}

impl Decomposition {
    /// M + G.
    pub fn reconstruct(&self) -> Pair<Vec<f64>> {
        self.m.map(|s, mv| mv.iter().zip(&self.g[s]).map(|(a, b)| a + b).collect())
    }
}

/// Builds M from the six moments of F and sets G = F − M.
pub fn decompose(f: Pair<&[f64]>, grids: &Pair<VelocityGrid>, params: &PlasmaParams) -> Result<Decomposition> {
    let moments = moments_two_component(f, grids, params)?;
    let maxwellian = BiMaxwellian::new(moments.n.ion, moments.n.electron, moments.u, moments.theta)?;
    let m = maxwellian.sample(grids, params)?;
    let g = m.map(|s, mv| f[s].iter().zip(mv).map(|(a, b)| a - b).collect());
    Ok(Decomposition { moments, maxwellian, m, g })
}

/// The five-function basis of one species attached to M̂_A.
#[derive(Debug, Clone)]
pub struct SingleBasis {
    pub anchor: SingleMaxwellian,
    pub weight: Vec<f64>,
    pub grid: VelocityGrid,
    pub mass: f64,
    basis: OrthoBasis,
}

impl SingleBasis {
    pub fn new(anchor: &SingleMaxwellian, grid: &VelocityGrid, mass: f64) -> Result<Self> {
        let weight = anchor.sample(grid, mass)?;
        Self::from_weight(anchor, weight, grid, mass)
    }

    pub fn from_weight(anchor: &SingleMaxwellian, weight: Vec<f64>, grid: &VelocityGrid, mass: f64) -> Result<Self> {
        if weight.iter().any(|&v| !(v > 0.0)) {
            return Err(VpbError::Numerical("anchor Maxwellian underflows on the grid".into()));
        }
        let (n, u, th) = (anchor.n, anchor.u, anchor.theta);
        let k = BOLTZMANN / mass;
        let mut raw: Vec<Vec<f64>> = (0..5).map(|_| Vec::with_capacity(weight.len())).collect();
        for (idx, &mv) in weight.iter().enumerate() {
            let xi = grid.node(idx);
            let c = [xi[0] - u[0], xi[1] - u[1], xi[2] - u[2]];
            let c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
            raw[0].push(mv / n.sqrt());
            for j in 0..3 {
                raw[1 + j].push(c[j] * mv / (k * n * th).sqrt());
            }
            raw[4].push((c2 / (k * th) - 3.0) * mv / (6.0 * n).sqrt());
        }
        let dv3 = grid.cell_volume();
        let weights = weight.iter().map(|v| dv3 / v).collect();
        let basis = OrthoBasis::new(weights, raw)?;
        Ok(Self { anchor: *anchor, weight, grid: *grid, mass, basis })
    }

    pub fn basis(&self) -> &OrthoBasis {
        &self.basis
    }

    /// (P₀ f, P₁ f).
    pub fn project(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p0 = self.basis.p0(f);
        let p1 = f.iter().zip(&p0).map(|(a, b)| a - b).collect();
        (p0, p1)
    }
}

/// Single-species projections in ⟨·,·⟩_{M̂_A}.
pub fn single_project(f: &[f64], basis: &SingleBasis) -> (Vec<f64>, Vec<f64>) {
    basis.project(f)
}

/// u_A − u and θ_A − θ for one species, by two routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroGap {
    pub du_direct: [f64; 3],
    pub dtheta_direct: f64,
    pub du_micro: [f64; 3],
    pub dtheta_micro: f64,
}

/// Route one subtracts moments; route two integrates the microscopic part:
/// u_A − u = ∫ξG_A/n_A and θ_A − θ = |u−u_A|²/(3k_A) + ∫|ξ−u_A|²G_A/(3k_A n_A).
pub fn micro_gaps(
    f: Pair<&[f64]>,
    dec: &Decomposition,
    grids: &Pair<VelocityGrid>,
    params: &PlasmaParams,
) -> Result<Pair<MicroGap>> {
    let mut out = Vec::with_capacity(2);
    for s in Species::BOTH {
        let g = &grids[s];
        let m = params.mass(s);
        let k = params.k(s);
        let own = moments_single_species(f[s], g, m)?;
        let (u, th) = (dec.moments.u, dec.moments.theta);
        let n_a = dec.moments.n[s];
        if !(n_a > 0.0) {
            return Err(VpbError::DegenerateCell(format!("{s:?} density vanishes")));
        }
        let du_direct = [own.u[0] - u[0], own.u[1] - u[1], own.u[2] - u[2]];
        let dv3 = g.cell_volume();
        let mut first = [0.0; 3];
        for (idx, &gv) in dec.g[s].iter().enumerate() {
            let xi = g.node(idx);
            for a in 0..3 {
                first[a] += xi[a] * gv;
            }
        }
        let du_micro = [first[0] * dv3 / n_a, first[1] * dv3 / n_a, first[2] * dv3 / n_a];
        let u_a = [u[0] + du_micro[0], u[1] + du_micro[1], u[2] + du_micro[2]];
        let mut second = 0.0;
        for (idx, &gv) in dec.g[s].iter().enumerate() {
            let xi = g.node(idx);
            second += ((xi[0] - u_a[0]).powi(2) + (xi[1] - u_a[1]).powi(2) + (xi[2] - u_a[2]).powi(2)) * gv;
        }
        let gap2 = du_micro.iter().map(|d| d * d).sum::<f64>();
        let dtheta_micro = gap2 / (3.0 * k) + second * dv3 / (3.0 * k * n_a);
        out.push(MicroGap { du_direct, dtheta_direct: own.theta - th, du_micro, dtheta_micro });
    }
    let e = out.pop().expect("two species");
    let i = out.pop().expect("two species");
    Ok(Pair::new(i, e))
}
