//! The linearized collision operator L_M, its ν/K split, inversion on N^⊥,
//! coercivity measurement, transport coefficients and the background profile Ḡ.
//!
//! Two discrete forms of L_M live here. The raw matrix scatters trilinear
//! stencil weights so that its action agrees with the collision kernel to
//! rounding; interpolation breaks detailed balance near the box faces, so it is
//! neither self-adjoint nor dissipative there. The operator used for inversion
//! and coercivity discretizes the weak form ⟨L g, h⟩_M = −¼ΣΣ∫∫∫ B M M* Δ(g/M) Δ(h/M)
//! instead, which is symmetric and negative semidefinite by construction, and is
//! compressed to N^⊥ by the macroscopic projection.

mod background;
mod solve;
mod transport;

pub use background::{background_g, WaveGradients};
pub use solve::{coercivity_eigen, coercivity_estimate, rayleigh_quotient, CgReport, SOLVER_CAP, SOLVER_TOL};
pub use transport::{
    species_transport, transport_coefficients, transport_grid, SpeciesTransport, TransportCoefficients,
};

use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;

use crate::collision::{conservative_fix, CollisionConfig, CollisionPair, SphereQuadrature};
use crate::error::{Result, VpbError};
use crate::grid::VelocityGrid;
use crate::macromicro::{flatten, unflatten, OrthoBasis};
use crate::maxwellian::{BiMaxwellian, SingleMaxwellian};
use crate::params::{PlasmaParams, Species, BOLTZMANN};
use crate::Pair;

/// One velocity component of the unknown (a species with its grid and anchor).
#[derive(Debug, Clone)]
pub struct Component {
    pub species: Species,
    pub grid: VelocityGrid,
    pub mass: f64,
    /// Gridded anchor Maxwellian of this species.
    pub m: Vec<f64>,
    /// Position of the first node in flat vectors.
    pub offset: usize,
}

/// Dense row-major square matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// y = A x, rows in parallel, each with a fixed-order dot product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.data.par_chunks(self.n).map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

/// L_M around a fixed Maxwellian anchor (two species or a single species).
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    pub params: PlasmaParams,
    pub sphere: SphereQuadrature,
    components: Vec<Component>,
    dim: usize,
    /// Kernel-consistent matrix, assembled on first use.
    raw: OnceLock<DenseMatrix>,
    nu: Vec<f64>,
    /// √(Δv³/M) per flat node; maps g to the symmetric variable x = D g.
    d: Vec<f64>,
    /// Symmetric, projected operator in the x variable.
    hat: DenseMatrix,
    /// Orthonormal macroscopic basis in ⟨·,·⟩_M (flat, original variables).
    null: OrthoBasis,
    /// The same basis in the x variable (Euclidean orthonormal).
    null_hat: Vec<Vec<f64>>,
    anchor_density: Vec<f64>,
    anchor_u: [f64; 3],
    anchor_theta: f64,
}

/// Gridded anchor values: calibrated when the grid can represent them, plain
/// samples otherwise (very coarse boxes).
fn anchor_values(m: &SingleMaxwellian, grid: &VelocityGrid, mass: f64) -> Vec<f64> {
    m.sample(grid, mass).unwrap_or_else(|_| m.sample_analytic(grid, mass))
}

impl LinearizedOperator {
    /// Two-component operator around the bi-Maxwellian `anchor`.
    pub fn two_species(
        anchor: &BiMaxwellian,
        grids: &Pair<VelocityGrid>,
        params: &PlasmaParams,
        config: &CollisionConfig,
    ) -> Result<Self> {
        let ion = anchor_values(&anchor.component(Species::Ion), &grids.ion, params.ion.mass);
        let electron = anchor_values(&anchor.component(Species::Electron), &grids.electron, params.electron.mass);
        let comps = vec![
            Component { species: Species::Ion, grid: grids.ion, mass: params.ion.mass, m: ion, offset: 0 },
            Component {
                species: Species::Electron,
                grid: grids.electron,
                mass: params.electron.mass,
                m: electron,
                offset: grids.ion.len(),
            },
        ];
        Self::build(comps, vec![anchor.n.ion, anchor.n.electron], anchor.u, anchor.theta, params, config)
    }

    /// Single-species operator Q_AA(M_A, g) + Q_AA(g, M_A).
    pub fn single_species(
        anchor: &SingleMaxwellian,
        grid: &VelocityGrid,
        params: &PlasmaParams,
        config: &CollisionConfig,
    ) -> Result<Self> {
        let mass = params.mass(anchor.species);
        let m = anchor_values(anchor, grid, mass);
        let comps = vec![Component { species: anchor.species, grid: *grid, mass, m, offset: 0 }];
        Self::build(comps, vec![anchor.n], anchor.u, anchor.theta, params, config)
    }

    fn build(
        components: Vec<Component>,
        density: Vec<f64>,
        u: [f64; 3],
        theta: f64,
        params: &PlasmaParams,
        config: &CollisionConfig,
    ) -> Result<Self> {
        if components.iter().any(|c| c.m.iter().any(|&v| !(v > 0.0))) {
            return Err(VpbError::Numerical("anchor Maxwellian underflows on the grid".into()));
        }
        let dim: usize = components.iter().map(|c| c.grid.len()).sum();
        let nu = collision_frequency(&components, params, &config.sphere);
        let mut weights = Vec::with_capacity(dim);
        for c in &components {
            let dv3 = c.grid.cell_volume();
            weights.extend(c.m.iter().map(|m| dv3 / m));
        }
        let d: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let null = OrthoBasis::new(weights, macroscopic_span(&components, u, theta))?;
        let null_hat: Vec<Vec<f64>> =
            null.vectors().iter().map(|v| v.iter().zip(&d).map(|(a, b)| a * b).collect()).collect();
        let hat = project_symmetric(assemble_form(&components, params, &config.sphere, dim), &null_hat);
        Ok(Self {
            params: *params,
            sphere: config.sphere.clone(),
            components,
            dim,
            raw: OnceLock::new(),
            nu,
            d,
            hat,
            null,
            null_hat,
            anchor_density: density,
            anchor_u: u,
            anchor_theta: theta,
        })
    }

    pub fn anchor_theta(&self) -> f64 {
        self.anchor_theta
    }

    pub fn anchor_u(&self) -> [f64; 3] {
        self.anchor_u
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Number of macroscopic directions (6 for two species, 5 for one).
    pub fn null_dim(&self) -> usize {
        self.null.dim()
    }

    /// Orthonormal basis of the macroscopic subspace in ⟨·,·⟩_M.
    pub fn null_basis(&self) -> &OrthoBasis {
        &self.null
    }

    /// Kernel-consistent dense L_M (assembled on first call).
    pub fn raw_matrix(&self) -> &DenseMatrix {
        self.raw.get_or_init(|| assemble_raw(&self.components, &self.params, &self.sphere, self.dim))
    }

    pub fn hat_matrix(&self) -> &DenseMatrix {
        &self.hat
    }

    /// √(Δv³/M) per flat node.
    pub fn scaling(&self) -> &[f64] {
        &self.d
    }

    /// Flat anchor values.
    pub fn anchor_flat(&self) -> Vec<f64> {
        self.components.iter().flat_map(|c| c.m.iter().copied()).collect()
    }

    /// Velocity of every flat node.
    pub fn flat_nodes(&self) -> Vec<[f64; 3]> {
        self.components.iter().flat_map(|c| c.grid.nodes()).collect()
    }

    /// ⟨f, g⟩_M = Σ f g Δv³ / M.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.null.dot(f, g)
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).max(0.0).sqrt()
    }

    fn check_len(&self, g: &[f64]) -> Result<()> {
        if g.len() != self.dim {
            return Err(VpbError::Configuration(format!("vector length {} != operator size {}", g.len(), self.dim)));
        }
        Ok(())
    }

    /// Raw discrete L_M g, i.e. Σ_B Q_AB(M_A, g_B) + Q_AB(g_A, M_B) with the
    /// collision kernel's interpolated kinematics.
    pub fn apply_raw(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.check_len(g)?;
        Ok(self.raw_matrix().matvec(g))
    }

    /// The operator used for inversion: symmetric in ⟨·,·⟩_M, null on the
    /// macroscopic span, with range in N^⊥.
    pub fn apply(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.check_len(g)?;
        let x: Vec<f64> = g.iter().zip(&self.d).map(|(a, b)| a * b).collect();
        let y = self.hat.matvec(&x);
        Ok(y.iter().zip(&self.d).map(|(a, b)| a / b).collect())
    }

    /// ν_A(ξ) on every flat node.
    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// ν_A at an arbitrary velocity, by direct quadrature over the anchor.
    pub fn nu_at(&self, species: Species, xi: [f64; 3]) -> f64 {
        let a = self.components.iter().find(|c| c.species == species).expect("species present");
        let mut total = 0.0;
        for b in &self.components {
            let pref = self.params.kernel_prefactor(a.species, b.species);
            let mut acc = 0.0;
            for (j, mb) in b.m.iter().enumerate() {
                let xs = b.grid.node(j);
                let g = [xi[0] - xs[0], xi[1] - xs[1], xi[2] - xs[2]];
                let kern: f64 = self
                    .sphere
                    .folded()
                    .iter()
                    .map(|&(w, wt)| wt * (g[0] * w[0] + g[1] * w[1] + g[2] * w[2]).abs())
                    .sum();
                acc += kern * mb;
            }
            total += acc * pref * b.grid.cell_volume();
        }
        total
    }

    /// The four pieces K¹..K⁴ applied to g, matrix-free through the collision kernel:
    /// K¹ = −Σ_B loss(M_A, g_B), K² = gain(M_A, g_A) + gain(g_A, M_A),
    /// K³ = gain(M_A, g_B) and K⁴ = gain(g_A, M_B) for B ≠ A.
    pub fn apply_k_parts(&self, g: &[f64]) -> Result<[Vec<f64>; 4]> {
        self.check_len(g)?;
        let mut parts: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; self.dim]);
        for a in &self.components {
            for b in &self.components {
                let pair = self.pair(a, b);
                let ga = &g[a.offset..a.offset + a.grid.len()];
                let gb = &g[b.offset..b.offset + b.grid.len()];
                let (gain_mg, loss_mg) = pair.parts(&a.m, gb)?;
                let (gain_gm, _) = pair.parts(ga, &b.m)?;
                for i in 0..a.grid.len() {
                    let k = a.offset + i;
                    parts[0][k] -= loss_mg[i];
                    if a.species == b.species {
                        parts[1][k] += gain_mg[i] + gain_gm[i];
                    } else {
                        parts[2][k] += gain_mg[i];
                        parts[3][k] += gain_gm[i];
                    }
                }
            }
        }
        Ok(parts)
    }

    /// K g = K¹g + K²g + K³g + K⁴g.
    pub fn apply_k(&self, g: &[f64]) -> Result<Vec<f64>> {
        let p = self.apply_k_parts(g)?;
        Ok((0..self.dim).map(|k| p[0][k] + p[1][k] + p[2][k] + p[3][k]).collect())
    }

    /// L_M g evaluated through the collision kernel, followed by the conservative
    /// fix with the anchor as weight (two-species operators only).
    pub fn apply_collision(&self, g: &[f64]) -> Result<Vec<f64>> {
        let raw = self.apply_collision_unfixed(g)?;
        if self.components.len() != 2 {
            return Err(VpbError::Configuration("conservative fix needs both species".into()));
        }
        let n_ion = self.components[0].grid.len();
        let q = unflatten(&raw, n_ion);
        let grids = Pair::new(self.components[0].grid, self.components[1].grid);
        let w = Pair::new(self.components[0].m.as_slice(), self.components[1].m.as_slice());
        let fixed = conservative_fix(q.as_ref().map(|_, v| v.as_slice()), w, &grids, &self.params)?;
        Ok(flatten(fixed.q.as_ref().map(|_, v| v.as_slice())))
    }

    /// Σ_B Q_AB(M_A, g_B) + Q_AB(g_A, M_B) through the collision kernel.
    pub fn apply_collision_unfixed(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.check_len(g)?;
        let mut out = vec![0.0; self.dim];
        for a in &self.components {
            for b in &self.components {
                let pair = self.pair(a, b);
                let ga = &g[a.offset..a.offset + a.grid.len()];
                let gb = &g[b.offset..b.offset + b.grid.len()];
                let q1 = pair.q(&a.m, gb)?;
                let q2 = pair.q(ga, &b.m)?;
                for i in 0..a.grid.len() {
                    out[a.offset + i] += q1[i] + q2[i];
                }
            }
        }
        Ok(out)
    }

    fn pair<'a>(&'a self, a: &'a Component, b: &'a Component) -> CollisionPair<'a> {
        CollisionPair {
            grid_a: &a.grid,
            grid_b: &b.grid,
            m_a: a.mass,
            m_b: b.mass,
            prefactor: self.params.kernel_prefactor(a.species, b.species),
            sphere: &self.sphere,
        }
    }

    /// P₀ in ⟨·,·⟩_M.
    pub fn project_p0(&self, g: &[f64]) -> Vec<f64> {
        self.null.p0(g)
    }

    /// P₁ in ⟨·,·⟩_M.
    pub fn project_p1(&self, g: &[f64]) -> Vec<f64> {
        self.null.p1(g)
    }

    /// A random element of N^⊥: Gaussian noise times √M, projected and normalized
    /// to unit ⟨·,·⟩_M norm.
    pub fn random_microscopic(&self, rng: &mut impl Rng) -> Vec<f64> {
        let x: Vec<f64> = (0..self.dim).map(|_| standard_normal(rng)).collect();
        let g: Vec<f64> = x.iter().zip(&self.d).map(|(a, b)| a / b).collect();
        let g = self.project_p1(&g);
        let n = self.norm(&g);
        g.iter().map(|v| v / n).collect()
    }

    /// |ξ| per flat node.
    pub fn speeds(&self) -> Vec<f64> {
        self.flat_nodes().iter().map(|x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()).collect()
    }
}

/// Box–Muller normal deviate.
pub(crate) fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Raw functions spanning the macroscopic subspace: a density direction per
/// component, the three momentum directions and the energy direction.
fn macroscopic_span(components: &[Component], u: [f64; 3], theta: f64) -> Vec<Vec<f64>> {
    let mut raw: Vec<Vec<f64>> = Vec::new();
    for (ci, _) in components.iter().enumerate() {
        let mut v = Vec::new();
        for (cj, c) in components.iter().enumerate() {
            v.extend(c.m.iter().map(|m| if ci == cj { *m } else { 0.0 }));
        }
        raw.push(v);
    }
    for a in 0..3 {
        let mut v = Vec::new();
        for c in components {
            v.extend(c.m.iter().enumerate().map(|(i, m)| c.mass * (c.grid.node(i)[a] - u[a]) * m));
        }
        raw.push(v);
    }
    let mut v = Vec::new();
    for c in components {
        let k = BOLTZMANN / c.mass;
        v.extend(c.m.iter().enumerate().map(|(i, m)| {
            let xi = c.grid.node(i);
            let c2 = (xi[0] - u[0]).powi(2) + (xi[1] - u[1]).powi(2) + (xi[2] - u[2]).powi(2);
            (c2 / (k * theta) - 3.0) * m
        }));
    }
    raw.push(v);
    raw
}

/// ν_A on every flat node: Σ_B ∫∫ B_AB M_B(ξ*) dω dξ*.
fn collision_frequency(components: &[Component], params: &PlasmaParams, sphere: &SphereQuadrature) -> Vec<f64> {
    let omegas = sphere.folded();
    components
        .iter()
        .flat_map(|a| {
            (0..a.grid.len()).map(move |i| {
                let xi = a.grid.node(i);
                components
                    .iter()
                    .map(|b| {
                        let pref = params.kernel_prefactor(a.species, b.species) * b.grid.cell_volume();
                        let mut acc = 0.0;
                        for (j, mb) in b.m.iter().enumerate() {
                            let xs = b.grid.node(j);
                            let g = [xi[0] - xs[0], xi[1] - xs[1], xi[2] - xs[2]];
                            let kern: f64 = omegas
                                .iter()
                                .map(|&(w, wt)| wt * (g[0] * w[0] + g[1] * w[1] + g[2] * w[2]).abs())
                                .sum();
                            acc += kern * mb;
                        }
                        acc * pref
                    })
                    .sum::<f64>()
            })
        })
        .collect()
}

/// Dense kernel-consistent L_M by scattering trilinear stencils, one row per
/// output node.
fn assemble_raw(components: &[Component], params: &PlasmaParams, sphere: &SphereQuadrature, dim: usize) -> DenseMatrix {
    let mut rows = DenseMatrix::zeros(dim);
    let mut row_owner = Vec::with_capacity(dim);
    for (ci, c) in components.iter().enumerate() {
        row_owner.extend((0..c.grid.len()).map(|i| (ci, i)));
    }
    let omegas = sphere.folded();
    rows.data.par_chunks_mut(dim).enumerate().for_each(|(r, row)| {
        let (ci, i) = row_owner[r];
        let a = &components[ci];
        let xi = a.grid.node(i);
        let mut st_a = Vec::with_capacity(8);
        let mut st_b = Vec::with_capacity(8);
        let mut diag = 0.0;
        for b in components {
            let pref = params.kernel_prefactor(a.species, b.species) * b.grid.cell_volume();
            let ca = 2.0 * b.mass / (a.mass + b.mass);
            let cb = 2.0 * a.mass / (a.mass + b.mass);
            for j in 0..b.grid.len() {
                let xs = b.grid.node(j);
                let g = [xi[0] - xs[0], xi[1] - xs[1], xi[2] - xs[2]];
                let mut kern = 0.0;
                for &(w, wt) in omegas {
                    let d = g[0] * w[0] + g[1] * w[1] + g[2] * w[2];
                    let k = pref * wt * d.abs();
                    if k == 0.0 {
                        continue;
                    }
                    kern += k;
                    a.grid.stencil([xi[0] - ca * d * w[0], xi[1] - ca * d * w[1], xi[2] - ca * d * w[2]], &mut st_a);
                    b.grid.stencil([xs[0] + cb * d * w[0], xs[1] + cb * d * w[1], xs[2] + cb * d * w[2]], &mut st_b);
                    if st_a.is_empty() || st_b.is_empty() {
                        continue;
                    }
                    let ma: f64 = st_a.iter().map(|&(idx, wa)| wa * a.m[idx]).sum();
                    let mb: f64 = st_b.iter().map(|&(idx, wb)| wb * b.m[idx]).sum();
                    // gain(M_A, g_B): g_B read at ξ*′.
                    for &(idx, wb) in &st_b {
                        row[b.offset + idx] += k * ma * wb;
                    }
                    // gain(g_A, M_B): g_A read at ξ′.
                    for &(idx, wa) in &st_a {
                        row[a.offset + idx] += k * mb * wa;
                    }
                }
                // loss(M_A, g_B) and loss(g_A, M_B).
                row[b.offset + j] -= kern * a.m[i];
                diag += kern * b.m[j];
            }
        }
        row[a.offset + i] -= diag;
    });
    rows
}

/// Symmetric form of L_M in the variable x = √(Δv³/M) g:
/// xᵀ S y = −½ Σ_{A≤B} Σ B_AB M_A M_B* Δv_A³ Δv_B³ Δ(x/√(Δv³M)) Δ(y/√(Δv³M)),
/// where Δf = f_A(ξ′) + f_B(ξ*′) − f_A(ξ) − f_B(ξ*) with trilinear post-collision
/// values, and same-species pairs are counted once. Negative semidefinite by
/// construction. Rows are split into fixed blocks that each walk every
/// collision, so the summation order of every entry is independent of threads.
fn assemble_form(
    components: &[Component],
    params: &PlasmaParams,
    sphere: &SphereQuadrature,
    dim: usize,
) -> DenseMatrix {
    let mut s = DenseMatrix::zeros(dim);
    let scale: Vec<Vec<f64>> =
        components.iter().map(|c| c.m.iter().map(|m| 1.0 / (c.grid.cell_volume() * m).sqrt()).collect()).collect();
    let omegas = sphere.folded();
    let blocks = rayon::current_num_threads().max(1);
    let block_rows = dim.div_ceil(blocks);
    s.data.par_chunks_mut(block_rows * dim).enumerate().for_each(|(blk, chunk)| {
        let lo = blk * block_rows;
        let hi = lo + chunk.len() / dim;
        let mut st_a = Vec::with_capacity(8);
        let mut st_b = Vec::with_capacity(8);
        let mut v: Vec<(usize, f64)> = Vec::with_capacity(18);
        for (ia, a) in components.iter().enumerate() {
            for (ib, b) in components.iter().enumerate().skip(ia) {
                let same = ia == ib;
                let pref =
                    -0.5 * params.kernel_prefactor(a.species, b.species) * a.grid.cell_volume() * b.grid.cell_volume();
                let ca = 2.0 * b.mass / (a.mass + b.mass);
                let cb = 2.0 * a.mass / (a.mass + b.mass);
                for i in 0..a.grid.len() {
                    let xi = a.grid.node(i);
                    let j0 = if same { i + 1 } else { 0 };
                    for j in j0..b.grid.len() {
                        let xs = b.grid.node(j);
                        let g = [xi[0] - xs[0], xi[1] - xs[1], xi[2] - xs[2]];
                        let mm = pref * a.m[i] * b.m[j];
                        for &(w, wt) in omegas {
                            let d = g[0] * w[0] + g[1] * w[1] + g[2] * w[2];
                            let c = mm * wt * d.abs();
                            if c == 0.0 {
                                continue;
                            }
                            a.grid.stencil(
                                [xi[0] - ca * d * w[0], xi[1] - ca * d * w[1], xi[2] - ca * d * w[2]],
                                &mut st_a,
                            );
                            b.grid.stencil(
                                [xs[0] + cb * d * w[0], xs[1] + cb * d * w[1], xs[2] + cb * d * w[2]],
                                &mut st_b,
                            );
                            v.clear();
                            v.extend(st_a.iter().map(|&(k, wk)| (a.offset + k, wk * scale[ia][k])));
                            v.extend(st_b.iter().map(|&(k, wk)| (b.offset + k, wk * scale[ib][k])));
                            v.push((a.offset + i, -scale[ia][i]));
                            v.push((b.offset + j, -scale[ib][j]));
                            for &(r, vr) in &v {
                                if r < lo || r >= hi {
                                    continue;
                                }
                                let row = &mut chunk[(r - lo) * dim..(r - lo + 1) * dim];
                                let cr = c * vr;
                                for &(col, vc) in &v {
                                    row[col] += cr * vc;
                                }
                            }
                        }
                    }
                }
            }
        }
    });
    s
}

/// P S P with P = I − Σ e eᵀ, mirrored so the stored matrix is exactly symmetric.
fn project_symmetric(mut s: DenseMatrix, e: &[Vec<f64>]) -> DenseMatrix {
    let n = s.n;
    let k = e.len();
    let se: Vec<Vec<f64>> = e.iter().map(|ec| s.matvec(ec)).collect();
    let mut c = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            c[a][b] = 0.5
                * (e[a].iter().zip(&se[b]).map(|(x, y)| x * y).sum::<f64>()
                    + e[b].iter().zip(&se[a]).map(|(x, y)| x * y).sum::<f64>());
        }
    }
    s.data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, rj) in row.iter_mut().enumerate() {
            let mut corr = 0.0;
            for a in 0..k {
                corr += e[a][i] * se[a][j] + se[a][i] * e[a][j];
                for b in 0..k {
                    corr -= e[a][i] * c[a][b] * e[b][j];
                }
            }
            *rj -= corr;
        }
    });
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (s.data[i * n + j] + s.data[j * n + i]);
            s.data[i * n + j] = m;
            s.data[j * n + i] = m;
        }
    }
    s
}
