use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{standard_normal, LinearizedOperator};
use crate::error::{Result, VpbError};
use crate::maxwellian::maxwellian_unchecked;

/// Relative residual at which the inverse is accepted.
pub const SOLVER_TOL: f64 = 1e-10;
/// Iteration cap of the conjugate-gradient inverse.
pub const SOLVER_CAP: usize = 500;

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// ‖L g − h‖_M / ‖h‖_M at exit.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Removes the macroscopic components of a vector in the symmetric variable.
fn project_hat(op: &LinearizedOperator, x: &mut [f64]) {
    for e in &op.null_hat {
        let c = dot(x, e);
        x.iter_mut().zip(e).for_each(|(v, w)| *v -= c * w);
    }
}

impl LinearizedOperator {
    /// Largest relative macroscopic content |P₀ h|_M / |h|_M accepted as "in N^⊥".
    pub const NULL_TOL: f64 = 1e-8;

    fn require_microscopic(&self, h: &[f64], what: &str) -> Result<()> {
        let total = self.norm(h);
        let macro_part = self.norm(&self.project_p0(h));
        if macro_part > Self::NULL_TOL * total.max(f64::MIN_POSITIVE) {
            return Err(VpbError::Precondition(format!(
                "{what} has macroscopic content {macro_part:.3e} (norm {total:.3e})"
            )));
        }
        Ok(())
    }

    /// g ∈ N^⊥ with L g = h, by conjugate gradients on −L restricted to N^⊥.
    pub fn solve_linv(&self, h: &[f64]) -> Result<(Vec<f64>, CgReport)> {
        self.solve_linv_with(h, SOLVER_TOL, SOLVER_CAP)
    }

    pub fn solve_linv_with(&self, h: &[f64], tol: f64, cap: usize) -> Result<(Vec<f64>, CgReport)> {
        if h.len() != self.dim {
            return Err(VpbError::Configuration("right-hand side has the wrong length".into()));
        }
        self.require_microscopic(h, "right-hand side")?;
        // −A x = −b in the symmetric variable, A = hat.
        let mut b: Vec<f64> = h.iter().zip(&self.d).map(|(v, d)| -v * d).collect();
        project_hat(self, &mut b);
        let bnorm = dot(&b, &b).sqrt();
        if bnorm == 0.0 {
            return Ok((vec![0.0; self.dim], CgReport { iterations: 0, relative_residual: 0.0 }));
        }
        let mut x = vec![0.0; self.dim];
        let mut r = b.clone();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let mut iterations = 0;
        while rr.sqrt() > tol * bnorm {
            if iterations == cap {
                return Err(VpbError::Convergence { iterations, residual: rr.sqrt() / bnorm });
            }
            let mut ap: Vec<f64> = self.hat.matvec(&p).iter().map(|v| -v).collect();
            project_hat(self, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(VpbError::Numerical(format!("operator not negative definite on N^⊥ (pAp = {pap:.3e})")));
            }
            let alpha = rr / pap;
            x.iter_mut().zip(&p).for_each(|(v, w)| *v += alpha * w);
            project_hat(self, &mut x);
            // Recompute the true residual periodically to stop drift.
            if iterations % 50 == 49 {
                let mut ax: Vec<f64> = self.hat.matvec(&x).iter().map(|v| -v).collect();
                project_hat(self, &mut ax);
                r = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
            } else {
                r.iter_mut().zip(&ap).for_each(|(v, w)| *v -= alpha * w);
            }
            project_hat(self, &mut r);
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            p = r.iter().zip(&p).map(|(u, v)| u + beta * v).collect();
            project_hat(self, &mut p);
            iterations += 1;
        }
        let g: Vec<f64> = x.iter().zip(&self.d).map(|(v, d)| v / d).collect();
        let lg = self.apply(&g)?;
        let res: Vec<f64> = lg.iter().zip(h).map(|(a, b)| a - b).collect();
        let relative_residual = self.norm(&res) / self.norm(h);
        Ok((g, CgReport { iterations, relative_residual }))
    }

    /// Flat values of a weight Maxwellian with the anchor's densities and
    /// velocity but temperature `theta_hat`.
    pub fn shifted_weight(&self, theta_hat: f64) -> Result<Vec<f64>> {
        if !(theta_hat > 0.5 * self.anchor_theta) {
            return Err(VpbError::Precondition(format!(
                "weight temperature {theta_hat} must exceed half the anchor temperature {}",
                self.anchor_theta
            )));
        }
        let mut out = Vec::with_capacity(self.dim);
        for (c, n) in self.components.iter().zip(&self.anchor_density) {
            out.extend(c.grid.nodes().iter().map(|xi| maxwellian_unchecked(c.mass, *n, self.anchor_u, theta_hat, *xi)));
        }
        Ok(out)
    }
}

/// ⟨−L g, g⟩_W / ⟨(1+|ξ|) g, g⟩_W with ⟨f, h⟩_W = Σ f h Δv³ / W. `weight = None`
/// uses the anchor. Rejects g with macroscopic content.
pub fn rayleigh_quotient(op: &LinearizedOperator, g: &[f64], weight: Option<&[f64]>) -> Result<f64> {
    op.require_microscopic(g, "sample")?;
    let lg = match weight {
        None => op.apply(g)?,
        Some(_) => op.apply_raw(g)?,
    };
    let speeds = op.speeds();
    let dv3 = op.cell_volumes();
    let w = weight.map(|w| w.to_vec()).unwrap_or_else(|| op.anchor_flat());
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..op.dim() {
        let s = dv3[k] / w[k];
        num -= lg[k] * g[k] * s;
        den += (1.0 + speeds[k]) * g[k] * g[k] * s;
    }
    Ok(num / den)
}

/// Minimum Rayleigh quotient over `samples` random elements of N^⊥ (fixed seed).
/// With `theta_hat = Some(θ̂)` the quotient uses a Maxwellian weight at θ̂ > θ/2
/// and samples are drawn with that weight's scale.
pub fn coercivity_estimate(op: &LinearizedOperator, theta_hat: Option<f64>, samples: usize, seed: u64) -> Result<f64> {
    let weight = theta_hat.map(|t| op.shifted_weight(t)).transpose()?;
    let dv3 = op.cell_volumes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let g = match &weight {
            None => op.random_microscopic(&mut rng),
            Some(w) => {
                let raw: Vec<f64> = (0..op.dim()).map(|k| standard_normal(&mut rng) * (w[k] / dv3[k]).sqrt()).collect();
                op.project_p1(&raw)
            }
        };
        best = best.min(rayleigh_quotient(op, &g, weight.as_deref())?);
    }
    Ok(best)
}

/// Exact minimum of the anchor Rayleigh quotient over N^⊥ from a dense
/// symmetric eigensolve (intended for coarse grids).
pub fn coercivity_eigen(op: &LinearizedOperator) -> Result<f64> {
    let n = op.dim();
    let wsqrt: Vec<f64> = op.speeds().iter().map(|s| (1.0 + s).sqrt()).collect();
    // y = W^{1/2} x; constraint y ⊥ W^{-1/2} e for every macroscopic e.
    let mut f: Vec<Vec<f64>> = Vec::new();
    for e in &op.null_hat {
        let mut v: Vec<f64> = e.iter().zip(&wsqrt).map(|(a, w)| a / w).collect();
        for _ in 0..2 {
            for q in &f {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let nv = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|a| *a /= nv);
        f.push(v);
    }
    let mut c = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] = -op.hat.get(i, j) / (wsqrt[i] * wsqrt[j]);
        }
    }
    let mut fm = DMatrix::<f64>::zeros(n, f.len());
    for (k, v) in f.iter().enumerate() {
        for i in 0..n {
            fm[(i, k)] = v[i];
        }
    }
    let p = DMatrix::<f64>::identity(n, n) - &fm * fm.transpose();
    let shift = 1e3 * (0..n).map(|i| c[(i, i)].abs()).fold(0.0, f64::max);
    let mut a = &p * &c * &p + &fm * fm.transpose() * shift;
    a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

impl LinearizedOperator {
    /// Δv³ per flat node.
    pub fn cell_volumes(&self) -> Vec<f64> {
        self.components.iter().flat_map(|c| std::iter::repeat(c.grid.cell_volume()).take(c.grid.len())).collect()
    }
}
