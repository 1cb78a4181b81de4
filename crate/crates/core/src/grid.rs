//! Uniform Cartesian velocity grids and trilinear interpolation with zero extension.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};

/// A cube of N_v³ equally spaced velocity nodes, optionally centered away from 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    /// Nodes per axis.
    pub n: usize,
    /// Half-width L_v of the box along each axis.
    pub half_width: f64,
    /// Box center; nodes run over center ± L_v.
    pub center: [f64; 3],
}

impl VelocityGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        Self::centered(n, half_width, [0.0; 3])
    }

    pub fn centered(n: usize, half_width: f64, center: [f64; 3]) -> Result<Self> {
        if n < 4 {
            return Err(VpbError::Domain(format!("need at least 4 nodes per axis, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(VpbError::Domain(format!("half-width must be positive, got {half_width}")));
        }
        Ok(Self { n, half_width, center })
    }

    /// Spacing Δv = 2L_v/(N_v − 1).
    pub fn dv(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    /// Quadrature weight Δv³ of a node.
    pub fn cell_volume(&self) -> f64 {
        self.dv().powi(3)
    }

    /// Total number of nodes N_v³.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of the first node along each axis.
    pub fn origin(&self) -> [f64; 3] {
        let l = self.half_width;
        [self.center[0] - l, self.center[1] - l, self.center[2] - l]
    }

    /// Coordinate of node `i` along `axis`.
    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.center[axis] - self.half_width + i as f64 * self.dv()
    }

    /// Flat index of (i, j, k), with k fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// Axis indices of a flat index.
    #[inline]
    pub fn unflatten(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Velocity of the node with flat index `idx`.
    #[inline]
    pub fn node(&self, idx: usize) -> [f64; 3] {
        let (i, j, k) = self.unflatten(idx);
        [self.coord(0, i), self.coord(1, j), self.coord(2, k)]
    }

    /// All nodes in flat-index order.
    pub fn nodes(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Evaluates `f` on every node.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.node(i))).collect()
    }

    /// Σ f Δv³.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Trilinear stencil of an arbitrary point: pairs (flat index, weight) for the
    /// in-box corners. Corners outside the box carry value zero and are omitted.
    pub fn stencil(&self, p: [f64; 3], out: &mut Vec<(usize, f64)>) {
        out.clear();
        let o = self.origin();
        let inv = 1.0 / self.dv();
        let n = self.n as isize;
        let mut lo = [0isize; 3];
        let mut t = [0.0; 3];
        for a in 0..3 {
            let s = (p[a] - o[a]) * inv;
            if !(s > -1.0 && s < n as f64) {
                return;
            }
            let f = s.floor();
            lo[a] = f as isize;
            t[a] = s - f;
        }
        for c in 0..8 {
            let mut w = 1.0;
            let mut id = [0isize; 3];
            for a in 0..3 {
                let up = (c >> (2 - a)) & 1 == 1;
                id[a] = lo[a] + up as isize;
                w *= if up { t[a] } else { 1.0 - t[a] };
            }
            if id.iter().all(|&x| x >= 0 && x < n) && w != 0.0 {
                out.push((self.index(id[0] as usize, id[1] as usize, id[2] as usize), w));
            }
        }
    }
}

/// Grid values padded by one layer of zeros so that trilinear evaluation needs no
/// per-corner bounds checks.
#[derive(Debug, Clone)]
pub struct Interpolant {
    n: usize,
    np: usize,
    origin: [f64; 3],
    inv_dv: f64,
    data: Vec<f64>,
}

impl Interpolant {
    pub fn new(grid: &VelocityGrid, values: &[f64]) -> Self {
        assert_eq!(values.len(), grid.len(), "field does not match grid");
        let n = grid.n;
        let np = n + 2;
        let mut data = vec![0.0; np * np * np];
        for i in 0..n {
            for j in 0..n {
                let src = grid.index(i, j, 0);
                let dst = ((i + 1) * np + j + 1) * np + 1;
                data[dst..dst + n].copy_from_slice(&values[src..src + n]);
            }
        }
        Self { n, np, origin: grid.origin(), inv_dv: 1.0 / grid.dv(), data }
    }

    /// Trilinear value at `p`, zero outside the box extended by one cell.
    #[inline]
    pub fn eval(&self, p: [f64; 3]) -> f64 {
        // Shifted into padded coordinates, where the admissible range is (0, n + 1)
        // and truncation equals floor.
        let lim = (self.n + 1) as f64;
        let sx = (p[0] - self.origin[0]) * self.inv_dv + 1.0;
        let sy = (p[1] - self.origin[1]) * self.inv_dv + 1.0;
        let sz = (p[2] - self.origin[2]) * self.inv_dv + 1.0;
        if !(sx > 0.0 && sx < lim && sy > 0.0 && sy < lim && sz > 0.0 && sz < lim) {
            return 0.0;
        }
        let (ix, iy, iz) = (sx as usize, sy as usize, sz as usize);
        let (tx, ty, tz) = (sx - ix as f64, sy - iy as f64, sz - iz as f64);
        let np = self.np;
        let b = np * np;
        let base = (ix * np + iy) * np + iz;
        debug_assert!(base + b + np + 1 < self.data.len());
        // SAFETY: 0 < s < n + 1 on every axis gives ix, iy, iz ≤ n, so the far
        // corner base + np² + np + 1 stays inside the (n + 2)³ padded array.
        let at = |o: usize| unsafe { *self.data.get_unchecked(base + o) };
        let c00 = at(0) + (at(1) - at(0)) * tz;
        let c01 = at(np) + (at(np + 1) - at(np)) * tz;
        let c10 = at(b) + (at(b + 1) - at(b)) * tz;
        let c11 = at(b + np) + (at(b + np + 1) - at(b + np)) * tz;
        let c0 = c00 + (c01 - c00) * ty;
        let c1 = c10 + (c11 - c10) * ty;
        c0 + (c1 - c0) * tx
    }
}
