//! Chart-based weighted Riemannian manifolds: a rectangular coordinate
//! grid carrying a metric tensor field `g_ij` and a density exponent `f`
//! (the measure is `e^{-f} dVol_g`), with per-axis periodicity.
//!
//! Charts are limited to dimensions 1..=3; tensors are stored in fixed
//! 3x3 slots padded with the identity so the per-node algebra never
//! branches on the dimension.

pub mod ball;
pub mod closed;
pub mod conformal;
pub mod curvature;
pub mod generators;
pub mod stencil;

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numeric::linalg::is_spd3;

/// Symmetric 3x3 tensor stored as upper-triangular entries
/// `(00, 01, 02, 11, 12, 22)`.
pub type SymStorage = [f64; 6];

pub fn sym_to_mat(s: &SymStorage) -> [[f64; 3]; 3] {
    [[s[0], s[1], s[2]], [s[1], s[3], s[4]], [s[2], s[4], s[5]]]
}

pub fn mat_to_sym(m: &[[f64; 3]; 3]) -> SymStorage {
    [m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]]
}

// f64::rem_euclid is std-only; this positive-modulus wrap is all the grid
// arithmetic needs
fn wrap_positive(t: f64, period: f64) -> f64 {
    let r = t - period * (t / period).floor();
    if r >= period {
        r - period
    } else {
        r
    }
}

/// Identity padded into symmetric storage.
pub const SYM_IDENTITY: SymStorage = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0];

/// Where the chart data came from; analytic charts can be regenerated at
/// any resolution for refinement studies.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Provenance {
    Analytic(String),
    Raw,
}

/// Number of boundary layers where one-sided stencils operate; residual
/// maxima are taken over nodes outside this margin.
pub const TRUST_MARGIN: usize = 3;

#[derive(Debug, Clone)]
pub struct ChartMetric {
    dim: usize,
    shape: [usize; 3],
    spacing: [f64; 3],
    periodic: [bool; 3],
    origin: [f64; 3],
    g: Vec<SymStorage>,
    f: Vec<f64>,
    provenance: Provenance,
}

impl ChartMetric {
    /// Build a chart from explicit fields. `g` must be symmetric positive
    /// definite at every node (checked; failures name the node).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        shape: &[usize],
        spacing: &[f64],
        periodic: &[bool],
        origin: &[f64],
        g: Vec<SymStorage>,
        f: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::domain("chart dimension must be 1, 2 or 3"));
        }
        if shape.len() != dim || spacing.len() != dim || periodic.len() != dim || origin.len() != dim
        {
            return Err(Error::domain("shape/spacing/periodic/origin must all have dim entries"));
        }
        if shape.iter().any(|&m| m < 8) {
            return Err(Error::precondition(
                "need at least 8 nodes per axis for meaningful second differences",
            ));
        }
        if spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::domain("grid spacings must be positive"));
        }
        let count: usize = shape.iter().product();
        if g.len() != count || f.len() != count {
            return Err(Error::domain("field lengths must match the node count"));
        }
        let mut shape3 = [1usize; 3];
        let mut spacing3 = [1.0f64; 3];
        let mut periodic3 = [false; 3];
        let mut origin3 = [0.0f64; 3];
        shape3[..dim].copy_from_slice(shape);
        spacing3[..dim].copy_from_slice(spacing);
        periodic3[..dim].copy_from_slice(periodic);
        origin3[..dim].copy_from_slice(origin);
        let chart = ChartMetric {
            dim,
            shape: shape3,
            spacing: spacing3,
            periodic: periodic3,
            origin: origin3,
            g,
            f,
            provenance,
        };
        for node in 0..count {
            let m = sym_to_mat(&chart.g[node]);
            if !is_spd3(&m, dim) {
                return Err(Error::domain(alloc::format!(
                    "metric is not positive definite at node {node} (grid index {:?})",
                    chart.unindex(node)
                )));
            }
        }
        Ok(chart)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic[..self.dim]
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn node_count(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f
    }

    pub fn metric_values(&self) -> &[SymStorage] {
        &self.g
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing[..self.dim].iter().cloned().fold(0.0, f64::max)
    }

    #[inline]
    pub fn index(&self, iv: [usize; 3]) -> usize {
        (iv[0] * self.shape[1] + iv[1]) * self.shape[2] + iv[2]
    }

    #[inline]
    pub fn unindex(&self, node: usize) -> [usize; 3] {
        let k = node % self.shape[2];
        let rest = node / self.shape[2];
        let j = rest % self.shape[1];
        let i = rest / self.shape[1];
        [i, j, k]
    }

    /// Coordinates of a node.
    pub fn coords(&self, node: usize) -> [f64; 3] {
        let iv = self.unindex(node);
        [
            self.origin[0] + iv[0] as f64 * self.spacing[0],
            self.origin[1] + iv[1] as f64 * self.spacing[1],
            self.origin[2] + iv[2] as f64 * self.spacing[2],
        ]
    }

    /// Shift a node by `delta` steps along `axis`; periodic axes wrap,
    /// open axes return `None` past the boundary.
    pub fn offset(&self, node: usize, axis: usize, delta: isize) -> Option<usize> {
        let mut iv = self.unindex(node);
        let m = self.shape[axis] as isize;
        let pos = iv[axis] as isize + delta;
        let wrapped = if self.periodic[axis] {
            pos.rem_euclid(m)
        } else if (0..m).contains(&pos) {
            pos
        } else {
            return None;
        };
        iv[axis] = wrapped as usize;
        Some(self.index(iv))
    }

    pub fn g_at(&self, node: usize) -> [[f64; 3]; 3] {
        sym_to_mat(&self.g[node])
    }

    pub fn f_at(&self, node: usize) -> f64 {
        self.f[node]
    }

    /// Nodes at least `TRUST_MARGIN` layers away from every open boundary;
    /// one-sided stencils apply inside the margin and residual maxima
    /// should not be read there.
    pub fn trusted_nodes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        'nodes: for node in 0..self.node_count() {
            let iv = self.unindex(node);
            for a in 0..self.dim {
                if !self.periodic[a] {
                    let m = self.shape[a];
                    if iv[a] < TRUST_MARGIN || iv[a] + TRUST_MARGIN >= m {
                        continue 'nodes;
                    }
                }
            }
            out.push(node);
        }
        out
    }

    /// Is `point` (chart coordinates) inside the chart domain? Periodic
    /// axes always are.
    pub fn contains(&self, point: &[f64]) -> bool {
        for a in 0..self.dim {
            if self.periodic[a] {
                continue;
            }
            let lo = self.origin[a];
            let hi = self.origin[a] + (self.shape[a] - 1) as f64 * self.spacing[a];
            if point[a] < lo || point[a] > hi {
                return false;
            }
        }
        true
    }

    /// Per-axis quadratic (3-point Lagrange) interpolation stencil: the
    /// three node indices and weights per axis. Quadratic order removes
    /// the O(h^2) bias that bilinear interpolation leaves in smooth
    /// curvature fields. Fails outside the domain on open axes.
    fn interp_stencil(&self, point: &[f64]) -> Result<([[usize; 3]; 3], [[f64; 3]; 3])> {
        let mut idx = [[0usize; 3]; 3];
        let mut wts = [[0.0f64; 3]; 3];
        for a in 0..self.dim {
            let m = self.shape[a];
            let t = (point[a] - self.origin[a]) / self.spacing[a];
            let (base, s) = if self.periodic[a] {
                let tm = wrap_positive(t, m as f64);
                // center the 3-point stencil on the nearest node
                let near = tm.round();
                (near - 1.0, tm - (near - 1.0))
            } else {
                if t < -1e-9 || t > (m - 1) as f64 + 1e-9 {
                    return Err(Error::domain(alloc::format!(
                        "point leaves the chart along axis {a} (coordinate {})",
                        point[a]
                    )));
                }
                let mut base = t.round() - 1.0;
                base = base.clamp(0.0, (m - 3) as f64);
                (base, t - base)
            };
            for (k, slot) in idx[a].iter_mut().enumerate() {
                let raw = base as i64 + k as i64;
                *slot = if self.periodic[a] {
                    raw.rem_euclid(m as i64) as usize
                } else {
                    raw as usize
                };
            }
            wts[a] = [
                (s - 1.0) * (s - 2.0) * 0.5,
                s * (2.0 - s),
                s * (s - 1.0) * 0.5,
            ];
        }
        for a in self.dim..3 {
            idx[a] = [0, 0, 0];
            wts[a] = [1.0, 0.0, 0.0];
        }
        Ok((idx, wts))
    }

    /// Quadratic interpolation of a node-indexed scalar field.
    pub fn interp_scalar(&self, values: &[f64], point: &[f64]) -> Result<f64> {
        let (idx, wts) = self.interp_stencil(point)?;
        let mut acc = 0.0;
        for (k0, &i0) in idx[0].iter().enumerate() {
            let w0 = wts[0][k0];
            if w0 == 0.0 {
                continue;
            }
            for (k1, &i1) in idx[1].iter().enumerate() {
                let w01 = w0 * wts[1][k1];
                if w01 == 0.0 {
                    continue;
                }
                for (k2, &i2) in idx[2].iter().enumerate() {
                    let w = w01 * wts[2][k2];
                    if w == 0.0 {
                        continue;
                    }
                    acc += w * values[self.index([i0, i1, i2])];
                }
            }
        }
        Ok(acc)
    }

    /// Quadratic interpolation of many stacked components at once:
    /// `values` has `stride` entries per node.
    pub fn interp_components(
        &self,
        values: &[f64],
        stride: usize,
        point: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        let (idx, wts) = self.interp_stencil(point)?;
        for o in out.iter_mut() {
            *o = 0.0;
        }
        for (k0, &i0) in idx[0].iter().enumerate() {
            let w0 = wts[0][k0];
            if w0 == 0.0 {
                continue;
            }
            for (k1, &i1) in idx[1].iter().enumerate() {
                let w01 = w0 * wts[1][k1];
                if w01 == 0.0 {
                    continue;
                }
                for (k2, &i2) in idx[2].iter().enumerate() {
                    let w = w01 * wts[2][k2];
                    if w == 0.0 {
                        continue;
                    }
                    let node = self.index([i0, i1, i2]);
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += w * values[node * stride + k];
                    }
                }
            }
        }
        Ok(())
    }

    /// Nearest node to a chart point.
    pub fn nearest_node(&self, point: &[f64]) -> Result<usize> {
        let mut iv = [0usize; 3];
        for a in 0..self.dim {
            let m = self.shape[a];
            let t = (point[a] - self.origin[a]) / self.spacing[a];
            if self.periodic[a] {
                iv[a] = (wrap_positive(t, m as f64).round() as usize) % m;
            } else {
                if t < -1e-9 || t > (m - 1) as f64 + 1e-9 {
                    return Err(Error::domain(alloc::format!(
                        "point leaves the chart along axis {a} (coordinate {})",
                        point[a]
                    )));
                }
                iv[a] = t.round().clamp(0.0, (m - 1) as f64) as usize;
            }
        }
        Ok(self.index(iv))
    }
}
