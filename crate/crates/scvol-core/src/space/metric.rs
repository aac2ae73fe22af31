//! Distance and ball-measure backings for finite metric measure spaces.
//!
//! Dense matrices are the generic representation; embedded backings keep
//! closed-form metrics (spheres, flat tori, hyperbolic disks, Pythagorean
//! products) so large samples never materialise an `N x N` matrix. Ball
//! backings let the model-verification corpus carry exact continuum ball
//! volumes next to the atomic staircase.

use alloc::boxed::Box;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::models;

/// How point-to-point distances are produced.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MetricBacking {
    /// Row-major `N x N` matrix.
    Dense { n_points: usize, dist: Vec<f64> },
    /// Points of `R^k` with the Euclidean metric.
    Euclidean { dim: usize, coords: Vec<f64> },
    /// Unit vectors in `R^(dim+1)` scaled by `radius`; geodesic distance.
    Sphere { dim: usize, radius: f64, coords: Vec<f64> },
    /// Rectangular flat torus; per-axis wrap-around metric.
    FlatTorus { lengths: Vec<f64>, coords: Vec<f64> },
    /// Polar coordinates `(r, theta)` on the curvature `-k` plane.
    Hyperbolic { k: f64, coords: Vec<f64> },
    /// Pythagorean product: index `i = ia * nb + ib`.
    Product { a: Box<MetricBacking>, b: Box<MetricBacking>, nb: usize },
    /// All distances of `inner` multiplied by `factor`.
    Scaled { factor: f64, inner: Box<MetricBacking> },
}

impl MetricBacking {
    pub fn len(&self) -> usize {
        match self {
            MetricBacking::Dense { n_points, .. } => *n_points,
            MetricBacking::Euclidean { dim, coords } => coords.len() / dim,
            MetricBacking::Sphere { dim, coords, .. } => coords.len() / (dim + 1),
            MetricBacking::FlatTorus { lengths, coords } => coords.len() / lengths.len(),
            MetricBacking::Hyperbolic { coords, .. } => coords.len() / 2,
            MetricBacking::Product { a, b, .. } => a.len() * b.len(),
            MetricBacking::Scaled { inner, .. } => inner.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        if i == j {
            // acos/acosh round trips would otherwise report ~1e-8 here
            return 0.0;
        }
        match self {
            MetricBacking::Dense { n_points, dist } => dist[i * n_points + j],
            MetricBacking::Euclidean { dim, coords } => {
                let (pi, pj) = (&coords[i * dim..(i + 1) * dim], &coords[j * dim..(j + 1) * dim]);
                let mut s = 0.0;
                for k in 0..*dim {
                    let d = pi[k] - pj[k];
                    s += d * d;
                }
                s.sqrt()
            }
            MetricBacking::Sphere { dim, radius, coords } => {
                let k = dim + 1;
                let (pi, pj) = (&coords[i * k..(i + 1) * k], &coords[j * k..(j + 1) * k]);
                let mut dot = 0.0;
                for t in 0..k {
                    dot += pi[t] * pj[t];
                }
                radius * dot.clamp(-1.0, 1.0).acos()
            }
            MetricBacking::FlatTorus { lengths, coords } => {
                let n = lengths.len();
                let (pi, pj) = (&coords[i * n..(i + 1) * n], &coords[j * n..(j + 1) * n]);
                let mut s = 0.0;
                for k in 0..n {
                    let raw = (pi[k] - pj[k]).abs();
                    let d = raw.min(lengths[k] - raw);
                    s += d * d;
                }
                s.sqrt()
            }
            MetricBacking::Hyperbolic { k, coords } => {
                let (r1, t1) = (coords[2 * i], coords[2 * i + 1]);
                let (r2, t2) = (coords[2 * j], coords[2 * j + 1]);
                let sk = k.sqrt();
                let arg = (sk * r1).cosh() * (sk * r2).cosh()
                    - (sk * r1).sinh() * (sk * r2).sinh() * (t1 - t2).cos();
                arg.max(1.0).acosh() / sk
            }
            MetricBacking::Product { a, b, nb } => {
                let (ia, ib) = (i / nb, i % nb);
                let (ja, jb) = (j / nb, j % nb);
                let da = a.dist(ia, ja);
                let db = b.dist(ib, jb);
                (da * da + db * db).sqrt()
            }
            MetricBacking::Scaled { factor, inner } => factor * inner.dist(i, j),
        }
    }

    /// Fill `out` with the distances from point `i` to every point.
    pub fn dist_row(&self, i: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.len());
        match self {
            MetricBacking::Dense { n_points, dist } => {
                out.copy_from_slice(&dist[i * n_points..(i + 1) * n_points]);
            }
            MetricBacking::Product { a, b, nb } => {
                let na = a.len();
                let (ia, ib) = (i / nb, i % nb);
                let mut row_a = alloc::vec![0.0; na];
                let mut row_b = alloc::vec![0.0; *nb];
                a.dist_row(ia, &mut row_a);
                b.dist_row(ib, &mut row_b);
                for ja in 0..na {
                    let da2 = row_a[ja] * row_a[ja];
                    for jb in 0..*nb {
                        out[ja * nb + jb] = (da2 + row_b[jb] * row_b[jb]).sqrt();
                    }
                }
            }
            MetricBacking::Scaled { factor, inner } => {
                inner.dist_row(i, out);
                for v in out.iter_mut() {
                    *v *= factor;
                }
            }
            _ => {
                for j in 0..self.len() {
                    out[j] = self.dist(i, j);
                }
            }
        }
        out[i] = 0.0;
    }

    /// Wrap in a metric scaling by `factor`, folding embedded forms where
    /// the scaled metric has the same closed form.
    pub fn scaled(self, factor: f64) -> MetricBacking {
        match self {
            MetricBacking::Dense { n_points, mut dist } => {
                for v in dist.iter_mut() {
                    *v *= factor;
                }
                MetricBacking::Dense { n_points, dist }
            }
            MetricBacking::Euclidean { dim, mut coords } => {
                for v in coords.iter_mut() {
                    *v *= factor;
                }
                MetricBacking::Euclidean { dim, coords }
            }
            MetricBacking::Sphere { dim, radius, coords } => {
                MetricBacking::Sphere { dim, radius: radius * factor, coords }
            }
            MetricBacking::FlatTorus { mut lengths, mut coords } => {
                for v in lengths.iter_mut() {
                    *v *= factor;
                }
                for v in coords.iter_mut() {
                    *v *= factor;
                }
                MetricBacking::FlatTorus { lengths, coords }
            }
            MetricBacking::Scaled { factor: f0, inner } => {
                MetricBacking::Scaled { factor: f0 * factor, inner }
            }
            other => MetricBacking::Scaled { factor, inner: Box::new(other) },
        }
    }
}

/// How ball measures are produced: by summing atoms, or from the closed
/// form of a homogeneous continuum model ("exact-area oracle spaces").
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BallBacking {
    Atomic,
    /// Round `n`-sphere of sectional curvature `sec`: exact continuum ball
    /// volumes from every center.
    SphereExact { n: usize, sec: f64 },
    /// Flat torus: Euclidean ball volumes, valid strictly below half the
    /// shortest girth.
    FlatTorusExact { n: usize, min_girth: f64 },
    /// Curvature `-k` plane (2d): `2 pi / k (cosh(sqrt(k) r) - 1)`.
    HyperbolicExact { k: f64 },
}

impl BallBacking {
    /// Closed-form ball volume, or `None` for atomic backings.
    pub fn analytic_volume(&self, r: f64) -> Option<Result<f64>> {
        match *self {
            BallBacking::Atomic => None,
            BallBacking::SphereExact { n, sec } => Some(models::sphere_ball_volume(n, sec, r)),
            BallBacking::FlatTorusExact { n, min_girth } => {
                if r < 0.5 * min_girth {
                    Some(models::euclidean_ball_volume(n, r))
                } else {
                    Some(Err(Error::domain(alloc::format!(
                        "flat-torus exact balls valid below half-girth {}, got r = {r}",
                        0.5 * min_girth
                    ))))
                }
            }
            BallBacking::HyperbolicExact { k } => {
                let v = 2.0 * core::f64::consts::PI / k * ((k.sqrt() * r).cosh() - 1.0);
                Some(Ok(v))
            }
        }
    }

    pub fn scaled(self, factor: f64) -> BallBacking {
        let f2 = factor * factor;
        match self {
            BallBacking::Atomic => BallBacking::Atomic,
            BallBacking::SphereExact { n, sec } => BallBacking::SphereExact { n, sec: sec / f2 },
            BallBacking::FlatTorusExact { n, min_girth } => {
                BallBacking::FlatTorusExact { n, min_girth: min_girth * factor }
            }
            BallBacking::HyperbolicExact { k } => BallBacking::HyperbolicExact { k: k / f2 },
        }
    }
}
