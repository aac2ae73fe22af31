//! Dense symmetric eigen decomposition (cyclic Jacobi) and small SPD
//! helpers for per-node metric algebra.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Eigenvalues (ascending) and, on request, the matching orthonormal
/// eigenvectors (column `k` of the returned matrix pairs with eigenvalue
/// `k`). `m` is a row-major symmetric `n x n` matrix.
///
/// Cyclic Jacobi is quadratic-cost per sweep but unconditionally robust and
/// deterministic, which is what the hypersurface spectra (sizes <= ~1000)
/// need; large operators go through the sparse path instead.
pub fn jacobi_eigen(m: &[f64], n: usize, want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    if m.len() != n * n {
        return Err(Error::domain("jacobi_eigen: matrix size mismatch"));
    }
    let mut a = m.to_vec();
    let mut v = if want_vectors {
        let mut id = alloc::vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };

    let scale: f64 = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max).max(
        a.iter().fold(0.0f64, |acc, x| acc.max(x.abs())),
    );
    if scale == 0.0 {
        return Ok((alloc::vec![0.0; n], v));
    }
    let tol = 1e-15 * scale;

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 0.25 * tol {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[i * n + p];
                        let aiq = a[i * n + q];
                        let new_ip = aip - s * (aiq + tau * aip);
                        let new_iq = aiq + s * (aip - tau * aiq);
                        a[i * n + p] = new_ip;
                        a[p * n + i] = new_ip;
                        a[i * n + q] = new_iq;
                        a[q * n + i] = new_iq;
                    }
                }
                if let Some(vecs) = v.as_mut() {
                    for i in 0..n {
                        let vip = vecs[i * n + p];
                        let viq = vecs[i * n + q];
                        vecs[i * n + p] = vip - s * (viq + tau * vip);
                        vecs[i * n + q] = viq + s * (vip - tau * viq);
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = v.map(|vecs| {
        let mut sorted = alloc::vec![0.0; n * n];
        for (new_col, &old_col) in order.iter().enumerate() {
            for row in 0..n {
                sorted[row * n + new_col] = vecs[row * n + old_col];
            }
        }
        sorted
    });
    Ok((eigenvalues, vectors))
}

/// Cholesky factor check for a symmetric matrix of order `dim <= 3` stored
/// in a fixed 3x3 array. Returns false when the leading `dim x dim` block is
/// not positive definite.
pub fn is_spd3(g: &[[f64; 3]; 3], dim: usize) -> bool {
    let mut l = [[0.0f64; 3]; 3];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    true
}

/// Inverse and determinant of the leading `dim x dim` block (dim <= 3).
pub fn invert3(g: &[[f64; 3]; 3], dim: usize) -> Result<([[f64; 3]; 3], f64)> {
    let mut inv = [[0.0f64; 3]; 3];
    let det = match dim {
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        3 => {
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
        }
        _ => return Err(Error::domain("invert3: dim must be 1, 2 or 3")),
    };
    if det.abs() < 1e-300 {
        return Err(Error::numeric("invert3: singular matrix"));
    }
    match dim {
        1 => inv[0][0] = 1.0 / det,
        2 => {
            inv[0][0] = g[1][1] / det;
            inv[1][1] = g[0][0] / det;
            inv[0][1] = -g[0][1] / det;
            inv[1][0] = -g[1][0] / det;
        }
        _ => {
            for i in 0..3 {
                for j in 0..3 {
                    let (a, b, c, d) = (
                        g[(i + 1) % 3][(j + 1) % 3],
                        g[(i + 2) % 3][(j + 2) % 3],
                        g[(i + 1) % 3][(j + 2) % 3],
                        g[(i + 2) % 3][(j + 1) % 3],
                    );
                    // transposed cofactor; symmetric input keeps it symmetric
                    inv[j][i] = (a * b - c * d) / det;
                }
            }
        }
    }
    Ok((inv, det))
}
