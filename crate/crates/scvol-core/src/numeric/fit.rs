//! Weighted least-squares fits used by the volume-expansion estimators.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Solve the normal equations `A^T W A c = A^T W y` for up to 3 unknowns by
/// Gaussian elimination with partial pivoting. `a` is row-major with `cols`
/// entries per observation.
pub fn weighted_lsq(a: &[f64], y: &[f64], w: &[f64], cols: usize) -> Result<Vec<f64>> {
    let rows = y.len();
    if cols == 0 || cols > 3 || rows < cols || a.len() != rows * cols || w.len() != rows {
        return Err(Error::domain("weighted_lsq: inconsistent dimensions"));
    }
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for r in 0..rows {
        let wr = w[r];
        for i in 0..cols {
            let ai = a[r * cols + i];
            aty[i] += wr * ai * y[r];
            for j in 0..cols {
                ata[i][j] += wr * ai * a[r * cols + j];
            }
        }
    }
    solve_small(&mut ata, &mut aty, cols)
}

fn solve_small(m: &mut [[f64; 3]; 3], rhs: &mut [f64; 3], n: usize) -> Result<Vec<f64>> {
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[pivot][col].abs() {
                pivot = r;
            }
        }
        if m[pivot][col].abs() < 1e-300 {
            return Err(Error::numeric("weighted_lsq: singular normal equations"));
        }
        if pivot != col {
            m.swap(pivot, col);
            rhs.swap(pivot, col);
        }
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= factor * m[col][c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut out = alloc::vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = rhs[col];
        for c in col + 1..n {
            s -= m[col][c] * out[c];
        }
        out[col] = s / m[col][col];
    }
    Ok(out)
}

/// Fit `y ~ a + b r^2` and return `(a, b)`; used for the small-ball
/// intercept estimate of the dimension condition.
pub fn fit_affine_in_r2(radii: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    let rows = radii.len();
    let mut a = Vec::with_capacity(rows * 2);
    for &r in radii {
        a.push(1.0);
        a.push(r * r);
    }
    let w = alloc::vec![1.0; rows];
    let c = weighted_lsq(&a, values, &w, 2)?;
    Ok((c[0], c[1]))
}

/// Fit a ball-volume deficit `d(r) ~ c2 r^2 + c4 r^4` with weights `r^-4`
/// (emphasising the asymptotic regime) and return `(c2, c4)`.
pub fn fit_deficit(radii: &[f64], deficits: &[f64]) -> Result<(f64, f64)> {
    let rows = radii.len();
    let mut a = Vec::with_capacity(rows * 2);
    let mut w = Vec::with_capacity(rows);
    for &r in radii {
        let r2 = r * r;
        a.push(r2);
        a.push(r2 * r2);
        w.push(1.0 / (r2 * r2));
    }
    let c = weighted_lsq(&a, deficits, &w, 2)?;
    Ok((c[0], c[1]))
}

/// Fit a pure fourth-order deficit `d(r) ~ c4 r^4`, for scalar-flat inputs.
pub fn fit_quartic_deficit(radii: &[f64], deficits: &[f64]) -> Result<f64> {
    let rows = radii.len();
    let mut a = Vec::with_capacity(rows);
    let mut w = Vec::with_capacity(rows);
    for &r in radii {
        let r4 = r * r * r * r;
        a.push(r4);
        w.push(1.0 / (r4 * r4));
    }
    let c = weighted_lsq(&a, deficits, &w, 1)?;
    Ok(c[0])
}
