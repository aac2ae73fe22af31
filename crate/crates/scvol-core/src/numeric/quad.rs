//! Adaptive Simpson quadrature.
//!
//! Integrands in this crate are smooth 1-dimensional profiles (sin powers,
//! coarea slices), possibly with a square-root endpoint derivative; plain
//! adaptive Simpson with Richardson correction resolves them to tight
//! absolute tolerances in a handful of levels.

#[allow(unused_imports)]
use num_traits::Float;

/// Default absolute tolerance used for model-volume integrals.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_DEPTH: u32 = 60;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Degenerate intervals return 0. The recursion cap is generous enough that
/// hitting it means the integrand is far outside this crate's use cases; the
/// partial Richardson-corrected value is returned in that case.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    let half_tol = 0.5 * tol;
    recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(8);
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree-15 polynomial x^14 on [-1,1]: exact value 2/15
        let v: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(14)).sum();
        assert!((v - 2.0 / 15.0).abs() < 1e-13, "{v}");
    }

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x| 3.0 * x * x, 0.0, 2.0, 1e-13);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn sine_integral() {
        let v = adaptive_simpson(&|x| x.sin(), 0.0, core::f64::consts::PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        // d/dx sqrt(1-x^2) blows up at 1; the value is pi/4.
        let v = adaptive_simpson(&|x| (1.0 - x * x).sqrt(), 0.0, 1.0, 1e-12);
        assert!((v - core::f64::consts::FRAC_PI_4).abs() < 1e-10);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(&|x| x, 1.0, 1.0, 1e-12), 0.0);
        assert_eq!(adaptive_simpson(&|x| x, 2.0, 1.0, 1e-12), 0.0);
    }
}
