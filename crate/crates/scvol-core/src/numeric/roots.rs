//! Bisection root finding.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Root of `f` on `[a, b]` by bisection, to absolute tolerance `tol` on the
/// abscissa. Requires a sign change on the bracket.
pub fn bisect(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::numeric(alloc::format!(
            "bisect: no sign change on [{lo}, {hi}] (f = {flo:.3e}, {fhi:.3e})"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let r = bisect(&|x| x * x - 2.0, 0.0, 4.0, 1e-12).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-11);
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        assert!(bisect(&|x| x * x + 1.0, -1.0, 1.0, 1e-9).is_err());
    }
}
