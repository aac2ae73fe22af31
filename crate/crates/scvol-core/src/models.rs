//! Comparison geometries: Euclidean balls, round-sphere balls, and
//! `S^2(gamma) x R^(n-2)` product balls, plus the generalized Bishop-Gromov
//! profile and small-radius expansion fits.
//!
//! Ball volumes of curved models go through adaptive quadrature (absolute
//! tolerance 1e-12 per integral); radii past the model diameter return the
//! total volume so certification sweeps can probe past the cap without
//! special-casing.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numeric::fit::fit_deficit;
use crate::numeric::quad::{adaptive_simpson, DEFAULT_TOL};

/// Volume of the unit ball in `R^n`, exact for every integer dimension via
/// the half-integer Gamma recursion `alpha(n) = alpha(n-2) * 2 pi / n`.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(1.0); // 0-dimensional ball is a point of counting measure 1
    }
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    Ok(v)
}

/// Surface area of the unit `(n-1)`-sphere in `R^n`: `n * alpha(n)`.
pub fn unit_sphere_area(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("unit_sphere_area: dimension must be positive"));
    }
    Ok(n as f64 * unit_ball_volume(n)?)
}

/// Volume of the closed `r`-ball in `R^n`.
pub fn euclidean_ball_volume(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("euclidean_ball_volume: dimension must be positive"));
    }
    if r < 0.0 {
        return Err(Error::domain("euclidean_ball_volume: negative radius"));
    }
    Ok(unit_ball_volume(n)? * r.powi(n as i32))
}

/// Volume of the geodesic `r`-ball in the round `n`-sphere of constant
/// sectional curvature `sec`, by quadrature of the sin-power area profile.
/// Radii beyond the diameter `pi/sqrt(sec)` return the total volume.
pub fn sphere_ball_volume(n: usize, sec: f64, r: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("sphere_ball_volume: need n >= 2"));
    }
    if sec <= 0.0 {
        return Err(Error::domain("sphere_ball_volume: sectional curvature must be positive"));
    }
    if r < 0.0 {
        return Err(Error::domain("sphere_ball_volume: negative radius"));
    }
    let rho = 1.0 / sec.sqrt();
    let cap = PI * rho;
    let upper = r.min(cap);
    let area = unit_sphere_area(n)?;
    let integrand = move |t: f64| (rho * (t / rho).sin()).powi(n as i32 - 1);
    Ok(area * adaptive_simpson(&integrand, 0.0, upper, DEFAULT_TOL))
}

/// Volume of the `r`-ball in `S^2(gamma) x R^(n-2)` under the Pythagorean
/// product metric, as the coarea integral over the sphere-factor distance.
/// For `n = 2` the Euclidean factor degenerates and the result equals the
/// round 2-sphere ball.
pub fn product_ball_volume(gamma: f64, n: usize, r: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::domain("product_ball_volume: gamma must be positive"));
    }
    if n < 2 {
        return Err(Error::domain("product_ball_volume: need n >= 2"));
    }
    if r < 0.0 {
        return Err(Error::domain("product_ball_volume: negative radius"));
    }
    if n == 2 {
        return sphere_ball_volume(2, 1.0 / (gamma * gamma), r);
    }
    let m = n - 2;
    let alpha_m = unit_ball_volume(m)?;
    let upper = r.min(PI * gamma);
    let integrand = move |rho: f64| {
        let circle = 2.0 * PI * gamma * (rho / gamma).sin();
        let chord2 = (r * r - rho * rho).max(0.0);
        circle * alpha_m * chord2.powf(m as f64 / 2.0)
    };
    Ok(adaptive_simpson(&integrand, 0.0, upper, DEFAULT_TOL))
}

/// `int_0^r sin(t sqrt(kappa/(n-1)))^(n-1) dt`, the Bishop-Gromov growth
/// integral; the `kappa = 0` case is the analytic limit `r^n / n`.
pub fn profile_integral(n: usize, kappa: f64, r: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("profile_integral: need n >= 2"));
    }
    if kappa < 0.0 {
        return Err(Error::domain("profile_integral: kappa must be nonnegative"));
    }
    if r < 0.0 {
        return Err(Error::domain("profile_integral: negative radius"));
    }
    if kappa == 0.0 {
        return Ok(r.powi(n as i32) / n as f64);
    }
    let a = (kappa / (n as f64 - 1.0)).sqrt();
    let cap = PI / a;
    if r > cap * (1.0 + 1e-12) {
        return Err(Error::domain(alloc::format!(
            "profile_integral: radius {r} beyond domain cap pi*sqrt((n-1)/kappa) = {cap}"
        )));
    }
    let integrand = move |t: f64| (a * t).sin().powi(n as i32 - 1);
    Ok(adaptive_simpson(&integrand, 0.0, r.min(cap), DEFAULT_TOL))
}

/// Normalized Bishop-Gromov profile `f(r) = profile_integral / vol_E(B_r)`.
/// The `kappa = 0` profile is the constant `1/(n alpha(n))`, so profile
/// ratios reduce exactly to the `(r/R)^n` power law.
pub fn bg_profile(n: usize, kappa: f64, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::domain("bg_profile: radius must be positive"));
    }
    if kappa == 0.0 {
        return Ok(1.0 / (n as f64 * unit_ball_volume(n)?));
    }
    Ok(profile_integral(n, kappa, r)? / euclidean_ball_volume(n, r)?)
}

/// Lower bound for `mu(B_r)/mu(B_R)` under CD(kappa, n): the ratio of
/// growth integrals.
pub fn bg_ratio_bound(n: usize, kappa: f64, r: f64, big_r: f64) -> Result<f64> {
    if !(0.0 < r && r <= big_r) {
        return Err(Error::domain("bg_ratio_bound: need 0 < r <= R"));
    }
    Ok(profile_integral(n, kappa, r)? / profile_integral(n, kappa, big_r)?)
}

/// Tagged comparison geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelSpace {
    Euclidean { n: usize },
    RoundSphere { n: usize, sec: f64 },
    /// `S^2(gamma) x R^(n-2)`; `n = 2` behaves as the bare 2-sphere.
    ProductS2xE { gamma: f64, n: usize },
}

impl ModelSpace {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpace::Euclidean { n } if n >= 1 => Ok(()),
            ModelSpace::RoundSphere { n, sec } if n >= 2 && sec > 0.0 => Ok(()),
            ModelSpace::ProductS2xE { gamma, n } if n >= 2 && gamma > 0.0 => Ok(()),
            _ => Err(Error::domain("ModelSpace: invalid parameters")),
        }
    }

    pub fn dimension(&self) -> usize {
        match *self {
            ModelSpace::Euclidean { n } => n,
            ModelSpace::RoundSphere { n, .. } => n,
            ModelSpace::ProductS2xE { n, .. } => n,
        }
    }

    /// Scalar curvature: 0, `n(n-1) sec`, or `2/gamma^2`.
    pub fn scalar_curvature(&self) -> f64 {
        match *self {
            ModelSpace::Euclidean { .. } => 0.0,
            ModelSpace::RoundSphere { n, sec } => (n * (n - 1)) as f64 * sec,
            ModelSpace::ProductS2xE { gamma, .. } => 2.0 / (gamma * gamma),
        }
    }

    /// Diameter, infinite for models with a Euclidean factor.
    pub fn diameter(&self) -> f64 {
        match *self {
            ModelSpace::Euclidean { .. } => f64::INFINITY,
            ModelSpace::RoundSphere { sec, .. } => PI / sec.sqrt(),
            ModelSpace::ProductS2xE { n, gamma } => {
                if n == 2 {
                    PI * gamma
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Volume of the closed `r`-ball.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        self.validate()?;
        match *self {
            ModelSpace::Euclidean { n } => euclidean_ball_volume(n, r),
            ModelSpace::RoundSphere { n, sec } => sphere_ball_volume(n, sec, r),
            ModelSpace::ProductS2xE { gamma, n } => product_ball_volume(gamma, n, r),
        }
    }

    /// A radius scale below which the ball expansion is in its asymptotic
    /// regime (injectivity-scale proxy).
    pub fn injectivity_scale(&self) -> f64 {
        match *self {
            ModelSpace::Euclidean { .. } => 1.0,
            ModelSpace::RoundSphere { sec, .. } => PI / sec.sqrt(),
            ModelSpace::ProductS2xE { gamma, .. } => PI * gamma,
        }
    }
}

/// Result of a small-radius deficit fit `1 - vol/vol_E ~ c2 r^2 + c4 r^4`.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExpansionFit {
    /// Fitted `r^2` coefficient of the volume ratio (negative of the
    /// deficit coefficient).
    pub ratio_r2_coefficient: f64,
    /// Fitted `r^4` coefficient of the ratio.
    pub ratio_r4_coefficient: f64,
    /// `-Sc/(6(n+2))`, the coefficient the expansion predicts.
    pub predicted_r2_coefficient: f64,
    /// `|fitted - predicted| / |predicted|`, infinite when predicted is 0.
    pub relative_error: f64,
}

/// Fit the `r^2` coefficient of `vol(B_r)/vol_E(B_r)` over a radius window
/// (fractions of the injectivity scale) and compare against the model's
/// scalar-curvature prediction.
pub fn expansion_fit(model: &ModelSpace, window: (f64, f64), samples: usize) -> Result<ExpansionFit> {
    model.validate()?;
    if !(0.0 < window.0 && window.0 < window.1) || samples < 4 {
        return Err(Error::domain("expansion_fit: bad window or sample count"));
    }
    let scale = model.injectivity_scale();
    let n = model.dimension();
    let mut radii = Vec::with_capacity(samples);
    let mut deficits = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = k as f64 / (samples - 1) as f64;
        let r = scale * (window.0 + t * (window.1 - window.0));
        let ratio = model.ball_volume(r)? / euclidean_ball_volume(n, r)?;
        radii.push(r);
        deficits.push(1.0 - ratio);
    }
    let (c2, c4) = fit_deficit(&radii, &deficits)?;
    let predicted = -model.scalar_curvature() / (6.0 * (n as f64 + 2.0));
    let fitted = -c2;
    let relative_error = if predicted == 0.0 {
        if fitted.abs() < 1e-9 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (fitted - predicted).abs() / predicted.abs()
    };
    Ok(ExpansionFit {
        ratio_r2_coefficient: fitted,
        ratio_r4_coefficient: -c4,
        predicted_r2_coefficient: predicted,
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_volumes() {
        // unit disk, degenerate radius, (4/3) pi 2^3
        assert!((euclidean_ball_volume(2, 1.0).unwrap() - PI).abs() < 1e-15);
        assert_eq!(euclidean_ball_volume(7, 0.0).unwrap(), 0.0);
        assert!((euclidean_ball_volume(3, 2.0).unwrap() - 32.0 * PI / 3.0).abs() < 1e-12);
        assert!(euclidean_ball_volume(0, 1.0).is_err());
    }

    #[test]
    fn sphere_quadrature_matches_closed_form() {
        // closed form on the 2-sphere: 2 pi gamma^2 (1 - cos(r/gamma))
        for &gamma in &[0.5, 1.0, 2.0] {
            let sec = 1.0 / (gamma * gamma);
            let mut r = 0.0;
            while r <= PI * gamma + 1e-9 {
                let exact = 2.0 * PI * gamma * gamma * (1.0 - (r / gamma).cos());
                let quad = sphere_ball_volume(2, sec, r).unwrap();
                assert!((quad - exact).abs() < 1e-10, "gamma={gamma} r={r}");
                r += PI * gamma / 64.0;
            }
        }
        // full sphere area
        assert!((sphere_ball_volume(2, 1.0, PI).unwrap() - 4.0 * PI).abs() < 1e-10);
        // past the cap: total volume
        assert!((sphere_ball_volume(2, 1.0, 10.0).unwrap() - 4.0 * PI).abs() < 1e-10);
        assert!(sphere_ball_volume(2, 1.0, -0.1).is_err());
    }

    #[test]
    fn sphere3_deficit_matches_scalar_curvature() {
        // fitted r^2 coefficient of the S^3 ratio is -Sc/30 = -0.2
        let model = ModelSpace::RoundSphere { n: 3, sec: 1.0 };
        let fit = expansion_fit(&model, (0.01 / PI, 0.1 / PI), 12).unwrap();
        assert!(
            (fit.ratio_r2_coefficient + 0.2).abs() < 2e-4,
            "fitted {}",
            fit.ratio_r2_coefficient
        );
        assert!(fit.relative_error < 0.01);
    }

    #[test]
    fn product_reduces_to_sphere_at_n2() {
        for &r in &[0.2, 0.9, 2.0] {
            let direct = product_ball_volume(0.7, 2, r).unwrap();
            let exact = 2.0 * PI * 0.49 * (1.0 - (r / 0.7).cos());
            assert!((direct - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn product_n4_matches_symbolic_antiderivative() {
        // For n = 4 the coarea integrand is elementary:
        // V = 2 pi^2 gamma int_0^m sin(rho/gamma)(r^2 - rho^2) drho.
        let closed = |gamma: f64, r: f64| {
            let a = 1.0 / gamma;
            let m = r.min(PI * gamma);
            let i_r2 = r * r * (1.0 - (a * m).cos()) / a;
            let i_rho2 = -m * m * (a * m).cos() / a + 2.0 * m * (a * m).sin() / (a * a)
                + 2.0 * (a * m).cos() / (a * a * a)
                - 2.0 / (a * a * a);
            2.0 * PI * PI * gamma * (i_r2 - i_rho2)
        };
        for &(gamma, r) in &[(1.0, 0.3), (1.0, 1.5), (0.5, 2.0), (2.0, 0.8)] {
            let quad = product_ball_volume(gamma, 4, r).unwrap();
            let exact = closed(gamma, r);
            assert!((quad - exact).abs() < 1e-9, "gamma={gamma} r={r}: {quad} vs {exact}");
        }
    }

    #[test]
    fn product_expansion_coefficient() {
        // S^2(1) x R^2: ratio coefficient -(2/gamma^2)/(6(n+2)) = -1/18
        let model = ModelSpace::ProductS2xE { gamma: 1.0, n: 4 };
        let fit = expansion_fit(&model, (0.02 / PI, 0.2 / PI), 14).unwrap();
        assert!((fit.ratio_r2_coefficient + 1.0 / 18.0).abs() < 0.01 / 18.0);
    }

    #[test]
    fn paper_volume_comparisons() {
        // S^2(g1) x R < S^2(g2) x R < R^3 for g1 < g2, below the cap
        let r = 0.3;
        let v1 = product_ball_volume(0.5, 3, r).unwrap();
        let v2 = product_ball_volume(1.0, 3, r).unwrap();
        let ve = euclidean_ball_volume(3, r).unwrap();
        assert!(v1 < v2 && v2 < ve);
    }

    #[test]
    fn product_smaller_than_euclidean_through_cap() {
        let gamma = 0.6;
        for k in 1..=24 {
            let r = k as f64 * PI * gamma / 24.0;
            let vp = product_ball_volume(gamma, 3, r).unwrap();
            let ve = euclidean_ball_volume(3, r).unwrap();
            assert!(vp < ve, "r = {r}");
        }
    }

    #[test]
    fn ball_volumes_increase_then_saturate() {
        let models = [
            ModelSpace::Euclidean { n: 3 },
            ModelSpace::RoundSphere { n: 2, sec: 2.0 },
            ModelSpace::RoundSphere { n: 3, sec: 1.0 },
            ModelSpace::ProductS2xE { gamma: 0.8, n: 4 },
        ];
        for model in &models {
            let diam = model.diameter();
            let mut prev = 0.0;
            for k in 1..=40 {
                let r = k as f64 * 0.12;
                let v = model.ball_volume(r).unwrap();
                if r <= diam {
                    assert!(v > prev, "{model:?} at r = {r}");
                } else {
                    let total = model.ball_volume(diam).unwrap();
                    assert!((v - total).abs() < 1e-10, "{model:?} saturates past diameter");
                }
                prev = v;
            }
        }
    }

    #[test]
    fn profile_kappa_zero_is_constant() {
        let f1 = bg_profile(3, 0.0, 0.1).unwrap();
        let f2 = bg_profile(3, 0.0, 2.5).unwrap();
        assert!((f1 - f2).abs() < 1e-15);
        // ratio bound reduces to (r/R)^n
        let b = bg_ratio_bound(3, 0.0, 0.5, 2.0).unwrap();
        assert!((b - (0.25f64).powi(3)).abs() < 1e-15);
    }

    #[test]
    fn profile_expansion_ratio() {
        // f(R)/f(r) vs [1 - nk/(6(n+2)) R^2]/[1 - nk/(6(n+2)) r^2] is O(r^4+R^4)
        let (n, kappa) = (3usize, 2.0);
        let coeff = n as f64 * kappa / (6.0 * (n as f64 + 2.0));
        let check = |r: f64, big_r: f64| {
            let lhs = bg_profile(n, kappa, big_r).unwrap() / bg_profile(n, kappa, r).unwrap();
            let rhs = (1.0 - coeff * big_r * big_r) / (1.0 - coeff * r * r);
            (lhs - rhs).abs()
        };
        let e1 = check(0.1, 0.2);
        let e2 = check(0.05, 0.1);
        // fourth-order remainder: halving the radii cuts the gap ~16x
        assert!(e1 < 1e-4, "{e1}");
        assert!(e2 < e1 / 8.0, "{e1} -> {e2}");
    }

    #[test]
    fn profile_total_mass_on_sphere() {
        // n = 2, kappa = 1, r = pi: the growth integral is the full mass of
        // the unit-curvature profile
        let total = profile_integral(2, 1.0, PI).unwrap();
        assert!((total - 2.0).abs() < 1e-12); // int_0^pi sin = 2
        assert!(profile_integral(2, 1.0, PI + 0.1).is_err());
    }

    #[test]
    fn scalar_curvature_accessors() {
        assert_eq!(ModelSpace::Euclidean { n: 5 }.scalar_curvature(), 0.0);
        assert_eq!(ModelSpace::RoundSphere { n: 3, sec: 2.0 }.scalar_curvature(), 12.0);
        assert_eq!(ModelSpace::ProductS2xE { gamma: 0.5, n: 4 }.scalar_curvature(), 8.0);
    }

    #[test]
    fn product_monotone_in_gamma() {
        let (n, r) = (3usize, 0.4);
        let mut prev = 0.0;
        for k in 1..=10 {
            let gamma = 0.3 + 0.15 * k as f64;
            let v = product_ball_volume(gamma, n, r).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }
}
