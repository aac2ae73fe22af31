//! Conformal operations on weighted charts: the measure-preserving
//! conformal change, the Chang-Gursky-Yang invariance residual, and the
//! conformal metric built from the density.
//!
//! The density transforms as `f -> f + n w` under `g -> e^{2w} g`, which
//! fixes the measure `e^{-f} dVol_g` and makes the conformal invariance an
//! exact identity (verified by expanding the standard conformal
//! transformation laws); the residuals measured here are pure finite
//! difference truncation and shrink as `O(h^2)`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::chart::curvature::{cgy_coefficients, curvature_fields, weighted_scalar_curvature};
use crate::chart::{sym_to_mat, ChartMetric, Provenance};
use crate::error::{Error, Result};

/// The chart with metric `e^{2w} g` and density `f + n w`; the weighted
/// volume `e^{-f} dVol_g` is unchanged.
pub fn conformal_change(chart: &ChartMetric, w: &[f64]) -> Result<ChartMetric> {
    if w.len() != chart.node_count() {
        return Err(Error::domain("conformal factor must be sampled on every node"));
    }
    let n = chart.dim() as f64;
    let mut g = Vec::with_capacity(chart.node_count());
    let mut f = Vec::with_capacity(chart.node_count());
    for node in 0..chart.node_count() {
        let scale = (2.0 * w[node]).exp();
        let mut s = chart.metric_values()[node];
        for (k, entry) in s.iter_mut().enumerate() {
            // the padding slots (rows/cols beyond dim) stay identity
            let touched = match chart.dim() {
                1 => k == 0,
                2 => matches!(k, 0 | 1 | 3),
                _ => true,
            };
            if touched {
                *entry *= scale;
            }
        }
        g.push(s);
        f.push(chart.f_values()[node] + n * w[node]);
    }
    ChartMetric::new(
        chart.dim(),
        chart.shape(),
        chart.spacing(),
        chart.periodic(),
        chart.origin(),
        g,
        f,
        Provenance::Raw,
    )
}

/// Max normalized residual of the conformal invariance
/// `Sc_{a0,b0}(e^{2w} g, f + n w) = e^{-2w} Sc_{a0,b0}(g, f)` with the
/// dimension's invariant coefficient pair, over trusted nodes.
pub fn cgy_invariance_residual(chart: &ChartMetric, w: &[f64]) -> Result<f64> {
    let (alpha, beta) = cgy_coefficients(chart.dim());
    let base = curvature_fields(chart)?;
    let rhs_field = weighted_scalar_curvature(&base, alpha, beta);
    let changed = conformal_change(chart, w)?;
    let lhs_fields = curvature_fields(&changed)?;
    let lhs = weighted_scalar_curvature(&lhs_fields, alpha, beta);

    let trusted = chart.trusted_nodes();
    let mut scale = 0.0f64;
    for &node in &trusted {
        scale = scale.max(((-2.0 * w[node]).exp() * rhs_field[node]).abs());
    }
    let mut worst = 0.0f64;
    for &node in &trusted {
        let rhs = (-2.0 * w[node]).exp() * rhs_field[node];
        worst = worst.max((lhs[node] - rhs).abs());
    }
    Ok(worst / (1.0 + scale))
}

/// Result of rebuilding the metric from the density.
#[derive(Debug)]
pub struct ConformalFromDensity {
    /// Chart carrying `g~ = e^{-2f/(n-1)} g` with the density consumed
    /// into the metric (`f = 0`).
    pub chart: ChartMetric,
    /// Max normalized residual of
    /// `Sc_{g~} = e^{2f/(n-1)} (Sc_g + 2 lap f - (n-2)/(n-1) |grad f|^2)`
    /// over trusted nodes.
    pub residual: f64,
}

/// Build `g~ = e^{-2f/(n-1)} g` and check its scalar curvature against the
/// weighted identity. For `n = 2` the `(n-2)/(n-1)` coefficient degenerates
/// to zero but the identity still holds and is checked as stated.
pub fn conformal_metric_from_density(chart: &ChartMetric) -> Result<ConformalFromDensity> {
    let n = chart.dim() as f64;
    if chart.dim() < 2 {
        return Err(Error::domain("conformal metric from density needs n >= 2"));
    }
    let w: Vec<f64> = chart.f_values().iter().map(|f| -f / (n - 1.0)).collect();
    // metric part of the conformal change; the tilde chart is unweighted
    let mut tilde = conformal_change(chart, &w)?;
    for f in tilde.f.iter_mut() {
        *f = 0.0;
    }

    let base = curvature_fields(chart)?;
    let tilde_fields = curvature_fields(&tilde)?;
    let trusted = chart.trusted_nodes();
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    for &node in &trusted {
        let f = chart.f_values()[node];
        let rhs = (2.0 * f / (n - 1.0)).exp()
            * (base.scalar[node] + 2.0 * base.lap_f[node]
                - (n - 2.0) / (n - 1.0) * base.grad_f_norm2[node]);
        scale = scale.max(rhs.abs());
        worst = worst.max((tilde_fields.scalar[node] - rhs).abs());
    }
    Ok(ConformalFromDensity { chart: tilde, residual: worst / (1.0 + scale) })
}

/// Total weighted volume `int e^{-f} dVol_g` of a fully periodic chart.
pub fn weighted_volume(chart: &ChartMetric) -> Result<f64> {
    if chart.periodic().iter().any(|&p| !p) {
        return Err(Error::precondition("weighted volume needs a closed (fully periodic) chart"));
    }
    let cell: f64 = chart.spacing().iter().product();
    let mut total = 0.0;
    for node in 0..chart.node_count() {
        let g = sym_to_mat(&chart.metric_values()[node]);
        let (_, det) = crate::numeric::linalg::invert3(&g, chart.dim())?;
        total += (-chart.f_values()[node]).exp() * det.sqrt() * cell;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::generators::{band_limited_field, flat_torus_chart};
    use core::f64::consts::PI;

    #[test]
    fn zero_factor_is_identity() {
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[16, 16], |c| c[0].sin()).unwrap();
        let w = alloc::vec![0.0; chart.node_count()];
        let same = conformal_change(&chart, &w).unwrap();
        assert_eq!(same.metric_values(), chart.metric_values());
        assert_eq!(same.f_values(), chart.f_values());
        assert_eq!(cgy_invariance_residual(&chart, &w).unwrap(), 0.0);
    }

    #[test]
    fn constant_factor_preserves_weighted_volume() {
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[16, 16], |_| 0.0).unwrap();
        let before = weighted_volume(&chart).unwrap();
        let w = alloc::vec![0.3; chart.node_count()];
        let changed = conformal_change(&chart, &w).unwrap();
        let after = weighted_volume(&changed).unwrap();
        assert!((before - after).abs() < 1e-9 * before);
    }

    #[test]
    fn round_trip_restores_chart() {
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[12, 12], |c| c[1].cos()).unwrap();
        let w: alloc::vec::Vec<f64> =
            (0..chart.node_count()).map(|n| 0.2 * chart.coords(n)[0].sin()).collect();
        let there = conformal_change(&chart, &w).unwrap();
        let back_w: alloc::vec::Vec<f64> = w.iter().map(|v| -v).collect();
        let back = conformal_change(&there, &back_w).unwrap();
        for node in 0..chart.node_count() {
            let a = chart.metric_values()[node];
            let b = back.metric_values()[node];
            for k in 0..6 {
                assert!((a[k] - b[k]).abs() < 1e-12);
            }
            assert!((chart.f_values()[node] - back.f_values()[node]).abs() < 1e-12);
        }
    }

    #[test]
    fn cgy_residual_shrinks_at_second_order() {
        let run = |m: usize| -> f64 {
            let f_gen = band_limited_field(&[2.0 * PI, 2.0 * PI], 1, 0.25, 3);
            let w_gen = band_limited_field(&[2.0 * PI, 2.0 * PI], 1, 0.2, 8);
            let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[m, m], f_gen).unwrap();
            let w: alloc::vec::Vec<f64> = (0..chart.node_count())
                .map(|n| {
                    let c = chart.coords(n);
                    w_gen(&c)
                })
                .collect();
            cgy_invariance_residual(&chart, &w).unwrap()
        };
        let coarse = run(64);
        let fine = run(128);
        assert!(fine < 1e-3, "residual {fine}");
        let ratio = coarse / fine;
        assert!((3.2..5.0).contains(&ratio), "O(h^2) ratio {ratio}");
    }

    #[test]
    fn conformal_metric_identity_on_torus() {
        let f_gen = band_limited_field(&[2.0 * PI, 2.0 * PI, 2.0 * PI], 1, 0.15, 5);
        let chart =
            flat_torus_chart(&[2.0 * PI, 2.0 * PI, 2.0 * PI], &[24, 24, 24], f_gen).unwrap();
        let out = conformal_metric_from_density(&chart).unwrap();
        assert!(out.residual < 5e-3, "residual {}", out.residual);
        assert!(out.chart.f_values().iter().all(|&f| f == 0.0));
    }

    #[test]
    fn constant_density_scales_curvature() {
        // f = const c: Sc_tilde = e^{2c/(n-1)} Sc, the constant-factor
        // conformal scaling law
        let chart = crate::chart::generators::sphere_patch_chart(
            1.0,
            (0.8, PI - 0.8),
            &[24, 48],
            |_| 0.4,
        )
        .unwrap();
        let out = conformal_metric_from_density(&chart).unwrap();
        let tilde_fields = curvature_fields(&out.chart).unwrap();
        let expected = (2.0 * 0.4f64 / 1.0).exp() * 2.0; // n = 2: e^{2c} Sc
        let mid = chart.trusted_nodes()[chart.trusted_nodes().len() / 2];
        assert!(
            (tilde_fields.scalar[mid] - expected).abs() < 0.02,
            "{} vs {expected}",
            tilde_fields.scalar[mid]
        );
    }

    #[test]
    fn zero_density_is_noop() {
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[12, 12], |_| 0.0).unwrap();
        let out = conformal_metric_from_density(&chart).unwrap();
        assert_eq!(out.residual, 0.0);
        assert_eq!(out.chart.metric_values(), chart.metric_values());
    }
}
