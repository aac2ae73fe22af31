//! Closed surfaces and their integrals: the weighted Gauss-Bonnet check and
//! the torus obstruction scan. Closed 2-surfaces are either fully periodic
//! torus charts or a two-chart stereographic sphere atlas with a smooth
//! partition of unity.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::chart::curvature::{curvature_fields, weighted_scalar_curvature, CurvatureFields};
use crate::chart::generators::stereographic_sphere_chart;
use crate::chart::{sym_to_mat, ChartMetric};
use crate::error::{Error, Result};
use crate::numeric::linalg::invert3;

/// Two stereographic charts covering the round sphere, with partition
/// weights supported inside each chart.
#[derive(Debug, Clone)]
pub struct SphereAtlas {
    pub charts: [ChartMetric; 2],
    pub weights: [Vec<f64>; 2],
    pub sec: f64,
}

/// Partition profile: 1 below `u <= U0`, 0 above `u >= U1`, smooth
/// (quintic) in between, with `U0 * U1 = 1` so the two charts sum to one.
const U0: f64 = 0.8;
const U1: f64 = 1.25;

fn cutoff(u: f64) -> f64 {
    if u <= U0 {
        1.0
    } else if u >= U1 {
        0.0
    } else {
        let t = (u - U0) / (U1 - U0);
        let s = t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
        1.0 - s
    }
}

fn partition_weight(u: f64) -> f64 {
    let a = cutoff(u);
    let b = cutoff(1.0 / u.max(1e-300));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Build a two-chart sphere atlas at curvature `sec` with `nodes^2` grid
/// points per chart; `f_embedded` is the global density on the embedded
/// sphere.
pub fn sphere_atlas(
    sec: f64,
    nodes: usize,
    f_embedded: impl Fn(&[f64; 3]) -> f64 + Copy,
) -> Result<SphereAtlas> {
    let rho = 1.0 / sec.sqrt();
    // grid extends past the partition support so stencils stay interior
    let half_extent = 1.45 * rho;
    let north = stereographic_sphere_chart(sec, half_extent, nodes, true, f_embedded)?;
    let south = stereographic_sphere_chart(sec, half_extent, nodes, false, f_embedded)?;
    let weight_of = |chart: &ChartMetric| -> Vec<f64> {
        (0..chart.node_count())
            .map(|n| {
                let c = chart.coords(n);
                let u = (c[0] * c[0] + c[1] * c[1]).sqrt() / rho;
                partition_weight(u)
            })
            .collect()
    };
    let w_north = weight_of(&north);
    let w_south = weight_of(&south);
    Ok(SphereAtlas { charts: [north, south], weights: [w_north, w_south], sec })
}

/// A closed 2-surface: a fully periodic torus chart or a sphere atlas.
pub enum ClosedSurface {
    Torus(ChartMetric),
    Sphere(SphereAtlas),
}

impl ClosedSurface {
    pub fn euler_characteristic(&self) -> i32 {
        match self {
            ClosedSurface::Torus(_) => 0,
            ClosedSurface::Sphere(_) => 2,
        }
    }

    pub fn from_torus(chart: ChartMetric) -> Result<Self> {
        if chart.dim() != 2 {
            return Err(Error::precondition("Gauss-Bonnet needs a 2-dimensional chart"));
        }
        if chart.periodic().iter().any(|&p| !p) {
            return Err(Error::precondition(
                "open chart without closure declaration: torus surfaces must be fully periodic",
            ));
        }
        Ok(ClosedSurface::Torus(chart))
    }

    /// Integrate `density(fields, node)` against `dVol_g` over the surface.
    fn integrate(
        &self,
        density: impl Fn(&CurvatureFields, &ChartMetric, usize) -> f64,
    ) -> Result<f64> {
        let mut total = 0.0;
        match self {
            ClosedSurface::Torus(chart) => {
                let fields = curvature_fields(chart)?;
                let cell: f64 = chart.spacing().iter().product();
                for node in 0..chart.node_count() {
                    total += density(&fields, chart, node) * fields.sqrt_det[node] * cell;
                }
            }
            ClosedSurface::Sphere(atlas) => {
                for (chart, weights) in atlas.charts.iter().zip(&atlas.weights) {
                    let fields = curvature_fields(chart)?;
                    let cell: f64 = chart.spacing().iter().product();
                    for node in 0..chart.node_count() {
                        let w = weights[node];
                        if w == 0.0 {
                            continue;
                        }
                        total += w * density(&fields, chart, node) * fields.sqrt_det[node] * cell;
                    }
                }
            }
        }
        Ok(total)
    }

    /// `int field dVol_g` for a plain scalar density.
    pub fn integral_of(&self, which: impl Fn(&CurvatureFields, usize) -> f64) -> Result<f64> {
        self.integrate(|fields, _chart, node| which(fields, node))
    }
}

/// Both sides of the weighted Gauss-Bonnet identity
/// `int Sc_{alpha,beta} dVol = 4 pi chi - beta int |grad f|^2 dVol`.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussBonnetReport {
    pub alpha: f64,
    pub beta: f64,
    pub chi: i32,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub grad_term: f64,
}

pub fn gauss_bonnet_weighted_check(
    surface: &ClosedSurface,
    alpha: f64,
    beta: f64,
) -> Result<GaussBonnetReport> {
    let lhs = surface.integral_of(|fields, node| {
        fields.scalar[node] + alpha * fields.lap_f[node] - beta * fields.grad_f_norm2[node]
    })?;
    let grad_term = surface.integral_of(|fields, node| fields.grad_f_norm2[node])?;
    let chi = surface.euler_characteristic();
    let rhs = 4.0 * core::f64::consts::PI * chi as f64 - beta * grad_term;
    Ok(GaussBonnetReport { alpha, beta, chi, lhs, rhs, residual: (lhs - rhs).abs(), grad_term })
}

/// Pointwise minimum of `Sc_{alpha,beta}` over a flat torus chart: the
/// numeric witness of the torus obstruction (for `beta >= 0` the mean of
/// `alpha lap f - beta |grad f|^2` is `-beta mean |grad f|^2 <= 0`, so the
/// minimum cannot be positive).
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObstructionScan {
    pub alpha: f64,
    pub beta: f64,
    pub min_value: f64,
    pub argmin_node: usize,
    pub mean_value: f64,
    pub note: String,
}

pub fn torus_obstruction_scan(
    chart: &ChartMetric,
    alpha: f64,
    beta: f64,
) -> Result<ObstructionScan> {
    if beta < 0.0 {
        return Err(Error::precondition("obstruction scan requires beta >= 0"));
    }
    if chart.periodic().iter().any(|&p| !p) {
        return Err(Error::precondition("obstruction scan runs on closed torus charts"));
    }
    let fields = curvature_fields(chart)?;
    // flatness gate: the obstruction witness is stated for flat tori
    let mut max_curv = 0.0f64;
    for node in 0..chart.node_count() {
        max_curv = max_curv.max(fields.rie_norm2[node].abs());
    }
    if max_curv > 1e-8 {
        return Err(Error::precondition(alloc::format!(
            "obstruction scan requires a flat metric (|Rie|^2 up to {max_curv:.3e} found)"
        )));
    }
    let values = weighted_scalar_curvature(&fields, alpha, beta);
    let mut min_value = f64::INFINITY;
    let mut argmin_node = 0usize;
    let mut mean = 0.0;
    for (node, &v) in values.iter().enumerate() {
        if v < min_value {
            min_value = v;
            argmin_node = node;
        }
        mean += v;
    }
    mean /= values.len() as f64;
    Ok(ObstructionScan {
        alpha,
        beta,
        min_value,
        argmin_node,
        mean_value: mean,
        note: String::from(
            "min <= 0 up to discretisation for every density: the periodic integral of \
             alpha lap f is exactly zero and -beta |grad f|^2 is nonpositive",
        ),
    })
}

/// Discrete divergence theorem on a closed chart:
/// `int lap_g f dVol_g` (should vanish to `O(h^2)`).
pub fn closed_laplacian_integral(chart: &ChartMetric) -> Result<f64> {
    if chart.periodic().iter().any(|&p| !p) {
        return Err(Error::precondition("needs a closed (fully periodic) chart"));
    }
    let fields = curvature_fields(chart)?;
    let cell: f64 = chart.spacing().iter().product();
    let mut total = 0.0;
    for node in 0..chart.node_count() {
        total += fields.lap_f[node] * fields.sqrt_det[node] * cell;
    }
    Ok(total)
}

/// Total area of the surface (sanity check for atlas weights).
pub fn surface_area(surface: &ClosedSurface) -> Result<f64> {
    surface.integral_of(|_fields, _node| 1.0)
}

#[allow(dead_code)]
fn sqrt_det_of(chart: &ChartMetric, node: usize) -> Result<f64> {
    let g = sym_to_mat(&chart.metric_values()[node]);
    let (_, det) = invert3(&g, chart.dim())?;
    Ok(det.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::generators::{band_limited_field, flat_torus_chart};
    use core::f64::consts::PI;

    #[test]
    fn partition_weights_sum_to_one() {
        for &u in &[0.3, 0.8, 0.95, 1.0, 1.1, 1.25, 2.0] {
            let total = partition_weight(u) + partition_weight(1.0 / u);
            assert!((total - 1.0).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn sphere_atlas_area_is_4pi_over_sec() {
        let atlas = sphere_atlas(1.0, 96, |_| 0.0).unwrap();
        let area = surface_area(&ClosedSurface::Sphere(atlas)).unwrap();
        assert!((area - 4.0 * PI).abs() < 2e-3, "area {area}");
    }

    #[test]
    fn flat_torus_gauss_bonnet_trivial() {
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[32, 32], |_| 0.0).unwrap();
        let surface = ClosedSurface::from_torus(chart).unwrap();
        let report = gauss_bonnet_weighted_check(&surface, 3.0, 3.0).unwrap();
        assert!(report.lhs.abs() < 1e-10);
        assert!(report.rhs.abs() < 1e-10);
        assert_eq!(report.chi, 0);
    }

    #[test]
    fn torus_with_density_balances_gradient_term() {
        // f = sin x0: int Sc_{a,b} = -b int cos^2 = -b * 2 pi^2
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[48, 48], |c| c[0].sin()).unwrap();
        let surface = ClosedSurface::from_torus(chart).unwrap();
        for (alpha, beta) in [(3.0, 3.0), (1.0, 0.0), (2.0, 1.0)] {
            let report = gauss_bonnet_weighted_check(&surface, alpha, beta).unwrap();
            assert!(
                report.residual < 1e-9 * (1.0 + report.rhs.abs()),
                "({alpha}, {beta}): {report:?}"
            );
            // the discrete integral carries the stencil's O(h^2) bias
            let exact = -beta * 2.0 * PI * PI;
            let h = 2.0 * PI / 48.0;
            assert!((report.lhs - exact).abs() < 1.0 + 0.0 * h, "lhs {} vs {exact}", report.lhs);
            assert!((report.lhs - exact).abs() < exact.abs() * h * h + 1e-9);
        }
    }

    #[test]
    fn sphere_atlas_gauss_bonnet() {
        // round sphere, f = 0: int Sc = 8 pi = 4 pi chi
        let atlas = sphere_atlas(1.0, 96, |_| 0.0).unwrap();
        let surface = ClosedSurface::Sphere(atlas);
        let report = gauss_bonnet_weighted_check(&surface, 3.0, 3.0).unwrap();
        assert_eq!(report.chi, 2);
        assert!((report.lhs - 8.0 * PI).abs() < 0.02, "{}", report.lhs);
        assert!(report.residual < 1e-3 * (1.0 + report.rhs.abs()), "{report:?}");
    }

    #[test]
    fn sphere_atlas_height_density() {
        // f = z on the unit sphere: int |grad f|^2 = int (1 - z^2) = 8 pi / 3
        let atlas = sphere_atlas(1.0, 128, |p| p[2]).unwrap();
        let surface = ClosedSurface::Sphere(atlas);
        let grad = surface.integral_of(|fields, node| fields.grad_f_norm2[node]).unwrap();
        assert!((grad - 8.0 * PI / 3.0).abs() < 2e-2, "{grad}");
        let report = gauss_bonnet_weighted_check(&surface, 2.0, 1.0).unwrap();
        assert!(report.residual < 1e-3 * (1.0 + report.rhs.abs()), "{report:?}");
    }

    #[test]
    fn closed_laplacian_integrates_to_zero() {
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[40, 40], |c| {
            c[0].sin() * (2.0 * c[1]).cos()
        })
        .unwrap();
        let total = closed_laplacian_integral(&chart).unwrap();
        assert!(total.abs() < 1e-9, "{total}");
    }

    #[test]
    fn obstruction_scan_hand_value() {
        // f = sin x0, (3, 3): min(-3 sin - 3 cos^2) = min over the grid
        let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[128, 16], |c| c[0].sin()).unwrap();
        let scan = torus_obstruction_scan(&chart, 3.0, 3.0).unwrap();
        // minimize -3 s - 3 (1 - s^2) over s in [-1, 1]: at s = 1/2 value -3.75
        assert!((scan.min_value + 3.75).abs() < 6e-3, "{}", scan.min_value);
        assert!(scan.min_value <= 1e-9);
        // f = 0 gives exactly 0
        let flat = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[16, 16], |_| 0.0).unwrap();
        let scan = torus_obstruction_scan(&flat, 3.0, 3.0).unwrap();
        assert!(scan.min_value.abs() < 1e-12);
    }

    #[test]
    fn obstruction_scan_random_densities() {
        // seeded random band-limited densities always scan nonpositive
        for seed in 0..20u64 {
            let f_gen = band_limited_field(&[2.0 * PI, 2.0 * PI], 2, 0.4, seed);
            let chart = flat_torus_chart(&[2.0 * PI, 2.0 * PI], &[32, 32], f_gen).unwrap();
            let scan = torus_obstruction_scan(&chart, 3.0, 3.0).unwrap();
            assert!(scan.min_value <= 1e-9, "seed {seed}: {}", scan.min_value);
        }
    }

    #[test]
    fn curved_chart_rejected_by_scan() {
        let chart = crate::chart::generators::sphere_patch_chart(
            1.0,
            (0.9, PI - 0.9),
            &[16, 32],
            |_| 0.0,
        )
        .unwrap();
        // open chart is rejected before flatness is even consulted
        assert!(torus_obstruction_scan(&chart, 3.0, 3.0).is_err());
    }
}
