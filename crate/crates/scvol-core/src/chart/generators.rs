//! Analytic chart builders: flat tori, round-sphere patches, stereographic
//! sphere charts, the Gaussian-density plane, and band-limited random
//! density fields.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{ChartMetric, Provenance, SymStorage, SYM_IDENTITY};
use crate::error::Result;

/// Flat torus chart with lengths `L_k` and a density sampled from chart
/// coordinates.
pub fn flat_torus_chart(
    lengths: &[f64],
    shape: &[usize],
    f: impl Fn(&[f64; 3]) -> f64,
) -> Result<ChartMetric> {
    let dim = lengths.len();
    let spacing: Vec<f64> = lengths.iter().zip(shape).map(|(l, &m)| l / m as f64).collect();
    let periodic = alloc::vec![true; dim];
    let origin = alloc::vec![0.0; dim];
    build_diagonal(dim, shape, &spacing, &periodic, &origin, |_| SYM_IDENTITY, f, "flat_torus")
}

/// Open patch of the round sphere of sectional curvature `sec` in
/// latitude/longitude coordinates `(theta, phi)`; metric
/// `diag(rho^2, rho^2 sin^2 theta)`. The chart must stay away from the
/// poles. `phi` spans the full circle and is periodic.
pub fn sphere_patch_chart(
    sec: f64,
    theta_range: (f64, f64),
    shape: &[usize],
    f: impl Fn(&[f64; 3]) -> f64,
) -> Result<ChartMetric> {
    let rho = 1.0 / sec.sqrt();
    let (t0, t1) = theta_range;
    let m_theta = shape[0];
    let m_phi = shape[1];
    let spacing = alloc::vec![
        (t1 - t0) / (m_theta as f64 - 1.0),
        2.0 * core::f64::consts::PI / m_phi as f64,
    ];
    let origin = alloc::vec![t0, 0.0];
    build_diagonal(
        2,
        shape,
        &spacing,
        &[false, true],
        &origin,
        |c| {
            let theta = c[0];
            [rho * rho, 0.0, 0.0, rho * rho * theta.sin() * theta.sin(), 0.0, 1.0]
        },
        f,
        "sphere_patch",
    )
}

/// Flat plane `[-extent, extent]^dim` with the radial Gaussian density
/// `f = coef |x|^2` (the self-shrinker background uses `coef = 1/4`).
pub fn gaussian_plane_chart(
    dim: usize,
    extent: f64,
    nodes: usize,
    coef: f64,
) -> Result<ChartMetric> {
    let shape = alloc::vec![nodes; dim];
    let spacing = alloc::vec![2.0 * extent / (nodes as f64 - 1.0); dim];
    let periodic = alloc::vec![false; dim];
    let origin = alloc::vec![-extent; dim];
    build_diagonal(
        dim,
        &shape,
        &spacing,
        &periodic,
        &origin,
        |_| SYM_IDENTITY,
        |c| coef * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]),
        "gaussian_plane",
    )
}

/// Flat plane patch with an arbitrary density.
pub fn flat_plane_chart(
    dim: usize,
    extent: f64,
    nodes: usize,
    f: impl Fn(&[f64; 3]) -> f64,
) -> Result<ChartMetric> {
    let shape = alloc::vec![nodes; dim];
    let spacing = alloc::vec![2.0 * extent / (nodes as f64 - 1.0); dim];
    let periodic = alloc::vec![false; dim];
    let origin = alloc::vec![-extent; dim];
    build_diagonal(dim, &shape, &spacing, &periodic, &origin, |_| SYM_IDENTITY, f, "flat_plane")
}

/// One stereographic chart of the round sphere of sectional curvature
/// `sec`: conformally flat metric `4 rho^4/(rho^2 + |x|^2)^2 delta`. The
/// density is sampled from the embedded sphere point so a pair of charts
/// sees one global function.
pub fn stereographic_sphere_chart(
    sec: f64,
    half_extent: f64,
    nodes: usize,
    from_north: bool,
    f_embedded: impl Fn(&[f64; 3]) -> f64,
) -> Result<ChartMetric> {
    let rho = 1.0 / sec.sqrt();
    let shape = alloc::vec![nodes, nodes];
    let spacing = alloc::vec![2.0 * half_extent / (nodes as f64 - 1.0); 2];
    let periodic = alloc::vec![false, false];
    let origin = alloc::vec![-half_extent, -half_extent];
    build_diagonal(
        2,
        &shape,
        &spacing,
        &periodic,
        &origin,
        |c| {
            let r2 = c[0] * c[0] + c[1] * c[1];
            let conf = 4.0 * rho.powi(4) / ((rho * rho + r2) * (rho * rho + r2));
            [conf, 0.0, 0.0, conf, 0.0, 1.0]
        },
        |c| f_embedded(&stereographic_point(rho, c[0], c[1], from_north)),
        "stereographic_sphere",
    )
}

/// Embedded sphere point of a stereographic chart coordinate.
pub fn stereographic_point(rho: f64, y0: f64, y1: f64, from_north: bool) -> [f64; 3] {
    let r2 = y0 * y0 + y1 * y1;
    let denom = r2 + rho * rho;
    let z = rho * (r2 - rho * rho) / denom;
    let x = 2.0 * rho * rho * y0 / denom;
    let y = 2.0 * rho * rho * y1 / denom;
    if from_north {
        [x, y, z]
    } else {
        [x, y, -z]
    }
}

/// Band-limited random field on a torus chart: a seeded trigonometric
/// polynomial with modes up to `max_mode` and amplitude `amp`.
pub fn band_limited_field(
    lengths: &[f64],
    max_mode: usize,
    amp: f64,
    seed: u64,
) -> impl Fn(&[f64; 3]) -> f64 {
    let dim = lengths.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms: Vec<([i64; 3], f64, f64)> = Vec::new();
    let modes = max_mode as i64;
    let mut coefs = Vec::new();
    for k0 in -modes..=modes {
        for k1 in -modes..=modes {
            for k2 in if dim == 3 { -modes..=modes } else { 0..=0 } {
                if k0 == 0 && k1 == 0 && k2 == 0 {
                    continue;
                }
                coefs.push([k0, k1, k2]);
            }
        }
    }
    let count = coefs.len();
    for k in coefs {
        let a: f64 = rng.random::<f64>() - 0.5;
        let phase: f64 = rng.random::<f64>() * 2.0 * core::f64::consts::PI;
        terms.push((k, a, phase));
    }
    let freqs: Vec<f64> =
        lengths.iter().map(|l| 2.0 * core::f64::consts::PI / l).collect();
    let norm = amp / (count as f64 / 2.0).sqrt();
    move |c: &[f64; 3]| {
        let mut acc = 0.0;
        for (k, a, phase) in &terms {
            let mut arg = *phase;
            for d in 0..dim {
                arg += k[d] as f64 * freqs[d] * c[d];
            }
            acc += a * arg.cos();
        }
        norm * acc
    }
}

#[allow(clippy::too_many_arguments)]
fn build_diagonal(
    dim: usize,
    shape: &[usize],
    spacing: &[f64],
    periodic: &[bool],
    origin: &[f64],
    g_of: impl Fn(&[f64; 3]) -> SymStorage,
    f_of: impl Fn(&[f64; 3]) -> f64,
    name: &str,
) -> Result<ChartMetric> {
    let count: usize = shape.iter().product();
    let mut g = Vec::with_capacity(count);
    let mut f = Vec::with_capacity(count);
    // temporary chart to reuse the indexing; fields filled after
    let probe = ChartMetric::new(
        dim,
        shape,
        spacing,
        periodic,
        origin,
        alloc::vec![SYM_IDENTITY; count],
        alloc::vec![0.0; count],
        Provenance::Raw,
    )?;
    for node in 0..count {
        let c = probe.coords(node);
        g.push(g_of(&c));
        f.push(f_of(&c));
    }
    ChartMetric::new(
        dim,
        shape,
        spacing,
        periodic,
        origin,
        g,
        f,
        Provenance::Analytic(String::from(name)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_chart_shape() {
        let c = flat_torus_chart(&[2.0, 4.0], &[8, 16], |p| p[0]).unwrap();
        assert_eq!(c.node_count(), 128);
        assert_eq!(c.spacing(), &[0.25, 0.25]);
        assert!(c.periodic().iter().all(|&p| p));
    }

    #[test]
    fn stereographic_charts_agree_on_overlap() {
        let f = |p: &[f64; 3]| p[2]; // height function on the sphere
        let a = stereographic_sphere_chart(1.0, 1.45, 64, true, f).unwrap();
        // the A-coordinate (0.9, 0.3) corresponds to B-coordinate y/|y|^2
        let (y0, y1) = (0.9, 0.3);
        let r2 = y0 * y0 + y1 * y1;
        let pa = stereographic_point(1.0, y0, y1, true);
        let pb = stereographic_point(1.0, y0 / r2, y1 / r2, false);
        for k in 0..3 {
            assert!((pa[k] - pb[k]).abs() < 1e-12);
        }
        // f sampled through the chart matches the embedded value
        let fa = a.interp_scalar(a.f_values(), &[y0, y1]).unwrap();
        assert!((fa - pa[2]).abs() < 2e-3, "{fa} vs {}", pa[2]);
    }

    #[test]
    fn band_limited_field_is_seed_deterministic() {
        let f1 = band_limited_field(&[6.28, 6.28], 2, 0.3, 9);
        let f2 = band_limited_field(&[6.28, 6.28], 2, 0.3, 9);
        let p = [1.0, 2.0, 0.0];
        assert_eq!(f1(&p), f2(&p));
        let f3 = band_limited_field(&[6.28, 6.28], 2, 0.3, 10);
        assert_ne!(f1(&p), f3(&p));
    }
}
