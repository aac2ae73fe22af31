//! f-minimal hypersurfaces: weighted mean curvature, minimality residuals,
//! shrinker radii, and the stability operator
//! `L_f = lap_f + |A|^2 + Ric_f(nu, nu)` with its index.
//!
//! Hypersurfaces are closed polylines in 2-charts or structured revolution
//! meshes in 3-charts. The scalar mean curvature convention is
//! `H = div(nu)` with `nu` the outward unit normal, so the unit circle in
//! the flat plane has `H = +1`; the weighted scalar is
//! `H_f = H - <grad f, nu>`, the outward component of the weighted mean
//! curvature vector, which vanishes on self-shrinkers (`H_f(R) =
//! (n-1)/R - R/2` for spheres under the Gaussian density `|x|^2/4`) and
//! transforms to the unweighted mean curvature of the conformal metric
//! `e^{-2f/(n-1)} g` with the positive factor `e^{f/(n-1)}`.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::chart::curvature::{curvature_with_geodesic_data, CurvatureFields, GeodesicData};
use crate::chart::{ChartMetric, Provenance};
use crate::error::{Error, Result};
use crate::numeric::linalg::jacobi_eigen;
use crate::numeric::roots::bisect;
use crate::numeric::sparse::Csr;
use crate::spectral::{weighted_laplacian_matrix, OperatorMatrix};

/// A closed discrete hypersurface with its extrinsic data.
#[derive(Debug, Clone)]
pub struct DiscreteHypersurface {
    /// Induced weighted chart (1d ring for curves, 2d torus grid for
    /// revolution meshes); node ordering matches the per-node fields.
    induced: ChartMetric,
    /// Node positions in ambient chart coordinates.
    positions: Vec<[f64; 3]>,
    /// Outward unit normal (upper index).
    normal: Vec<[f64; 3]>,
    mean_curvature: Vec<f64>,
    weighted_mean_curvature: Vec<f64>,
    second_form_norm2: Vec<f64>,
    ric_f_normal: Vec<f64>,
    /// Squared max spacing of the ambient chart, the resolution scale of
    /// the interpolated potential terms.
    ambient_h2: f64,
}

impl DiscreteHypersurface {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn normals(&self) -> &[[f64; 3]] {
        &self.normal
    }

    pub fn mean_curvature(&self) -> &[f64] {
        &self.mean_curvature
    }

    pub fn weighted_mean_curvature(&self) -> &[f64] {
        &self.weighted_mean_curvature
    }

    pub fn second_form_norm2(&self) -> &[f64] {
        &self.second_form_norm2
    }

    pub fn induced_chart(&self) -> &ChartMetric {
        &self.induced
    }

    /// Sup-norm of `H_f`; at or below tolerance the discrete hypersurface
    /// is f-minimal.
    pub fn f_minimal_residual(&self) -> f64 {
        self.weighted_mean_curvature.iter().fold(0.0f64, |a, h| a.max(h.abs()))
    }

    /// The stability form: `-L_f = -lap_f - (|A|^2 + Ric_f(nu, nu))`,
    /// self-adjoint in the `e^{-f} dVol` inner product of the induced
    /// chart.
    pub fn stability_operator(&self) -> Result<OperatorMatrix> {
        let base = weighted_laplacian_matrix(&self.induced)?;
        let n = base.n();
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(base.form.vals.len() + n);
        for r in 0..n {
            for idx in base.form.row_ptr[r]..base.form.row_ptr[r + 1] {
                triplets.push((r, base.form.cols[idx], base.form.vals[idx]));
            }
            let potential = self.second_form_norm2[r] + self.ric_f_normal[r];
            triplets.push((r, r, -potential * base.weights[r]));
        }
        Ok(OperatorMatrix {
            form: Csr::from_triplets(n, &mut triplets),
            weights: base.weights,
            label: String::from("-L_f"),
        })
    }

    /// Full spectrum of `-L_f` with the index and near-kernel counts.
    pub fn lf_spectrum(&self, config: &SpectrumConfig) -> Result<SpectrumReport> {
        let op = self.stability_operator()?;
        let dense = op.symmetrized().to_dense();
        let (eigenvalues, _) = jacobi_eigen(&dense, op.n(), false)?;
        let scale = eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        let band = config.near_kernel_band.unwrap_or_else(|| {
            // translation/rotation near-kernels sit within the
            // discretisation error of the mesh and the ambient chart
            let mesh_h = self.induced.max_spacing() * self.scale_of_parameter();
            config.band_coefficient * (mesh_h * mesh_h + self.ambient_h2)
        });
        let threshold = (1e-8 * scale).max(band);
        let index = eigenvalues.iter().filter(|&&v| v < -threshold).count();
        let near_kernel = eigenvalues.iter().filter(|&&v| v.abs() <= band).count();
        Ok(SpectrumReport { eigenvalues, index, near_kernel, band, threshold })
    }

    fn scale_of_parameter(&self) -> f64 {
        // parameter spacing times typical speed gives the geometric mesh
        // width; the induced metric already carries the speed
        let g = self.induced.metric_values();
        let mut worst = 0.0f64;
        for s in g.iter().take(8) {
            worst = worst.max(s[0].sqrt());
        }
        worst.max(1.0)
    }
}

/// Spectrum post-processing knobs.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumConfig {
    /// Half-width of the near-kernel band; `None` derives it from the
    /// mesh and ambient resolutions.
    pub near_kernel_band: Option<f64>,
    pub band_coefficient: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { near_kernel_band: None, band_coefficient: 1.0 }
    }
}

/// Eigenvalues of `-L_f` (ascending) with the stability index: the count
/// of eigenvalues below both `-1e-8 * scale` and the near-kernel band.
/// Index 0 means `L_f`-stable; near-kernel modes (translations/rotations
/// at discretisation scale) are reported separately, not counted.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub index: usize,
    pub near_kernel: usize,
    pub band: f64,
    pub threshold: f64,
}

// internal: ambient data interpolated at one surface point
struct AmbientProbe {
    g: [[f64; 3]; 3],
    gamma: [f64; 27],
    grad_f_lower: [f64; 3],
    ric_f: [f64; 6],
    f: f64,
}

struct AmbientTables<'a> {
    chart: &'a ChartMetric,
    geo: &'a GeodesicData,
    metric_flat: Vec<f64>,
    grad_flat: Vec<f64>,
    ric_f_flat: Vec<f64>,
}

impl<'a> AmbientTables<'a> {
    fn new(chart: &'a ChartMetric, fields: &CurvatureFields, geo: &'a GeodesicData) -> Self {
        let metric_flat = chart.metric_values().iter().flatten().copied().collect();
        let grad_flat = fields.grad_f_lower.iter().flatten().copied().collect();
        let ric_f_flat = fields.ric_f.iter().flatten().copied().collect();
        AmbientTables { chart, geo, metric_flat, grad_flat, ric_f_flat }
    }

    fn probe(&self, point: &[f64]) -> Result<AmbientProbe> {
        let mut g6 = [0.0f64; 6];
        self.chart.interp_components(&self.metric_flat, 6, point, &mut g6)?;
        let mut gamma = [0.0f64; 27];
        self.chart.interp_components(&self.geo.christoffel, 27, point, &mut gamma)?;
        let mut grad = [0.0f64; 3];
        self.chart.interp_components(&self.grad_flat, 3, point, &mut grad)?;
        let mut ric_f = [0.0f64; 6];
        self.chart.interp_components(&self.ric_f_flat, 6, point, &mut ric_f)?;
        let f = self.chart.interp_scalar(self.chart.f_values(), point)?;
        Ok(AmbientProbe { g: crate::chart::sym_to_mat(&g6), gamma, grad_f_lower: grad, ric_f, f })
    }
}

/// Closed polyline (circle) of `nodes` points in a 2-chart, parametrized
/// counterclockwise so the normal points outward.
pub fn circle_in_chart(
    ambient: &ChartMetric,
    center: &[f64; 2],
    radius: f64,
    nodes: usize,
) -> Result<DiscreteHypersurface> {
    if ambient.dim() != 2 {
        return Err(Error::domain("circle hypersurfaces need a 2-dimensional ambient chart"));
    }
    if nodes < 8 {
        return Err(Error::domain("need at least 8 polyline nodes"));
    }
    let du = 2.0 * core::f64::consts::PI / nodes as f64;
    let positions: Vec<[f64; 3]> = (0..nodes)
        .map(|k| {
            let u = k as f64 * du;
            [center[0] + radius * u.cos(), center[1] + radius * u.sin(), 0.0]
        })
        .collect();
    polyline_surface(ambient, positions, du)
}

/// Closed polyline through explicit chart positions with uniform parameter
/// spacing `du` (counterclockwise orientation assumed).
pub fn polyline_surface(
    ambient: &ChartMetric,
    positions: Vec<[f64; 3]>,
    du: f64,
) -> Result<DiscreteHypersurface> {
    let n = positions.len();
    let (fields, geo) = curvature_with_geodesic_data(ambient)?;
    let tables = AmbientTables::new(ambient, &fields, &geo);

    let mut induced_g = Vec::with_capacity(n);
    let mut induced_f = Vec::with_capacity(n);
    let mut normal = Vec::with_capacity(n);
    let mut mean = Vec::with_capacity(n);
    let mut weighted = Vec::with_capacity(n);
    let mut a_norm2 = Vec::with_capacity(n);
    let mut ric_nn = Vec::with_capacity(n);

    for k in 0..n {
        let prev = &positions[(k + n - 1) % n];
        let here = &positions[k];
        let next = &positions[(k + 1) % n];
        let probe = tables.probe(&here[..2])?;

        // parameter derivatives through periodic seams
        let fwd = wrapped_delta(ambient, next, here);
        let bwd = wrapped_delta(ambient, prev, here);
        let xp = [(fwd[0] - bwd[0]) / (2.0 * du), (fwd[1] - bwd[1]) / (2.0 * du)];
        let xpp = [(fwd[0] + bwd[0]) / (du * du), (fwd[1] + bwd[1]) / (du * du)];
        let g = probe.g;
        let speed2 = g[0][0] * xp[0] * xp[0] + 2.0 * g[0][1] * xp[0] * xp[1] + g[1][1] * xp[1] * xp[1];
        let speed = speed2.sqrt();
        if !(speed > 0.0) {
            return Err(Error::domain(alloc::format!("degenerate tangent at polyline node {k}")));
        }

        // outward normal: rotate the lowered tangent
        let t_low = [
            (g[0][0] * xp[0] + g[0][1] * xp[1]) / speed,
            (g[1][0] * xp[0] + g[1][1] * xp[1]) / speed,
        ];
        let mut nu = [t_low[1], -t_low[0], 0.0];
        let nu_norm2 =
            g[0][0] * nu[0] * nu[0] + 2.0 * g[0][1] * nu[0] * nu[1] + g[1][1] * nu[1] * nu[1];
        let nu_norm = nu_norm2.sqrt();
        if !(nu_norm > 0.0) {
            return Err(Error::domain(alloc::format!("degenerate normal at polyline node {k}")));
        }
        nu[0] /= nu_norm;
        nu[1] /= nu_norm;

        // covariant acceleration and the curve's second fundamental form
        let mut acc = [0.0f64; 2];
        for a in 0..2 {
            let mut s = xpp[a];
            for i in 0..2 {
                for j in 0..2 {
                    s += probe.gamma[(a * 3 + i) * 3 + j] * xp[i] * xp[j];
                }
            }
            acc[a] = s;
        }
        let nu_low = [g[0][0] * nu[0] + g[0][1] * nu[1], g[1][0] * nu[0] + g[1][1] * nu[1]];
        let ii = (acc[0] * nu_low[0] + acc[1] * nu_low[1]) / speed2;
        let h = -ii; // outward unit circle: +1
        let grad_dot_nu = probe.grad_f_lower[0] * nu[0] + probe.grad_f_lower[1] * nu[1];
        let h_f = h - grad_dot_nu;

        let ric_f = crate::chart::sym_to_mat(&probe.ric_f);
        let mut rnn = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                rnn += ric_f[i][j] * nu[i] * nu[j];
            }
        }

        induced_g.push([speed2, 0.0, 0.0, 1.0, 0.0, 1.0]);
        induced_f.push(probe.f);
        normal.push(nu);
        mean.push(h);
        weighted.push(h_f);
        a_norm2.push(h * h);
        ric_nn.push(rnn);
    }

    let induced = ChartMetric::new(
        1,
        &[n],
        &[du],
        &[true],
        &[0.0],
        induced_g,
        induced_f,
        Provenance::Raw,
    )?;
    let h = ambient.max_spacing();
    Ok(DiscreteHypersurface {
        induced,
        positions,
        normal,
        mean_curvature: mean,
        weighted_mean_curvature: weighted,
        second_form_norm2: a_norm2,
        ric_f_normal: ric_nn,
        ambient_h2: h * h,
    })
}

/// Torus of revolution around the third chart axis in a 3-chart:
/// `( (R + r cos v) cos u, (R + r cos v) sin u, r sin v )` around `center`.
pub fn revolution_torus(
    ambient: &ChartMetric,
    center: &[f64; 3],
    major: f64,
    minor: f64,
    nodes_u: usize,
    nodes_v: usize,
) -> Result<DiscreteHypersurface> {
    if ambient.dim() != 3 {
        return Err(Error::domain("revolution surfaces need a 3-dimensional ambient chart"));
    }
    if !(major > minor && minor > 0.0) {
        return Err(Error::domain("revolution torus needs 0 < minor < major"));
    }
    if nodes_u < 8 || nodes_v < 8 {
        return Err(Error::domain("need at least 8 nodes per revolution axis"));
    }
    let (fields, geo) = curvature_with_geodesic_data(ambient)?;
    let tables = AmbientTables::new(ambient, &fields, &geo);
    let du = 2.0 * core::f64::consts::PI / nodes_u as f64;
    let dv = 2.0 * core::f64::consts::PI / nodes_v as f64;

    let position = |iu: usize, iv: usize| -> [f64; 3] {
        let u = iu as f64 * du;
        let v = iv as f64 * dv;
        [
            center[0] + (major + minor * v.cos()) * u.cos(),
            center[1] + (major + minor * v.cos()) * u.sin(),
            center[2] + minor * v.sin(),
        ]
    };

    let count = nodes_u * nodes_v;
    let mut positions = Vec::with_capacity(count);
    let mut induced_g = Vec::with_capacity(count);
    let mut induced_f = Vec::with_capacity(count);
    let mut normal = Vec::with_capacity(count);
    let mut mean = Vec::with_capacity(count);
    let mut weighted = Vec::with_capacity(count);
    let mut a_norm2 = Vec::with_capacity(count);
    let mut ric_nn = Vec::with_capacity(count);

    for iu in 0..nodes_u {
        for iv in 0..nodes_v {
            let here = position(iu, iv);
            let probe = tables.probe(&here)?;
            let g = probe.g;

            // parameter derivatives by central differences on the mesh
            let up = position((iu + 1) % nodes_u, iv);
            let um = position((iu + nodes_u - 1) % nodes_u, iv);
            let vp = position(iu, (iv + 1) % nodes_v);
            let vm = position(iu, (iv + nodes_v - 1) % nodes_v);
            let xu = [(up[0] - um[0]) / (2.0 * du), (up[1] - um[1]) / (2.0 * du), (up[2] - um[2]) / (2.0 * du)];
            let xv = [(vp[0] - vm[0]) / (2.0 * dv), (vp[1] - vm[1]) / (2.0 * dv), (vp[2] - vm[2]) / (2.0 * dv)];
            let xuu = second_diff(&up, &here, &um, du);
            let xvv = second_diff(&vp, &here, &vm, dv);
            let upvp = position((iu + 1) % nodes_u, (iv + 1) % nodes_v);
            let upvm = position((iu + 1) % nodes_u, (iv + nodes_v - 1) % nodes_v);
            let umvp = position((iu + nodes_u - 1) % nodes_u, (iv + 1) % nodes_v);
            let umvm = position((iu + nodes_u - 1) % nodes_u, (iv + nodes_v - 1) % nodes_v);
            let mut xuv = [0.0f64; 3];
            for a in 0..3 {
                xuv[a] = (upvp[a] - upvm[a] - umvp[a] + umvm[a]) / (4.0 * du * dv);
            }

            // induced metric
            let dot = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += g[i][j] * a[i] * b[j];
                    }
                }
                s
            };
            let g_uu = dot(&xu, &xu);
            let g_uv = dot(&xu, &xv);
            let g_vv = dot(&xv, &xv);
            let det_induced = g_uu * g_vv - g_uv * g_uv;
            if !(det_induced > 0.0) {
                return Err(Error::domain(alloc::format!(
                    "degenerate induced metric at mesh node ({iu}, {iv})"
                )));
            }

            // outward normal: the covector xu x xv annihilates tangents
            let omega = [
                xu[1] * xv[2] - xu[2] * xv[1],
                xu[2] * xv[0] - xu[0] * xv[2],
                xu[0] * xv[1] - xu[1] * xv[0],
            ];
            let (g_inv, _) = crate::numeric::linalg::invert3(&g, 3)?;
            let mut nu = [0.0f64; 3];
            for a in 0..3 {
                for b in 0..3 {
                    nu[a] += g_inv[a][b] * omega[b];
                }
            }
            let norm = dot(&nu, &nu).sqrt();
            if !(norm > 0.0) {
                return Err(Error::domain(alloc::format!(
                    "degenerate normal at mesh node ({iu}, {iv})"
                )));
            }
            for a in nu.iter_mut() {
                *a /= norm;
            }

            // second fundamental form: covariant second derivatives
            let cov = |xab: &[f64; 3], xa: &[f64; 3], xb: &[f64; 3]| -> [f64; 3] {
                let mut out = [0.0f64; 3];
                for a in 0..3 {
                    let mut s = xab[a];
                    for i in 0..3 {
                        for j in 0..3 {
                            s += probe.gamma[(a * 3 + i) * 3 + j] * xa[i] * xb[j];
                        }
                    }
                    out[a] = s;
                }
                out
            };
            let nu_low = {
                let mut low = [0.0f64; 3];
                for a in 0..3 {
                    for b in 0..3 {
                        low[a] += g[a][b] * nu[b];
                    }
                }
                low
            };
            let project = |vec: &[f64; 3]| -> f64 {
                vec[0] * nu_low[0] + vec[1] * nu_low[1] + vec[2] * nu_low[2]
            };
            let ii_uu = project(&cov(&xuu, &xu, &xu));
            let ii_uv = project(&cov(&xuv, &xu, &xv));
            let ii_vv = project(&cov(&xvv, &xv, &xv));

            // shape operator S = induced^{-1} II; H = -tr S with outward nu
            let inv = [
                [g_vv / det_induced, -g_uv / det_induced],
                [-g_uv / det_induced, g_uu / det_induced],
            ];
            let s00 = inv[0][0] * ii_uu + inv[0][1] * ii_uv;
            let s01 = inv[0][0] * ii_uv + inv[0][1] * ii_vv;
            let s10 = inv[1][0] * ii_uu + inv[1][1] * ii_uv;
            let s11 = inv[1][0] * ii_uv + inv[1][1] * ii_vv;
            let h = -(s00 + s11);
            let a2 = s00 * s00 + s01 * s10 + s10 * s01 + s11 * s11;

            let grad_dot_nu = probe.grad_f_lower[0] * nu[0]
                + probe.grad_f_lower[1] * nu[1]
                + probe.grad_f_lower[2] * nu[2];
            let ric_f = crate::chart::sym_to_mat(&probe.ric_f);
            let mut rnn = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    rnn += ric_f[i][j] * nu[i] * nu[j];
                }
            }

            positions.push(here);
            induced_g.push([g_uu, g_uv, 0.0, g_vv, 0.0, 1.0]);
            induced_f.push(probe.f);
            normal.push(nu);
            mean.push(h);
            weighted.push(h - grad_dot_nu);
            a_norm2.push(a2);
            ric_nn.push(rnn);
        }
    }

    let induced = ChartMetric::new(
        2,
        &[nodes_u, nodes_v],
        &[du, dv],
        &[true, true],
        &[0.0, 0.0],
        induced_g,
        induced_f,
        Provenance::Raw,
    )?;
    let h = ambient.max_spacing();
    Ok(DiscreteHypersurface {
        induced,
        positions,
        normal,
        mean_curvature: mean,
        weighted_mean_curvature: weighted,
        second_form_norm2: a_norm2,
        ric_f_normal: ric_nn,
        ambient_h2: h * h,
    })
}

fn second_diff(plus: &[f64; 3], here: &[f64; 3], minus: &[f64; 3], h: f64) -> [f64; 3] {
    [
        (plus[0] - 2.0 * here[0] + minus[0]) / (h * h),
        (plus[1] - 2.0 * here[1] + minus[1]) / (h * h),
        (plus[2] - 2.0 * here[2] + minus[2]) / (h * h),
    ]
}

/// Coordinate difference `other - here` taking the short way around
/// periodic ambient axes.
fn wrapped_delta(chart: &ChartMetric, other: &[f64; 3], here: &[f64; 3]) -> [f64; 3] {
    let mut d = [0.0f64; 3];
    for a in 0..chart.dim() {
        let mut delta = other[a] - here[a];
        if chart.periodic()[a] {
            let period = chart.shape()[a] as f64 * chart.spacing()[a];
            delta -= period * (delta / period).round();
        }
        d[a] = delta;
    }
    d
}

/// Radius of the spherical self-shrinker in dimension `n` under the
/// radial Gaussian density `f = |x|^2/4`: the root of the radial
/// reduction `H_f(R) = (n-1)/R - R/2` (analytically `sqrt(2(n-1))`).
/// Charts stop at dimension 3; the discrete machinery cross-checks this
/// reduction on circles and meshes in the test corpus.
pub fn shrinker_radius(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("shrinker radius needs ambient dimension >= 2"));
    }
    let h_f = move |r: f64| (n as f64 - 1.0) / r - r / 2.0;
    bisect(&h_f, 1e-6, 10.0, 1e-9)
}

/// Index (count of genuinely negative eigenvalues) of `-L_f`.
pub fn lf_stability_index(
    surface: &DiscreteHypersurface,
    config: &SpectrumConfig,
) -> Result<usize> {
    Ok(surface.lf_spectrum(config)?.index)
}
