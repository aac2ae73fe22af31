//! JSON schemas for spaces, charts, surfaces and hypersurfaces, and their
//! builders. Every spec is a pure value: building twice yields identical
//! objects, which is what makes re-runs byte-identical.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use scvol_core::chart::closed::{sphere_atlas, ClosedSurface};
use scvol_core::chart::generators::{
    band_limited_field, flat_plane_chart, flat_torus_chart, gaussian_plane_chart,
    sphere_patch_chart,
};
use scvol_core::chart::ChartMetric;
use scvol_core::hypersurface::{circle_in_chart, revolution_torus, DiscreteHypersurface};
use scvol_core::space::generators::SpaceGenerator;
use scvol_core::space::{FiniteMMSpace, Sampling};

/// A finite metric measure space: either a generator recipe or explicit
/// matrix data `{"n": .., "dist": [[..]], "mass": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSpec {
    Generated(SpaceGenerator),
    Explicit {
        n: usize,
        dist: Vec<Vec<f64>>,
        mass: Vec<f64>,
        #[serde(default)]
        monte_carlo: bool,
    },
}

impl SpaceSpec {
    pub fn build(&self) -> Result<FiniteMMSpace> {
        match self {
            SpaceSpec::Generated(generator) => {
                generator.build().map_err(|e| anyhow!("building space: {e}"))
            }
            SpaceSpec::Explicit { n, dist, mass, monte_carlo } => {
                let points = mass.len();
                if dist.len() != points || dist.iter().any(|row| row.len() != points) {
                    bail!("distance matrix must be square and match the mass vector");
                }
                let flat: Vec<f64> = dist.iter().flatten().copied().collect();
                let space = FiniteMMSpace::from_dense(*n, flat, mass.clone())
                    .map_err(|e| anyhow!("building space: {e}"))?;
                if *monte_carlo {
                    FiniteMMSpace::new(
                        *n,
                        space.metric().clone(),
                        mass.clone(),
                        space.balls().clone(),
                        Sampling::MonteCarlo,
                    )
                    .map_err(|e| anyhow!("building space: {e}"))
                } else {
                    Ok(space)
                }
            }
        }
    }
}

/// Density exponent field of a weighted chart.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude * sin(frequency * x_axis)`.
    SinAxis {
        axis: usize,
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
    },
    /// Seeded band-limited trigonometric polynomial (periodic charts).
    BandLimited {
        max_mode: usize,
        amplitude: f64,
        seed: u64,
    },
    /// `coef * |x|^2`; `coef = 0.25` is the self-shrinker background.
    RadialQuadratic {
        coef: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl DensitySpec {
    fn closure(&self, lengths: &[f64]) -> Box<dyn Fn(&[f64; 3]) -> f64> {
        match self {
            DensitySpec::Zero => Box::new(|_| 0.0),
            DensitySpec::Constant { value } => {
                let v = *value;
                Box::new(move |_| v)
            }
            DensitySpec::SinAxis { axis, amplitude, frequency } => {
                let (a, amp, fr) = (*axis, *amplitude, *frequency);
                Box::new(move |c| amp * (fr * c[a]).sin())
            }
            DensitySpec::BandLimited { max_mode, amplitude, seed } => {
                Box::new(band_limited_field(lengths, *max_mode, *amplitude, *seed))
            }
            DensitySpec::RadialQuadratic { coef } => {
                let k = *coef;
                Box::new(move |c| k * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]))
            }
        }
    }
}

/// A chart-based weighted manifold.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "snake_case")]
pub enum ChartSpec {
    FlatTorus {
        lengths: Vec<f64>,
        shape: Vec<usize>,
        #[serde(default)]
        density: DensitySpec,
    },
    SpherePatch {
        sec: f64,
        theta_range: (f64, f64),
        shape: Vec<usize>,
        #[serde(default)]
        density: DensitySpec,
    },
    GaussianPlane {
        dim: usize,
        extent: f64,
        nodes: usize,
        #[serde(default = "quarter")]
        coef: f64,
    },
    FlatPlane {
        dim: usize,
        extent: f64,
        nodes: usize,
        #[serde(default)]
        density: DensitySpec,
    },
    /// Raw per-node fields (row-major; metric entries `(00,01,02,11,12,22)`).
    Raw {
        dim: usize,
        shape: Vec<usize>,
        spacing: Vec<f64>,
        periodic: Vec<bool>,
        origin: Vec<f64>,
        metric: Vec<[f64; 6]>,
        f: Vec<f64>,
    },
}

fn quarter() -> f64 {
    0.25
}

impl ChartSpec {
    pub fn build(&self) -> Result<ChartMetric> {
        let chart = match self {
            ChartSpec::FlatTorus { lengths, shape, density } => {
                let f = density.closure(lengths);
                flat_torus_chart(lengths, shape, move |c| f(c))
            }
            ChartSpec::SpherePatch { sec, theta_range, shape, density } => {
                let f = density.closure(&[2.0 * std::f64::consts::PI; 2]);
                sphere_patch_chart(*sec, *theta_range, shape, move |c| f(c))
            }
            ChartSpec::GaussianPlane { dim, extent, nodes, coef } => {
                gaussian_plane_chart(*dim, *extent, *nodes, *coef)
            }
            ChartSpec::FlatPlane { dim, extent, nodes, density } => {
                let f = density.closure(&vec![2.0 * extent; *dim]);
                flat_plane_chart(*dim, *extent, *nodes, move |c| f(c))
            }
            ChartSpec::Raw { dim, shape, spacing, periodic, origin, metric, f } => {
                ChartMetric::new(
                    *dim,
                    shape,
                    spacing,
                    periodic,
                    origin,
                    metric.clone(),
                    f.clone(),
                    scvol_core::chart::Provenance::Raw,
                )
            }
        };
        chart.map_err(|e| anyhow!("building chart: {e}"))
    }
}

/// Density on the embedded sphere, for atlases.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SphereDensitySpec {
    #[default]
    Zero,
    /// `amplitude * z` (the height function).
    Height { amplitude: f64 },
}

/// A closed 2-surface for the Gauss-Bonnet check.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "surface", rename_all = "snake_case")]
pub enum SurfaceSpec {
    Torus { spec: ChartSpec },
    Sphere {
        sec: f64,
        nodes: usize,
        #[serde(default)]
        density: SphereDensitySpec,
    },
}

impl SurfaceSpec {
    pub fn build(&self) -> Result<ClosedSurface> {
        match self {
            SurfaceSpec::Torus { spec } => {
                let chart = spec.build()?;
                ClosedSurface::from_torus(chart).map_err(|e| anyhow!("building surface: {e}"))
            }
            SurfaceSpec::Sphere { sec, nodes, density } => {
                let density = *density;
                let atlas = match density {
                    SphereDensitySpec::Zero => sphere_atlas(*sec, *nodes, |_| 0.0),
                    SphereDensitySpec::Height { amplitude } => {
                        sphere_atlas(*sec, *nodes, move |p| amplitude * p[2])
                    }
                }
                .map_err(|e| anyhow!("building sphere atlas: {e}"))?;
                Ok(ClosedSurface::Sphere(atlas))
            }
        }
    }
}

/// A discrete hypersurface inside an ambient chart.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HypersurfaceSpec {
    Circle {
        ambient: ChartSpec,
        center: [f64; 2],
        radius: f64,
        nodes: usize,
    },
    RevolutionTorus {
        ambient: ChartSpec,
        center: [f64; 3],
        major: f64,
        minor: f64,
        nodes: (usize, usize),
    },
}

impl HypersurfaceSpec {
    pub fn build(&self) -> Result<DiscreteHypersurface> {
        match self {
            HypersurfaceSpec::Circle { ambient, center, radius, nodes } => {
                let chart = ambient.build()?;
                circle_in_chart(&chart, center, *radius, *nodes)
                    .map_err(|e| anyhow!("building hypersurface: {e}"))
            }
            HypersurfaceSpec::RevolutionTorus { ambient, center, major, minor, nodes } => {
                let chart = ambient.build()?;
                revolution_torus(&chart, center, *major, *minor, nodes.0, nodes.1)
                    .map_err(|e| anyhow!("building hypersurface: {e}"))
            }
        }
    }
}

/// Stability-experiment recipe for the `converge` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub members: Vec<SpaceSpec>,
    pub limit: SpaceSpec,
    /// Only index-preserving maps are expressible in specs; explicit
    /// assignments may be listed per member.
    #[serde(default)]
    pub maps: Option<Vec<Vec<usize>>>,
    pub n: usize,
    pub kappa: f64,
    pub radius: f64,
    #[serde(default = "default_radius_tolerance")]
    pub radius_tolerance: f64,
}

fn default_radius_tolerance() -> f64 {
    0.05
}

/// Read a spec either from an inline JSON string (starting with `{`) or
/// from a file path.
pub fn load_spec<T: for<'de> Deserialize<'de>>(arg: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading spec file {arg}"))?
    };
    serde_json::from_str(&text).with_context(|| "parsing spec JSON".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_spec_round_trips() {
        let text = r#"{"generator":"sphere_mc","n":3,"sec":1.0,"count":64,"seed":7}"#;
        let spec: SpaceSpec = serde_json::from_str(text).unwrap();
        let space = spec.build().unwrap();
        assert_eq!(space.len(), 64);
        let re = serde_json::to_string(&spec).unwrap();
        let spec2: SpaceSpec = serde_json::from_str(&re).unwrap();
        let space2 = spec2.build().unwrap();
        assert_eq!(space.dist(0, 1), space2.dist(0, 1));
    }

    #[test]
    fn explicit_space_round_trips_losslessly() {
        let text = r#"{"n":1,"dist":[[0.0,1.5],[1.5,0.0]],"mass":[0.25,0.75]}"#;
        let spec: SpaceSpec = serde_json::from_str(text).unwrap();
        let space = spec.build().unwrap();
        assert_eq!(space.dist(0, 1), 1.5);
        assert_eq!(space.total_mass(), 1.0);
        let re = serde_json::to_string(&spec).unwrap();
        assert!(re.contains("1.5"));
    }

    #[test]
    fn chart_spec_builds_torus() {
        let text = r#"{"chart":"flat_torus","lengths":[6.283185307179586,6.283185307179586],
                       "shape":[16,16],"density":{"kind":"sin_axis","axis":0,"amplitude":0.5}}"#;
        let spec: ChartSpec = serde_json::from_str(text).unwrap();
        let chart = spec.build().unwrap();
        assert_eq!(chart.node_count(), 256);
        let mid = chart.f_values().iter().cloned().fold(f64::MIN, f64::max);
        assert!((mid - 0.5).abs() < 0.02);
    }

    #[test]
    fn hypersurface_spec_builds() {
        let text = r#"{"kind":"circle","ambient":{"chart":"gaussian_plane","dim":2,"extent":2.5,"nodes":33},
                       "center":[0.0,0.0],"radius":1.4142135623730951,"nodes":128}"#;
        let spec: HypersurfaceSpec = serde_json::from_str(text).unwrap();
        let surface = spec.build().unwrap();
        assert!(surface.f_minimal_residual() < 1e-3);
    }
}
