//! Deterministic-for-seed sample generators: sphere lattices and Monte
//! Carlo samples, flat-torus and Euclidean grids, hyperbolic disk rings,
//! exact-ball oracle variants, and Pythagorean products.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models;
use crate::space::metric::{BallBacking, MetricBacking};
use crate::space::{FiniteMMSpace, Sampling};

/// Default cap on product-space sizes.
pub const DEFAULT_PRODUCT_BUDGET: usize = 120_000;

/// Recipe for a generated space; building twice with the same parameters
/// yields identical spaces.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "generator", rename_all = "snake_case"))]
pub enum SpaceGenerator {
    /// Spiral (Fibonacci) lattice on the round 2-sphere, seed-rotated.
    SphereLattice { sec: f64, count: usize, seed: u64 },
    /// I.i.d. uniform sample of the round `n`-sphere.
    SphereMc { n: usize, sec: f64, count: usize, seed: u64 },
    /// Sphere sample whose ball measures are the exact continuum volumes.
    SphereExact { n: usize, sec: f64, count: usize, seed: u64 },
    /// Rectangular grid on a flat torus with exact cell masses.
    FlatTorusGrid { lengths: Vec<f64>, shape: Vec<usize> },
    /// Flat-torus grid with analytic (Euclidean) ball volumes.
    FlatTorusExact { lengths: Vec<f64>, shape: Vec<usize> },
    /// Euclidean grid patch (open, no wrap), exact cell masses.
    EuclideanGrid { spacing: f64, shape: Vec<usize> },
    /// Concentric rings on the curvature `-k` plane with exact band masses.
    HyperbolicDisk { k: f64, radius: f64, rings: usize },
    /// Pythagorean product of two generated spaces.
    Product { a: Box<SpaceGenerator>, b: Box<SpaceGenerator> },
}

impl SpaceGenerator {
    pub fn build(&self) -> Result<FiniteMMSpace> {
        match self {
            SpaceGenerator::SphereLattice { sec, count, seed } => {
                sphere_lattice(*sec, *count, *seed)
            }
            SpaceGenerator::SphereMc { n, sec, count, seed } => {
                sphere_mc(*n, *sec, *count, *seed, BallBacking::Atomic, Sampling::MonteCarlo)
            }
            SpaceGenerator::SphereExact { n, sec, count, seed } => sphere_mc(
                *n,
                *sec,
                *count,
                *seed,
                BallBacking::SphereExact { n: *n, sec: *sec },
                Sampling::Deterministic,
            ),
            SpaceGenerator::FlatTorusGrid { lengths, shape } => {
                torus_grid(lengths, shape, BallBacking::Atomic)
            }
            SpaceGenerator::FlatTorusExact { lengths, shape } => {
                let min_girth = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
                torus_grid(lengths, shape, BallBacking::FlatTorusExact { n: lengths.len(), min_girth })
            }
            SpaceGenerator::EuclideanGrid { spacing, shape } => euclidean_grid(*spacing, shape),
            SpaceGenerator::HyperbolicDisk { k, radius, rings } => {
                hyperbolic_disk(*k, *radius, *rings)
            }
            SpaceGenerator::Product { a, b } => {
                let xa = a.build()?;
                let xb = b.build()?;
                xa.product(&xb, DEFAULT_PRODUCT_BUDGET)
            }
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on the ChaCha stream keeps samples identical across
    // platforms and rand feature sets.
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn sphere_total(n: usize, radius: f64) -> Result<f64> {
    Ok(models::unit_sphere_area(n + 1)? * radius.powi(n as i32))
}

fn sphere_lattice(sec: f64, count: usize, seed: u64) -> Result<FiniteMMSpace> {
    if count == 0 {
        return Err(Error::domain("sample count must be positive"));
    }
    if sec <= 0.0 {
        return Err(Error::domain("sectional curvature must be positive"));
    }
    let radius = 1.0 / sec.sqrt();
    let golden_angle = PI * (3.0 - 5.0f64.sqrt());
    let rot = random_rotation3(seed);
    let mut coords = Vec::with_capacity(3 * count);
    for k in 0..count {
        let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
        let s = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden_angle * k as f64;
        let p = [s * phi.cos(), s * phi.sin(), z];
        for row in &rot {
            coords.push(row[0] * p[0] + row[1] * p[1] + row[2] * p[2]);
        }
    }
    let total = sphere_total(2, radius)?;
    let mass = alloc::vec![total / count as f64; count];
    FiniteMMSpace::new(
        2,
        MetricBacking::Sphere { dim: 2, radius, coords },
        mass,
        BallBacking::Atomic,
        Sampling::Deterministic,
    )
}

fn sphere_mc(
    n: usize,
    sec: f64,
    count: usize,
    seed: u64,
    balls: BallBacking,
    sampling: Sampling,
) -> Result<FiniteMMSpace> {
    if count == 0 {
        return Err(Error::domain("sample count must be positive"));
    }
    if n < 2 {
        return Err(Error::domain("sphere samples need n >= 2"));
    }
    if sec <= 0.0 {
        return Err(Error::domain("sectional curvature must be positive"));
    }
    let radius = 1.0 / sec.sqrt();
    let ambient = n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(ambient * count);
    for _ in 0..count {
        loop {
            let v: Vec<f64> = (0..ambient).map(|_| standard_normal(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                coords.extend(v.iter().map(|x| x / norm));
                break;
            }
        }
    }
    let total = sphere_total(n, radius)?;
    let mass = alloc::vec![total / count as f64; count];
    FiniteMMSpace::new(
        n,
        MetricBacking::Sphere { dim: n, radius, coords },
        mass,
        balls,
        sampling,
    )
}

fn torus_grid(lengths: &[f64], shape: &[usize], balls: BallBacking) -> Result<FiniteMMSpace> {
    let dim = lengths.len();
    if dim == 0 || dim != shape.len() {
        return Err(Error::domain("torus grid needs matching lengths and shape"));
    }
    if lengths.iter().any(|&l| l <= 0.0) || shape.iter().any(|&m| m == 0) {
        return Err(Error::domain("torus grid needs positive lengths and counts"));
    }
    let count: usize = shape.iter().product();
    let spacings: Vec<f64> = lengths.iter().zip(shape).map(|(l, &m)| l / m as f64).collect();
    let cell: f64 = spacings.iter().product();
    let mut coords = Vec::with_capacity(dim * count);
    let mut idx = alloc::vec![0usize; dim];
    for _ in 0..count {
        for d in 0..dim {
            coords.push(idx[d] as f64 * spacings[d]);
        }
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < shape[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    FiniteMMSpace::new(
        dim,
        MetricBacking::FlatTorus { lengths: lengths.to_vec(), coords },
        alloc::vec![cell; count],
        balls,
        Sampling::Deterministic,
    )
}

fn euclidean_grid(spacing: f64, shape: &[usize]) -> Result<FiniteMMSpace> {
    let dim = shape.len();
    if dim == 0 || spacing <= 0.0 || shape.iter().any(|&m| m == 0) {
        return Err(Error::domain("euclidean grid needs positive spacing and counts"));
    }
    let count: usize = shape.iter().product();
    let cell = spacing.powi(dim as i32);
    let mut coords = Vec::with_capacity(dim * count);
    let mut idx = alloc::vec![0usize; dim];
    for _ in 0..count {
        for d in 0..dim {
            coords.push(idx[d] as f64 * spacing);
        }
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < shape[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    FiniteMMSpace::new(
        dim,
        MetricBacking::Euclidean { dim, coords },
        alloc::vec![cell; count],
        BallBacking::Atomic,
        Sampling::Deterministic,
    )
}

fn hyperbolic_disk(k: f64, radius: f64, rings: usize) -> Result<FiniteMMSpace> {
    if k <= 0.0 || radius <= 0.0 || rings == 0 {
        return Err(Error::domain("hyperbolic disk needs positive curvature, radius and rings"));
    }
    let sk = k.sqrt();
    let h = radius / rings as f64;
    let mut coords = Vec::new();
    let mut mass = Vec::new();
    for j in 0..rings {
        let e0 = j as f64 * h;
        let e1 = (j + 1) as f64 * h;
        let rc = 0.5 * (e0 + e1);
        let circumference = 2.0 * PI * (sk * rc).sinh() / sk;
        let m = (circumference / h).ceil().max(1.0) as usize;
        let band = 2.0 * PI / k * ((sk * e1).cosh() - (sk * e0).cosh());
        for t in 0..m {
            coords.push(rc);
            coords.push(2.0 * PI * t as f64 / m as f64 + 0.5 * PI * j as f64 / rings as f64);
            mass.push(band / m as f64);
        }
    }
    FiniteMMSpace::new(
        2,
        MetricBacking::Hyperbolic { k, coords },
        mass,
        BallBacking::Atomic,
        Sampling::Deterministic,
    )
}

fn random_rotation3(seed: u64) -> [[f64; 3]; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // rotation from a normalized random quaternion
    let q: Vec<f64> = (0..4).map(|_| standard_normal(&mut rng)).collect();
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (w, x, y, z) = (q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}
