//! Finite metric measure spaces: the desk-scale stand-in for `(X, d, mu)`.
//!
//! A space is a point set with a metric backing (dense matrix or closed
//! form), a positive atomic mass vector, a declared dimension hint, and a
//! recomputed resolution scale. Ball measures are right-continuous
//! staircases in the radius; "exact-area oracle" spaces instead answer ball
//! queries from the continuum closed form of a homogeneous model, which is
//! what the Bishop-Gromov and lower-bound estimation corpus runs on.

pub mod generators;
pub mod metric;
pub mod ndim;

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
pub use metric::{BallBacking, MetricBacking};

/// Closed-ball inclusion tolerance: `d <= r (1 + BALL_TOL)` stabilises
/// staircase jumps when radii are evaluated exactly at stored distances.
pub const BALL_TOL: f64 = 1e-12;

/// Provenance of the atom masses, which decides how certification treats
/// statistical error: deterministic discretisations carry only staircase
/// error, Monte Carlo samples carry binomial sampling error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sampling {
    Deterministic,
    MonteCarlo,
}

/// A finite metric measure space.
#[derive(Debug, Clone)]
pub struct FiniteMMSpace {
    dim_hint: usize,
    mass: Vec<f64>,
    metric: MetricBacking,
    balls: BallBacking,
    resolution: f64,
    sampling: Sampling,
}

impl FiniteMMSpace {
    /// Full constructor; validates masses and (for dense backings) metric
    /// axioms, and recomputes the resolution from nearest-neighbor
    /// distances rather than trusting the caller.
    pub fn new(
        dim_hint: usize,
        metric: MetricBacking,
        mass: Vec<f64>,
        balls: BallBacking,
        sampling: Sampling,
    ) -> Result<Self> {
        let n = metric.len();
        if n == 0 {
            return Err(Error::domain("space must contain at least one point"));
        }
        if mass.len() != n {
            return Err(Error::domain("mass vector length does not match point count"));
        }
        if mass.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::domain("all atom masses must be positive"));
        }
        if dim_hint == 0 {
            return Err(Error::domain("dimension hint must be positive"));
        }
        if let MetricBacking::Dense { n_points, dist } = &metric {
            validate_dense(*n_points, dist)?;
        }
        let resolution = compute_resolution(&metric);
        Ok(FiniteMMSpace { dim_hint, mass, metric, balls, resolution, sampling })
    }

    /// Build from an explicit row-major distance matrix.
    pub fn from_dense(dim_hint: usize, dist: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        let n = mass.len();
        if dist.len() != n * n {
            return Err(Error::domain("distance matrix must be N x N"));
        }
        Self::new(
            dim_hint,
            MetricBacking::Dense { n_points: n, dist },
            mass,
            BallBacking::Atomic,
            Sampling::Deterministic,
        )
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn dim_hint(&self) -> usize {
        self.dim_hint
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn metric(&self) -> &MetricBacking {
        &self.metric
    }

    pub fn balls(&self) -> &BallBacking {
        &self.balls
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric.dist(i, j)
    }

    pub fn dist_row(&self, i: usize, out: &mut [f64]) {
        self.metric.dist_row(i, out)
    }

    fn check_id(&self, x: usize) -> Result<()> {
        if x >= self.len() {
            return Err(Error::domain(alloc::format!(
                "point id {x} out of range (space has {} points)",
                self.len()
            )));
        }
        Ok(())
    }

    /// Measure of the closed `r`-ball around point `x`.
    pub fn ball_measure(&self, x: usize, r: f64) -> Result<f64> {
        self.check_id(x)?;
        if r < 0.0 {
            return Err(Error::domain("ball radius must be nonnegative"));
        }
        if let Some(v) = self.balls.analytic_volume(r) {
            return v;
        }
        self.atomic_ball_measure(x, r)
    }

    /// Sum of atom masses in the closed `r`-ball, regardless of any
    /// analytic ball backing; the pushforward comparisons of the stability
    /// replay need the set-inclusion (atomic) semantics.
    pub fn atomic_ball_measure(&self, x: usize, r: f64) -> Result<f64> {
        self.check_id(x)?;
        if r < 0.0 {
            return Err(Error::domain("ball radius must be nonnegative"));
        }
        let mut row = alloc::vec![0.0; self.len()];
        self.metric.dist_row(x, &mut row);
        let cutoff = r * (1.0 + BALL_TOL);
        let mut total = 0.0;
        for (j, &d) in row.iter().enumerate() {
            if d <= cutoff {
                total += self.mass[j];
            }
        }
        Ok(total)
    }

    /// Ball measures at several radii from one center; `radii` must be
    /// ascending. One distance row is shared across all radii.
    pub fn ball_profile_at(&self, x: usize, radii: &[f64]) -> Result<Vec<f64>> {
        self.check_id(x)?;
        check_radii(radii)?;
        if self.balls.analytic_volume(0.0).is_some() {
            return radii
                .iter()
                .map(|&r| self.balls.analytic_volume(r).unwrap())
                .collect();
        }
        let mut row = alloc::vec![0.0; self.len()];
        self.metric.dist_row(x, &mut row);
        let mut bins = alloc::vec![0.0; radii.len() + 1];
        for (j, &d) in row.iter().enumerate() {
            let k = radii.partition_point(|&r| r * (1.0 + BALL_TOL) < d);
            bins[k] += self.mass[j];
        }
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(radii.len());
        for k in 0..radii.len() {
            acc += bins[k];
            out.push(acc);
        }
        Ok(out)
    }

    /// Ball profiles for every point: row `i` of the result holds
    /// `mu(B_r(x_i))` over the radius grid.
    pub fn ball_profiles(&self, radii: &[f64]) -> Result<BallProfileTable> {
        check_radii(radii)?;
        let n = self.len();
        let mut masses = Vec::with_capacity(n * radii.len());
        for x in 0..n {
            masses.extend_from_slice(&self.ball_profile_at(x, radii)?);
        }
        Ok(BallProfileTable { n_points: n, radii: radii.to_vec(), masses })
    }

    /// Binomial standard error of a measured ball mass, for Monte Carlo
    /// spaces; deterministic spaces report zero.
    pub fn ball_sigma(&self, mu_hat: f64) -> f64 {
        if self.sampling != Sampling::MonteCarlo {
            return 0.0;
        }
        let total = self.total_mass();
        if total <= 0.0 {
            return 0.0;
        }
        let mean_mass = total / self.len() as f64;
        let p = (mu_hat / total).clamp(0.0, 1.0);
        (mu_hat.max(0.0) * mean_mass * (1.0 - p)).sqrt()
    }

    /// The scaled space `lambda X = (X, lambda d, lambda^n mu)`; ball
    /// measures satisfy `mu'(B_{lambda r}) = lambda^n mu(B_r)` by
    /// construction.
    pub fn scale(&self, lambda: f64) -> Result<FiniteMMSpace> {
        if !(lambda > 0.0) {
            return Err(Error::domain("scale factor must be positive"));
        }
        let factor = lambda.powi(self.dim_hint as i32);
        let mass = self.mass.iter().map(|m| m * factor).collect();
        Ok(FiniteMMSpace {
            dim_hint: self.dim_hint,
            mass,
            metric: self.metric.clone().scaled(lambda),
            balls: self.balls.clone().scaled(lambda),
            resolution: self.resolution * lambda,
            sampling: self.sampling,
        })
    }

    /// Pythagorean product with the tensor-product measure.
    pub fn product(&self, other: &FiniteMMSpace, size_budget: usize) -> Result<FiniteMMSpace> {
        let n = self.len().checked_mul(other.len()).ok_or_else(|| {
            Error::resource("product size overflows")
        })?;
        if n > size_budget {
            return Err(Error::resource(alloc::format!(
                "product has {n} points, exceeding the budget of {size_budget}"
            )));
        }
        let mut mass = Vec::with_capacity(n);
        for ma in &self.mass {
            for mb in &other.mass {
                mass.push(ma * mb);
            }
        }
        let metric = MetricBacking::Product {
            a: alloc::boxed::Box::new(self.metric.clone()),
            b: alloc::boxed::Box::new(other.metric.clone()),
            nb: other.len(),
        };
        let sampling = if self.sampling == Sampling::MonteCarlo
            || other.sampling == Sampling::MonteCarlo
        {
            Sampling::MonteCarlo
        } else {
            Sampling::Deterministic
        };
        FiniteMMSpace::new(self.dim_hint + other.dim_hint, metric, mass, BallBacking::Atomic, sampling)
    }

    /// Restriction to the closed ball around `center`, with the inherited
    /// metric and measure. Returns the restricted space and the center's
    /// new index. The submatrix is materialised, so a budget caps the size.
    pub fn restrict_ball(
        &self,
        center: usize,
        radius: f64,
        size_budget: usize,
    ) -> Result<(FiniteMMSpace, usize)> {
        self.check_id(center)?;
        let mut row = alloc::vec![0.0; self.len()];
        self.metric.dist_row(center, &mut row);
        let cutoff = radius * (1.0 + BALL_TOL);
        let keep: Vec<usize> = (0..self.len()).filter(|&j| row[j] <= cutoff).collect();
        let m = keep.len();
        if m > size_budget {
            return Err(Error::resource(alloc::format!(
                "restriction keeps {m} points, exceeding the budget of {size_budget}"
            )));
        }
        let mut dist = alloc::vec![0.0; m * m];
        for (a, &i) in keep.iter().enumerate() {
            self.metric.dist_row(i, &mut row);
            for (b, &j) in keep.iter().enumerate() {
                dist[a * m + b] = row[j];
            }
        }
        // symmetrise to guard against embedded-backing rounding asymmetry
        for a in 0..m {
            for b in 0..a {
                let v = 0.5 * (dist[a * m + b] + dist[b * m + a]);
                dist[a * m + b] = v;
                dist[b * m + a] = v;
            }
        }
        let mass = keep.iter().map(|&j| self.mass[j]).collect();
        let new_center = keep.iter().position(|&j| j == center).unwrap();
        let space = FiniteMMSpace::new(
            self.dim_hint,
            MetricBacking::Dense { n_points: m, dist },
            mass,
            BallBacking::Atomic,
            self.sampling,
        )?;
        Ok((space, new_center))
    }
}

/// Ball masses of every point over a shared radius grid.
#[derive(Debug, Clone)]
pub struct BallProfileTable {
    pub n_points: usize,
    pub radii: Vec<f64>,
    masses: Vec<f64>,
}

impl BallProfileTable {
    pub fn mass(&self, point: usize, radius_idx: usize) -> f64 {
        self.masses[point * self.radii.len() + radius_idx]
    }

    pub fn row(&self, point: usize) -> &[f64] {
        &self.masses[point * self.radii.len()..(point + 1) * self.radii.len()]
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::domain("radius grid is empty"));
    }
    if radii[0] < 0.0 || radii.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("radius grid must be ascending and nonnegative"));
    }
    Ok(())
}

/// Outcome of an isometry check between two spaces.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IsometryCheck {
    pub is_isometry: bool,
    pub bijective: bool,
    /// Worst distance distortion over all pairs.
    pub distance_defect: f64,
    /// Worst relative pushforward mass mismatch.
    pub mass_defect: f64,
}

/// Check whether `map` (point id function on `x`) is a measure-preserving
/// isometry onto `y`: bijective, distance-preserving to `1e-9` (absolute,
/// on the scale of the larger diameter), pushforward masses matching to
/// `1e-12` relative.
pub fn check_isometry(map: &[usize], x: &FiniteMMSpace, y: &FiniteMMSpace) -> Result<IsometryCheck> {
    if map.len() != x.len() {
        return Err(Error::precondition("map must be total on the source space"));
    }
    if map.iter().any(|&t| t >= y.len()) {
        return Err(Error::domain("map targets out of range"));
    }
    let mut hit = alloc::vec![false; y.len()];
    let mut bijective = x.len() == y.len();
    for &t in map {
        if hit[t] {
            bijective = false;
        }
        hit[t] = true;
    }

    let n = x.len();
    let mut row_x = alloc::vec![0.0; n];
    let mut row_y = alloc::vec![0.0; y.len()];
    let mut distance_defect = 0.0f64;
    for i in 0..n {
        x.dist_row(i, &mut row_x);
        y.dist_row(map[i], &mut row_y);
        for j in 0..n {
            distance_defect = distance_defect.max((row_x[j] - row_y[map[j]]).abs());
        }
    }

    let mut pushed = alloc::vec![0.0; y.len()];
    for (i, &t) in map.iter().enumerate() {
        pushed[t] += x.mass[i];
    }
    let mut mass_defect = 0.0f64;
    for (j, &m) in y.mass.iter().enumerate() {
        mass_defect = mass_defect.max((pushed[j] - m).abs() / m.max(1e-300));
    }

    let dist_tol = 1e-9;
    let is_isometry = bijective && distance_defect <= dist_tol && mass_defect <= 1e-12;
    Ok(IsometryCheck { is_isometry, bijective, distance_defect, mass_defect })
}

fn compute_resolution(metric: &MetricBacking) -> f64 {
    let n = metric.len();
    if n == 1 {
        return 0.0;
    }
    let mut row = alloc::vec![0.0; n];
    let mut nearest = Vec::with_capacity(n);
    for i in 0..n {
        metric.dist_row(i, &mut row);
        let mut best = f64::INFINITY;
        for (j, &d) in row.iter().enumerate() {
            if j != i && d > 0.0 {
                best = best.min(d);
            }
        }
        if best.is_finite() {
            nearest.push(best);
        }
    }
    if nearest.is_empty() {
        return 0.0;
    }
    nearest.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nearest[nearest.len() / 2]
}

fn validate_dense(n: usize, dist: &[f64]) -> Result<()> {
    let mut max_d = 0.0f64;
    for i in 0..n {
        if dist[i * n + i] != 0.0 {
            return Err(Error::domain(alloc::format!("nonzero diagonal at point {i}")));
        }
        for j in 0..i {
            let d = dist[i * n + j];
            if !(d >= 0.0) {
                return Err(Error::domain(alloc::format!("negative or NaN distance at ({i}, {j})")));
            }
            if d != dist[j * n + i] {
                return Err(Error::domain(alloc::format!("asymmetric distance at ({i}, {j})")));
            }
            max_d = max_d.max(d);
        }
    }
    let tol = 1e-9 * max_d.max(1e-300);
    // triangle inequality: exhaustive at small sizes, seeded spot checks above
    if n <= 220 {
        for i in 0..n {
            for j in 0..i {
                let dij = dist[i * n + j];
                for k in 0..n {
                    if dij > dist[i * n + k] + dist[k * n + j] + tol {
                        return Err(Error::domain(alloc::format!(
                            "triangle inequality fails on ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
    } else {
        let mut state = 0x51d5_55aa_1234_5678u64;
        let mut next = |cap: usize| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize % cap
        };
        for _ in 0..2_000_000usize.min(20 * n * n) {
            let (i, j, k) = (next(n), next(n), next(n));
            if dist[i * n + j] > dist[i * n + k] + dist[k * n + j] + tol {
                return Err(Error::domain(alloc::format!(
                    "triangle inequality fails on ({i}, {j}, {k})"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_space() -> FiniteMMSpace {
        // equilateral triangle, side 1
        let dist = alloc::vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        FiniteMMSpace::from_dense(2, dist, alloc::vec![0.5, 0.25, 0.25]).unwrap()
    }

    #[test]
    fn ball_measure_edges() {
        let x = tiny_space();
        // closed ball contains its center
        assert_eq!(x.ball_measure(0, 0.0).unwrap(), 0.5);
        // beyond max distance: total mass
        assert_eq!(x.ball_measure(0, 5.0).unwrap(), 1.0);
        // staircase inclusive at the jump radius
        assert_eq!(x.ball_measure(1, 1.0).unwrap(), 1.0);
        assert!(x.ball_measure(7, 1.0).is_err());
        assert!(x.ball_measure(0, -1.0).is_err());
    }

    #[test]
    fn profile_matches_pointwise_measures() {
        let x = tiny_space();
        let radii = [0.0, 0.5, 1.0, 2.0];
        let prof = x.ball_profile_at(0, &radii).unwrap();
        for (k, &r) in radii.iter().enumerate() {
            assert_eq!(prof[k], x.ball_measure(0, r).unwrap());
        }
    }

    #[test]
    fn triangle_violation_rejected() {
        let dist = alloc::vec![0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0];
        let err = FiniteMMSpace::from_dense(2, dist, alloc::vec![1.0, 1.0, 1.0]);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn nonpositive_mass_rejected() {
        let dist = alloc::vec![0.0, 1.0, 1.0, 0.0];
        assert!(FiniteMMSpace::from_dense(1, dist, alloc::vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn scaling_pushforward_identity() {
        let x = tiny_space();
        let lambda = 2.0;
        let scaled = x.scale(lambda).unwrap();
        assert_eq!(scaled.resolution(), lambda * x.resolution());
        for i in 0..x.len() {
            for &r in &[0.0, 0.6, 1.0, 1.7] {
                let lhs = scaled.ball_measure(i, lambda * r).unwrap();
                let rhs = lambda.powi(2) * x.ball_measure(i, r).unwrap();
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
            }
        }
        // identity scaling returns an identical space
        let same = x.scale(1.0).unwrap();
        assert_eq!(same.masses(), x.masses());
        assert_eq!(same.dist(0, 1), x.dist(0, 1));
    }

    #[test]
    fn product_with_point_is_isometric_copy() {
        let x = tiny_space();
        let point = FiniteMMSpace::from_dense(1, alloc::vec![0.0], alloc::vec![1.0]).unwrap();
        let prod = x.product(&point, 1000).unwrap();
        assert_eq!(prod.len(), x.len());
        assert_eq!(prod.dim_hint(), 3);
        let map: Vec<usize> = (0..x.len()).collect();
        let check = check_isometry(&map, &x, &prod).unwrap();
        assert!(check.is_isometry, "{check:?}");
        // total mass multiplies
        assert!((prod.total_mass() - x.total_mass()).abs() < 1e-15);
    }

    #[test]
    fn product_budget_enforced() {
        let x = tiny_space();
        assert!(matches!(x.product(&x, 4), Err(Error::Resource(_))));
    }

    #[test]
    fn isometry_checks() {
        let x = tiny_space();
        let id: Vec<usize> = (0..3).collect();
        let check = check_isometry(&id, &x, &x).unwrap();
        assert!(check.is_isometry && check.distance_defect == 0.0);

        // scaled copy is not an isometry; defect = (lambda - 1) max dist
        let y = x.scale(1.5).unwrap();
        let check = check_isometry(&id, &x, &y).unwrap();
        assert!(!check.is_isometry);
        assert!((check.distance_defect - 0.5).abs() < 1e-12);

        // any permutation of an all-equal space is an isometry
        let dist = alloc::vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        let z = FiniteMMSpace::from_dense(2, dist, alloc::vec![0.5, 0.5, 0.5]).unwrap();
        for perm in [[0usize, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2]] {
            assert!(check_isometry(&perm, &z, &z).unwrap().is_isometry);
        }
    }

    #[test]
    fn restriction_keeps_center() {
        let x = tiny_space();
        let (sub, c) = x.restrict_ball(1, 1.0, 100).unwrap();
        assert_eq!(sub.len(), 3); // side-1 triangle: everything within 1
        assert_eq!(c, 1);
        let (sub, c) = x.restrict_ball(1, 0.5, 100).unwrap();
        assert_eq!(sub.len(), 1);
        assert_eq!(c, 0);
    }
}
