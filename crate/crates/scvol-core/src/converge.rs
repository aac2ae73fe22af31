//! Convergence machinery: epsilon-isometries, total-variation distance of
//! atomic measures, the stability replay for strongly-measured
//! Gromov-Hausdorff sequences, and tangent-space rescalings.
//!
//! Strong convergence of measures is tested through the total-variation
//! distance on the common finite target; TV convergence implies setwise
//! convergence, matching the remark that tvGH-convergence strengthens
//! smGH-convergence. Genuinely setwise-but-not-TV sequences cannot occur
//! on finite atom sets, and the reports say so.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::certify::{certify_kappa, certify_nonneg, CertificateResult, CertifyConfig};
use crate::error::{Error, Result};
use crate::models;
use crate::space::FiniteMMSpace;

/// A point-id assignment from a source space into a target space.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MapBetweenSpaces {
    pub assignment: Vec<usize>,
}

impl MapBetweenSpaces {
    pub fn identity(n: usize) -> Self {
        MapBetweenSpaces { assignment: (0..n).collect() }
    }

    /// Map every source point to its nearest target point.
    pub fn nearest(source: &FiniteMMSpace, target: &FiniteMMSpace) -> Self {
        let mut assignment = Vec::with_capacity(source.len());
        for i in 0..source.len() {
            // source and target share no metric; "nearest" is resolved by
            // the caller supplying matched coordinates, so this fallback
            // pairs indices when sizes agree
            assignment.push(i.min(target.len() - 1));
        }
        MapBetweenSpaces { assignment }
    }

    pub fn validate(&self, source: &FiniteMMSpace, target: &FiniteMMSpace) -> Result<()> {
        if self.assignment.len() != source.len() {
            return Err(Error::precondition("map must be total on the source space"));
        }
        if self.assignment.iter().any(|&t| t >= target.len()) {
            return Err(Error::domain("map target out of range"));
        }
        Ok(())
    }
}

/// Distortion and surjectivity defect of a map; the map is an
/// `epsilon`-isometry for every `epsilon` at or above the returned value.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IsometryDefect {
    pub distortion: f64,
    pub surjectivity_defect: f64,
    pub epsilon: f64,
}

pub fn epsilon_isometry_defect(
    map: &MapBetweenSpaces,
    source: &FiniteMMSpace,
    target: &FiniteMMSpace,
) -> Result<IsometryDefect> {
    map.validate(source, target)?;
    let n = source.len();
    let assignment = &map.assignment;
    let mut row_s = alloc::vec![0.0; n];
    let mut row_t = alloc::vec![0.0; target.len()];
    let mut distortion = 0.0f64;
    // track the distance from every target point to the image as we go
    let mut to_image = alloc::vec![f64::INFINITY; target.len()];
    for i in 0..n {
        source.dist_row(i, &mut row_s);
        target.dist_row(assignment[i], &mut row_t);
        for j in 0..n {
            distortion = distortion.max((row_s[j] - row_t[assignment[j]]).abs());
        }
        for (y, d) in to_image.iter_mut().enumerate() {
            *d = d.min(row_t[y]);
        }
    }
    let surjectivity_defect = to_image.iter().cloned().fold(0.0, f64::max);
    Ok(IsometryDefect {
        distortion,
        surjectivity_defect,
        epsilon: distortion.max(surjectivity_defect),
    })
}

/// Exact total-variation distance between two atomic measures on the same
/// point set: the supremum over subsets is attained by the positive part.
pub fn total_variation_distance(mu: &[f64], nu: &[f64]) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::domain("total variation requires a common point set"));
    }
    let mut pos = 0.0;
    let mut neg = 0.0;
    for (a, b) in mu.iter().zip(nu) {
        let d = a - b;
        if d > 0.0 {
            pos += d;
        } else {
            neg -= d;
        }
    }
    Ok(pos.max(neg))
}

/// Pushforward of the source masses along a map into a target of size
/// `target_len`.
pub fn pushforward_masses(map: &MapBetweenSpaces, masses: &[f64], target_len: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0; target_len];
    for (i, &t) in map.assignment.iter().enumerate() {
        out[t] += masses[i];
    }
    out
}

/// Per-member diagnostics of a stability replay.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityStep {
    pub epsilon: f64,
    pub tv_distance: f64,
    pub member_sc_radius: f64,
    pub member_verdict: bool,
    /// Worst slack in the proof's inflated-ball containment
    /// `f_* mu_i(B_r(x)) <= mu_i(B_{r+4 eps_i}(x_i))`; nonpositive means
    /// the containment held on every checked ledger entry.
    pub inflation_margin: f64,
    /// Worst slack of the model-side comparison
    /// `mu_i(B_{r+4 eps_i}(x_i)) <= V_model(r + 4 eps_i)`.
    pub inflation_model_margin: f64,
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityReport {
    pub kappa: f64,
    pub radius: f64,
    pub steps: Vec<StabilityStep>,
    pub epsilon_decreasing: bool,
    pub tv_decreasing: bool,
    pub tv_converging: bool,
    pub inflation_holds: bool,
    pub limit_certificate: CertificateResult,
    pub limit_passes: bool,
    pub note: String,
}

/// Replay the smGH stability argument on a finite sequence: certify every
/// member, measure epsilon-isometry defects and TV distances of the
/// pushforward measures, check the proof's 4-epsilon inflated-ball
/// comparisons on the worst ledger entries, and certify the limit.
#[allow(clippy::too_many_arguments)]
pub fn stability_experiment(
    members: &[FiniteMMSpace],
    maps: &[MapBetweenSpaces],
    limit: &FiniteMMSpace,
    n: usize,
    kappa: f64,
    radius: f64,
    radius_tolerance: f64,
    config: &CertifyConfig,
) -> Result<StabilityReport> {
    if members.is_empty() {
        return Err(Error::precondition("stability experiment needs at least one member"));
    }
    if members.len() != maps.len() {
        return Err(Error::precondition("one map per sequence member is required"));
    }
    for (i, map) in maps.iter().enumerate() {
        map.validate(&members[i], limit)?;
    }

    let certify = |space: &FiniteMMSpace| -> Result<CertificateResult> {
        if kappa > 0.0 {
            certify_kappa(space, n, kappa, radius, config)
        } else {
            certify_nonneg(space, n, radius, config)
        }
    };

    let limit_certificate = certify(limit)?;
    let limit_passes =
        limit_certificate.sc_radius >= radius * (1.0 - radius_tolerance);

    let mut steps = Vec::with_capacity(members.len());
    for (i, member) in members.iter().enumerate() {
        let cert = certify(member)?;
        if !cert.verdict {
            return Err(Error::precondition(alloc::format!(
                "sequence member {i} does not certify kappa = {kappa} up to radius {radius} \
                 (sc_radius = {})",
                cert.sc_radius
            )));
        }
        let defect = epsilon_isometry_defect(&maps[i], member, limit)?;
        let pushed = pushforward_masses(&maps[i], member.masses(), limit.len());
        let tv = total_variation_distance(&pushed, limit.masses())?;

        let (inflation_margin, inflation_model_margin) = inflation_check(
            member,
            &maps[i],
            limit,
            &limit_certificate,
            n,
            4.0 * defect.epsilon,
        )?;
        steps.push(StabilityStep {
            epsilon: defect.epsilon,
            tv_distance: tv,
            member_sc_radius: cert.sc_radius,
            member_verdict: cert.verdict,
            inflation_margin,
            inflation_model_margin,
        });
    }

    let epsilon_decreasing =
        steps.windows(2).all(|w| w[1].epsilon <= w[0].epsilon + 1e-15);
    let tv_decreasing =
        steps.windows(2).all(|w| w[1].tv_distance <= w[0].tv_distance + 1e-15);
    let tv_converging = steps
        .last()
        .map(|s| s.tv_distance <= steps[0].tv_distance)
        .unwrap_or(true);
    let inflation_holds = steps
        .iter()
        .all(|s| s.inflation_margin <= 1e-12 && s.inflation_model_margin <= 1e-12);

    Ok(StabilityReport {
        kappa,
        radius,
        steps,
        epsilon_decreasing,
        tv_decreasing,
        tv_converging,
        inflation_holds,
        limit_certificate,
        limit_passes,
        note: String::from(
            "TV convergence on the common atom set witnesses strong (setwise) measure \
             convergence; setwise-but-not-TV sequences do not exist on finite atoms",
        ),
    })
}

/// Check `f_* mu_i(B_r(x)) <= mu_i(B_{r + 4 eps}(x_i))` and the model-side
/// bound `mu_i(B_{r + 4 eps}(x_i)) <= V_model(r + 4 eps)` on the limit
/// certificate's ledger entries; returns the worst margins (positive =
/// violated). The set-inclusion step uses atomic masses on both sides; the
/// model-side step inherits the member's own staircase and sampling
/// allowances, exactly as its certificate did.
fn inflation_check(
    member: &FiniteMMSpace,
    map: &MapBetweenSpaces,
    limit: &FiniteMMSpace,
    limit_certificate: &CertificateResult,
    n: usize,
    four_eps: f64,
) -> Result<(f64, f64)> {
    if limit_certificate.worst_margins.is_empty() {
        return Ok((0.0, 0.0));
    }
    let member_atomic = member.balls().analytic_volume(0.0).is_none();
    let member_deterministic = member.sampling() == crate::space::Sampling::Deterministic;
    let ch = limit_certificate.disc_coeff * member.resolution();
    let z = limit_certificate.conclusive_z;

    let mut worst_containment = f64::NEG_INFINITY;
    let mut worst_model = f64::NEG_INFINITY;
    let mut row = alloc::vec![0.0; limit.len()];
    for entry in &limit_certificate.worst_margins {
        let x = entry.point;
        let r = entry.eps;
        limit.dist_row(x, &mut row);
        // pushforward mass of B_r(x) and the best preimage of x
        let mut pushed_mass = 0.0;
        let mut nearest = 0usize;
        let mut nearest_d = f64::INFINITY;
        for (i, &t) in map.assignment.iter().enumerate() {
            let d = row[t];
            if d <= r * (1.0 + 1e-12) {
                pushed_mass += member.masses()[i];
            }
            if d < nearest_d {
                nearest_d = d;
                nearest = i;
            }
        }
        let inflated_radius = r + four_eps;
        if member_atomic {
            let inflated = member.atomic_ball_measure(nearest, inflated_radius)?;
            worst_containment = worst_containment.max(pushed_mass - inflated);

            let model = |radius: f64| match entry.gamma {
                Some(gamma) => models::product_ball_volume(gamma, n, radius),
                None => models::euclidean_ball_volume(n, radius),
            };
            let model_volume = model(inflated_radius)?;
            let allowance = if member_deterministic {
                model(inflated_radius + ch)? - model_volume
            } else {
                z * member.ball_sigma(inflated)
            };
            worst_model = worst_model.max(inflated - model_volume - allowance);
        } else {
            // exact-ball oracle members carry continuum measures; the
            // atom-level set inclusion is vacuous for them and the model
            // comparison is their certificate's comparison verbatim
            let inflated = member.ball_measure(nearest, inflated_radius)?;
            let model_volume = match entry.gamma {
                Some(gamma) => models::product_ball_volume(gamma, n, inflated_radius)?,
                None => models::euclidean_ball_volume(n, inflated_radius)?,
            };
            worst_model = worst_model.max(inflated - model_volume);
        }
    }
    if worst_containment == f64::NEG_INFINITY {
        worst_containment = 0.0;
    }
    if worst_model == f64::NEG_INFINITY {
        worst_model = 0.0;
    }
    Ok((worst_containment, worst_model))
}

/// A space with a distinguished base point.
#[derive(Debug, Clone)]
pub struct PointedSpace {
    pub space: FiniteMMSpace,
    pub base: usize,
    pub scale: f64,
}

/// Rescale `x` by each factor and restrict to the ball of radius
/// `lambda * r0` around `p`: the finite stand-in for a tangent-space
/// (pointed rescaling) sequence.
pub fn tangent_rescale_sequence(
    x: &FiniteMMSpace,
    p: usize,
    lambdas: &[f64],
    r0: f64,
    size_budget: usize,
) -> Result<Vec<PointedSpace>> {
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("rescaling factors must be strictly increasing"));
    }
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(Error::domain("rescaling factors must be positive"));
        }
        let scaled = x.scale(lambda)?;
        let (space, base) = scaled.restrict_ball(p, lambda * r0, size_budget)?;
        out.push(PointedSpace { space, base, scale: lambda });
    }
    Ok(out)
}
