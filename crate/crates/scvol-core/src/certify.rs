//! Certification of `n`-volumic scalar-curvature lower bounds.
//!
//! A bound `kappa > 0` holds when every small ball of the space is strictly
//! smaller than the matching ball of `S^2(gamma) x R^(n-2)` for every
//! `gamma > sqrt(2/kappa)`; the bound `>= 0` compares against Euclidean
//! balls non-strictly. At desk scale the strict comparisons carry a relative
//! slack `delta` (finite samples cannot witness measure-zero margins), a
//! staircase allowance proportional to `h/eps` for atomic discretisations,
//! and a sampling allowance on Monte Carlo spaces: a violation only counts
//! against the certificate when it exceeds the binomial standard error by a
//! multiplicity-aware factor. All allowances are recorded in the ledger, so
//! a passing certificate documents exactly what was tolerated.
//!
//! The staircase allowance for deterministic atomic spaces is a radius
//! inflation: atoms within `B_eps` carry cells inside the continuum ball of
//! radius `eps + c h`, so a conclusive violation must beat the model volume
//! at the inflated radius. Exact-ball oracle spaces get no allowance at all.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::models;
use crate::space::ndim::{ndim_condition_fit, NdimConfig, NdimGate, NdimReport};
use crate::space::{BallProfileTable, FiniteMMSpace, Sampling};

/// Default ratio of the geometric radius grid.
pub const DEFAULT_EPS_RATIO: f64 = 1.15;
/// Default size of the comparison-gamma grid.
pub const DEFAULT_GAMMA_COUNT: usize = 32;
/// Default upper end of the gamma grid, as a multiple of `sqrt(2/kappa)`.
pub const DEFAULT_GAMMA_MAX_FACTOR: f64 = 8.0;
/// Default strictness slack for "smaller than" comparisons.
pub const DEFAULT_SLACK: f64 = 1e-6;
/// Default cell-inflation coefficient: atoms of a deterministic
/// discretisation within `B_eps` have cells inside `B_{eps + c h}` (a
/// square lattice needs `c = 1/sqrt(2)`).
pub const DEFAULT_DISC_COEFF: f64 = 0.75;

/// Tuning knobs of a certification run. `Default` matches the documented
/// defaults; explicit grids override the generated ones (the scaling
/// covariance tests rely on passing `lambda`-multiplied grids verbatim).
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertifyConfig {
    pub eps_grid: Option<Vec<f64>>,
    pub gamma_grid: Option<Vec<f64>>,
    pub gamma_count: usize,
    pub gamma_max_factor: f64,
    pub slack_delta: f64,
    pub disc_coeff: f64,
    /// Multiplier on the binomial standard error beyond which a violation
    /// is conclusive; `None` derives `sqrt(2 ln(#comparisons)) + 1`.
    pub conclusive_z: Option<f64>,
    /// Radius the certified prefix must reach for a pass; `None` means the
    /// whole requested grid.
    pub min_radius: Option<f64>,
    /// Dimension-condition gate run before certifying.
    pub ndim: NdimPolicy,
    /// Ledger size (worst margins kept).
    pub ledger_size: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            eps_grid: None,
            gamma_grid: None,
            gamma_count: DEFAULT_GAMMA_COUNT,
            gamma_max_factor: DEFAULT_GAMMA_MAX_FACTOR,
            slack_delta: DEFAULT_SLACK,
            disc_coeff: DEFAULT_DISC_COEFF,
            conclusive_z: None,
            min_radius: None,
            ndim: NdimPolicy::Auto { tolerance: 0.1 },
            ledger_size: 12,
        }
    }
}

/// Whether and how the `n`-dimensional condition is checked first.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum NdimPolicy {
    Skip,
    /// Window and gate derived from the space (per-point on deterministic
    /// spaces, aggregate on Monte Carlo samples).
    Auto { tolerance: f64 },
    Explicit(NdimConfig),
}

/// Classification of one ball comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MarginClass {
    Ok,
    /// Violates the raw comparison but within the staircase/sampling
    /// allowance; does not break the certified prefix.
    Inconclusive,
    Conclusive,
}

/// One ledger entry: `margin = mu(B_eps) - (1 - delta) V_model(eps)`.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarginRecord {
    pub point: usize,
    pub eps: f64,
    pub gamma: Option<f64>,
    pub margin: f64,
    pub sigma: f64,
    pub allowance: f64,
    pub class: MarginClass,
}

/// Outcome of a certification run.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertificateResult {
    pub kappa: f64,
    pub verdict: bool,
    /// Infimum over the gamma grid of the violation-free prefix radius.
    pub sc_radius: f64,
    pub gamma_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    /// Worst margins, most violating first.
    pub worst_margins: Vec<MarginRecord>,
    pub conclusive_violations: usize,
    pub inconclusive_violations: usize,
    pub slack_delta: f64,
    pub disc_coeff: f64,
    pub conclusive_z: f64,
    pub min_radius: f64,
    pub ndim: Option<NdimReport>,
    /// Human-readable statement of the allowances this certificate used.
    pub notes: String,
}

/// Geometric grid from `lo` to `hi` (last point is clamped to `hi`).
pub fn geometric_grid(lo: f64, hi: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && ratio > 1.0) {
        return Err(Error::domain("geometric_grid: need 0 < lo < hi and ratio > 1"));
    }
    let mut grid = Vec::new();
    let mut r = lo;
    while r < hi * (1.0 - 1e-12) {
        grid.push(r);
        r *= ratio;
    }
    grid.push(hi);
    Ok(grid)
}

/// Log-spaced gamma grid on `(sqrt(2/kappa) (1 + 1e-3), factor sqrt(2/kappa)]`.
/// Comparisons are hardest as `gamma` descends to `sqrt(2/kappa)`.
pub fn default_gamma_grid(kappa: f64, count: usize, max_factor: f64) -> Result<Vec<f64>> {
    if kappa <= 0.0 {
        return Err(Error::domain("gamma grid requires kappa > 0"));
    }
    if count < 2 || max_factor <= 1.0 {
        return Err(Error::domain("gamma grid needs count >= 2 and max_factor > 1"));
    }
    let gamma_min = (2.0 / kappa).sqrt() * (1.0 + 1e-3);
    let gamma_max = (2.0 / kappa).sqrt() * max_factor;
    let log_lo = gamma_min.ln();
    let log_hi = gamma_max.ln();
    Ok((0..count)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

fn is_atomic(x: &FiniteMMSpace) -> bool {
    x.balls().analytic_volume(0.0).is_none()
}

fn resolve_eps_grid(x: &FiniteMMSpace, r_max: f64, config: &CertifyConfig) -> Result<Vec<f64>> {
    if let Some(grid) = &config.eps_grid {
        if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] <= 0.0 {
            return Err(Error::domain("explicit eps grid must be positive and increasing"));
        }
        return Ok(grid.clone());
    }
    if !is_atomic(x) {
        // exact-ball oracle spaces have no staircase floor
        return geometric_grid(r_max / 50.0, r_max, DEFAULT_EPS_RATIO);
    }
    let h = x.resolution();
    if !(r_max >= 4.0 * h) {
        return Err(Error::precondition(alloc::format!(
            "max radius {r_max} must be at least 4h = {} (h = {h})",
            4.0 * h
        )));
    }
    geometric_grid(2.0 * h, r_max, DEFAULT_EPS_RATIO)
}

fn run_ndim_gate(
    x: &FiniteMMSpace,
    n: usize,
    eps_grid: &[f64],
    policy: &NdimPolicy,
) -> Result<Option<NdimReport>> {
    let config = match policy {
        NdimPolicy::Skip => return Ok(None),
        NdimPolicy::Explicit(c) => c.clone(),
        NdimPolicy::Auto { tolerance } => {
            let top = *eps_grid.last().unwrap();
            let window = if is_atomic(x) {
                let h = x.resolution();
                let r_hi = (24.0 * h).min(top);
                if r_hi <= 4.0 * h {
                    return Err(Error::precondition(
                        "radius range too small for the dimension-condition gate",
                    ));
                }
                (4.0 * h, r_hi)
            } else {
                (0.05 * top, 0.35 * top)
            };
            let gate = match x.sampling() {
                Sampling::MonteCarlo => NdimGate::Aggregate,
                Sampling::Deterministic => NdimGate::PerPoint,
            };
            NdimConfig::new(window).with_gate(gate).with_tolerance(*tolerance)
        }
    };
    let report = ndim_condition_fit(x, n, &config)?;
    if !report.verdict {
        return Err(Error::precondition(alloc::format!(
            "n-dimensional condition failed: mean intercept {:.4}, max deviation {:.4} over window ({:.4}, {:.4})",
            report.mean_intercept,
            report.max_deviation,
            report.window.0,
            report.window.1
        )));
    }
    Ok(Some(report))
}

struct SweepOutcome {
    sc_radius: f64,
    worst: Vec<MarginRecord>,
    conclusive: usize,
    inconclusive: usize,
}

/// Compare profiles against one model volume column per gamma; the prefix
/// radius free of conclusive violations is minimised over gammas.
/// `inflated_volumes` holds the model volumes at `eps + c h`, the
/// staircase allowance of deterministic atomic spaces.
#[allow(clippy::too_many_arguments)]
fn sweep(
    x: &FiniteMMSpace,
    profiles: &BallProfileTable,
    eps_grid: &[f64],
    gammas: &[Option<f64>],
    model_volumes: &[Vec<f64>],
    inflated_volumes: &[Vec<f64>],
    slack: f64,
    z: f64,
    ledger_size: usize,
) -> SweepOutcome {
    let deterministic_atomic =
        is_atomic(x) && x.sampling() == Sampling::Deterministic;
    let n_points = profiles.n_points;
    let mut worst: Vec<MarginRecord> = Vec::new();
    let mut conclusive = 0usize;
    let mut inconclusive = 0usize;
    let mut sc_radius = f64::INFINITY;

    for (gi, gamma) in gammas.iter().enumerate() {
        let volumes = &model_volumes[gi];
        let inflated = &inflated_volumes[gi];
        let mut prefix = eps_grid.len();
        'eps: for (ei, &eps) in eps_grid.iter().enumerate() {
            let v = volumes[ei];
            let threshold = v * (1.0 - slack);
            let disc = if deterministic_atomic {
                (inflated[ei] - v) * (1.0 - slack)
            } else {
                0.0
            };
            let mut eps_conclusive = false;
            for p in 0..n_points {
                let mu = profiles.mass(p, ei);
                let margin = mu - threshold;
                let sigma = x.ball_sigma(mu);
                let allowance = disc + z * sigma;
                let class = if margin <= 0.0 {
                    MarginClass::Ok
                } else if margin > allowance {
                    conclusive += 1;
                    eps_conclusive = true;
                    MarginClass::Conclusive
                } else {
                    inconclusive += 1;
                    MarginClass::Inconclusive
                };
                push_record(
                    &mut worst,
                    ledger_size,
                    MarginRecord { point: p, eps, gamma: *gamma, margin, sigma, allowance, class },
                );
            }
            if eps_conclusive {
                prefix = ei;
                break 'eps;
            }
        }
        let r_gamma = if prefix == 0 { 0.0 } else { eps_grid[prefix - 1] };
        sc_radius = sc_radius.min(r_gamma);
    }
    SweepOutcome { sc_radius, worst, conclusive, inconclusive }
}

fn push_record(ledger: &mut Vec<MarginRecord>, cap: usize, rec: MarginRecord) {
    // keep the worst `cap` records by violation beyond allowance, with a
    // deterministic insertion order; near-misses are kept too so the
    // ledger shows how close a passing certificate came
    let key = |r: &MarginRecord| r.margin - r.allowance;
    if ledger.len() == cap {
        if let Some(last) = ledger.last() {
            if key(&rec) <= key(last) {
                return;
            }
        }
    }
    let pos = ledger.iter().position(|r| key(&rec) > key(r)).unwrap_or(ledger.len());
    if pos < cap {
        ledger.insert(pos, rec);
        ledger.truncate(cap);
    }
}

fn certificate_notes(x: &FiniteMMSpace, slack: f64, disc: f64, z: f64) -> String {
    let sampling = match x.sampling() {
        Sampling::MonteCarlo => alloc::format!(
            "Monte Carlo space: violations within {z:.2} binomial standard errors are \
             flagged inconclusive rather than fail"
        ),
        Sampling::Deterministic if is_atomic(x) => alloc::format!(
            "deterministic atomic space: staircase allowance compares against the model \
             ball at radius eps + {disc} h"
        ),
        Sampling::Deterministic => String::from("exact-ball oracle space: no allowance"),
    };
    alloc::format!(
        "strict comparisons carry relative slack {slack:.1e}; {sampling}; the r -> 0 \
         limit is certified only down to the smallest tested radius"
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    x: &FiniteMMSpace,
    kappa: f64,
    eps_grid: Vec<f64>,
    gamma_grid: Vec<f64>,
    outcome: SweepOutcome,
    config: &CertifyConfig,
    z: f64,
    ndim: Option<NdimReport>,
) -> CertificateResult {
    let min_radius = config.min_radius.unwrap_or(*eps_grid.last().unwrap());
    let verdict = outcome.sc_radius >= min_radius;
    CertificateResult {
        kappa,
        verdict,
        sc_radius: outcome.sc_radius,
        gamma_grid,
        eps_grid,
        worst_margins: outcome.worst,
        conclusive_violations: outcome.conclusive,
        inconclusive_violations: outcome.inconclusive,
        slack_delta: config.slack_delta,
        disc_coeff: config.disc_coeff,
        conclusive_z: z,
        min_radius,
        ndim,
        notes: certificate_notes(x, config.slack_delta, config.disc_coeff, z),
    }
}

fn conclusive_multiplier(config: &CertifyConfig, comparisons: usize) -> f64 {
    config
        .conclusive_z
        .unwrap_or_else(|| (2.0 * (comparisons.max(2) as f64).ln()).sqrt() + 1.0)
}

/// Certify `Sc^{vol_n} >= 0`: ball measures must not exceed Euclidean ball
/// volumes on a radius grid in `[2h, R]`.
pub fn certify_nonneg(
    x: &FiniteMMSpace,
    n: usize,
    r_max: f64,
    config: &CertifyConfig,
) -> Result<CertificateResult> {
    let eps_grid = resolve_eps_grid(x, r_max, config)?;
    let ndim = run_ndim_gate(x, n, &eps_grid, &config.ndim)?;
    let profiles = x.ball_profiles(&eps_grid)?;
    certify_nonneg_with_profiles(x, n, eps_grid, &profiles, config, ndim)
}

fn certify_nonneg_with_profiles(
    x: &FiniteMMSpace,
    n: usize,
    eps_grid: Vec<f64>,
    profiles: &BallProfileTable,
    config: &CertifyConfig,
    ndim: Option<NdimReport>,
) -> Result<CertificateResult> {
    let ch = config.disc_coeff * x.resolution();
    let volumes: Vec<f64> = eps_grid
        .iter()
        .map(|&r| models::euclidean_ball_volume(n, r))
        .collect::<Result<_>>()?;
    let inflated: Vec<f64> = eps_grid
        .iter()
        .map(|&r| models::euclidean_ball_volume(n, r + ch))
        .collect::<Result<_>>()?;
    let z = conclusive_multiplier(config, x.len() * eps_grid.len());
    // the kappa = 0 comparison is non-strict: no strictness slack
    let outcome = sweep(
        x,
        profiles,
        &eps_grid,
        &[None],
        &[volumes],
        &[inflated],
        0.0,
        z,
        config.ledger_size,
    );
    Ok(finish(x, 0.0, eps_grid, Vec::new(), outcome, config, z, ndim))
}

/// Certify `Sc^{vol_n} >= kappa > 0` against the product-model family over
/// a gamma grid; the SC-radius is the infimum over the tested gammas of
/// the violation-free prefix.
pub fn certify_kappa(
    x: &FiniteMMSpace,
    n: usize,
    kappa: f64,
    r_max: f64,
    config: &CertifyConfig,
) -> Result<CertificateResult> {
    if kappa <= 0.0 {
        return Err(Error::domain("certify_kappa requires kappa > 0; use certify_nonneg"));
    }
    let eps_grid = resolve_eps_grid(x, r_max, config)?;
    let ndim = run_ndim_gate(x, n, &eps_grid, &config.ndim)?;
    let profiles = x.ball_profiles(&eps_grid)?;
    certify_kappa_with_profiles(x, n, kappa, eps_grid, &profiles, config, ndim)
}

fn certify_kappa_with_profiles(
    x: &FiniteMMSpace,
    n: usize,
    kappa: f64,
    eps_grid: Vec<f64>,
    profiles: &BallProfileTable,
    config: &CertifyConfig,
    ndim: Option<NdimReport>,
) -> Result<CertificateResult> {
    let gamma_grid = match &config.gamma_grid {
        Some(g) => {
            let gamma_min = (2.0 / kappa).sqrt();
            if g.is_empty() || g.iter().any(|&gamma| gamma <= gamma_min) {
                return Err(Error::domain(
                    "explicit gamma grid must be nonempty with every gamma > sqrt(2/kappa)",
                ));
            }
            g.clone()
        }
        None => default_gamma_grid(kappa, config.gamma_count, config.gamma_max_factor)?,
    };
    let ch = config.disc_coeff * x.resolution();
    let mut model_volumes = Vec::with_capacity(gamma_grid.len());
    let mut inflated_volumes = Vec::with_capacity(gamma_grid.len());
    for &gamma in &gamma_grid {
        let volumes: Vec<f64> = eps_grid
            .iter()
            .map(|&r| models::product_ball_volume(gamma, n, r))
            .collect::<Result<_>>()?;
        let inflated: Vec<f64> = eps_grid
            .iter()
            .map(|&r| models::product_ball_volume(gamma, n, r + ch))
            .collect::<Result<_>>()?;
        model_volumes.push(volumes);
        inflated_volumes.push(inflated);
    }
    let gammas: Vec<Option<f64>> = gamma_grid.iter().map(|&g| Some(g)).collect();
    let z = conclusive_multiplier(config, x.len() * eps_grid.len() * gamma_grid.len());
    let outcome = sweep(
        x,
        profiles,
        &eps_grid,
        &gammas,
        &model_volumes,
        &inflated_volumes,
        config.slack_delta,
        z,
        config.ledger_size,
    );
    Ok(finish(x, kappa, eps_grid, gamma_grid, outcome, config, z, ndim))
}

/// Largest certified lower bound on a bisection grid with 2% relative
/// tolerance; 0 when no positive bound certifies.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LowerBoundEstimate {
    pub kappa_hat: f64,
    pub bracket: (f64, f64),
    pub probes: usize,
}

pub fn estimate_lower_bound(
    x: &FiniteMMSpace,
    n: usize,
    r_max: f64,
    config: &CertifyConfig,
) -> Result<LowerBoundEstimate> {
    let base = certify_nonneg(x, n, r_max, config)?;
    if !base.verdict {
        return Err(Error::precondition(
            "estimate_lower_bound requires certify_nonneg to pass",
        ));
    }
    let eps_grid = base.eps_grid.clone();
    let profiles = x.ball_profiles(&eps_grid)?;
    let inner = CertifyConfig { ndim: NdimPolicy::Skip, ..config.clone() };
    let mut probes = 0usize;
    let mut passes = |kappa: f64| -> Result<bool> {
        probes += 1;
        let cert =
            certify_kappa_with_profiles(x, n, kappa, eps_grid.clone(), &profiles, &inner, None)?;
        Ok(cert.verdict)
    };

    let mut lo = 1e-3;
    if !passes(lo)? {
        return Ok(LowerBoundEstimate { kappa_hat: 0.0, bracket: (0.0, lo), probes });
    }
    let mut hi = lo;
    let mut bracketed = false;
    for _ in 0..40 {
        hi *= 2.0;
        if !passes(hi)? {
            bracketed = true;
            break;
        }
        lo = hi;
    }
    if !bracketed {
        return Err(Error::numeric("estimate_lower_bound: no failing upper bracket found"));
    }
    while hi - lo > 0.02 * hi {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LowerBoundEstimate { kappa_hat: lo, bracket: (lo, hi), probes })
}

/// One Bishop-Gromov ratio violation.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BgViolation {
    pub point: usize,
    pub r: f64,
    pub big_r: f64,
    pub ratio: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BgReport {
    pub kappa: f64,
    pub violations: Vec<BgViolation>,
    pub pairs_checked: usize,
    pub radius_grid: Vec<f64>,
    pub note: String,
}

/// Check the generalized Bishop-Gromov inequality
/// `mu(B_r)/mu(B_R) >= profile(r)/profile(R)` on a grid of `(x, r, R)`.
/// An empty ledger is consistent with CD(kappa, n).
pub fn bishop_gromov_check(
    x: &FiniteMMSpace,
    n: usize,
    kappa: f64,
    r_max: f64,
    config: &CertifyConfig,
) -> Result<BgReport> {
    if kappa < 0.0 {
        return Err(Error::domain("bishop_gromov_check requires kappa >= 0"));
    }
    let cap = if kappa > 0.0 {
        core::f64::consts::PI * ((n as f64 - 1.0) / kappa).sqrt()
    } else {
        f64::INFINITY
    };
    let grid = resolve_eps_grid(x, r_max.min(cap), config)?;
    let profiles = x.ball_profiles(&grid)?;
    let ch = config.disc_coeff * x.resolution();
    let atomic = is_atomic(x);
    let z = conclusive_multiplier(config, x.len() * grid.len() * grid.len() / 2);

    let mut violations = Vec::new();
    let mut pairs_checked = 0usize;
    for p in 0..x.len() {
        let row = profiles.row(p);
        for j in 1..grid.len() {
            let big_r = grid[j];
            let mu_big = row[j];
            if mu_big <= 0.0 {
                continue;
            }
            let sigma_big = x.ball_sigma(mu_big);
            for i in 0..j {
                let r = grid[i];
                let mu_small = row[i];
                pairs_checked += 1;
                let ratio = mu_small / mu_big;
                let bound = models::bg_ratio_bound(n, kappa, r, big_r)?;
                // cell-inflation window on both radii bounds the staircase
                // error of the measured ratio
                let staircase = if atomic {
                    let f = (1.0 + ch / r) * (1.0 + ch / big_r);
                    f.powi(n as i32) - 1.0
                } else {
                    0.0
                };
                let sigma_small = x.ball_sigma(mu_small);
                let noise = z * (sigma_small / mu_big + ratio * sigma_big / mu_big);
                let allowance = bound * staircase + noise + 1e-11 * (1.0 + bound);
                let margin = bound - ratio - allowance;
                if margin > 0.0 {
                    violations.push(BgViolation { point: p, r, big_r, ratio, bound, margin });
                }
            }
        }
    }
    Ok(BgReport {
        kappa,
        violations,
        pairs_checked,
        radius_grid: grid,
        note: String::from(
            "empty ledger is consistent with (not a proof of) CD(kappa, n); \
             allowances cover staircase and sampling error",
        ),
    })
}

/// Empirical replay of the CD(kappa, n) theorem on one space: check the
/// dimension condition and the Bishop-Gromov inequality, then certify the
/// conclusion `Sc^{vol_n} >= n kappa` with a slack on the target bound.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CdReport {
    pub kappa: f64,
    pub target: f64,
    pub slack: f64,
    pub ndim_passed: bool,
    pub bg_violations: usize,
    pub certificate: Option<CertificateResult>,
    /// True when every precondition held and the conclusion certified.
    pub conclusion: bool,
}

pub fn verify_cd_theorem(
    x: &FiniteMMSpace,
    n: usize,
    kappa: f64,
    r_max: f64,
    slack: f64,
    config: &CertifyConfig,
) -> Result<CdReport> {
    if kappa < 0.0 {
        return Err(Error::domain("verify_cd_theorem requires kappa >= 0"));
    }
    let eps_grid = resolve_eps_grid(x, r_max, config)?;
    let ndim_passed = match run_ndim_gate(x, n, &eps_grid, &config.ndim) {
        Ok(_) => true,
        Err(Error::Precondition(_)) => false,
        Err(e) => return Err(e),
    };
    let bg = bishop_gromov_check(x, n, kappa, r_max, config)?;
    let target = n as f64 * kappa * (1.0 - slack);
    if !ndim_passed || !bg.violations.is_empty() {
        return Ok(CdReport {
            kappa,
            target,
            slack,
            ndim_passed,
            bg_violations: bg.violations.len(),
            certificate: None,
            conclusion: false,
        });
    }
    let inner = CertifyConfig { ndim: NdimPolicy::Skip, ..config.clone() };
    let certificate = if kappa == 0.0 {
        certify_nonneg(x, n, r_max, &inner)?
    } else {
        certify_kappa(x, n, target, r_max, &inner)?
    };
    let conclusion = certificate.verdict;
    Ok(CdReport {
        kappa,
        target,
        slack,
        ndim_passed,
        bg_violations: 0,
        certificate: Some(certificate),
        conclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::generators::SpaceGenerator;
    use core::f64::consts::PI;

    fn exact_s2(count: usize) -> FiniteMMSpace {
        SpaceGenerator::SphereExact { n: 2, sec: 1.0, count, seed: 5 }.build().unwrap()
    }

    fn exact_s3(count: usize) -> FiniteMMSpace {
        SpaceGenerator::SphereExact { n: 3, sec: 1.0, count, seed: 5 }.build().unwrap()
    }

    fn torus_grid(cells: usize) -> FiniteMMSpace {
        SpaceGenerator::FlatTorusGrid {
            lengths: alloc::vec![2.0 * PI, 2.0 * PI],
            shape: alloc::vec![cells, cells],
        }
        .build()
        .unwrap()
    }

    #[test]
    fn flat_torus_grid_certifies_nonneg_to_quarter_girth() {
        let x = torus_grid(48);
        let r = PI / 2.0;
        let cert = certify_nonneg(&x, 2, r, &CertifyConfig::default()).unwrap();
        assert!(cert.verdict, "worst: {:?}", cert.worst_margins.first());
        assert_eq!(cert.sc_radius, *cert.eps_grid.last().unwrap());
        assert_eq!(cert.conclusive_violations, 0);
    }

    #[test]
    fn unit_sphere_sample_certifies_nonneg() {
        let x = SpaceGenerator::SphereLattice { sec: 1.0, count: 3000, seed: 2 }.build().unwrap();
        let cert = certify_nonneg(&x, 2, 1.2, &CertifyConfig::default()).unwrap();
        assert!(cert.verdict, "worst: {:?}", cert.worst_margins.first());
    }

    #[test]
    fn hyperbolic_patch_fails_nonneg() {
        // curvature -1 disk: ball areas 2 pi (cosh r - 1) > pi r^2
        let x = SpaceGenerator::HyperbolicDisk { k: 1.0, radius: 2.4, rings: 56 }.build().unwrap();
        let config = CertifyConfig { ndim: NdimPolicy::Skip, ..CertifyConfig::default() };
        let cert = certify_nonneg(&x, 2, 1.5, &config).unwrap();
        assert!(!cert.verdict);
        assert!(cert.conclusive_violations > 0);
    }

    #[test]
    fn exact_s3_passes_below_six_fails_above() {
        let x = exact_s3(160);
        let config = CertifyConfig { ndim: NdimPolicy::Skip, ..CertifyConfig::default() };
        let pass = certify_kappa(&x, 3, 5.4, 1.0, &config).unwrap();
        assert!(
            pass.verdict,
            "sc_radius {} worst {:?}",
            pass.sc_radius,
            pass.worst_margins.first()
        );
        let fail = certify_kappa(&x, 3, 12.0, 1.0, &config).unwrap();
        assert!(!fail.verdict);
        assert!(fail.sc_radius < 1.0);
    }

    #[test]
    fn monotone_in_kappa() {
        // pass(kappa) implies pass(kappa') for kappa' < kappa, with
        // sc_radius no smaller
        let x = exact_s3(96);
        let config = CertifyConfig { ndim: NdimPolicy::Skip, ..CertifyConfig::default() };
        let mut prev_radius = 0.0;
        for &kappa in &[5.5, 4.0, 2.0, 0.5] {
            let cert = certify_kappa(&x, 3, kappa, 1.0, &config).unwrap();
            assert!(cert.verdict, "kappa = {kappa}");
            assert!(cert.sc_radius >= prev_radius);
            prev_radius = cert.sc_radius;
        }
    }

    #[test]
    fn kappa_zero_rejected_by_certify_kappa() {
        let x = exact_s2(32);
        assert!(certify_kappa(&x, 2, 0.0, 1.0, &CertifyConfig::default()).is_err());
    }

    #[test]
    fn lower_bound_estimates_sphere_curvatures() {
        let config = CertifyConfig { ndim: NdimPolicy::Skip, ..CertifyConfig::default() };
        let s2 = exact_s2(128);
        let est = estimate_lower_bound(&s2, 2, 0.8, &config).unwrap();
        assert!(est.kappa_hat > 1.7 && est.kappa_hat < 2.1, "kappa_hat = {}", est.kappa_hat);

        let s3 = exact_s3(128);
        let est = estimate_lower_bound(&s3, 3, 0.8, &config).unwrap();
        assert!(est.kappa_hat > 5.2 && est.kappa_hat < 6.2, "kappa_hat = {}", est.kappa_hat);
    }

    #[test]
    fn flat_torus_lower_bound_is_zero() {
        let x = SpaceGenerator::FlatTorusExact {
            lengths: alloc::vec![2.0 * PI, 2.0 * PI],
            shape: alloc::vec![24, 24],
        }
        .build()
        .unwrap();
        let config = CertifyConfig { ndim: NdimPolicy::Skip, ..CertifyConfig::default() };
        let est = estimate_lower_bound(&x, 2, 1.2, &config).unwrap();
        assert_eq!(est.kappa_hat, 0.0);
    }

    #[test]
    fn bg_exact_spheres_have_empty_ledgers() {
        let config = CertifyConfig { ndim: NdimPolicy::Skip, ..CertifyConfig::default() };
        for (n, count) in [(2usize, 96), (3usize, 96)] {
            let x = SpaceGenerator::SphereExact { n, sec: 1.0, count, seed: 1 }.build().unwrap();
            let report = bishop_gromov_check(&x, n, (n - 1) as f64, 2.5, &config).unwrap();
            assert!(report.violations.is_empty(), "n = {n}: {:?}", report.violations.first());
            assert!(report.pairs_checked > 0);
        }
    }

    #[test]
    fn bg_flat_torus_empty_at_zero_nonempty_at_one() {
        let x = SpaceGenerator::FlatTorusExact {
            lengths: alloc::vec![2.0 * PI, 2.0 * PI],
            shape: alloc::vec![24, 24],
        }
        .build()
        .unwrap();
        let config = CertifyConfig { ndim: NdimPolicy::Skip, ..CertifyConfig::default() };
        let zero = bishop_gromov_check(&x, 2, 0.0, 1.4, &config).unwrap();
        assert!(zero.violations.is_empty(), "{:?}", zero.violations.first());
        let one = bishop_gromov_check(&x, 2, 1.0, 1.4, &config).unwrap();
        assert!(!one.violations.is_empty());
    }

    #[test]
    fn cd_theorem_on_spheres_and_torus() {
        let config = CertifyConfig { ndim: NdimPolicy::Skip, ..CertifyConfig::default() };
        // S^3 satisfies CD(2, 3); the conclusion certifies at 5.4
        let s3 = exact_s3(128);
        let report = verify_cd_theorem(&s3, 3, 2.0, 0.9, 0.1, &config).unwrap();
        assert!(report.conclusion, "{report:?}");
        assert!((report.target - 5.4).abs() < 1e-12);
        // S^2 satisfies CD(1, 2); the conclusion certifies at 1.8
        let s2 = exact_s2(128);
        let report = verify_cd_theorem(&s2, 2, 1.0, 0.9, 0.1, &config).unwrap();
        assert!(report.conclusion);
        // flat torus: kappa = 0 branch
        let torus = SpaceGenerator::FlatTorusExact {
            lengths: alloc::vec![2.0 * PI, 2.0 * PI],
            shape: alloc::vec![24, 24],
        }
        .build()
        .unwrap();
        let report = verify_cd_theorem(&torus, 2, 0.0, 1.4, 0.1, &config).unwrap();
        assert!(report.conclusion);
    }

    #[test]
    fn restriction_inherits_certificate() {
        // a metrically convex subset of a certified space certifies with
        // the same radius (global-to-local)
        let x = torus_grid(40);
        let (sub, _) = x.restrict_ball(0, PI / 2.0, 4000).unwrap();
        let config = CertifyConfig { ndim: NdimPolicy::Skip, ..CertifyConfig::default() };
        let r = PI / 4.0;
        let ambient = certify_nonneg(&x, 2, r, &config).unwrap();
        let restricted = certify_nonneg(&sub, 2, r, &config).unwrap();
        assert!(ambient.verdict && restricted.verdict);
    }

    #[test]
    fn scaling_covariance_exact() {
        // verdicts and sc_radius transform exactly under
        // (lambda^-2 kappa, lambda r) with lambda-multiplied grids
        let x = exact_s3(72);
        let lambda = 2.0;
        let base_grid = geometric_grid(0.08, 0.9, DEFAULT_EPS_RATIO).unwrap();
        let gamma_grid = default_gamma_grid(5.0, 16, 8.0).unwrap();
        let config = CertifyConfig {
            eps_grid: Some(base_grid.clone()),
            gamma_grid: Some(gamma_grid.clone()),
            ndim: NdimPolicy::Skip,
            ..CertifyConfig::default()
        };
        let cert = certify_kappa(&x, 3, 5.0, 0.9, &config).unwrap();

        let scaled = x.scale(lambda).unwrap();
        let scaled_config = CertifyConfig {
            eps_grid: Some(base_grid.iter().map(|&e| lambda * e).collect()),
            gamma_grid: Some(gamma_grid.iter().map(|&g| lambda * g).collect()),
            ndim: NdimPolicy::Skip,
            ..CertifyConfig::default()
        };
        let cert2 = certify_kappa(
            &scaled,
            3,
            5.0 / (lambda * lambda),
            lambda * 0.9,
            &scaled_config,
        )
        .unwrap();
        assert_eq!(cert.verdict, cert2.verdict);
        assert_eq!(cert2.sc_radius, lambda * cert.sc_radius);
    }
}
