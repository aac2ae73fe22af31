//! Synthetic scalar curvature at desk scale.
//!
//! This crate certifies `n`-volumic scalar-curvature lower bounds on finite
//! metric measure spaces by comparing small-ball measures against model
//! geometries (Euclidean space, round spheres, `S^2(gamma) x R^(n-2)`
//! products), and computes the weighted scalar curvature
//! `Sc_{alpha,beta} = Sc_g + alpha*lap(f) - beta*|grad f|^2` together with its
//! consequences (conformal invariance, weighted ball-volume expansions,
//! conformal-Laplacian positivity, f-minimal hypersurface stability) on
//! chart-based weighted Riemannian manifolds.
//!
//! The crate is `no_std`-compatible (`alloc` required): disable default
//! features and enable `libm` for float math on bare targets. File formats
//! and the command-line driver live in the companion `scvol-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod certify;
pub mod chart;
pub mod converge;
pub mod error;
pub mod hypersurface;
pub mod models;
pub mod numeric;
pub mod space;
pub mod spectral;

pub use certify::{CertificateResult, CertifyConfig};
pub use chart::ChartMetric;
pub use error::{Error, Result};
pub use models::ModelSpace;
pub use space::FiniteMMSpace;
