//! Multiequilibria analysis for the cooperative network dynamics
//! `ẋ = −Δx + πAψ(x)`.
//!
//! The crate validates interaction networks, computes the spectral
//! thresholds at which new equilibria bifurcate, locates and classifies
//! equilibria by multistart Newton iteration, integrates trajectories, and
//! packages parameter sweeps into plot-ready reports.

pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod fixtures;
mod linalg;
pub mod network;
pub mod nonlinearity;
pub mod seeding;
pub mod spectral;
pub mod sweep;

pub use error::{Error, ErrorClass, Result};
pub use network::{LoadOptions, WeightedNetwork};
pub use nonlinearity::{PsiKind, SigmoidFamily};
pub use spectral::{spectral_summary, SpectralSummary};
