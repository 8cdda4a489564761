//! Numerical laboratory for stable and functional-stable limit theorems of
//! Gibbs-Markov systems, arcsine laws for their Z-extensions, and the
//! excursion processes of two-cusp intermittent interval maps.
//!
//! The scalar-agnostic layers (stable laws, cadlag paths, intermittent maps)
//! are generic over [`Real`]; the Monte Carlo harness runs in `f64`. The
//! aliases at the bottom of this file name the concrete types the
//! experiments use.

pub mod cadlag;
pub mod error;
pub mod gibbs_markov;
pub mod intermittent;
pub mod limit_lab;
pub mod numeric;
pub mod rng;
pub mod scalar;
pub mod stable_laws;
pub mod stats;
pub mod zextension;

pub use error::{LabError, Result};
pub use scalar::Real;

/// Version string embedded in every report.
pub const ARTIFACT_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub type Path = cadlag::CadlagPath<f64>;
pub type Path32 = cadlag::CadlagPath<f32>;
pub type StableParams = stable_laws::StableParams<f64>;
pub type StableSampler = stable_laws::StableSampler<f64>;
pub type TailModel = stable_laws::TailModel<f64>;
pub type ArcsineParams = stable_laws::ArcsineParams<f64>;

pub type LsvMap = intermittent::IntermittentMap<f64>;
