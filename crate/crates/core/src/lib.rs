//! Analytical viewpoint-leakage model for proactive tile-based VR streaming.
//!
//! The crate is organised bottom-up:
//!
//! * [`sphere`]: points, orthodromic distance, cap areas, cap/cap overlap and
//!   Monte-Carlo estimators used as independent oracles.
//! * [`resource`]: mapping of compute/communication budgets to the streaming
//!   capability `C` and the streamed-FoV radius `r_sv`.
//! * [`qoe`]: five-way overlap classification and the QoE metric.
//! * [`leakage`]: ε-viewpoint leakage when the HMD uploads either the
//!   prediction error or the QoE metric, plus inversion of QoE to error.
//! * [`trace`]: trace ingestion, synthetic generators, windowed baseline
//!   predictors and the aggregate statistics over a population of errors.
//!
//! Data-parallel loops go through [`exec::Exec`], which uses rayon when the
//! `parallel` feature is enabled and a plain sequential loop otherwise. Both
//! paths produce bit-identical results.

pub mod error;
pub mod exec;
pub mod leakage;
pub mod qoe;
pub mod resource;
pub mod sphere;
pub mod trace;

pub use error::{Error, Result};
pub use exec::Exec;
pub use leakage::{ErrorInference, ErrorRange, LeakageResult, PrivacyRequirement, ZoneKind};
pub use qoe::{OverlapCase, QoeValue};
pub use sphere::{CapRadius, SphericalPoint};
