//! Rare-event estimation of EGC and GSC/EGC outage probabilities.
//!
//! The outage probability of an `L`-branch EGC receiver is the left tail
//! `P(Σ Rᵢ ≤ γ₀)` of a sum of fading envelopes. The sphere-truncation
//! importance sampler draws from the fading law restricted to
//! `{Σ Rᵢ² ≤ γ₀²}`, whose probability (the MRC outage) is known in closed
//! form, and reweights every hit by that probability.
//!
//! Module map:
//!
//! * [`specfun`]: Bessel `I_ν`, Marcum Q, hypoexponential CDF
//! * [`scenarios`]: fading models, dB conversion, naive samplers
//! * [`mrc_oracle`]: closed-form truncation probabilities
//! * [`sphere_sampler`]: acceptance-rejection samplers for the truncated laws
//! * [`estimators`]: naive MC, sphere-IS, box-IS and required-run metrics
//! * [`engine`]: reproducible block decomposition, optionally parallel
//! * [`oracles`]: brute-force references for testing and validation

pub mod engine;
pub mod error;
pub mod estimators;
pub mod mrc_oracle;
pub mod oracles;
pub mod scenarios;
pub mod specfun;
pub mod sphere_sampler;

pub use engine::RunSpec;
pub use error::{Error, Result};
pub use estimators::{EstimateResult, Method, OutageProblem};
pub use scenarios::{FadingScenario, ThresholdSpec};
