//! Bayes estimation of the two-parameter Weibull model from very small
//! complete or type-II censored samples.
//!
//! The prior is elicited the way an engineer states it: an interval known to
//! contain the shape parameter, an anticipated reliable life `x̄_R`, and a
//! weight `w` expressing how many "virtual failures" that anticipation is
//! worth. [`posterior::estimate`] returns the posterior means of the reliable
//! life and of the shape. [`mle`] provides the censored maximum likelihood
//! baseline and [`simulation`] the Monte Carlo harness that compares them.

pub mod censored;
pub mod error;
pub mod mle;
pub mod posterior;
pub mod prior;
pub mod quadrature;
pub mod rng;
pub mod simulation;
pub mod special;
pub mod weibull;

pub use censored::{CensoredSample, Status};
pub use error::{Error, Result};
pub use mle::{MleResult, UnbiasingEntry};
pub use posterior::PosteriorEstimate;
pub use prior::{BetaInterval, PriorSpec, VirtualSample, WRule};
pub use quadrature::QuadratureSettings;
pub use weibull::{ReliableLifeWeibull, ShapeScaleWeibull};
