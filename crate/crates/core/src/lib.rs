//! Entropy production of a charged Brownian particle in a magnetic field.
//!
//! The particle's velocity is the stationary complex Ornstein-Uhlenbeck
//! process `dZ = -e^{iθ} Z dt + sqrt(2 cos θ) dζ`. This crate computes:
//!
//! * trajectories of the plain and tilted process ([`ou_sim`]),
//! * the sample entropy production rate along a path ([`epr`]),
//! * the spectrum of the covariance operator on `[0, T]` ([`spectral`]),
//! * the finite-horizon and limiting Cramér functions and the rate function
//!   ([`cramer`]),
//! * Monte Carlo estimators that check the analytic results against
//!   simulation ([`mc_verify`]).
//!
//! The `ou-epr` binary wraps all of this in a batch driver ([`cli`]).

pub mod cli;
pub mod cramer;
pub mod epr;
mod error;
pub mod mc_verify;
pub mod model;
pub mod ou_sim;
pub mod output;
pub mod quad;
pub mod rng;
pub mod roots;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use model::{DerivedConstants, Model, TiltedDrift};
