//! Finite-time ruin probabilities for the Cramér–Lundberg model with
//! regularly varying claims: first- and second-order asymptotic
//! approximations, plus exact ladder and first-passage simulators used to
//! check them.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod config;
pub mod dist;
pub mod error;
pub mod ladder;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod simulate;
pub mod transforms;

pub use dist::{ClaimFamily, ClaimModel, IntegratedTail};
pub use error::{Result, RuinError};
pub use simulate::{MCEstimate, McConfig, MeanEstimate};
pub use transforms::{InversionConfig, RiskModel};
