//! Turn-based Shapley attribution for rally stroke forecasters.
//!
//! Attributions quantify how much each given stroke, and each player's
//! identity, contributes to a forecaster's shot-type and landing-area
//! performance on a rally. The forecaster is a black box behind
//! [`forecast::Forecaster`]; the count-based reference forecasters and the
//! synthetic generator provide worlds with a known causal structure.

pub mod error;
pub mod forecast;
pub mod losses;
pub mod rally;
pub mod rng;
pub mod shapley;
pub mod synthdata;

pub use error::{Error, Result};
