//! Forecaster contract, reference forecasters, rollout and evaluation.
//!
//! A forecaster only ever sees what a black-box stroke forecaster would: the
//! strokes so far and the identities of both players. Reference forecasters
//! are count-based so their dependence on history and identity is known
//! exactly.

mod blend;
mod eval;
mod markov;
mod model;
mod moments;
mod rollout;
mod style;

pub use blend::BlendForecaster;
pub use eval::{evaluate, EvalReport, RallyMetrics};
pub use markov::{fit_markov, MarkovForecaster, TransitionRow};
pub use model::{load_model, save_model, Model, ModelFile, OracleForecaster, UniformForecaster, MODEL_FORMAT, MODEL_VERSION};
pub use rollout::{rollout, rollout_greedy, rollout_sampled, Decoding, Rollout};
pub use style::{fit_style, StyleForecaster, StyleProfile};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::losses::{AreaDistribution, ShotDistribution};
use crate::rally::{PlayerId, PlayerRole, Rally, RoleSet, Stroke};

/// Default additive smoothing.
pub const DEFAULT_ALPHA: f64 = 1.0;
/// Default area grid resolution for the Markov forecaster.
pub const DEFAULT_BINS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokePrediction {
    pub shot: ShotDistribution,
    pub area: AreaDistribution,
}

impl StrokePrediction {
    pub fn is_valid(&self) -> bool {
        self.shot.is_valid() && self.area.is_valid()
    }
}

/// What a forecaster sees when predicting one stroke.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    /// Strokes 1..index-1: given strokes followed by fed-back realizations.
    pub history: &'a [Stroke],
    /// 1-based index of the stroke being predicted.
    pub index: usize,
    pub role: PlayerRole,
    pub player_a: &'a PlayerId,
    pub player_b: &'a PlayerId,
}

impl StepContext<'_> {
    /// Identity of the player hitting the predicted stroke.
    pub fn player(&self) -> &PlayerId {
        match self.role {
            PlayerRole::A => self.player_a,
            PlayerRole::B => self.player_b,
        }
    }
}

/// Black-box next-stroke forecaster. Implementations must be deterministic
/// and read-only once built.
pub trait Forecaster: Send + Sync {
    fn step(&self, ctx: &StepContext<'_>) -> StrokePrediction;
}

impl<F: Forecaster + ?Sized> Forecaster for &F {
    fn step(&self, ctx: &StepContext<'_>) -> StrokePrediction {
        (**self).step(ctx)
    }
}

/// A forecasting query: given strokes plus the identities to condition on.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRequest {
    /// Stream key for sampled decoding; usually the rally id.
    pub key: String,
    pub past: Vec<Stroke>,
    pub player_a: PlayerId,
    pub player_b: PlayerId,
    pub roles_ahead: Vec<PlayerRole>,
    /// Roles whose realized strokes are fed back as the reference stroke.
    pub feedback_imputed: RoleSet,
}

impl ForecastRequest {
    /// Builds the request for strokes `tau+1..=len` of a (possibly imputed)
    /// rally. Identities follow any player imputation applied to the rally.
    pub fn from_rally(rally: &Rally, impute_feedback: bool) -> Result<Self> {
        let tau = rally.tau()?;
        if tau >= rally.len() {
            return Err(contract(format!("rally {} has nothing to forecast", rally.id)));
        }
        Ok(ForecastRequest {
            key: rally.id.clone(),
            past: rally.strokes[..tau].to_vec(),
            player_a: rally.conditioning_id(PlayerRole::A).clone(),
            player_b: rally.conditioning_id(PlayerRole::B).clone(),
            roles_ahead: (tau + 1..=rally.len()).map(PlayerRole::at_index).collect(),
            feedback_imputed: if impute_feedback { rally.swapped } else { RoleSet::EMPTY },
        })
    }

    pub fn horizon(&self) -> usize {
        self.roles_ahead.len()
    }

    pub fn check(&self) -> Result<()> {
        if self.past.is_empty() {
            return Err(contract("forecast request without given strokes"));
        }
        if self.roles_ahead.is_empty() {
            return Err(contract("forecast horizon must be at least 1"));
        }
        let start = self.past.len() + 1;
        for (k, role) in self.roles_ahead.iter().enumerate() {
            if *role != PlayerRole::at_index(start + k) {
                return Err(contract(format!(
                    "role at stroke {} breaks alternation",
                    start + k
                )));
            }
        }
        Ok(())
    }
}

/// 1-based indices of the strokes a rally contributes as fitting targets:
/// everything after its given strokes (or after the serve when unset).
pub(crate) fn target_indices(rally: &Rally) -> std::ops::RangeInclusive<usize> {
    let first = rally.tau.map_or(2, |t| t + 1).max(2);
    first..=rally.len()
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use crate::rally::testing::rally;
    use crate::rally::ShotType::{self, *};

    pub fn toy_dataset() -> Vec<Rally> {
        vec![
            rally(
                "t1",
                &[(ShortService, 0.1, 0.2), (Clear, -0.2, 0.9), (Smash, 0.3, 0.4), (Drop, 0.0, 0.1), (Lob, 0.2, 0.9)],
                None,
            ),
            rally(
                "t2",
                &[(LongService, -0.3, 0.9), (Clear, 0.2, 0.85), (Smash, -0.1, 0.5), (NetShot, 0.1, 0.05)],
                None,
            ),
            rally(
                "t3",
                &[(ShortService, 0.2, 0.25), (NetShot, -0.1, 0.1), (Lob, 0.3, 0.95), (Clear, -0.2, 0.8), (Smash, 0.1, 0.5), (Drive, -0.3, 0.4)],
                None,
            ),
        ]
    }

    pub fn shots(r: &Rally) -> Vec<ShotType> {
        r.strokes.iter().map(|s| s.shot).collect()
    }
}
