//! Coalition games over a rally: which features exist and how a coalition
//! is turned into an imputed rally and a payoff.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::engine::Coalition;
use crate::error::{contract, Result};
use crate::forecast::{rollout, Decoding, ForecastRequest, Forecaster};
use crate::losses::{ce_loss, gaussian_nll, StrokeLoss};
use crate::rally::{impute_past, impute_player, PlayerRole, Rally};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    Past,
    Player,
}

impl GameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::Past => "past",
            GameKind::Player => "player",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Attribution unit: a given stroke (never the serve) or a player role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Feature {
    PastStroke(usize),
    Player(PlayerRole),
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::PastStroke(i) => write!(f, "{i}"),
            Feature::Player(r) => write!(f, "{r}"),
        }
    }
}

/// Number of payoff entries per output stroke: type, area, macro.
pub const COMPONENTS_PER_OUTPUT: usize = 3;

/// How coalition payoffs are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PayoffConfig {
    /// Greedy by default; sampled decoding averages losses over `k` rollouts
    /// drawn from streams shared by every coalition.
    pub decoding: Decoding,
    /// Feed imputed players' predicted strokes back as the reference stroke.
    pub impute_feedback: bool,
}

impl Default for PayoffConfig {
    fn default() -> Self {
        PayoffConfig { decoding: Decoding::Greedy, impute_feedback: false }
    }
}

/// A game on one rally. Payoff vectors hold, for every output stroke
/// `tau+1..=len`, the entries `[-ce, -nll, -(ce + nll) / 2]`.
pub struct RallyGame<'a> {
    rally: &'a Rally,
    forecaster: &'a dyn Forecaster,
    kind: GameKind,
    features: Vec<Feature>,
    config: PayoffConfig,
}

impl<'a> RallyGame<'a> {
    pub fn new(rally: &'a Rally, forecaster: &'a dyn Forecaster, kind: GameKind, config: PayoffConfig) -> Result<Self> {
        let tau = rally.tau()?;
        if tau < 2 || tau >= rally.len() {
            return Err(contract(format!("tau {tau} out of range for rally {}", rally.id)));
        }
        let features = match kind {
            GameKind::Past => (2..=tau).map(Feature::PastStroke).collect(),
            GameKind::Player => vec![Feature::Player(PlayerRole::A), Feature::Player(PlayerRole::B)],
        };
        Ok(RallyGame { rally, forecaster, kind, features, config })
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn output_strokes(&self) -> std::ops::RangeInclusive<usize> {
        self.rally.tau.unwrap_or(0) + 1..=self.rally.len()
    }

    /// The rally with every feature outside `coalition` imputed.
    pub fn imputed(&self, coalition: Coalition) -> Result<Rally> {
        match self.kind {
            GameKind::Past => {
                let keep: Vec<usize> = coalition
                    .members()
                    .map(|i| match self.features[i] {
                        Feature::PastStroke(s) => s,
                        Feature::Player(_) => unreachable!("past game holds strokes only"),
                    })
                    .collect();
                if keep.len() == self.features.len() {
                    return Ok(self.rally.clone());
                }
                impute_past(self.rally, &keep)
            }
            GameKind::Player => {
                let mut out = self.rally.clone();
                for (i, f) in self.features.iter().enumerate() {
                    if let (Feature::Player(role), false) = (f, coalition.contains(i)) {
                        out = impute_player(&out, *role, out.len())?;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Per-output-stroke losses of the forecaster on the imputed rally,
    /// measured against the original future strokes.
    pub fn losses(&self, coalition: Coalition) -> Result<Vec<StrokeLoss>> {
        let imputed = self.imputed(coalition)?;
        let req = ForecastRequest::from_rally(&imputed, self.config.impute_feedback)?;
        let truth = self.rally.future()?;
        let rollouts = rollout(self.forecaster, &req, self.config.decoding)?;
        let k = rollouts.len() as f64;
        let mut out = Vec::with_capacity(truth.len());
        for (j, t) in truth.iter().enumerate() {
            let (mut ce, mut nll) = (0.0, 0.0);
            for r in &rollouts {
                ce += ce_loss(&r.predictions[j].shot, t.shot)?;
                nll += gaussian_nll(&r.predictions[j].area, t.area)?;
            }
            out.push(StrokeLoss::new(ce / k, nll / k));
        }
        Ok(out)
    }

    pub fn payoff(&self, coalition: Coalition) -> Result<Vec<f64>> {
        Ok(self
            .losses(coalition)?
            .iter()
            .flat_map(|l| [-l.ce, -l.nll, -(l.ce + l.nll) / 2.0])
            .collect())
    }
}
