//! Forecast losses and benchmark metrics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::rally::{Coord, ShotType, Stroke, NUM_SHOT_TYPES};

/// Probability floor applied before taking logs in [`ce_loss`].
pub const PROB_FLOOR: f64 = 1e-12;

/// Categorical distribution over the ten shot types, indexed by code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShotDistribution {
    pub probs: [f64; NUM_SHOT_TYPES],
}

impl ShotDistribution {
    pub fn new(probs: [f64; NUM_SHOT_TYPES]) -> Result<Self> {
        let d = ShotDistribution { probs };
        d.check()?;
        Ok(d)
    }

    /// Normalises nonnegative weights into a distribution.
    pub fn from_weights(weights: [f64; NUM_SHOT_TYPES]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) || weights.iter().any(|w| *w < 0.0) {
            return Err(contract("shot weights must be nonnegative with a positive finite sum"));
        }
        Self::new(weights.map(|w| w / total))
    }

    pub fn uniform() -> Self {
        ShotDistribution {
            probs: [1.0 / NUM_SHOT_TYPES as f64; NUM_SHOT_TYPES],
        }
    }

    pub fn one_hot(shot: ShotType) -> Self {
        let mut probs = [0.0; NUM_SHOT_TYPES];
        probs[shot.code()] = 1.0;
        ShotDistribution { probs }
    }

    pub fn prob(&self, shot: ShotType) -> f64 {
        self.probs[shot.code()]
    }

    pub fn is_valid(&self) -> bool {
        let sum: f64 = self.probs.iter().sum();
        self.probs
            .iter()
            .all(|p| p.is_finite() && (0.0..=1.0).contains(p))
            && (sum - 1.0).abs() <= 1e-12
    }

    pub fn check(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(contract(format!("invalid shot distribution {:?}", self.probs)))
        }
    }

    /// Most probable shot; ties go to the lowest code.
    pub fn argmax(&self) -> ShotType {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        ShotType::ALL[best]
    }
}

/// Bivariate Gaussian over landing coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaDistribution {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
}

impl AreaDistribution {
    pub fn new(mu_x: f64, mu_y: f64, sigma_x: f64, sigma_y: f64, rho: f64) -> Result<Self> {
        let d = AreaDistribution { mu_x, mu_y, sigma_x, sigma_y, rho };
        d.check()?;
        Ok(d)
    }

    pub fn mean(&self) -> Coord {
        Coord::new(self.mu_x, self.mu_y)
    }

    pub fn is_valid(&self) -> bool {
        self.mu_x.is_finite()
            && self.mu_y.is_finite()
            && self.sigma_x.is_finite()
            && self.sigma_y.is_finite()
            && self.sigma_x > 0.0
            && self.sigma_y > 0.0
            && self.rho.is_finite()
            && self.rho.abs() < 1.0
    }

    pub fn check(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(contract(format!("invalid area distribution {self:?}")))
        }
    }
}

pub fn ce_loss(dist: &ShotDistribution, truth: ShotType) -> Result<f64> {
    dist.check()?;
    Ok(-dist.prob(truth).max(PROB_FLOOR).ln())
}

/// Negative log-density of `truth` under the bivariate Gaussian.
pub fn gaussian_nll(dist: &AreaDistribution, truth: Coord) -> Result<f64> {
    dist.check()?;
    let one_minus = 1.0 - dist.rho * dist.rho;
    let dx = (truth.x - dist.mu_x) / dist.sigma_x;
    let dy = (truth.y - dist.mu_y) / dist.sigma_y;
    let z = dx * dx - 2.0 * dist.rho * dx * dy + dy * dy;
    // log terms kept separate so tiny sigmas do not underflow the product
    Ok((2.0 * PI).ln() + dist.sigma_x.ln() + dist.sigma_y.ln() + 0.5 * one_minus.ln()
        + z / (2.0 * one_minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeLoss {
    pub ce: f64,
    pub nll: f64,
    pub total: f64,
}

impl StrokeLoss {
    pub fn new(ce: f64, nll: f64) -> Self {
        StrokeLoss { ce, nll, total: ce + nll }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RallyLosses {
    pub steps: Vec<StrokeLoss>,
    pub mean_ce: f64,
    pub mean_nll: f64,
    pub mean_total: f64,
}

pub fn rally_losses(
    predictions: &[(ShotDistribution, AreaDistribution)],
    truth: &[Stroke],
) -> Result<RallyLosses> {
    if predictions.is_empty() || predictions.len() != truth.len() {
        return Err(contract(format!(
            "{} predictions for {} truth strokes",
            predictions.len(),
            truth.len()
        )));
    }
    let steps = predictions
        .iter()
        .zip(truth)
        .map(|((shot, area), t)| Ok(StrokeLoss::new(ce_loss(shot, t.shot)?, gaussian_nll(area, t.area)?)))
        .collect::<Result<Vec<_>>>()?;
    let n = steps.len() as f64;
    let mean_ce = steps.iter().map(|s| s.ce).sum::<f64>() / n;
    let mean_nll = steps.iter().map(|s| s.nll).sum::<f64>() / n;
    let mean_total = steps.iter().map(|s| s.total).sum::<f64>() / n;
    Ok(RallyLosses { steps, mean_ce, mean_nll, mean_total })
}

/// Benchmark metrics for one forecast.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub ce: f64,
    pub mse: f64,
    pub mae: f64,
}

fn errors(sample: &[Coord], truth: &[Stroke]) -> (f64, f64) {
    let mut sq = 0.0;
    let mut abs = 0.0;
    for (c, t) in sample.iter().zip(truth) {
        let (dx, dy) = (c.x - t.area.x, c.y - t.area.y);
        sq += dx * dx + dy * dy;
        abs += dx.abs() + dy.abs();
    }
    (sq, abs)
}

/// CE over the shot distributions plus MSE/MAE of the sampled coordinate
/// sequence closest to the truth (by summed squared error). Errors are
/// averaged over strokes and both coordinates.
pub fn eval_metrics(
    samples: &[Vec<Coord>],
    shot_dists: &[ShotDistribution],
    truth: &[Stroke],
) -> Result<Metrics> {
    if samples.is_empty() {
        return Err(contract("best-of-K needs at least one sample"));
    }
    if truth.is_empty() || shot_dists.len() != truth.len() {
        return Err(contract(format!(
            "{} shot distributions for {} truth strokes",
            shot_dists.len(),
            truth.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != truth.len()) {
        return Err(contract(format!(
            "sample of length {} for {} truth strokes",
            bad.len(),
            truth.len()
        )));
    }
    // ties resolved by absolute error, then coordinates, so the choice does
    // not depend on sample order
    let best = samples
        .iter()
        .map(|s| (errors(s, truth), s))
        .min_by(|(ea, a), (eb, b)| {
            ea.0.total_cmp(&eb.0).then(ea.1.total_cmp(&eb.1)).then_with(|| {
                a.iter()
                    .zip(b.iter())
                    .map(|(p, q)| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .map(|(e, _)| e)
        .expect("nonempty");
    let n = truth.len() as f64;
    let ce = shot_dists
        .iter()
        .zip(truth)
        .map(|(d, t)| ce_loss(d, t.shot))
        .sum::<Result<f64>>()?
        / n;
    Ok(Metrics {
        ce,
        mse: best.0 / (2.0 * n),
        mae: best.1 / (2.0 * n),
    })
}
