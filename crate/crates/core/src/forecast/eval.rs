use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rollout_greedy, rollout_sampled, ForecastRequest, Forecaster};
use crate::error::{contract, Result};
use crate::losses::{eval_metrics, Metrics, ShotDistribution};
use crate::rally::Rally;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RallyMetrics {
    pub rally_id: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tau: usize,
    pub k: usize,
    pub per_rally: Vec<RallyMetrics>,
    pub mean: Metrics,
    /// Rallies too short to forecast at this tau.
    pub skipped: usize,
}

/// Benchmark metrics over a dataset: CE from the greedy rollout, MSE/MAE
/// from the best of `k` sampled rollouts; averaged over rallies.
pub fn evaluate(f: &dyn Forecaster, rallies: &[Rally], tau: usize, k: usize, seed: u64) -> Result<EvalReport> {
    if tau < 2 {
        return Err(contract(format!("tau must be at least 2, got {tau}")));
    }
    if k == 0 {
        return Err(contract("best-of-K needs k >= 1"));
    }
    let usable: Vec<&Rally> = rallies.iter().filter(|r| r.len() > tau).collect();
    let skipped = rallies.len() - usable.len();
    let per_rally = usable
        .par_iter()
        .map(|r| {
            let r = r.with_tau(tau)?;
            let req = ForecastRequest::from_rally(&r, false)?;
            let greedy = rollout_greedy(f, &req)?;
            let samples: Vec<_> = rollout_sampled(f, &req, k, seed)?.iter().map(|s| s.landing()).collect();
            let dists: Vec<ShotDistribution> = greedy.predictions.iter().map(|p| p.shot).collect();
            let metrics = eval_metrics(&samples, &dists, r.future()?)?;
            Ok(RallyMetrics { rally_id: r.id.clone(), metrics })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = per_rally.len().max(1) as f64;
    let mut mean = Metrics::default();
    for m in &per_rally {
        mean.ce += m.metrics.ce;
        mean.mse += m.metrics.mse;
        mean.mae += m.metrics.mae;
    }
    mean.ce /= n;
    mean.mse /= n;
    mean.mae /= n;
    Ok(EvalReport { tau, k, per_rally, mean, skipped })
}
