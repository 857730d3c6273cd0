use rand::Rng;
use rand_distr::StandardNormal;

use super::{ForecastRequest, Forecaster, StepContext, StrokePrediction};
use crate::error::{contract, Result};
use crate::losses::{AreaDistribution, ShotDistribution};
use crate::rally::{Coord, ShotType, Stroke, REFERENCE_AREA, REFERENCE_SHOT};
use crate::rng::stream_rng;

/// How predicted strokes are realized and fed back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoding {
    /// Argmax shot (lowest code on ties) and mean landing.
    Greedy,
    /// `k` independent sampled rollouts; rollout `i` draws from stream
    /// `(seed, request key, i)`.
    Sample { k: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub predictions: Vec<StrokePrediction>,
    pub realized: Vec<Stroke>,
}

impl Rollout {
    pub fn landing(&self) -> Vec<Coord> {
        self.realized.iter().map(|s| s.area).collect()
    }
}

fn run(
    f: &dyn Forecaster,
    req: &ForecastRequest,
    mut realize: impl FnMut(&StrokePrediction) -> (ShotType, Coord),
) -> Result<Rollout> {
    req.check()?;
    let horizon = req.horizon();
    let mut history = Vec::with_capacity(req.past.len() + horizon);
    history.extend_from_slice(&req.past);
    let mut predictions = Vec::with_capacity(horizon);
    let mut realized = Vec::with_capacity(horizon);
    for &role in &req.roles_ahead {
        let ctx = StepContext {
            history: &history,
            index: history.len() + 1,
            role,
            player_a: &req.player_a,
            player_b: &req.player_b,
        };
        let pred = f.step(&ctx);
        let player_id = ctx.player().clone();
        let (shot, area) = realize(&pred);
        let stroke = Stroke { role, player_id, shot, area };
        let fed = if req.feedback_imputed.contains(role) {
            Stroke { shot: REFERENCE_SHOT, area: REFERENCE_AREA, ..stroke.clone() }
        } else {
            stroke.clone()
        };
        history.push(fed);
        predictions.push(pred);
        realized.push(stroke);
    }
    Ok(Rollout { predictions, realized })
}

pub fn rollout_greedy(f: &dyn Forecaster, req: &ForecastRequest) -> Result<Rollout> {
    run(f, req, |p| (p.shot.argmax(), p.area.mean()))
}

fn sample_shot(d: &ShotDistribution, rng: &mut impl Rng) -> ShotType {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in d.probs.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return ShotType::ALL[i];
        }
    }
    ShotType::ALL[last]
}

fn sample_area(d: &AreaDistribution, rng: &mut impl Rng) -> Coord {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let x = d.mu_x + d.sigma_x * z1;
    let y = d.mu_y + d.sigma_y * (d.rho * z1 + (1.0 - d.rho * d.rho).sqrt() * z2);
    Coord::new(x, y)
}

pub fn rollout_sampled(f: &dyn Forecaster, req: &ForecastRequest, k: usize, seed: u64) -> Result<Vec<Rollout>> {
    if k == 0 {
        return Err(contract("sampled decoding needs k >= 1"));
    }
    (0..k as u64)
        .map(|i| {
            let mut rng = stream_rng(seed, &req.key, i);
            run(f, req, |p| {
                let shot = sample_shot(&p.shot, &mut rng);
                (shot, sample_area(&p.area, &mut rng))
            })
        })
        .collect()
}

pub fn rollout(f: &dyn Forecaster, req: &ForecastRequest, decoding: Decoding) -> Result<Vec<Rollout>> {
    match decoding {
        Decoding::Greedy => Ok(vec![rollout_greedy(f, req)?]),
        Decoding::Sample { k, seed } => rollout_sampled(f, req, k, seed),
    }
}
