use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::losses::{AreaDistribution, ShotDistribution};
use crate::rally::{Coord, PlayerId, PlayerRole, Rally, RoleSet, ShotType, Stroke, MAX_RALLY_LEN, NUM_SHOT_TYPES};
use crate::rng::{seeded_rng, stream_rng};

/// Dirichlet concentration of the Markov kernel rows.
pub const KERNEL_CONCENTRATION: f64 = 0.3;
/// Spread of Markov-driven landings around their mean.
pub const KERNEL_SIGMA: f64 = 0.08;
/// Upper edge of the short-serve landing band.
pub const SHORT_SERVE_MAX_Y: f64 = 0.35;
/// Lower edge of the long-serve landing band.
pub const LONG_SERVE_MIN_Y: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_rallies: usize,
    pub n_players: usize,
    /// Probability that a stroke follows the Markov kernel instead of the
    /// hitter's style.
    pub lambda: f64,
    /// Per-stroke stopping probability, checked after every stroke from 2 on.
    pub termination_prob: f64,
    pub max_len: usize,
    pub seed: u64,
    pub short_serve_prob: f64,
    /// Symmetric Dirichlet concentration of player shot preferences.
    pub style_concentration: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_rallies: 1000,
            n_players: 10,
            lambda: 0.5,
            termination_prob: 0.1,
            max_len: MAX_RALLY_LEN,
            seed: 0,
            short_serve_prob: 0.7,
            style_concentration: 1.0,
        }
    }
}

impl GeneratorConfig {
    pub fn check(&self) -> Result<()> {
        let fail = |m: String| Err(contract(m));
        if self.n_players < 2 {
            return fail(format!("n_players must be at least 2, got {}", self.n_players));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return fail(format!("lambda {} outside [0, 1]", self.lambda));
        }
        if !(self.termination_prob > 0.0 && self.termination_prob <= 1.0) {
            return fail(format!("termination_prob {} outside (0, 1]", self.termination_prob));
        }
        if !(2..=MAX_RALLY_LEN).contains(&self.max_len) {
            return fail(format!("max_len {} outside [2, {MAX_RALLY_LEN}]", self.max_len));
        }
        if !(0.0..=1.0).contains(&self.short_serve_prob) {
            return fail(format!("short_serve_prob {} outside [0, 1]", self.short_serve_prob));
        }
        if !(self.style_concentration > 0.0 && self.style_concentration.is_finite()) {
            return fail(format!("style_concentration {} must be positive", self.style_concentration));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerStyle {
    pub id: PlayerId,
    pub shots: ShotDistribution,
    pub areas: [AreaDistribution; NUM_SHOT_TYPES],
}

/// Shot transitions and landing anchors shared by all players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovKernel {
    /// `rows[prev shot code]`.
    pub rows: [ShotDistribution; NUM_SHOT_TYPES],
    pub anchors: [Coord; NUM_SHOT_TYPES],
}

impl MarkovKernel {
    /// Landing mean after `prev`: halfway between the mirrored previous
    /// landing and the anchor of `shot`.
    pub fn area_mean(&self, prev: Coord, shot: ShotType) -> Coord {
        let a = self.anchors[shot.code()];
        Coord::new(0.5 * -prev.x + 0.5 * a.x, 0.5 * (1.0 - prev.y) + 0.5 * a.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub players: Vec<PlayerStyle>,
    pub kernel: MarkovKernel,
}

fn dirichlet(rng: &mut ChaCha8Rng, concentration: f64) -> ShotDistribution {
    let d = Dirichlet::new([concentration; NUM_SHOT_TYPES]).expect("positive concentration");
    let w: [f64; NUM_SHOT_TYPES] = d.sample(rng);
    ShotDistribution::from_weights(w).expect("dirichlet draw is a distribution")
}

pub fn generate_players(config: &GeneratorConfig) -> Result<Vec<PlayerStyle>> {
    config.check()?;
    let mut rng = stream_rng(config.seed, "players", 0);
    Ok((0..config.n_players)
        .map(|i| {
            let shots = dirichlet(&mut rng, config.style_concentration);
            let areas = std::array::from_fn(|_| AreaDistribution {
                mu_x: rng.random_range(-0.4..=0.4),
                mu_y: rng.random_range(0.1..=0.9),
                sigma_x: rng.random_range(0.05..=0.3),
                sigma_y: rng.random_range(0.05..=0.3),
                rho: rng.random_range(-0.5..=0.5),
            });
            PlayerStyle { id: PlayerId::new(format!("p{i:03}")), shots, areas }
        })
        .collect())
}

pub fn generate_kernel(config: &GeneratorConfig) -> MarkovKernel {
    let mut rng = stream_rng(config.seed, "kernel", 0);
    let rows = std::array::from_fn(|_| dirichlet(&mut rng, KERNEL_CONCENTRATION));
    let anchors = std::array::from_fn(|_| Coord::new(rng.random_range(-0.4..=0.4), rng.random_range(0.1..=0.9)));
    MarkovKernel { rows, anchors }
}

pub fn generate_world(config: &GeneratorConfig) -> Result<World> {
    Ok(World { players: generate_players(config)?, kernel: generate_kernel(config) })
}

fn sample_shot(rng: &mut ChaCha8Rng, d: &ShotDistribution) -> ShotType {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for s in ShotType::ALL {
        acc += d.prob(s);
        if u < acc {
            return s;
        }
    }
    // rounding leaves u above the last partial sum: take the last positive class
    *ShotType::ALL.iter().rev().find(|s| d.prob(**s) > 0.0).expect("nonzero distribution")
}

fn sample_area(rng: &mut ChaCha8Rng, a: &AreaDistribution) -> Coord {
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    let x = a.mu_x + a.sigma_x * z1;
    let y = a.mu_y + a.sigma_y * (a.rho * z1 + (1.0 - a.rho * a.rho).sqrt() * z2);
    Coord::new(x, y).clamped()
}

fn sample_serve(rng: &mut ChaCha8Rng, short_prob: f64) -> (ShotType, Coord) {
    let short = rng.random_bool(short_prob);
    let x = if rng.random_bool(0.5) { rng.random_range(-0.5..=0.0) } else { rng.random_range(0.0..=0.5) };
    if short {
        (ShotType::ShortService, Coord::new(x, rng.random_range(0.0..=SHORT_SERVE_MAX_Y)))
    } else {
        (ShotType::LongService, Coord::new(x, rng.random_range(LONG_SERVE_MIN_Y..=1.0)))
    }
}

/// One rally between `a` (serving) and `b`, drawn from `rng`.
pub fn generate_rally(
    world: &World,
    a: &PlayerStyle,
    b: &PlayerStyle,
    config: &GeneratorConfig,
    id: String,
    rng: &mut ChaCha8Rng,
) -> Rally {
    let (serve, at) = sample_serve(rng, config.short_serve_prob);
    let mut strokes = vec![Stroke { role: PlayerRole::A, player_id: a.id.clone(), shot: serve, area: at }];
    while strokes.len() < config.max_len {
        let index = strokes.len() + 1;
        let role = PlayerRole::at_index(index);
        let hitter = if role == PlayerRole::A { a } else { b };
        let prev = strokes.last().expect("serve present");
        let (shot, area) = if rng.random_bool(config.lambda) {
            let shot = sample_shot(rng, &world.kernel.rows[prev.shot.code()]);
            let m = world.kernel.area_mean(prev.area, shot);
            let spread = AreaDistribution { mu_x: m.x, mu_y: m.y, sigma_x: KERNEL_SIGMA, sigma_y: KERNEL_SIGMA, rho: 0.0 };
            (shot, sample_area(rng, &spread))
        } else {
            let shot = sample_shot(rng, &hitter.shots);
            (shot, sample_area(rng, &hitter.areas[shot.code()]))
        };
        strokes.push(Stroke { role, player_id: hitter.id.clone(), shot, area });
        if rng.random_bool(config.termination_prob) {
            break;
        }
    }
    Rally { id, player_a: a.id.clone(), player_b: b.id.clone(), strokes, tau: None, swapped: RoleSet::EMPTY }
}

/// `config.n_rallies` rallies, each drawn from its own stream so the result
/// does not depend on scheduling.
pub fn generate_dataset(config: &GeneratorConfig) -> Result<(World, Vec<Rally>)> {
    let world = generate_world(config)?;
    let rallies = (0..config.n_rallies)
        .into_par_iter()
        .map(|i| {
            let id = format!("r{i:06}");
            let mut rng = stream_rng(config.seed, &id, 0);
            let ia = rng.random_range(0..world.players.len());
            let mut ib = rng.random_range(0..world.players.len() - 1);
            if ib >= ia {
                ib += 1;
            }
            generate_rally(&world, &world.players[ia], &world.players[ib], config, id, &mut rng)
        })
        .collect();
    Ok((world, rallies))
}

/// Seeded split by whole rallies; both halves keep the input order.
pub fn split_dataset(rallies: &[Rally], ratio: f64, seed: u64) -> Result<(Vec<Rally>, Vec<Rally>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(contract(format!("split ratio {ratio} outside (0, 1)")));
    }
    let mut idx: Vec<usize> = (0..rallies.len()).collect();
    idx.shuffle(&mut seeded_rng(seed));
    let n_train = (ratio * rallies.len() as f64).round() as usize;
    let mut train_idx = idx[..n_train].to_vec();
    let mut test_idx = idx[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |v: &[usize]| v.iter().map(|&i| rallies[i].clone()).collect();
    Ok((pick(&train_idx), pick(&test_idx)))
}
