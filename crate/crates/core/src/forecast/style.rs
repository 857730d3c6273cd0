use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::moments::{moment_match, AreaMoments, DEFAULT_AREA};
use super::{target_indices, Forecaster, StepContext, StrokePrediction};
use crate::error::{contract, Error, Result};
use crate::losses::{AreaDistribution, ShotDistribution};
use crate::rally::{PlayerId, Rally, NUM_SHOT_TYPES};

/// Shot preferences and per-shot landing Gaussians of one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleProfile {
    pub shots: ShotDistribution,
    pub areas: [AreaDistribution; NUM_SHOT_TYPES],
}

impl StyleProfile {
    /// Landing Gaussian marginalised over the shot preferences.
    pub fn marginal_area(&self) -> AreaDistribution {
        moment_match(&self.shots.probs, &self.areas)
    }

    fn is_valid(&self) -> bool {
        self.shots.is_valid() && self.areas.iter().all(AreaDistribution::is_valid)
    }
}

/// Predicts from the hitter's identity alone. Past stroke content is never
/// read, so every past stroke is a dummy feature for this model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleForecaster {
    pub alpha: f64,
    pub players: BTreeMap<PlayerId, StyleProfile>,
    /// Used for identities never seen during fitting.
    pub global: StyleProfile,
}

impl StyleForecaster {
    pub fn profile(&self, player: &PlayerId) -> &StyleProfile {
        self.players.get(player).unwrap_or(&self.global)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.global.is_valid() && self.players.values().all(StyleProfile::is_valid) {
            Ok(())
        } else {
            Err(Error::Model("style forecaster holds an invalid distribution".into()))
        }
    }
}

impl Forecaster for StyleForecaster {
    fn step(&self, ctx: &StepContext<'_>) -> StrokePrediction {
        let profile = self.profile(ctx.player());
        StrokePrediction {
            shot: profile.shots,
            area: profile.marginal_area(),
        }
    }
}

#[derive(Default)]
struct Tally {
    counts: [f64; NUM_SHOT_TYPES],
    areas: [AreaMoments; NUM_SHOT_TYPES],
    all: AreaMoments,
}

fn smoothed(counts: &[f64; NUM_SHOT_TYPES], alpha: f64) -> Result<ShotDistribution> {
    ShotDistribution::from_weights(counts.map(|c| c + alpha))
}

/// Per-player shot frequencies with additive smoothing `alpha` and per
/// (player, shot) landing moments. Only each rally's target strokes are
/// counted, attributed to the id recorded on the stroke.
pub fn fit_style(rallies: &[Rally], alpha: f64) -> Result<StyleForecaster> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(contract(format!("smoothing alpha must be positive, got {alpha}")));
    }
    let mut global = Tally::default();
    let mut per_player: BTreeMap<PlayerId, Tally> = BTreeMap::new();
    for rally in rallies {
        for index in target_indices(rally) {
            let s = rally.stroke(index);
            let c = s.shot.code();
            let t = per_player.entry(s.player_id.clone()).or_default();
            for tally in [&mut global, t] {
                tally.counts[c] += 1.0;
                tally.areas[c].push(s.area);
                tally.all.push(s.area);
            }
        }
    }
    if global.all.count() == 0 {
        return Err(Error::EmptyDataset);
    }
    let overall = global.all.fit(&DEFAULT_AREA);
    let global_areas = global.areas.each_ref().map(|m| m.fit(&overall));
    let global_profile = StyleProfile {
        shots: smoothed(&global.counts, alpha)?,
        areas: global_areas,
    };
    let players = per_player
        .into_iter()
        .map(|(id, t)| {
            let areas = std::array::from_fn(|c| t.areas[c].fit(&global_areas[c]));
            Ok((id, StyleProfile { shots: smoothed(&t.counts, alpha)?, areas }))
        })
        .collect::<Result<_>>()?;
    Ok(StyleForecaster { alpha, players, global: global_profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::testing::toy_dataset;
    use crate::forecast::{rollout_greedy, ForecastRequest};
    use crate::rally::testing::rally;
    use crate::rally::ShotType::{self, *};
    use crate::rally::impute_past;

    #[test]
    fn all_smash_player_tends_to_one_hot() {
        let shots: Vec<_> = std::iter::once((ShortService, 0.1, 0.2))
            .chain((0..9).map(|_| (Smash, 0.1, 0.5)))
            .collect();
        let f = fit_style(&[rally("s", &shots, None)], 1e-9).unwrap();
        // stroke 2 onward: pb hits 2,4,..; pa hits 3,5,..
        let p = f.profile(&PlayerId::new("pb"));
        assert!(p.shots.prob(Smash) > 1.0 - 1e-6);
        assert!(p.shots.is_valid());
    }

    #[test]
    fn huge_alpha_tends_to_uniform() {
        let f = fit_style(&toy_dataset(), 1e12).unwrap();
        for p in f.players.values() {
            for q in p.shots.probs {
                assert!((q - 0.1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn hand_tally() {
        let data = toy_dataset();
        let alpha = 0.5;
        let f = fit_style(&data, alpha).unwrap();
        // hand-counted targets (strokes 2..): pb hits even, pa odd
        // pb: t1 Clear, Drop; t2 Clear, NetShot; t3 NetShot, Clear, Drive -> 7
        // pa: t1 Smash, Lob; t2 Smash; t3 Lob, Smash -> 5
        let expect = |counts: &[(ShotType, f64)], total: f64, t: ShotType| {
            let c = counts.iter().find(|(s, _)| *s == t).map_or(0.0, |x| x.1);
            (c + alpha) / (total + 10.0 * alpha)
        };
        let pb = [(Clear, 3.0), (Drop, 1.0), (NetShot, 2.0), (Drive, 1.0)];
        let pa = [(Smash, 3.0), (Lob, 2.0)];
        for t in ShotType::ALL {
            let got_b = f.profile(&"pb".into()).shots.prob(t);
            let got_a = f.profile(&"pa".into()).shots.prob(t);
            assert!((got_b - expect(&pb, 7.0, t)).abs() < 1e-15, "{t}");
            assert!((got_a - expect(&pa, 5.0, t)).abs() < 1e-15, "{t}");
        }
        // pa smashes three times -> own moments; pb drops once -> global drop moments
        let smash = f.profile(&"pa".into()).areas[Smash.code()];
        assert!((smash.mu_x - (0.3 - 0.1 + 0.1) / 3.0).abs() < 1e-12);
        assert_eq!(f.profile(&"pb".into()).areas[Drop.code()], f.global.areas[Drop.code()]);
    }

    #[test]
    fn empty_and_bad_alpha() {
        assert!(matches!(fit_style(&[], 1.0), Err(Error::EmptyDataset)));
        assert!(fit_style(&toy_dataset(), 0.0).is_err());
    }

    #[test]
    fn ignores_past_content() {
        let f = fit_style(&toy_dataset(), 1.0).unwrap();
        let r = toy_dataset()[2].with_tau(4).unwrap();
        let a = rollout_greedy(&f, &ForecastRequest::from_rally(&r, false).unwrap()).unwrap();
        let imputed = impute_past(&r, &[]).unwrap();
        let b = rollout_greedy(&f, &ForecastRequest::from_rally(&imputed, false).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
