use serde::{Deserialize, Serialize};

use super::moments::{AreaMoments, DEFAULT_AREA};
use super::{target_indices, Forecaster, StepContext, StrokePrediction};
use crate::error::{contract, Error, Result};
use crate::losses::{AreaDistribution, ShotDistribution};
use crate::rally::{Coord, Rally, ShotType, Stroke, NUM_SHOT_TYPES};

/// Next-stroke law for one observed state (previous shot, landing cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub shot: ShotType,
    pub cell_x: usize,
    pub cell_y: usize,
    pub next_shot: ShotDistribution,
    pub next_area: AreaDistribution,
}

impl TransitionRow {
    fn key(&self) -> (usize, usize, usize) {
        (self.shot.code(), self.cell_x, self.cell_y)
    }
}

/// Order-1 Markov chain over (shot type, landing cell) states. Player
/// identity is never read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovForecaster {
    pub alpha: f64,
    pub bins: usize,
    /// Sorted by (shot code, cell_x, cell_y).
    pub transitions: Vec<TransitionRow>,
    pub global_area: AreaDistribution,
}

/// Cell of a coordinate on a `bins x bins` grid over the opponent half.
pub(crate) fn cell(c: Coord, bins: usize) -> (usize, usize) {
    let b = bins as f64;
    let ix = ((c.x + 0.5) * b).floor();
    let iy = (c.y * b).floor();
    let clamp = |v: f64| if v.is_finite() { v.clamp(0.0, b - 1.0) as usize } else { 0 };
    (clamp(ix), clamp(iy))
}

impl MarkovForecaster {
    pub fn row(&self, prev: &Stroke) -> Option<&TransitionRow> {
        let (cx, cy) = cell(prev.area, self.bins);
        let key = (prev.shot.code(), cx, cy);
        self.transitions
            .binary_search_by_key(&key, TransitionRow::key)
            .ok()
            .map(|i| &self.transitions[i])
    }

    pub(crate) fn check(&self) -> Result<()> {
        let sorted = self.transitions.windows(2).all(|w| w[0].key() < w[1].key());
        let valid = self
            .transitions
            .iter()
            .all(|r| r.next_shot.is_valid() && r.next_area.is_valid() && r.cell_x < self.bins && r.cell_y < self.bins);
        if self.bins >= 1 && sorted && valid && self.global_area.is_valid() {
            Ok(())
        } else {
            Err(Error::Model("markov forecaster has an invalid transition table".into()))
        }
    }
}

impl Forecaster for MarkovForecaster {
    fn step(&self, ctx: &StepContext<'_>) -> StrokePrediction {
        let prev = ctx.history.last().expect("forecast context has at least the serve");
        match self.row(prev) {
            Some(row) => StrokePrediction { shot: row.next_shot, area: row.next_area },
            None => StrokePrediction { shot: ShotDistribution::uniform(), area: self.global_area },
        }
    }
}

/// Counts transitions into every target stroke of every rally.
pub fn fit_markov(rallies: &[Rally], alpha: f64, bins: usize) -> Result<MarkovForecaster> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(contract(format!("smoothing alpha must be positive, got {alpha}")));
    }
    if bins == 0 {
        return Err(contract("area grid needs at least one bin"));
    }
    let mut table: std::collections::BTreeMap<(usize, usize, usize), ([f64; NUM_SHOT_TYPES], AreaMoments)> =
        Default::default();
    let mut all = AreaMoments::default();
    for rally in rallies {
        for index in target_indices(rally) {
            let prev = rally.stroke(index - 1);
            let next = rally.stroke(index);
            let (cx, cy) = cell(prev.area, bins);
            let entry = table.entry((prev.shot.code(), cx, cy)).or_default();
            entry.0[next.shot.code()] += 1.0;
            entry.1.push(next.area);
            all.push(next.area);
        }
    }
    if all.count() == 0 {
        return Err(Error::EmptyDataset);
    }
    let global_area = all.fit(&DEFAULT_AREA);
    let transitions = table
        .into_iter()
        .map(|((code, cx, cy), (counts, moments))| {
            Ok(TransitionRow {
                shot: ShotType::ALL[code],
                cell_x: cx,
                cell_y: cy,
                next_shot: ShotDistribution::from_weights(counts.map(|c| c + alpha))?,
                next_area: moments.fit(&global_area),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarkovForecaster { alpha, bins, transitions, global_area })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::testing::{shots, toy_dataset};
    use crate::forecast::{rollout_greedy, ForecastRequest};
    use crate::rally::testing::rally;
    use crate::rally::ShotType::*;
    use crate::rally::{PlayerRole, PlayerId};

    fn ctx_after<'a>(history: &'a [Stroke], a: &'a PlayerId, b: &'a PlayerId) -> StepContext<'a> {
        StepContext {
            history,
            index: history.len() + 1,
            role: PlayerRole::at_index(history.len() + 1),
            player_a: a,
            player_b: b,
        }
    }

    #[test]
    fn deterministic_chain() {
        let shots: Vec<_> = std::iter::once((LongService, 0.1, 0.9))
            .chain((0..12).map(|i| if i % 2 == 0 { (Clear, 0.0, 0.9) } else { (Smash, 0.0, 0.5) }))
            .collect();
        let r = rally("c", &shots, None);
        let f = fit_markov(std::slice::from_ref(&r), 1e-9, 1).unwrap();
        let p = f.step(&ctx_after(&r.strokes[..2], &r.player_a, &r.player_b));
        assert_eq!(r.strokes[1].shot, Clear);
        assert!(p.shot.prob(Smash) > 1.0 - 1e-6);
    }

    #[test]
    fn unseen_state_backs_off() {
        let f = fit_markov(&toy_dataset(), 1.0, 3).unwrap();
        let r = rally("u", &[(ShortService, 0.0, 0.2), (DefensiveShot, 0.0, 0.5)], None);
        let p = f.step(&ctx_after(&r.strokes, &r.player_a, &r.player_b));
        assert_eq!(p.shot, ShotDistribution::uniform());
        assert_eq!(p.area, f.global_area);
    }

    #[test]
    fn single_bin_matches_bigram_counts() {
        let data = toy_dataset();
        let alpha = 1.0;
        let f = fit_markov(&data, alpha, 1).unwrap();
        // independent bigram tally over shot sequences
        let mut counts = [[0.0f64; 10]; 10];
        for r in &data {
            for w in shots(r).windows(2) {
                counts[w[0].code()][w[1].code()] += 1.0;
            }
        }
        for (from, row) in counts.iter().enumerate() {
            let total: f64 = row.iter().sum();
            let mut history = rally("p", &[(ShortService, 0.0, 0.2), (Clear, 0.0, 0.5)], None).strokes;
            history[1].shot = ShotType::ALL[from];
            let p = f.step(&ctx_after(&history, &PlayerId::new("x"), &PlayerId::new("y")));
            for to in 0..10 {
                let expect = if total == 0.0 { 0.1 } else { (row[to] + alpha) / (total + 10.0 * alpha) };
                assert!((p.shot.probs[to] - expect).abs() < 1e-15, "{from}->{to}");
            }
        }
    }

    #[test]
    fn player_blind() {
        let f = fit_markov(&toy_dataset(), 1.0, 3).unwrap();
        let r = toy_dataset()[2].with_tau(3).unwrap();
        let req = ForecastRequest::from_rally(&r, false).unwrap();
        let mut swapped = req.clone();
        std::mem::swap(&mut swapped.player_a, &mut swapped.player_b);
        assert_eq!(
            rollout_greedy(&f, &req).unwrap().predictions,
            rollout_greedy(&f, &swapped).unwrap().predictions
        );
    }

    #[test]
    fn cells_clamp_edges() {
        assert_eq!(cell(Coord::new(-0.5, 0.0), 3), (0, 0));
        assert_eq!(cell(Coord::new(0.5, 1.0), 3), (2, 2));
        assert_eq!(cell(Coord::new(0.0, 0.5), 3), (1, 1));
        assert_eq!(cell(Coord::new(9.0, -3.0), 3), (2, 0));
    }

    #[test]
    fn errors() {
        assert!(matches!(fit_markov(&[], 1.0, 3), Err(Error::EmptyDataset)));
        assert!(fit_markov(&toy_dataset(), 1.0, 0).is_err());
    }
}
