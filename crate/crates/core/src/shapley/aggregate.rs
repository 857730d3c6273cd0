//! Rally-level and dataset-level aggregation of attribution matrices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::attribution::{AttributionMatrix, Component};
use super::games::{Feature, GameKind};
use crate::error::{contract, Result};
use crate::rng::seeded_rng;

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_CI_LEVEL: f64 = 0.95;

/// Per-feature means over output strokes, `[type, area, macro]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RallyAggregate {
    pub rally_id: String,
    pub game: GameKind,
    pub tau: usize,
    pub features: Vec<Feature>,
    pub values: Vec<[f64; 3]>,
}

/// Arithmetic mean computed as an offset from the first element, so a list
/// of identical values averages to that value exactly.
pub fn shifted_mean(xs: &[f64]) -> f64 {
    let Some(&x0) = xs.first() else { return f64::NAN };
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

fn with_macro(t: f64, a: f64) -> [f64; 3] {
    [t, a, (t + a) / 2.0]
}

pub fn aggregate_rally(m: &AttributionMatrix) -> Result<RallyAggregate> {
    if m.features.is_empty() || m.output_strokes.is_empty() {
        return Err(contract(format!("empty attribution matrix for rally {}", m.rally_id)));
    }
    let values = (0..m.features.len())
        .map(|f| with_macro(shifted_mean(&m.phi_type[f]), shifted_mean(&m.phi_area[f])))
        .collect();
    Ok(RallyAggregate { rally_id: m.rally_id.clone(), game: m.game, tau: m.tau, features: m.features.clone(), values })
}

/// Mean of the two players' attributions per output stroke, `[type, area, macro]`.
pub fn combine_players(m: &AttributionMatrix) -> Result<Vec<[f64; 3]>> {
    if m.game != GameKind::Player || m.features.len() != 2 {
        return Err(contract(format!("combine_players needs a player-game matrix, got {}", m.game)));
    }
    Ok((0..m.output_strokes.len())
        .map(|o| {
            with_macro(
                (m.phi_type[0][o] + m.phi_type[1][o]) / 2.0,
                (m.phi_area[0][o] + m.phi_area[1][o]) / 2.0,
            )
        })
        .collect())
}

/// One scalar per component for the whole rally: the past game averages the
/// per-feature aggregates, the player game averages the combined players
/// over output strokes.
pub fn rally_score(m: &AttributionMatrix) -> Result<[f64; 3]> {
    let (t, a): (Vec<f64>, Vec<f64>) = match m.game {
        GameKind::Past => aggregate_rally(m)?.values.iter().map(|v| (v[0], v[1])).unzip(),
        GameKind::Player => combine_players(m)?.iter().map(|v| (v[0], v[1])).unzip(),
    };
    Ok(with_macro(shifted_mean(&t), shifted_mean(&a)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { resamples: DEFAULT_RESAMPLES, level: DEFAULT_CI_LEVEL, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalStat {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl GlobalStat {
    pub fn excludes_zero(&self) -> bool {
        self.ci_low > 0.0 || self.ci_high < 0.0
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean of per-rally `[type, area, macro]` scores with percentile bootstrap
/// intervals. All components share the resampled indices and macro is
/// derived from type and area in every resample.
pub fn aggregate_global(rows: &[[f64; 3]], cfg: &BootstrapConfig) -> Result<[GlobalStat; 3]> {
    if rows.is_empty() {
        return Err(contract("aggregate_global needs at least one rally"));
    }
    if cfg.resamples == 0 || !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(contract("bootstrap needs resamples >= 1 and a level in (0, 1)"));
    }
    let n = rows.len();
    let col = |c: usize, idx: &mut dyn Iterator<Item = usize>| -> f64 {
        shifted_mean(&idx.map(|i| rows[i][c]).collect::<Vec<_>>())
    };
    let point = with_macro(col(0, &mut (0..n)), col(1, &mut (0..n)));
    let mut rng = seeded_rng(cfg.seed);
    let mut boot: [Vec<f64>; 3] = Default::default();
    let mut idx = vec![0usize; n];
    for _ in 0..cfg.resamples {
        idx.iter_mut().for_each(|i| *i = rng.random_range(0..n));
        let m = with_macro(col(0, &mut idx.iter().copied()), col(1, &mut idx.iter().copied()));
        for c in 0..3 {
            boot[c].push(m[c]);
        }
    }
    let alpha = (1.0 - cfg.level) / 2.0;
    Ok(std::array::from_fn(|c| {
        boot[c].sort_by(f64::total_cmp);
        GlobalStat { mean: point[c], ci_low: quantile(&boot[c], alpha), ci_high: quantile(&boot[c], 1.0 - alpha) }
    }))
}

/// Percentile bootstrap of a single mean. Draws the same index stream as
/// [`aggregate_global`].
pub fn bootstrap_mean(values: &[f64], cfg: &BootstrapConfig) -> Result<GlobalStat> {
    let rows: Vec<[f64; 3]> = values.iter().map(|&v| [v, v, v]).collect();
    Ok(aggregate_global(&rows, cfg)?[0])
}

/// One row of the dataset-level summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalAggregate {
    pub game: GameKind,
    pub tau: usize,
    pub component: Component,
    pub n_rallies: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub resamples: usize,
}

/// Global aggregates grouped by (game, tau), three component rows each,
/// sorted by game, tau, component.
pub fn global_table(matrices: &[AttributionMatrix], cfg: &BootstrapConfig) -> Result<Vec<GlobalAggregate>> {
    let mut groups: std::collections::BTreeMap<(GameKind, usize), Vec<[f64; 3]>> = Default::default();
    let mut sorted: Vec<&AttributionMatrix> = matrices.iter().collect();
    sorted.sort_by(|a, b| (a.game, a.tau, &a.rally_id).cmp(&(b.game, b.tau, &b.rally_id)));
    for m in sorted {
        groups.entry((m.game, m.tau)).or_default().push(rally_score(m)?);
    }
    let mut out = Vec::new();
    for ((game, tau), rows) in groups {
        let stats = aggregate_global(&rows, cfg)?;
        for c in Component::ALL {
            let s = stats[c as usize];
            out.push(GlobalAggregate {
                game,
                tau,
                component: c,
                n_rallies: rows.len(),
                mean: s.mean,
                ci_low: s.ci_low,
                ci_high: s.ci_high,
                level: cfg.level,
                resamples: cfg.resamples,
            });
        }
    }
    Ok(out)
}
