use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::engine::{exact_shapley, leave_one_out, sampled_shapley, ShapleyValues, DEFAULT_EXACT_CAP};
use super::games::{Feature, GameKind, PayoffConfig, RallyGame, COMPONENTS_PER_OUTPUT};
use crate::error::{contract, Error, Result};
use crate::forecast::Forecaster;
use crate::rally::Rally;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    /// Shot-type cross-entropy.
    Type,
    /// Landing-area negative log-likelihood.
    Area,
    /// Mean of type and area.
    Macro,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Type, Component::Area, Component::Macro];

    pub fn as_str(self) -> &'static str {
        match self {
            Component::Type => "type",
            Component::Area => "area",
            Component::Macro => "macro",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Component {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Component::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| contract(format!("unknown component {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Sampled { permutations: usize, seed: u64 },
    Loo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Sampled { .. } => "sampled",
            Method::Loo => "loo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeOptions {
    pub method: Method,
    pub payoff: PayoffConfig,
    /// Largest feature count accepted by the exact method.
    pub exact_cap: usize,
}

impl Default for AttributeOptions {
    fn default() -> Self {
        AttributeOptions { method: Method::Exact, payoff: PayoffConfig::default(), exact_cap: DEFAULT_EXACT_CAP }
    }
}

/// Attributions of one game on one rally, indexed by (feature, output
/// stroke, component). The macro component is always derived from type and
/// area as their exact mean.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionMatrix {
    pub rally_id: String,
    pub game: GameKind,
    pub method: Method,
    pub tau: usize,
    pub features: Vec<Feature>,
    pub output_strokes: Vec<usize>,
    /// `phi_type[feature][output]`.
    pub phi_type: Vec<Vec<f64>>,
    pub phi_area: Vec<Vec<f64>>,
    /// `stderr[feature][output][component]` for sampled estimates.
    pub stderr: Option<Vec<Vec<[f64; 3]>>>,
    /// Payoffs of the full and empty coalitions, `[type, area]` per output.
    pub v_full: Vec<[f64; 2]>,
    pub v_empty: Vec<[f64; 2]>,
    pub n_evaluations: usize,
}

impl AttributionMatrix {
    pub fn value(&self, feature: usize, output: usize, component: Component) -> f64 {
        let (t, a) = (self.phi_type[feature][output], self.phi_area[feature][output]);
        match component {
            Component::Type => t,
            Component::Area => a,
            Component::Macro => (t + a) / 2.0,
        }
    }

    pub fn stderr(&self, feature: usize, output: usize, component: Component) -> Option<f64> {
        let se = self.stderr.as_ref()?[feature][output][component as usize];
        se.is_finite().then_some(se)
    }

    /// Largest efficiency residual over outputs and components.
    pub fn efficiency_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for o in 0..self.output_strokes.len() {
            for c in Component::ALL {
                let total: f64 = (0..self.features.len()).map(|f| self.value(f, o, c)).sum();
                let (full, empty) = (self.v_full[o], self.v_empty[o]);
                let delta = match c {
                    Component::Type => full[0] - empty[0],
                    Component::Area => full[1] - empty[1],
                    Component::Macro => ((full[0] - empty[0]) + (full[1] - empty[1])) / 2.0,
                };
                worst = worst.max((total - delta).abs());
            }
        }
        worst
    }

    pub fn records(&self) -> Vec<AttributionRecord> {
        let mut out = Vec::with_capacity(self.features.len() * self.output_strokes.len() * 3);
        for (f, feature) in self.features.iter().enumerate() {
            for (o, &output_stroke) in self.output_strokes.iter().enumerate() {
                for component in Component::ALL {
                    out.push(AttributionRecord {
                        rally_id: self.rally_id.clone(),
                        game: self.game,
                        method: self.method.name().to_string(),
                        tau: self.tau,
                        feature: *feature,
                        output_stroke,
                        component,
                        value: self.value(f, o, component),
                        stderr: self.stderr(f, o, component),
                        n_evaluations: self.n_evaluations,
                    });
                }
            }
        }
        out
    }

    /// Rebuilds a matrix from its records (type and area values; macro is
    /// re-derived). Records must all belong to one (rally, game, tau).
    pub fn from_records(records: &[AttributionRecord]) -> Result<Self> {
        let first = records.first().ok_or_else(|| contract("no records"))?;
        let mut features: Vec<Feature> = records.iter().map(|r| r.feature).collect();
        features.sort();
        features.dedup();
        let mut outputs: Vec<usize> = records.iter().map(|r| r.output_stroke).collect();
        outputs.sort();
        outputs.dedup();
        let mut phi_type = vec![vec![f64::NAN; outputs.len()]; features.len()];
        let mut phi_area = phi_type.clone();
        for r in records {
            if r.rally_id != first.rally_id || r.game != first.game || r.tau != first.tau {
                return Err(contract("records from different attributions mixed"));
            }
            let f = features.binary_search(&r.feature).expect("collected");
            let o = outputs.binary_search(&r.output_stroke).expect("collected");
            match r.component {
                Component::Type => phi_type[f][o] = r.value,
                Component::Area => phi_area[f][o] = r.value,
                Component::Macro => {}
            }
        }
        if phi_type.iter().chain(&phi_area).flatten().any(|v| v.is_nan()) {
            return Err(contract(format!(
                "records for rally {} lack type or area values",
                first.rally_id
            )));
        }
        let method = match first.method.as_str() {
            "exact" => Method::Exact,
            "loo" => Method::Loo,
            _ => Method::Sampled { permutations: 0, seed: 0 },
        };
        Ok(AttributionMatrix {
            rally_id: first.rally_id.clone(),
            game: first.game,
            method,
            tau: first.tau,
            features,
            output_strokes: outputs,
            phi_type,
            phi_area,
            stderr: None,
            v_full: Vec::new(),
            v_empty: Vec::new(),
            n_evaluations: first.n_evaluations,
        })
    }
}

/// One machine-readable attribution value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionRecord {
    pub rally_id: String,
    pub game: GameKind,
    pub method: String,
    pub tau: usize,
    pub feature: Feature,
    pub output_stroke: usize,
    pub component: Component,
    pub value: f64,
    pub stderr: Option<f64>,
    pub n_evaluations: usize,
}

fn to_matrix(rally: &Rally, game: &RallyGame<'_>, method: Method, sv: ShapleyValues) -> AttributionMatrix {
    let outputs: Vec<usize> = game.output_strokes().collect();
    let per = COMPONENTS_PER_OUTPUT;
    let pick = |v: &[f64], c: usize| -> Vec<f64> { (0..outputs.len()).map(|o| v[per * o + c]).collect() };
    let pair = |v: &[f64]| -> Vec<[f64; 2]> { (0..outputs.len()).map(|o| [v[per * o], v[per * o + 1]]).collect() };
    let stderr = sv.stderr.as_ref().map(|se| {
        se.iter()
            .map(|row| (0..outputs.len()).map(|o| [row[per * o], row[per * o + 1], row[per * o + 2]]).collect())
            .collect()
    });
    AttributionMatrix {
        rally_id: rally.id.clone(),
        game: game.kind(),
        method,
        tau: rally.tau.unwrap_or_default(),
        features: game.features().to_vec(),
        output_strokes: outputs.clone(),
        phi_type: sv.phi.iter().map(|p| pick(p, 0)).collect(),
        phi_area: sv.phi.iter().map(|p| pick(p, 1)).collect(),
        stderr,
        v_full: pair(&sv.v_full),
        v_empty: pair(&sv.v_empty),
        n_evaluations: sv.evaluations,
    }
}

/// Attributes a forecaster's per-stroke losses on `rally` (which must have
/// `tau` set) to the features of `game`.
pub fn attribute(
    rally: &Rally,
    forecaster: &dyn Forecaster,
    game: GameKind,
    options: &AttributeOptions,
) -> Result<AttributionMatrix> {
    let g = RallyGame::new(rally, forecaster, game, options.payoff)?;
    let n = g.features().len();
    let payoff = |c| g.payoff(c);
    let sv = match options.method {
        Method::Exact => exact_shapley(n, options.exact_cap, payoff)?,
        Method::Sampled { permutations, seed } => sampled_shapley(n, permutations, seed, payoff)?,
        Method::Loo => leave_one_out(n, payoff)?,
    };
    Ok(to_matrix(rally, &g, options.method, sv))
}
