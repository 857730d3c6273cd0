//! Fitted-model documents.
//!
//! A model file is a JSON object:
//!
//! ```text
//! { "format": "rallyshap-model", "version": 1,
//!   "model": { "kind": "style" | "markov" | "blend" | "uniform" | "oracle", ... } }
//! ```
//!
//! * `style`: `alpha`, `players` (id -> `{shots: [10 probs], areas: [10 x
//!   {mu_x, mu_y, sigma_x, sigma_y, rho}]}`), `global` (same profile shape).
//! * `markov`: `alpha`, `bins`, `transitions` (rows of `{shot, cell_x,
//!   cell_y, next_shot, next_area}` sorted by shot code then cell), and
//!   `global_area`.
//! * `blend`: `style`, `markov` (as above) and `lambda`.
//! * `uniform`: `area`.
//! * `oracle`: `rallies`, a map from rally key to the stroke list.
//!
//! Floats are written in shortest round-trip form, so save/load is exact.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BlendForecaster, Forecaster, MarkovForecaster, StepContext, StrokePrediction, StyleForecaster};
use crate::error::{Error, Result};
use crate::losses::{AreaDistribution, ShotDistribution};
use crate::rally::{Coord, PlayerId, Rally, ShotType};

pub const MODEL_FORMAT: &str = "rallyshap-model";
pub const MODEL_VERSION: u32 = 1;

/// Uniform shot law and a fixed wide landing Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformForecaster {
    pub area: AreaDistribution,
}

impl Default for UniformForecaster {
    fn default() -> Self {
        UniformForecaster {
            area: AreaDistribution { mu_x: 0.0, mu_y: 0.5, sigma_x: 1.0, sigma_y: 1.0, rho: 0.0 },
        }
    }
}

impl Forecaster for UniformForecaster {
    fn step(&self, _ctx: &StepContext<'_>) -> StrokePrediction {
        StrokePrediction { shot: ShotDistribution::uniform(), area: self.area }
    }
}

/// Spread of the oracle's landing Gaussian.
const ORACLE_SIGMA: f64 = 1e-12;

/// Looks up the true continuation of a known rally. Rallies are identified
/// by both player ids and the exact serve. Only meaningful for evaluation
/// sanity checks; unknown rallies get a uniform prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleForecaster {
    pub rallies: BTreeMap<String, Vec<(ShotType, Coord)>>,
}

fn oracle_key(a: &PlayerId, b: &PlayerId, serve: Coord) -> String {
    format!("{a}|{b}|{:016x}|{:016x}", serve.x.to_bits(), serve.y.to_bits())
}

impl OracleForecaster {
    pub fn from_rallies(rallies: &[Rally]) -> Self {
        let rallies = rallies
            .iter()
            .map(|r| {
                (
                    oracle_key(&r.player_a, &r.player_b, r.strokes[0].area),
                    r.strokes.iter().map(|s| (s.shot, s.area)).collect(),
                )
            })
            .collect();
        OracleForecaster { rallies }
    }
}

impl Forecaster for OracleForecaster {
    fn step(&self, ctx: &StepContext<'_>) -> StrokePrediction {
        let key = oracle_key(ctx.player_a, ctx.player_b, ctx.history[0].area);
        match self.rallies.get(&key).and_then(|s| s.get(ctx.index - 1)) {
            Some(&(shot, c)) => StrokePrediction {
                shot: ShotDistribution::one_hot(shot),
                area: AreaDistribution { mu_x: c.x, mu_y: c.y, sigma_x: ORACLE_SIGMA, sigma_y: ORACLE_SIGMA, rho: 0.0 },
            },
            None => UniformForecaster::default().step(ctx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Style(StyleForecaster),
    Markov(MarkovForecaster),
    Blend(BlendForecaster),
    Uniform(UniformForecaster),
    Oracle(OracleForecaster),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Style(_) => "style",
            Model::Markov(_) => "markov",
            Model::Blend(_) => "blend",
            Model::Uniform(_) => "uniform",
            Model::Oracle(_) => "oracle",
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            Model::Style(s) => s.check(),
            Model::Markov(m) => m.check(),
            Model::Blend(b) => {
                if !(0.0..=1.0).contains(&b.lambda) {
                    return Err(Error::Model(format!("blend weight {} outside [0, 1]", b.lambda)));
                }
                b.style.check()?;
                b.markov.check()
            }
            Model::Uniform(u) => u
                .area
                .check()
                .map_err(|_| Error::Model("uniform forecaster has an invalid area".into())),
            Model::Oracle(_) => Ok(()),
        }
    }
}

impl Forecaster for Model {
    fn step(&self, ctx: &StepContext<'_>) -> StrokePrediction {
        match self {
            Model::Style(f) => f.step(ctx),
            Model::Markov(f) => f.step(ctx),
            Model::Blend(f) => f.step(ctx),
            Model::Uniform(f) => f.step(ctx),
            Model::Oracle(f) => f.step(ctx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub model: Model,
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let doc = ModelFile { format: MODEL_FORMAT.into(), version: MODEL_VERSION, model: model.clone() };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path)?;
    let doc: ModelFile = serde_json::from_str(&text)?;
    if doc.format != MODEL_FORMAT {
        return Err(Error::Model(format!("unexpected format tag {:?}", doc.format)));
    }
    if doc.version != MODEL_VERSION {
        return Err(Error::Model(format!("unsupported version {}", doc.version)));
    }
    doc.model.check()?;
    Ok(doc.model)
}
