use serde::{Deserialize, Serialize};

use super::{Forecaster, MarkovForecaster, StepContext, StrokePrediction, StyleForecaster};
use crate::error::{contract, Result};
use crate::losses::{AreaDistribution, ShotDistribution};

/// Convex combination of a style and a Markov forecaster. `lambda` is the
/// weight on the Markov (history-dependent) part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlendForecaster {
    pub style: StyleForecaster,
    pub markov: MarkovForecaster,
    pub lambda: f64,
}

impl BlendForecaster {
    pub fn new(style: StyleForecaster, markov: MarkovForecaster, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(contract(format!("blend weight {lambda} outside [0, 1]")));
        }
        Ok(BlendForecaster { style, markov, lambda })
    }
}

// (1 - l) * a + l * b; exact at both endpoints.
fn mix(a: f64, b: f64, l: f64) -> f64 {
    (1.0 - l) * a + l * b
}

pub(crate) fn blend_predictions(s: &StrokePrediction, m: &StrokePrediction, lambda: f64) -> StrokePrediction {
    let mut probs = [0.0; 10];
    for (i, p) in probs.iter_mut().enumerate() {
        *p = mix(s.shot.probs[i], m.shot.probs[i], lambda);
    }
    StrokePrediction {
        shot: ShotDistribution { probs },
        area: AreaDistribution {
            mu_x: mix(s.area.mu_x, m.area.mu_x, lambda),
            mu_y: mix(s.area.mu_y, m.area.mu_y, lambda),
            sigma_x: mix(s.area.sigma_x, m.area.sigma_x, lambda),
            sigma_y: mix(s.area.sigma_y, m.area.sigma_y, lambda),
            rho: mix(s.area.rho, m.area.rho, lambda),
        },
    }
}

impl Forecaster for BlendForecaster {
    fn step(&self, ctx: &StepContext<'_>) -> StrokePrediction {
        blend_predictions(&self.style.step(ctx), &self.markov.step(ctx), self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::testing::toy_dataset;
    use crate::forecast::{fit_markov, fit_style};
    use crate::rally::{PlayerRole, PlayerId};

    fn parts() -> (StyleForecaster, MarkovForecaster) {
        let d = toy_dataset();
        (fit_style(&d, 1.0).unwrap(), fit_markov(&d, 1.0, 3).unwrap())
    }

    #[test]
    fn endpoints_are_bit_identical() {
        let (s, m) = parts();
        let data = toy_dataset();
        let (a, b) = (PlayerId::new("pa"), PlayerId::new("pb"));
        let zero = BlendForecaster::new(s.clone(), m.clone(), 0.0).unwrap();
        let one = BlendForecaster::new(s.clone(), m.clone(), 1.0).unwrap();
        for r in &data {
            for k in 1..r.len() {
                let ctx = StepContext {
                    history: &r.strokes[..k],
                    index: k + 1,
                    role: PlayerRole::at_index(k + 1),
                    player_a: &a,
                    player_b: &b,
                };
                assert_eq!(zero.step(&ctx), s.step(&ctx));
                assert_eq!(one.step(&ctx), m.step(&ctx));
            }
        }
    }

    #[test]
    fn midpoint_and_monotone() {
        let (s, m) = parts();
        let r = &toy_dataset()[0];
        let (a, b) = (PlayerId::new("pa"), PlayerId::new("pb"));
        let ctx = StepContext { history: &r.strokes[..3], index: 4, role: PlayerRole::B, player_a: &a, player_b: &b };
        let (ps, pm) = (s.step(&ctx), m.step(&ctx));
        let half = BlendForecaster::new(s.clone(), m.clone(), 0.5).unwrap().step(&ctx);
        for i in 0..10 {
            assert!((half.shot.probs[i] - (ps.shot.probs[i] + pm.shot.probs[i]) / 2.0).abs() < 1e-16);
        }
        assert!(half.is_valid());
        let mut prev: Option<StrokePrediction> = None;
        for l in [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0] {
            let p = BlendForecaster::new(s.clone(), m.clone(), l).unwrap().step(&ctx);
            assert!(p.is_valid());
            if let Some(q) = prev {
                for i in 0..10 {
                    let dir = pm.shot.probs[i] - ps.shot.probs[i];
                    assert!((p.shot.probs[i] - q.shot.probs[i]) * dir.signum() >= -1e-15);
                }
            }
            prev = Some(p);
        }
    }

    #[test]
    fn rejects_out_of_range_weight() {
        let (s, m) = parts();
        assert!(BlendForecaster::new(s.clone(), m.clone(), 1.5).is_err());
        assert!(BlendForecaster::new(s, m, -0.1).is_err());
    }
}
