use rallyshap::forecast::{fit_markov, fit_style, BlendForecaster, Decoding};
use rallyshap::rally::{impute_past, impute_player, validate_rally, PlayerRole};
use rallyshap::shapley::{attribute, AttributeOptions, GameKind, Method, PayoffConfig};
use rallyshap::synthdata::{generate_dataset, GeneratorConfig};

fn data(lambda: f64) -> Vec<rallyshap::rally::Rally> {
    let cfg = GeneratorConfig { n_rallies: 150, n_players: 5, lambda, seed: 21, termination_prob: 0.1, ..Default::default() };
    generate_dataset(&cfg).unwrap().1
}

#[test]
fn attribution_on_generated_rallies_is_efficient() {
    let d = data(0.6);
    let f = BlendForecaster::new(fit_style(&d, 1.0).unwrap(), fit_markov(&d, 1.0, 3).unwrap(), 0.5).unwrap();
    let mut n = 0;
    for r in d.iter().filter(|r| r.len() > 5).take(40) {
        let r = r.with_tau(5).unwrap();
        for game in [GameKind::Past, GameKind::Player] {
            let m = attribute(&r, &f, game, &AttributeOptions::default()).unwrap();
            assert!(m.efficiency_residual() <= 1e-9);
            n += 1;
        }
    }
    assert_eq!(n, 80);
}

#[test]
fn content_blind_forecaster_gets_zero_past_attribution_under_every_decoding() {
    let d = data(0.3);
    let f = fit_style(&d, 1.0).unwrap();
    let decodings = [Decoding::Greedy, Decoding::Sample { k: 5, seed: 8 }];
    for r in d.iter().filter(|r| r.len() > 4).take(20) {
        let r = r.with_tau(4).unwrap();
        for decoding in decodings {
            for method in [Method::Exact, Method::Sampled { permutations: 30, seed: 2 }, Method::Loo] {
                let opts = AttributeOptions {
                    method,
                    payoff: PayoffConfig { decoding, impute_feedback: false },
                    ..Default::default()
                };
                let m = attribute(&r, &f, GameKind::Past, &opts).unwrap();
                assert!(m.phi_type.iter().chain(&m.phi_area).flatten().all(|v| v.abs() <= 1e-12));
            }
        }
    }
}

#[test]
fn imputations_keep_generated_rallies_valid() {
    for r in data(0.5).iter().filter(|r| r.len() > 3) {
        for tau in 2..r.len() {
            let r = r.with_tau(tau).unwrap();
            let past = impute_past(&r, &[]).unwrap();
            let both = impute_player(&impute_player(&r, PlayerRole::A, r.len()).unwrap(), PlayerRole::B, r.len()).unwrap();
            for x in [past, both] {
                assert!(validate_rally(&x).is_empty());
                assert_eq!(x.strokes[0], r.strokes[0]);
            }
        }
    }
}
