use std::path::{Path, PathBuf};

use clap::Parser;
use rallyshap::forecast::{load_model, rollout_greedy, ForecastRequest, Forecaster};
use rallyshap::losses::{ce_loss, gaussian_nll};
use rallyshap::rally::{impute_past, impute_player, PlayerRole, Rally};
use rallyshap::shapley::{aggregate_global, rally_score, AttributionRecord, Component, Feature, GameKind, GlobalAggregate};
use rallyshap::synthdata::load_csv;
use rallyshap_cli::commands::{AblationRow, EvalRow, LocalRow};
use rallyshap_cli::error::{EXIT_IO, EXIT_USAGE, EXIT_VALIDATION};
use rallyshap_cli::output::{read_csv, read_jsonl};
use rallyshap_cli::{run, Cli, CliResult};

fn cli(args: &[&str]) -> CliResult<String> {
    let parsed = Cli::try_parse_from(std::iter::once("rallyshap").chain(args.iter().copied())).expect("parse");
    run(&parsed)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Synthesizes a dataset into `dir` and fits a model of `kind` on its train split.
fn world(dir: &Path, n: &str, lambda: &str, kind: &str) -> PathBuf {
    cli(&["--out", p(dir), "--seed", "5", "synth", "--n-rallies", n, "--lambda", lambda, "--n-players", "4"]).unwrap();
    cli(&["--out", p(dir), "fit", "--data", p(&dir.join("train.csv")), "--kind", kind]).unwrap();
    dir.join("model.json")
}

#[test]
fn eval_oracle_is_perfect_and_uniform_is_ln_ten() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    world(d, "60", "0.5", "oracle");
    let test = d.join("train.csv");
    cli(&["--out", p(d), "eval", "--model", p(&d.join("model.json")), "--data", p(&test)]).unwrap();
    let rows: Vec<EvalRow> = read_csv(&d.join("eval.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r.ce.abs() < 1e-9 && r.mse < 1e-20 && r.mae < 1e-10, "{r:?}");
    }
    cli(&["--out", p(d), "fit", "--data", p(&test), "--kind", "uniform"]).unwrap();
    cli(&["--out", p(d), "eval", "--model", p(&d.join("model.json")), "--data", p(&test)]).unwrap();
    let rows: Vec<EvalRow> = read_csv(&d.join("eval.csv")).unwrap();
    for r in &rows {
        assert!((r.ce - 10f64.ln()).abs() < 1e-6);
    }
}

#[test]
fn eval_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let model = world(d, "80", "0.5", "blend");
    let run_once = |sub: &str| {
        let out = d.join(sub);
        cli(&["--out", p(&out), "--seed", "2", "eval", "--model", p(&model), "--data", p(&d.join("test.csv"))]).unwrap();
        (std::fs::read(out.join("eval.csv")).unwrap(), std::fs::read(out.join("eval_rallies.csv")).unwrap())
    };
    assert_eq!(run_once("a"), run_once("b"));
}

#[test]
fn style_past_attribution_is_zero_and_efficiency_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let model = world(d, "60", "0.5", "style");
    let out = d.join("attr");
    let text = cli(&["--out", p(&out), "attribute", "--model", p(&model), "--data", p(&d.join("dataset.csv")), "--tau", "4", "--game", "past"]).unwrap();
    assert!(text.contains("(ok)"));
    let global: Vec<GlobalAggregate> = read_jsonl(&out.join("global.jsonl")).unwrap();
    assert_eq!(global.len(), 3);
    for g in global {
        assert!(g.mean.abs() <= 1e-12 && g.ci_low.abs() <= 1e-12 && g.ci_high.abs() <= 1e-12);
    }
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["efficiency_ok"], true);
    assert!(summary["max_efficiency_residual"].as_f64().unwrap() <= 1e-9);
}

/// Loss vector of a greedy rollout on `imputed`, scored against `truth`.
fn brute_losses(f: &dyn Forecaster, imputed: &Rally, truth: &Rally) -> Vec<[f64; 2]> {
    let out = rollout_greedy(f, &ForecastRequest::from_rally(imputed, false).unwrap()).unwrap();
    let tau = truth.tau.unwrap();
    out.predictions
        .iter()
        .zip(&truth.strokes[tau..])
        .map(|(p, t)| [ce_loss(&p.shot, t.shot).unwrap(), gaussian_nll(&p.area, t.area).unwrap()])
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn attribute_matches_brute_force_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let model_path = world(d, "60", "0.6", "blend");
    let data = d.join("dataset.csv");
    let rallies: Vec<Rally> = load_csv(&data).unwrap().into_iter().filter(|r| r.len() > 4).take(20).collect();
    assert_eq!(rallies.len(), 20);
    let subset = d.join("subset.csv");
    rallies_to_csv(&rallies, &subset);
    let out = d.join("attr");
    cli(&["--out", p(&out), "attribute", "--model", p(&model_path), "--data", p(&subset), "--tau", "4"]).unwrap();
    let records: Vec<AttributionRecord> = read_jsonl(&out.join("attributions.jsonl")).unwrap();
    let model = load_model(&model_path).unwrap();
    let mut checked = 0;
    for r in &rallies {
        let r = r.with_tau(4).unwrap();
        // past game: features are strokes 2..=4, kept strokes are the permutation prefix
        let feats = [2usize, 3, 4];
        let past_payoff = |keep: &[usize]| brute_losses(&model, &impute_past(&r, keep).unwrap(), &r);
        let player_payoff = |keep: &[usize]| {
            let mut x = r.clone();
            for (i, role) in [PlayerRole::A, PlayerRole::B].into_iter().enumerate() {
                if !keep.contains(&i) {
                    x = impute_player(&x, role, x.len()).unwrap();
                }
            }
            brute_losses(&model, &x, &r)
        };
        for (game, n) in [(GameKind::Past, 3usize), (GameKind::Player, 2)] {
            let perms = permutations(n);
            let outputs = r.len() - 4;
            let mut phi = vec![vec![[0.0; 2]; outputs]; n];
            for perm in &perms {
                let mut kept: Vec<usize> = Vec::new();
                for &i in perm {
                    let as_keep = |k: &[usize]| -> Vec<[f64; 2]> {
                        match game {
                            GameKind::Past => past_payoff(&k.iter().map(|&j| feats[j]).collect::<Vec<_>>()),
                            GameKind::Player => player_payoff(k),
                        }
                    };
                    let before = as_keep(&kept);
                    kept.push(i);
                    let after = as_keep(&kept);
                    for o in 0..outputs {
                        for c in 0..2 {
                            // payoff is the negated loss
                            phi[i][o][c] += (before[o][c] - after[o][c]) / perms.len() as f64;
                        }
                    }
                }
            }
            for rec in records.iter().filter(|x| x.rally_id == r.id && x.game == game) {
                let i = match rec.feature {
                    Feature::PastStroke(s) => s - 2,
                    Feature::Player(PlayerRole::A) => 0,
                    Feature::Player(PlayerRole::B) => 1,
                };
                let o = rec.output_stroke - 5;
                let expect = match rec.component {
                    Component::Type => phi[i][o][0],
                    Component::Area => phi[i][o][1],
                    Component::Macro => (phi[i][o][0] + phi[i][o][1]) / 2.0,
                };
                assert!((rec.value - expect).abs() <= 1e-9, "{rec:?} vs {expect}");
                checked += 1;
            }
        }
    }
    let expected: usize = rallies.iter().map(|r| (r.len() - 4) * (3 + 2) * 3).sum();
    assert_eq!(checked, expected);
}

fn rallies_to_csv(rallies: &[Rally], path: &Path) {
    rallyshap::synthdata::save_csv(rallies, path).unwrap();
}

#[test]
fn ablate_past_on_style_is_exactly_zero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    world(d, "150", "0.0", "style");
    let (tr, te) = (d.join("train.csv"), d.join("test.csv"));
    cli(&["--out", p(d), "ablate", "--train", p(&tr), "--test", p(&te), "--target", "past", "--kind", "style", "--tau", "2,4"]).unwrap();
    let rows: Vec<AblationRow> = read_csv(&d.join("ablation.csv")).unwrap();
    assert_eq!(rows.len(), 8);
    for chunk in rows.chunks(4) {
        let labels: Vec<&str> = chunk.iter().map(|r| r.row.as_str()).collect();
        assert_eq!(labels, ["original", "w/o past", "difference", "noise band"]);
        for i in 0..3 {
            assert_eq!(chunk[2].metrics()[i], chunk[0].metrics()[i] - chunk[1].metrics()[i]);
            assert_eq!(chunk[2].metrics()[i], 0.0);
            assert!(chunk[3].metrics()[i] > 0.0);
        }
    }
}

#[test]
fn ablate_player_on_markov_matches_hand_pipeline() {
    use rallyshap::forecast::{evaluate, fit_markov};
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    world(d, "120", "0.7", "markov");
    let (tr, te) = (d.join("train.csv"), d.join("test.csv"));
    cli(&["--out", p(d), "--seed", "4", "ablate", "--train", p(&tr), "--test", p(&te), "--target", "player", "--kind", "markov", "--tau", "4", "--k", "3"]).unwrap();
    let rows: Vec<AblationRow> = read_csv(&d.join("ablation.csv")).unwrap();
    // hand-driven: fit on imputed copies, evaluate, average over the two roles
    let train: Vec<Rally> = load_csv(&tr).unwrap().iter().filter(|r| r.len() > 4).map(|r| r.with_tau(4).unwrap()).collect();
    let test = load_csv(&te).unwrap();
    let orig = evaluate(&fit_markov(&train, 1.0, 3).unwrap(), &test, 4, 3, 4).unwrap().mean;
    let mut ce = 0.0;
    for role in [PlayerRole::A, PlayerRole::B] {
        let imp: Vec<Rally> = train.iter().map(|r| impute_player(r, role, r.len()).unwrap()).collect();
        ce += evaluate(&fit_markov(&imp, 1.0, 3).unwrap(), &test, 4, 3, 4).unwrap().mean.ce / 2.0;
    }
    assert_eq!(rows[0].ce, orig.ce);
    assert!((rows[1].ce - ce).abs() < 1e-12);
    assert!((rows[2].ce - (orig.ce - ce)).abs() < 1e-12);
}

#[test]
fn reports_reuse_attribute_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let model = world(d, "80", "0.6", "blend");
    let out = d.join("attr");
    cli(&["--out", p(&out), "--seed", "9", "attribute", "--model", p(&model), "--data", p(&d.join("test.csv")), "--tau", "2,4", "--resamples", "300"]).unwrap();

    // global: same numbers as aggregate_global on the per-rally scores
    cli(&["--out", p(&out), "report", "--mode", "global"]).unwrap();
    let exported: Vec<GlobalAggregate> = read_csv(&out.join("report_global.csv")).unwrap();
    let written: Vec<GlobalAggregate> = read_jsonl(&out.join("global.jsonl")).unwrap();
    assert_eq!(exported, written);
    let records: Vec<AttributionRecord> = read_jsonl(&out.join("attributions.jsonl")).unwrap();
    for game in [GameKind::Past, GameKind::Player] {
        let mut ids: Vec<&str> = records.iter().filter(|r| r.game == game && r.tau == 4).map(|r| r.rally_id.as_str()).collect();
        ids.dedup();
        let scores: Vec<[f64; 3]> = ids
            .iter()
            .map(|id| {
                let recs: Vec<AttributionRecord> =
                    records.iter().filter(|r| r.rally_id == *id && r.game == game && r.tau == 4).cloned().collect();
                rally_score(&rallyshap::shapley::AttributionMatrix::from_records(&recs).unwrap()).unwrap()
            })
            .collect();
        let cfg = rallyshap::shapley::BootstrapConfig { resamples: 300, seed: 9, ..Default::default() };
        let stats = aggregate_global(&scores, &cfg).unwrap();
        for (c, s) in stats.iter().enumerate() {
            let row = exported.iter().find(|g| g.game == game && g.tau == 4 && g.component as usize == c).unwrap();
            assert_eq!((row.mean, row.ci_low, row.ci_high), (s.mean, s.ci_low, s.ci_high));
        }
    }

    // local: (|R| - tau) x 3 rows per game, macro exact, export reloads equal
    let rally = load_csv(&d.join("test.csv")).unwrap().into_iter().find(|r| r.len() > 4).unwrap();
    cli(&["--out", p(&out), "report", "--mode", "local", "--rally-id", &rally.id, "--tau", "4"]).unwrap();
    let local: Vec<LocalRow> = read_csv(&out.join("report_local.csv")).unwrap();
    for game in [GameKind::Past, GameKind::Player] {
        let rows: Vec<&LocalRow> = local.iter().filter(|r| r.game == game).collect();
        assert_eq!(rows.len(), (rally.len() - 4) * 3);
        for trio in rows.chunks(3) {
            assert_eq!(trio[2].value, (trio[0].value + trio[1].value) / 2.0);
        }
    }

    let err = cli(&["--out", p(&out), "report", "--mode", "local", "--rally-id", "nope"]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_USAGE);
    assert!(err.to_string().contains(&rally.id));
    let err = cli(&["--out", p(&out), "report", "--mode", "local", "--rally-id", &rally.id]).unwrap_err();
    assert!(err.to_string().contains("--tau"));
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let missing = d.join("missing.csv");
    let err = cli(&["--out", p(d), "fit", "--data", p(&missing)]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_IO);
    let bad = d.join("bad.csv");
    std::fs::write(&bad, "rally_id,stroke_no,player_id,role,shot_type,landing_x,landing_y\nr,1,a,A,smashh,0,0.1\n").unwrap();
    let err = cli(&["--out", p(d), "fit", "--data", p(&bad)]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_VALIDATION);
    let err = cli(&["--out", p(d), "synth", "--termination-prob", "0"]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_USAGE);
    let cfg = d.join("c.toml");
    std::fs::write(&cfg, "[synth]\nlambdaa = 1\n").unwrap();
    let err = cli(&["--config", p(&cfg), "--out", p(d), "synth"]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_USAGE);
}

#[test]
fn config_file_feeds_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = d.join("run.toml");
    std::fs::write(&cfg, format!("seed = 3\nout = {:?}\n[synth]\nn_rallies = 25\nsplit = 0.6\n", p(d))).unwrap();
    let text = cli(&["--config", p(&cfg), "synth"]).unwrap();
    assert!(text.contains("generated 25 rallies"), "{text}");
    assert!(text.contains("train 15, test 10"), "{text}");
}
