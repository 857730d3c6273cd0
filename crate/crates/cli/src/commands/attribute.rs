use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rallyshap::forecast::{Forecaster, Model};
use rallyshap::rally::Rally;
use rallyshap::shapley::{
    aggregate_rally, attribute, global_table, rally_score, AttributeOptions, AttributionMatrix, AttributionRecord,
    Component, GameKind, GlobalAggregate, Method, PayoffConfig, RallyAggregate, EFFICIENCY_TOLERANCE,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{ComponentArg, GameArg, MethodArg};
use crate::config::AttributeOpts;
use crate::error::CliResult;
use crate::output::{ensure_dir, num, read_dataset, read_model, table, write_csv, write_jsonl, write_text};

pub const RECORDS_FILE: &str = "attributions.jsonl";
pub const GLOBAL_FILE: &str = "global.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RallyScoreRow {
    pub rally_id: String,
    pub game: GameKind,
    pub tau: usize,
    #[serde(rename = "type")]
    pub type_: f64,
    pub area: f64,
    #[serde(rename = "macro")]
    pub macro_: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSummary {
    pub method: String,
    pub games: Vec<GameKind>,
    pub taus: Vec<usize>,
    pub rallies_attributed: Vec<(usize, usize)>,
    pub rallies_skipped: Vec<(usize, usize)>,
    pub n_records: usize,
    /// Largest efficiency residual over all matrices and components.
    pub max_efficiency_residual: f64,
    pub efficiency_ok: bool,
}

pub struct AttributeOutput {
    pub matrices: Vec<AttributionMatrix>,
    pub records: Vec<AttributionRecord>,
    pub global: Vec<GlobalAggregate>,
    pub summary: AttributeSummary,
    pub text: String,
}

pub fn games(g: GameArg) -> Vec<GameKind> {
    match g {
        GameArg::Past => vec![GameKind::Past],
        GameArg::Player => vec![GameKind::Player],
        GameArg::Both => vec![GameKind::Past, GameKind::Player],
    }
}

pub fn component_filter(c: ComponentArg) -> impl Fn(Component) -> bool {
    move |x| match c {
        ComponentArg::All => true,
        ComponentArg::Type => x == Component::Type,
        ComponentArg::Area => x == Component::Area,
        ComponentArg::Macro => x == Component::Macro,
    }
}

/// Attribution matrices for every rally longer than each tau, ordered by
/// (tau, game, input order).
pub fn attribute_all(
    model: &dyn Forecaster,
    rallies: &[Rally],
    o: &AttributeOpts,
    seed: u64,
) -> CliResult<(Vec<AttributionMatrix>, Vec<(usize, usize)>)> {
    let method = match o.method {
        MethodArg::Exact => Method::Exact,
        MethodArg::Sampled => Method::Sampled { permutations: o.samples, seed },
        MethodArg::Loo => Method::Loo,
    };
    let opts = AttributeOptions {
        method,
        payoff: PayoffConfig { decoding: o.decoding, impute_feedback: o.impute_feedback },
        exact_cap: o.exact_cap,
    };
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for &tau in &o.taus {
        let usable: Vec<Rally> = rallies.iter().filter(|r| r.len() > tau).map(|r| r.with_tau(tau)).collect::<Result<_, _>>()?;
        skipped.push((tau, rallies.len() - usable.len()));
        for game in games(o.game) {
            let done = AtomicUsize::new(0);
            let total = usable.len();
            let mats = usable
                .par_iter()
                .map(|r| {
                    let m = attribute(r, model, game, &opts);
                    let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                    if n.is_multiple_of(250) || n == total {
                        log::info!("tau {tau}, {game} game: {n}/{total} rallies");
                    }
                    m
                })
                .collect::<Result<Vec<_>, _>>()?;
            out.extend(mats);
        }
    }
    Ok((out, skipped))
}

fn global_text(rows: &[GlobalAggregate]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|g| {
            vec![
                g.game.to_string(),
                g.tau.to_string(),
                g.component.to_string(),
                g.n_rallies.to_string(),
                num(g.mean),
                format!("[{}, {}]", num(g.ci_low), num(g.ci_high)),
            ]
        })
        .collect();
    table(&["game", "tau", "component", "rallies", "mean", "95% CI"], &body)
}

/// Writes the attribution records, per-rally aggregates, global aggregates
/// and a summary into `out`.
pub fn cmd_attribute(o: &AttributeOpts, seed: u64, out: &Path) -> CliResult<AttributeOutput> {
    let model: Model = read_model(&o.model)?;
    let rallies = read_dataset(&o.data)?;
    let (matrices, skipped) = attribute_all(&model, &rallies, o, seed)?;
    let keep = component_filter(o.component);
    let records: Vec<AttributionRecord> =
        matrices.iter().flat_map(|m| m.records()).filter(|r| keep(r.component)).collect();
    let aggregates: Vec<RallyAggregate> = matrices.iter().map(aggregate_rally).collect::<Result<_, _>>()?;
    let scores: Vec<RallyScoreRow> = matrices
        .iter()
        .map(|m| {
            let s = rally_score(m)?;
            Ok(RallyScoreRow { rally_id: m.rally_id.clone(), game: m.game, tau: m.tau, type_: s[0], area: s[1], macro_: s[2] })
        })
        .collect::<Result<_, rallyshap::Error>>()?;
    let global: Vec<GlobalAggregate> =
        global_table(&matrices, &o.bootstrap)?.into_iter().filter(|g| keep(g.component)).collect();
    let residual = matrices.iter().map(AttributionMatrix::efficiency_residual).fold(0.0, f64::max);
    let summary = AttributeSummary {
        method: match o.method {
            MethodArg::Exact => "exact",
            MethodArg::Sampled => "sampled",
            MethodArg::Loo => "loo",
        }
        .into(),
        games: games(o.game),
        taus: o.taus.clone(),
        rallies_attributed: skipped.iter().map(|&(t, s)| (t, rallies.len() - s)).collect(),
        rallies_skipped: skipped,
        n_records: records.len(),
        max_efficiency_residual: residual,
        efficiency_ok: o.method == MethodArg::Loo || residual <= EFFICIENCY_TOLERANCE,
    };
    ensure_dir(out)?;
    write_jsonl(&out.join(RECORDS_FILE), &records)?;
    write_jsonl(&out.join("rally_aggregates.jsonl"), &aggregates)?;
    write_csv(&out.join("rally_scores.csv"), &scores)?;
    write_jsonl(&out.join(GLOBAL_FILE), &global)?;
    write_csv(&out.join("global.csv"), &global)?;
    write_text(&out.join("summary.json"), &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    let mut text = format!(
        "{} attribution over {} rallies; {} records\n",
        summary.method,
        rallies.len(),
        records.len()
    );
    for ((t, n), (_, s)) in summary.rallies_attributed.iter().zip(&summary.rallies_skipped) {
        text += &format!("tau {t}: {n} rallies attributed, {s} too short\n");
    }
    if o.method == MethodArg::Loo {
        text += &format!("efficiency residual {residual:e} (not expected to vanish for loo)\n");
    } else {
        let verdict = if summary.efficiency_ok { "ok" } else { "VIOLATED" };
        text += &format!("efficiency residual {residual:e} ({verdict})\n");
    }
    text += &global_text(&global);
    write_text(&out.join("summary.txt"), &text)?;
    Ok(AttributeOutput { matrices, records, global, summary, text })
}
