use std::collections::BTreeSet;
use std::path::Path;

use rallyshap::shapley::{
    combine_players, shifted_mean, AttributionMatrix, AttributionRecord, Component, GameKind, GlobalAggregate,
};
use serde::{Deserialize, Serialize};

use super::attribute::{GLOBAL_FILE, RECORDS_FILE};
use crate::args::ReportMode;
use crate::config::ReportOpts;
use crate::error::{usage, CliResult};
use crate::output::{ensure_dir, num, read_jsonl, table, write_csv, write_text};

/// One plot-ready row of the single-rally report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalRow {
    pub rally_id: String,
    pub game: GameKind,
    pub tau: usize,
    pub output_stroke: usize,
    pub component: Component,
    /// Past game: mean over given strokes; player game: mean of both players.
    pub value: f64,
    /// `feature=value` pairs joined by `;`.
    pub features: String,
}

pub struct ReportOutput {
    pub global: Vec<GlobalAggregate>,
    pub local: Vec<LocalRow>,
    pub text: String,
}

/// Per-output-stroke rows, three components per stroke, for one matrix.
pub fn local_rows(m: &AttributionMatrix) -> CliResult<Vec<LocalRow>> {
    let per_output: Vec<[f64; 2]> = match m.game {
        GameKind::Player => combine_players(m)?.iter().map(|v| [v[0], v[1]]).collect(),
        GameKind::Past => (0..m.output_strokes.len())
            .map(|o| {
                let col = |c| shifted_mean(&(0..m.features.len()).map(|f| m.value(f, o, c)).collect::<Vec<_>>());
                [col(Component::Type), col(Component::Area)]
            })
            .collect(),
    };
    let mut rows = Vec::new();
    for (o, &stroke) in m.output_strokes.iter().enumerate() {
        let [t, a] = per_output[o];
        for c in Component::ALL {
            let value = match c {
                Component::Type => t,
                Component::Area => a,
                Component::Macro => (t + a) / 2.0,
            };
            let features = m
                .features
                .iter()
                .enumerate()
                .map(|(f, feat)| format!("{feat}={}", m.value(f, o, c)))
                .collect::<Vec<_>>()
                .join(";");
            rows.push(LocalRow { rally_id: m.rally_id.clone(), game: m.game, tau: m.tau, output_stroke: stroke, component: c, value, features });
        }
    }
    Ok(rows)
}

fn local_report(o: &ReportOpts, rally_id: &str, out: &Path) -> CliResult<ReportOutput> {
    let records: Vec<AttributionRecord> = read_jsonl(&o.input.join(RECORDS_FILE))?;
    let mine: Vec<&AttributionRecord> = records.iter().filter(|r| r.rally_id == rally_id).collect();
    if mine.is_empty() {
        let ids: BTreeSet<&str> = records.iter().map(|r| r.rally_id.as_str()).collect();
        let ids: Vec<&str> = ids.into_iter().collect();
        return Err(usage(format!("unknown rally id {rally_id:?}; available: {}", ids.join(", "))));
    }
    let taus: BTreeSet<usize> = mine.iter().map(|r| r.tau).collect();
    let tau = match (o.tau, taus.len()) {
        (Some(t), _) if taus.contains(&t) => t,
        (None, 1) => *taus.first().expect("nonempty"),
        _ => return Err(usage(format!("rally {rally_id} has taus {taus:?}; pick one with --tau"))),
    };
    let mut local = Vec::new();
    let mut text = String::new();
    for game in [GameKind::Past, GameKind::Player] {
        let recs: Vec<AttributionRecord> = mine.iter().filter(|r| r.game == game && r.tau == tau).map(|r| (*r).clone()).collect();
        if recs.is_empty() {
            continue;
        }
        let m = AttributionMatrix::from_records(&recs)
            .map_err(|_| usage("local reports need type and area records; rerun attribute with --component all"))?;
        let rows = local_rows(&m)?;
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|r| vec![r.output_stroke.to_string(), r.component.to_string(), num(r.value), r.features.clone()])
            .collect();
        text += &format!("rally {rally_id}, {game} game, tau {tau}\n");
        text += &table(&["stroke", "component", "value", "by feature"], &body);
        text += "\n";
        local.extend(rows);
    }
    ensure_dir(out)?;
    write_csv(&out.join("report_local.csv"), &local)?;
    write_text(&out.join("report_local.txt"), &text)?;
    Ok(ReportOutput { global: Vec::new(), local, text })
}

fn global_report(o: &ReportOpts, out: &Path) -> CliResult<ReportOutput> {
    let mut global: Vec<GlobalAggregate> = read_jsonl(&o.input.join(GLOBAL_FILE))?;
    if let Some(t) = o.tau {
        global.retain(|g| g.tau == t);
    }
    let body: Vec<Vec<String>> = global
        .iter()
        .map(|g| {
            vec![
                g.game.to_string(),
                g.tau.to_string(),
                g.component.to_string(),
                num(g.mean),
                num(g.ci_low),
                num(g.ci_high),
            ]
        })
        .collect();
    let text = table(&["game", "tau", "component", "mean", "ci_low", "ci_high"], &body);
    ensure_dir(out)?;
    write_csv(&out.join("report_global.csv"), &global)?;
    write_text(&out.join("report_global.txt"), &text)?;
    Ok(ReportOutput { global, local: Vec::new(), text })
}

/// Renders reports from the output of `attribute` without recomputing any
/// attribution or aggregate.
pub fn cmd_report(o: &ReportOpts, out: &Path) -> CliResult<ReportOutput> {
    match (o.mode, &o.rally_id) {
        (ReportMode::Global, _) => global_report(o, out),
        (ReportMode::Local, Some(id)) => local_report(o, id, out),
        (ReportMode::Local, None) => Err(usage("--mode local needs --rally-id")),
    }
}
