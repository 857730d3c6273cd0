use std::path::Path;

use rallyshap::forecast::{evaluate, EvalReport};
use serde::{Deserialize, Serialize};

use crate::config::EvalOpts;
use crate::error::CliResult;
use crate::output::{ensure_dir, num, read_dataset, read_model, table, write_csv, write_text};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub tau: usize,
    pub n_rallies: usize,
    pub skipped: usize,
    pub ce: f64,
    pub mse: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRallyRow {
    pub tau: usize,
    pub rally_id: String,
    pub ce: f64,
    pub mse: f64,
    pub mae: f64,
}

pub fn metrics_table(rows: &[EvalRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.tau.to_string(), r.n_rallies.to_string(), num(r.ce), num(r.mse), num(r.mae)])
        .collect();
    table(&["tau", "rallies", "CE", "MSE", "MAE"], &body)
}

pub struct EvalOutput {
    pub rows: Vec<EvalRow>,
    pub reports: Vec<EvalReport>,
    pub summary: String,
}

/// Writes `eval.csv` (one row per tau), `eval_rallies.csv` and `eval.txt`.
pub fn cmd_eval(o: &EvalOpts, seed: u64, out: &Path) -> CliResult<EvalOutput> {
    let model = read_model(&o.model)?;
    let rallies = read_dataset(&o.data)?;
    let mut rows = Vec::new();
    let mut per_rally = Vec::new();
    let mut reports = Vec::new();
    for &tau in &o.taus {
        log::info!("evaluating at tau {tau}");
        let rep = evaluate(&model, &rallies, tau, o.k, seed)?;
        rows.push(EvalRow {
            tau,
            n_rallies: rep.per_rally.len(),
            skipped: rep.skipped,
            ce: rep.mean.ce,
            mse: rep.mean.mse,
            mae: rep.mean.mae,
        });
        per_rally.extend(rep.per_rally.iter().map(|r| EvalRallyRow {
            tau,
            rally_id: r.rally_id.clone(),
            ce: r.metrics.ce,
            mse: r.metrics.mse,
            mae: r.metrics.mae,
        }));
        reports.push(rep);
    }
    ensure_dir(out)?;
    write_csv(&out.join("eval.csv"), &rows)?;
    write_csv(&out.join("eval_rallies.csv"), &per_rally)?;
    let summary = format!("{} model, best of {}\n{}", model.kind(), o.k, metrics_table(&rows));
    write_text(&out.join("eval.txt"), &summary)?;
    Ok(EvalOutput { rows, reports, summary })
}
