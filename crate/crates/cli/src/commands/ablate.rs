use std::path::Path;

use rallyshap::forecast::{evaluate, EvalReport};
use rallyshap::losses::Metrics;
use rallyshap::rally::{impute_past, impute_player, PlayerRole, Rally};
use rallyshap::shapley::bootstrap_mean;
use serde::{Deserialize, Serialize};

use super::fit::{fit_model, with_tau};
use crate::args::TargetArg;
use crate::config::AblateOpts;
use crate::error::CliResult;
use crate::output::{ensure_dir, num, read_dataset, table, write_csv, write_text};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub tau: usize,
    /// `original`, `w/o player` or `w/o past`, `difference`, `noise band`.
    pub row: String,
    pub ce: f64,
    pub mse: f64,
    pub mae: f64,
}

impl AblationRow {
    fn new(tau: usize, row: &str, m: [f64; 3]) -> Self {
        AblationRow { tau, row: row.into(), ce: m[0], mse: m[1], mae: m[2] }
    }

    pub fn metrics(&self) -> [f64; 3] {
        [self.ce, self.mse, self.mae]
    }
}

fn as_array(m: &Metrics) -> [f64; 3] {
    [m.ce, m.mse, m.mae]
}

pub struct AblateOutput {
    pub rows: Vec<AblationRow>,
    pub text: String,
}

/// Evaluation of a model fitted on `train` against the untouched test set.
fn fit_and_eval(o: &AblateOpts, train: &[Rally], test: &[Rally], tau: usize, seed: u64) -> CliResult<EvalReport> {
    let model = fit_model(&o.model, train)?;
    Ok(evaluate(&model, test, tau, o.k, seed)?)
}

/// Retrains with the target information removed from the training set and
/// compares test metrics. Difference is original minus ablated; the noise
/// band is the half-width of the bootstrap interval of the original's mean
/// test metric.
pub fn ablate(o: &AblateOpts, train: &[Rally], test: &[Rally], seed: u64) -> CliResult<Vec<AblationRow>> {
    let mut rows = Vec::new();
    for &tau in &o.taus {
        let train_t = with_tau(train, tau)?;
        if train_t.is_empty() {
            return Err(rallyshap::Error::EmptyDataset.into());
        }
        log::info!("ablation at tau {tau}: {} training rallies", train_t.len());
        let original = fit_and_eval(o, &train_t, test, tau, seed)?;
        let (label, without) = match o.target {
            TargetArg::Player => {
                let mut sum = [0.0; 3];
                for role in [PlayerRole::A, PlayerRole::B] {
                    let imputed: Vec<Rally> =
                        train_t.iter().map(|r| impute_player(r, role, r.len())).collect::<Result<_, _>>()?;
                    let m = as_array(&fit_and_eval(o, &imputed, test, tau, seed)?.mean);
                    for i in 0..3 {
                        sum[i] += m[i];
                    }
                }
                ("w/o player", sum.map(|s| s / 2.0))
            }
            TargetArg::Past => {
                let imputed: Vec<Rally> = train_t.iter().map(|r| impute_past(r, &[])).collect::<Result<_, _>>()?;
                ("w/o past", as_array(&fit_and_eval(o, &imputed, test, tau, seed)?.mean))
            }
        };
        let orig = as_array(&original.mean);
        let per_metric: [Vec<f64>; 3] = [
            original.per_rally.iter().map(|r| r.metrics.ce).collect(),
            original.per_rally.iter().map(|r| r.metrics.mse).collect(),
            original.per_rally.iter().map(|r| r.metrics.mae).collect(),
        ];
        let mut band = [0.0; 3];
        for i in 0..3 {
            let ci = bootstrap_mean(&per_metric[i], &o.bootstrap)?;
            band[i] = (ci.ci_high - ci.ci_low) / 2.0;
        }
        rows.push(AblationRow::new(tau, "original", orig));
        rows.push(AblationRow::new(tau, label, without));
        rows.push(AblationRow::new(tau, "difference", std::array::from_fn(|i| orig[i] - without[i])));
        rows.push(AblationRow::new(tau, "noise band", band));
    }
    Ok(rows)
}

pub fn ablation_table(rows: &[AblationRow]) -> String {
    let body: Vec<Vec<String>> =
        rows.iter().map(|r| vec![r.tau.to_string(), r.row.clone(), num(r.ce), num(r.mse), num(r.mae)]).collect();
    table(&["tau", "", "CE", "MSE", "MAE"], &body)
}

/// Writes `ablation.csv` and `ablation.txt`.
pub fn cmd_ablate(o: &AblateOpts, seed: u64, out: &Path) -> CliResult<AblateOutput> {
    let train = read_dataset(&o.train)?;
    let test = read_dataset(&o.test)?;
    let rows = ablate(o, &train, &test, seed)?;
    ensure_dir(out)?;
    write_csv(&out.join("ablation.csv"), &rows)?;
    let text = ablation_table(&rows);
    write_text(&out.join("ablation.txt"), &text)?;
    Ok(AblateOutput { rows, text })
}
