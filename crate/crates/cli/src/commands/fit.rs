use std::path::{Path, PathBuf};

use rallyshap::forecast::{fit_markov, fit_style, save_model, BlendForecaster, Model, OracleForecaster, UniformForecaster};
use rallyshap::rally::Rally;

use crate::args::ModelKind;
use crate::config::{FitOpts, ModelOpts};
use crate::error::CliResult;
use crate::output::{ensure_dir, read_dataset};

/// Fits `opts.kind`. Rallies carrying `tau` contribute only strokes after it.
pub fn fit_model(opts: &ModelOpts, rallies: &[Rally]) -> CliResult<Model> {
    Ok(match opts.kind {
        ModelKind::Style => Model::Style(fit_style(rallies, opts.alpha)?),
        ModelKind::Markov => Model::Markov(fit_markov(rallies, opts.alpha, opts.bins)?),
        ModelKind::Blend => Model::Blend(BlendForecaster::new(
            fit_style(rallies, opts.alpha)?,
            fit_markov(rallies, opts.alpha, opts.bins)?,
            opts.blend_lambda,
        )?),
        ModelKind::Uniform => Model::Uniform(UniformForecaster::default()),
        ModelKind::Oracle => Model::Oracle(OracleForecaster::from_rallies(rallies)),
    })
}

/// Rallies long enough for `tau`, with `tau` set.
pub fn with_tau(rallies: &[Rally], tau: usize) -> CliResult<Vec<Rally>> {
    Ok(rallies.iter().filter(|r| r.len() > tau).map(|r| r.with_tau(tau)).collect::<Result<_, _>>()?)
}

pub struct FitOutput {
    pub model_path: PathBuf,
    pub summary: String,
}

pub fn cmd_fit(o: &FitOpts, out: &Path) -> CliResult<FitOutput> {
    let rallies = read_dataset(&o.data)?;
    let used = match o.tau {
        Some(t) => with_tau(&rallies, t)?,
        None => rallies,
    };
    let model = fit_model(&o.model, &used)?;
    ensure_dir(out)?;
    let model_path = out.join("model.json");
    save_model(&model, &model_path)?;
    let summary = format!("fitted {} model on {} rallies -> {}\n", model.kind(), used.len(), model_path.display());
    Ok(FitOutput { model_path, summary })
}
