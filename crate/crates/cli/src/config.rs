//! Config file schema and the layering of flags, environment and file.
//!
//! ```toml
//! seed = 7
//! threads = 4
//! out = "results"
//!
//! [synth]      # n_rallies, n_players, lambda, termination_prob, max_len,
//!              # short_serve_prob, concentration, split
//! [model]      # kind, alpha, bins, blend_lambda (used by fit and ablate)
//! [fit]        # data, tau
//! [eval]       # model, data, tau = [2, 4, 8], k
//! [attribute]  # model, data, tau, game, method, samples, component,
//!              # impute_feedback, decoding, k, exact_cap, resamples
//! [ablate]     # train, test, target, tau, k, resamples
//! [report]     # input, mode, rally_id, tau
//! ```

use std::path::{Path, PathBuf};

use rallyshap::forecast::{Decoding, DEFAULT_ALPHA, DEFAULT_BINS};
use rallyshap::shapley::{BootstrapConfig, DEFAULT_EXACT_CAP, DEFAULT_RESAMPLES, MAX_FEATURES};
use rallyshap::synthdata::GeneratorConfig;
use serde::Deserialize;

use crate::args::*;
use crate::error::{usage, CliError, CliResult};

pub const DEFAULT_OUT: &str = "out";
pub const DEFAULT_TAUS: [usize; 3] = [2, 4, 8];
pub const DEFAULT_K: usize = 10;
pub const DEFAULT_SPLIT: f64 = 0.8;
pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_BLEND_LAMBDA: f64 = 0.5;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub synth: SynthFile,
    pub model: ModelFile,
    pub fit: FitFile,
    pub eval: EvalFile,
    pub attribute: AttributeFile,
    pub ablate: AblateFile,
    pub report: ReportFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthFile {
    pub n_rallies: Option<usize>,
    pub n_players: Option<usize>,
    pub lambda: Option<f64>,
    pub termination_prob: Option<f64>,
    pub max_len: Option<usize>,
    pub short_serve_prob: Option<f64>,
    pub concentration: Option<f64>,
    pub split: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelFile {
    pub kind: Option<ModelKind>,
    pub alpha: Option<f64>,
    pub bins: Option<usize>,
    pub blend_lambda: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitFile {
    pub data: Option<PathBuf>,
    pub tau: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalFile {
    pub model: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub tau: Option<Vec<usize>>,
    pub k: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttributeFile {
    pub model: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub tau: Option<Vec<usize>>,
    pub game: Option<GameArg>,
    pub method: Option<MethodArg>,
    pub samples: Option<usize>,
    pub component: Option<ComponentArg>,
    pub impute_feedback: Option<bool>,
    pub decoding: Option<DecodingArg>,
    pub k: Option<usize>,
    pub exact_cap: Option<usize>,
    pub resamples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblateFile {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub target: Option<TargetArg>,
    pub tau: Option<Vec<usize>>,
    pub k: Option<usize>,
    pub resamples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportFile {
    pub input: Option<PathBuf>,
    pub mode: Option<ReportMode>,
    pub rally_id: Option<String>,
    pub tau: Option<usize>,
}

pub fn load_config(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(crate::error::io_err(format!("reading {}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config { path: path.display().to_string(), message: e.to_string() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Common {
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

pub fn resolve_common(g: &GlobalArgs, f: &FileConfig) -> CliResult<Common> {
    let threads = g.threads.or(f.threads);
    if threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    Ok(Common {
        seed: g.seed.or(f.seed).unwrap_or(0),
        threads,
        out: g.out.clone().or(f.out.clone()).unwrap_or_else(|| DEFAULT_OUT.into()),
    })
}

fn required(v: Option<PathBuf>, flag: &str) -> CliResult<PathBuf> {
    v.ok_or_else(|| usage(format!("--{flag} is required")))
}

fn check_taus(taus: &[usize]) -> CliResult<()> {
    if taus.is_empty() {
        return Err(usage("--tau needs at least one value"));
    }
    if let Some(t) = taus.iter().find(|&&t| t < 2) {
        return Err(usage(format!("--tau values must be at least 2, got {t}")));
    }
    Ok(())
}

fn check_positive(v: usize, flag: &str) -> CliResult<()> {
    if v == 0 {
        return Err(usage(format!("--{flag} must be at least 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOpts {
    pub generator: GeneratorConfig,
    pub split: f64,
}

pub fn resolve_synth(a: &SynthArgs, f: &SynthFile, seed: u64) -> CliResult<SynthOpts> {
    let d = GeneratorConfig::default();
    let generator = GeneratorConfig {
        n_rallies: a.n_rallies.or(f.n_rallies).unwrap_or(d.n_rallies),
        n_players: a.n_players.or(f.n_players).unwrap_or(d.n_players),
        lambda: a.lambda.or(f.lambda).unwrap_or(d.lambda),
        termination_prob: a.termination_prob.or(f.termination_prob).unwrap_or(d.termination_prob),
        max_len: a.max_len.or(f.max_len).unwrap_or(d.max_len),
        seed,
        short_serve_prob: a.short_serve_prob.or(f.short_serve_prob).unwrap_or(d.short_serve_prob),
        style_concentration: a.concentration.or(f.concentration).unwrap_or(d.style_concentration),
    };
    generator.check().map_err(|e| usage(e.to_string()))?;
    let split = a.split.or(f.split).unwrap_or(DEFAULT_SPLIT);
    if !(split > 0.0 && split < 1.0) {
        return Err(usage(format!("--split {split} outside (0, 1)")));
    }
    Ok(SynthOpts { generator, split })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOpts {
    pub kind: ModelKind,
    pub alpha: f64,
    pub bins: usize,
    pub blend_lambda: f64,
}

pub fn resolve_model(a: &ModelArgs, f: &ModelFile) -> CliResult<ModelOpts> {
    let m = ModelOpts {
        kind: a.kind.or(f.kind).unwrap_or(ModelKind::Blend),
        alpha: a.alpha.or(f.alpha).unwrap_or(DEFAULT_ALPHA),
        bins: a.bins.or(f.bins).unwrap_or(DEFAULT_BINS),
        blend_lambda: a.blend_lambda.or(f.blend_lambda).unwrap_or(DEFAULT_BLEND_LAMBDA),
    };
    if !(m.alpha > 0.0 && m.alpha.is_finite()) {
        return Err(usage(format!("--alpha must be positive, got {}", m.alpha)));
    }
    check_positive(m.bins, "bins")?;
    if !(0.0..=1.0).contains(&m.blend_lambda) {
        return Err(usage(format!("--blend-lambda {} outside [0, 1]", m.blend_lambda)));
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOpts {
    pub data: PathBuf,
    pub model: ModelOpts,
    pub tau: Option<usize>,
}

pub fn resolve_fit(a: &FitArgs, f: &FileConfig) -> CliResult<FitOpts> {
    let tau = a.tau.or(f.fit.tau);
    if let Some(t) = tau {
        check_taus(&[t])?;
    }
    Ok(FitOpts { data: required(a.data.clone().or(f.fit.data.clone()), "data")?, model: resolve_model(&a.model, &f.model)?, tau })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOpts {
    pub model: PathBuf,
    pub data: PathBuf,
    pub taus: Vec<usize>,
    pub k: usize,
}

pub fn resolve_eval(a: &EvalArgs, f: &EvalFile) -> CliResult<EvalOpts> {
    let o = EvalOpts {
        model: required(a.model.clone().or(f.model.clone()), "model")?,
        data: required(a.data.clone().or(f.data.clone()), "data")?,
        taus: a.tau.clone().or(f.tau.clone()).unwrap_or(DEFAULT_TAUS.to_vec()),
        k: a.k.or(f.k).unwrap_or(DEFAULT_K),
    };
    check_taus(&o.taus)?;
    check_positive(o.k, "k")?;
    Ok(o)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeOpts {
    pub model: PathBuf,
    pub data: PathBuf,
    pub taus: Vec<usize>,
    pub game: GameArg,
    pub method: MethodArg,
    pub samples: usize,
    pub component: ComponentArg,
    pub impute_feedback: bool,
    pub decoding: Decoding,
    pub exact_cap: usize,
    pub bootstrap: BootstrapConfig,
}

pub fn resolve_attribute(a: &AttributeArgs, f: &AttributeFile, seed: u64) -> CliResult<AttributeOpts> {
    let k = a.k.or(f.k).unwrap_or(DEFAULT_K);
    check_positive(k, "k")?;
    let decoding = match a.decoding.or(f.decoding).unwrap_or(DecodingArg::Greedy) {
        DecodingArg::Greedy => Decoding::Greedy,
        DecodingArg::Sampled => Decoding::Sample { k, seed },
    };
    let o = AttributeOpts {
        model: required(a.model.clone().or(f.model.clone()), "model")?,
        data: required(a.data.clone().or(f.data.clone()), "data")?,
        taus: a.tau.clone().or(f.tau.clone()).unwrap_or(DEFAULT_TAUS.to_vec()),
        game: a.game.or(f.game).unwrap_or(GameArg::Both),
        method: a.method.or(f.method).unwrap_or(MethodArg::Exact),
        samples: a.samples.or(f.samples).unwrap_or(DEFAULT_SAMPLES),
        component: a.component.or(f.component).unwrap_or(ComponentArg::All),
        impute_feedback: a.impute_feedback.or(f.impute_feedback).unwrap_or(false),
        decoding,
        exact_cap: a.exact_cap.or(f.exact_cap).unwrap_or(DEFAULT_EXACT_CAP),
        bootstrap: BootstrapConfig { resamples: a.resamples.or(f.resamples).unwrap_or(DEFAULT_RESAMPLES), seed, ..Default::default() },
    };
    check_taus(&o.taus)?;
    check_positive(o.samples, "samples")?;
    check_positive(o.bootstrap.resamples, "resamples")?;
    if o.exact_cap > MAX_FEATURES {
        return Err(usage(format!("--exact-cap {} above the hard limit {MAX_FEATURES}", o.exact_cap)));
    }
    if o.method == MethodArg::Sampled && o.taus.iter().any(|t| t - 1 > MAX_FEATURES) {
        return Err(usage(format!("tau above {} is not supported", MAX_FEATURES + 1)));
    }
    Ok(o)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblateOpts {
    pub train: PathBuf,
    pub test: PathBuf,
    pub target: TargetArg,
    pub taus: Vec<usize>,
    pub k: usize,
    pub model: ModelOpts,
    pub bootstrap: BootstrapConfig,
}

pub fn resolve_ablate(a: &AblateArgs, f: &FileConfig, seed: u64) -> CliResult<AblateOpts> {
    let s = &f.ablate;
    let o = AblateOpts {
        train: required(a.train.clone().or(s.train.clone()), "train")?,
        test: required(a.test.clone().or(s.test.clone()), "test")?,
        target: a.target.or(s.target).ok_or_else(|| usage("--target is required"))?,
        taus: a.tau.clone().or(s.tau.clone()).unwrap_or(DEFAULT_TAUS.to_vec()),
        k: a.k.or(s.k).unwrap_or(DEFAULT_K),
        model: resolve_model(&a.model, &f.model)?,
        bootstrap: BootstrapConfig { resamples: a.resamples.or(s.resamples).unwrap_or(DEFAULT_RESAMPLES), seed, ..Default::default() },
    };
    check_taus(&o.taus)?;
    check_positive(o.k, "k")?;
    check_positive(o.bootstrap.resamples, "resamples")?;
    Ok(o)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOpts {
    pub input: PathBuf,
    pub mode: ReportMode,
    pub rally_id: Option<String>,
    pub tau: Option<usize>,
}

pub fn resolve_report(a: &ReportArgs, f: &ReportFile, out: &Path) -> CliResult<ReportOpts> {
    let o = ReportOpts {
        input: a.input.clone().or(f.input.clone()).unwrap_or_else(|| out.to_path_buf()),
        mode: a.mode.or(f.mode).ok_or_else(|| usage("--mode is required"))?,
        rally_id: a.rally_id.clone().or(f.rally_id.clone()),
        tau: a.tau.or(f.tau),
    };
    if o.mode == ReportMode::Local && o.rally_id.is_none() {
        return Err(usage("--mode local needs --rally-id"));
    }
    Ok(o)
}
