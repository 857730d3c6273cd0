//! Command implementations behind the `rallyshap` binary.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use args::{Cli, Command};
pub use error::{CliError, CliResult};

use config::{FileConfig, load_config, resolve_common};

/// Runs one parsed invocation on a pool of the requested size and returns
/// the human-readable summary.
pub fn run(cli: &Cli) -> CliResult<String> {
    let file = match &cli.global.config {
        Some(p) => load_config(p)?,
        None => FileConfig::default(),
    };
    let common = resolve_common(&cli.global, &file)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| error::usage(format!("thread pool: {e}")))?;
    let out = common.out.as_path();
    let seed = common.seed;
    pool.install(|| match &cli.command {
        Command::Synth(a) => {
            let o = config::resolve_synth(a, &file.synth, seed)?;
            Ok(commands::cmd_synth(&o, out)?.summary)
        }
        Command::Fit(a) => {
            let o = config::resolve_fit(a, &file)?;
            Ok(commands::cmd_fit(&o, out)?.summary)
        }
        Command::Eval(a) => {
            let o = config::resolve_eval(a, &file.eval)?;
            Ok(commands::cmd_eval(&o, seed, out)?.summary)
        }
        Command::Attribute(a) => {
            let o = config::resolve_attribute(a, &file.attribute, seed)?;
            Ok(commands::cmd_attribute(&o, seed, out)?.text)
        }
        Command::Ablate(a) => {
            let o = config::resolve_ablate(a, &file, seed)?;
            Ok(commands::cmd_ablate(&o, seed, out)?.text)
        }
        Command::Report(a) => {
            let o = config::resolve_report(a, &file.report, out)?;
            Ok(commands::cmd_report(&o, out)?.text)
        }
    })
}
