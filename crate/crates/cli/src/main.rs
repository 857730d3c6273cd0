use std::process::ExitCode;

use clap::Parser;
use rallyshap_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli).map_err(|e| (e.exit_code(), anyhow::Error::new(e))) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err((code, err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code as u8)
        }
    }
}
