use std::process::ExitCode;

use clap::Parser;
use dakr_cli::Cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DAKR_LOG", "warn")).init();
    let cli = Cli::parse();
    match dakr_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
