//! Command-line driver: file formats and the `sigma`, `rerank`, `eval`,
//! `sweep`, `bench` and `gen` commands.

pub mod args;
pub mod bench;
pub mod commands;
pub mod error;
pub mod io;

pub use args::{Cli, Command};
pub use error::{CliError, Result};

/// Runs a parsed command line, inside a dedicated thread pool when
/// `--threads` is given.
pub fn run(cli: Cli) -> Result<()> {
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(&cli.command))
        }
        None => dispatch(&cli.command),
    }
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Sigma(a) => commands::cmd_sigma(a),
        Command::Rerank(a) => commands::cmd_rerank(a),
        Command::Eval(a) => commands::cmd_eval(a).map(drop),
        Command::Sweep(a) => commands::cmd_sweep(a).map(drop),
        Command::Bench(a) => commands::cmd_bench(a).map(drop),
        Command::Gen(a) => commands::cmd_gen(a),
    }
}
