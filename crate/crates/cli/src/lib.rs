//! The `qpp` command-line tool: option parsing, config-file layering and
//! the subcommand implementations.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

use std::str::FromStr;

pub use args::{Cli, Command};
pub use config::{layered, FileConfig};
pub use error::CliError;

fn init_logging(level: Option<&str>) -> Result<(), CliError> {
    let mut builder =
        env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if let Some(level) = level {
        log::LevelFilter::from_str(level)
            .map_err(|_| CliError::Config(format!("unknown log level `{level}`")))?;
        builder.parse_filters(level);
    }
    // a logger may already be installed when called from tests
    let _ = builder.try_init();
    Ok(())
}

/// Runs one parsed invocation, writing primary output to `out`.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    init_logging(
        cli.log_level
            .clone()
            .or_else(|| file.log_level())
            .as_deref(),
    )?;
    let section = cli.command.section();
    match &cli.command {
        Command::Judge(c) => commands::judge(&layered(c, &file, section)?, out).map(drop),
        Command::Predict(c) => commands::predict(&layered(c, &file, section)?, out).map(drop),
        Command::Baseline(c) => commands::baseline(&layered(c, &file, section)?, out).map(drop),
        Command::Evaluate(c) => commands::evaluate(&layered(c, &file, section)?, out).map(drop),
        Command::Sweep(c) => commands::sweep(&layered(c, &file, section)?, out).map(drop),
        Command::Agreement(c) => commands::agreement(&layered(c, &file, section)?, out).map(drop),
        Command::ThresholdScan(c) => {
            commands::threshold_scan(&layered(c, &file, section)?, out).map(drop)
        }
        Command::Tune(c) => commands::tune(&layered(c, &file, section)?, out).map(drop),
    }
}
