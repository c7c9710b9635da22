mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{merge_config, Cli, Command};
use commands::UsageError;

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = commands::read_config(cli.config.as_ref())?;
    let config = config.as_ref();
    match cli.command {
        Command::Analyze(a) => commands::analyze(merge_config(&a, config)?),
        Command::Plan(a) => commands::plan(merge_config(&a, config)?),
        Command::Mix(a) => commands::mix_cmd(merge_config(&a, config)?),
        Command::Remap(a) => commands::remap(merge_config(&a, config)?),
        Command::Augment(a) => commands::augment(merge_config(&a, config)?),
        Command::EvalDet(a) => commands::eval_det(merge_config(&a, config)?),
        Command::EvalGen(a) => commands::eval_gen(merge_config(&a, config)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (kind, code) = if err.downcast_ref::<UsageError>().is_some() {
                ("usage", 2)
            } else if let Some(e) = err.downcast_ref::<longtail_core::Error>() {
                (e.kind(), 1)
            } else {
                ("error", 1)
            };
            let message = format!("{err:#}");
            let obj = serde_json::json!({ "error": { "kind": kind, "message": message } });
            eprintln!("{obj}");
            ExitCode::from(code)
        }
    }
}
