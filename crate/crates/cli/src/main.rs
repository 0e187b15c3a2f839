use clap::Parser;

use cqa_cli::commands;
use cqa_cli::config::{Cli, Command, FileConfig};
use cqa_cli::CliResult;

fn run() -> CliResult<()> {
    let cli = Cli::parse();
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(args) => commands::cmd_ingest(&args.resolve(&file)?),
        Command::Candidates(args) => commands::cmd_candidates(&args.resolve(&file)?),
        Command::Train(args) => commands::cmd_train(&args.resolve(&file)?),
        Command::Evaluate(args) => commands::cmd_evaluate(&args.resolve(&file)?),
        Command::Answer(args) => commands::cmd_answer(&args.resolve(&file)?),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(err) = run() {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
