use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    edw_cli::init_logging();
    let cli = edw_cli::fixtures::FixturesCli::parse();
    edw_cli::finish(edw_cli::fixtures::execute(cli, &mut std::io::stdout().lock()))
}
