use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    edw_cli::init_logging();
    let cli = edw_cli::serve::MockRegistryCli::parse();
    edw_cli::finish(edw_cli::serve::mock_registry(cli, &mut std::io::stdout()))
}
