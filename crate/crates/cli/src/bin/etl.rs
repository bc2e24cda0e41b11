use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    edw_cli::init_logging();
    let cli = edw_cli::etl::EtlCli::parse();
    edw_cli::finish(edw_cli::etl::execute(cli, &mut std::io::stdout().lock()))
}
