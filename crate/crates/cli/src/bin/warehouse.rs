use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    edw_cli::init_logging();
    let cli = edw_cli::warehouse::WarehouseCli::parse();
    edw_cli::finish(edw_cli::warehouse::execute(cli, &mut std::io::stdout().lock()))
}
