use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    edw_cli::init_logging();
    let cli = edw_cli::serve::PlatformApiCli::parse();
    edw_cli::finish(edw_cli::serve::platform_api(cli, &mut std::io::stdout()))
}
