use std::process::ExitCode;

use clap::Parser;
use kpp_sharp::cli::{exit_code, run, Cli, EXIT_FAIL};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).map_err(anyhow::Error::from) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<kpp_sharp::Error>()
                .map_or(EXIT_FAIL, exit_code);
            ExitCode::from(code)
        }
    }
}
