mod args;
mod commands;
mod output;

use clap::Parser;

use args::{Cli, RunConfig};
use commands::{run, Failure, EXIT_OK};

fn main() {
    let cli = Cli::parse();
    let code = match RunConfig::from_cli(cli).map_err(Failure::validation).and_then(|cfg| run(&cfg)) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("robinlap: {}", f.message);
            f.code
        }
    };
    std::process::exit(code);
}
