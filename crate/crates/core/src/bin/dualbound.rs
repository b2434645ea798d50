use clap::Parser;
use dualbound::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
