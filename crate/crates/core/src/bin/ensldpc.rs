use clap::Parser;
use ensldpc::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
