use clap::Parser;
use oldroyd_galerkin::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
