use std::process::ExitCode;

use clap::Parser;
use plevel_core::cli::{run, Cli};

fn main() -> ExitCode {
    run(&Cli::parse())
}
