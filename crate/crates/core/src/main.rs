use clap::Parser;

use homstress::cli::{main_with, Cli, TOL_ENV};

fn main() -> std::process::ExitCode {
    main_with(Cli::parse(), std::env::var(TOL_ENV).ok())
}
