use std::io::Write;

use clap::Parser;

use oabounds::cli::{configure_threads, run, RunRequest};

fn main() -> anyhow::Result<()> {
    let request = RunRequest::parse();
    configure_threads();
    let outcome = run(&request);
    std::io::stdout().write_all(outcome.stdout.as_bytes())?;
    std::io::stderr().write_all(outcome.stderr.as_bytes())?;
    std::process::exit(outcome.status);
}
