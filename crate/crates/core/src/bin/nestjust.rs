use std::process::ExitCode;

use clap::Parser;
use nestjust::cli::{run, Cli};

fn main() -> ExitCode {
    let report = run(&Cli::parse());
    for line in &report.output {
        println!("{line}");
    }
    for line in &report.diagnostics {
        eprintln!("{line}");
    }
    ExitCode::from(report.status.code())
}
