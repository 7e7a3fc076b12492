use std::process::ExitCode;

use clap::Parser;
use signalgame::harness::cli::{run, Cli};
use signalgame::harness::AuditedFs;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let fs = AuditedFs::new();
    let mut stdout = std::io::stdout().lock();
    match run(cli, &fs, &mut stdout) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
