use std::process::ExitCode;

use clap::Parser;
use ucp_ergodic::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = run(&cli);
    if let Some(err) = report.body.get("error") {
        let pointer = err.get("pointer").and_then(|p| p.as_str()).map(|p| format!(" at {}", if p.is_empty() { "/" } else { p }));
        eprintln!("ucp: {}{}", err["message"].as_str().unwrap_or("error"), pointer.unwrap_or_default());
    }
    let text = report.render(cli.format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("ucp: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code as u8)
}
