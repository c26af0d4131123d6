mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::{run, Context};

/// Splits argv on lone `;` tokens.
fn segments(argv: &[String]) -> Vec<&[String]> {
    argv.split(|a| a == ";").filter(|s| !s.is_empty()).collect()
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let parts = segments(&argv);
    if parts.is_empty() {
        eprintln!("error: no command given; try --help");
        return ExitCode::from(1);
    }
    let mut parsed = Vec::with_capacity(parts.len());
    for part in &parts {
        let full = std::iter::once("closurelab".to_string()).chain(part.iter().cloned());
        match Cli::try_parse_from(full) {
            Ok(cli) => parsed.push(cli),
            Err(e) => {
                let _ = e.print();
                // exit 2 is reserved for Unknown verdicts
                return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
            }
        }
    }
    let mut ctx = Context::default();
    let mut code = 0;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for cli in parsed {
        match run(cli.command, &mut ctx) {
            Ok(o) => {
                for line in &o.lines {
                    let _ = writeln!(out, "{line}");
                }
                code = code.max(o.code);
            }
            Err(e) => {
                let _ = out.flush();
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::from(code as u8)
}
