//! `qnorm-sld` command-line front end. Writes one flat record per grid point
//! as a JSON array or CSV table.

mod config;
mod record;
mod run;

use std::fs::File;
use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;

use config::Cli;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let plan = match run::plan(cli.command) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error[invalid_parameter]: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let records = run::execute(&plan);
    let written = match &plan.out.output {
        Some(path) => File::create(path)
            .and_then(|f| record::write_records(&records, plan.out.format, BufWriter::new(f))),
        None => record::write_records(&records, plan.out.format, io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error[io]: {e}");
        return ExitCode::from(EXIT_IO);
    }
    match records.iter().find(|r| r.exit_code != 0) {
        Some(r) => {
            eprintln!(
                "error[{}] at row {}: {}",
                r.error.as_deref().unwrap_or("unknown"),
                r.index,
                r.error_message.as_deref().unwrap_or("")
            );
            ExitCode::from(r.exit_code as u8)
        }
        None => ExitCode::SUCCESS,
    }
}
