//! Runs the bundled verification corpus (or a config given as the first
//! argument) and writes report.json, tables.csv and plotdata/ to a directory.
//!
//! cargo run --release --example run_corpus [config.json] [out-dir]

use std::path::PathBuf;

use focklab::cli::{self, Config, Format, RunOptions};

fn main() -> focklab::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = match args.next() {
        Some(path) => Config::load(path.as_ref())?,
        None => Config::corpus()?,
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "focklab-out".into()));
    let report = cli::run(&config, &RunOptions { max_dim: cli::max_dim_from_env()?, ..RunOptions::default() })?;
    for sc in &report.scenarios {
        let checks: Vec<&str> = sc.checks.keys().map(|c| c.name()).collect();
        println!("{:<20} agreement {:<5} errors {}  [{}]", sc.id, sc.agreement, sc.errors, checks.join(", "));
    }
    let written = cli::emit(&report, &[Format::Json, Format::Csv, Format::Plotdata], &out)?;
    println!("{} files under {}; all agree: {}", written.len(), out.display(), report.exit_ok());
    Ok(())
}
