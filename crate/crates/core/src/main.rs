use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use focklab::cli::{self, Check, Config, Format, RunOptions};

#[derive(Parser)]
#[command(name = "focklab", version, about = "Volterra-type operators on Fock spaces: verdicts and numerical cross-checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; the report goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "json,csv,plotdata")]
    formats: Vec<Format>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Reserved; every computation is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Symbolic verdicts (and difference verdicts) against criterion profiles.
    Classify(Common),
    /// Truncated matrices.
    Matrix(Common),
    /// Singular values and the compactness proxy.
    Svals(Common),
    /// Truncated Schatten norms.
    Schatten(Common),
    /// Berezin-type transforms, kernel norms and Littlewood-Paley ratios.
    Berezin(Common),
    /// Spectrum disks against resolvent growth.
    Spectrum(Common),
    /// Run the bundled corpus (or --config).
    Verify(Common),
    /// Run every requested check and write files under --out.
    Emit(Common),
}

fn only(checks: &[Check]) -> Option<BTreeSet<Check>> {
    Some(checks.iter().copied().collect())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, filter, needs_config) = match &cli.command {
        Command::Classify(c) => (c, only(&[Check::Verdict, Check::Difference]), true),
        Command::Matrix(c) => (c, only(&[Check::Matrix]), true),
        Command::Svals(c) => (c, only(&[Check::Svals]), true),
        Command::Schatten(c) => (c, only(&[Check::Schatten]), true),
        Command::Berezin(c) => (c, only(&[Check::Berezin, Check::Kernel, Check::LittlewoodPaley]), true),
        Command::Spectrum(c) => (c, only(&[Check::Spectrum]), true),
        Command::Verify(c) => (c, None, false),
        Command::Emit(c) => (c, None, true),
    };
    if matches!(cli.command, Command::Emit(_)) && common.out.is_none() {
        eprintln!("error: emit needs --out");
        return ExitCode::from(2);
    }
    let _ = common.seed;

    let setup = || -> focklab::Result<(Config, RunOptions)> {
        let config = match (&common.config, needs_config) {
            (Some(path), _) => Config::load(path)?,
            (None, false) => Config::corpus()?,
            (None, true) => return Err(focklab::FockError::InvalidArgument("--config is required".into())),
        };
        let opts = RunOptions { max_dim: cli::max_dim_from_env()?, jobs: common.jobs, only: filter.clone() };
        Ok((config, opts))
    };
    let report = match setup().and_then(|(config, opts)| cli::run(&config, &opts)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let written = match &common.out {
        Some(dir) => cli::emit(&report, &common.formats, dir).map(|paths| paths.len()),
        None => report.to_json().map(|s| {
            print!("{s}");
            0
        }),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    let s = &report.summary;
    eprintln!(
        "{} scenarios, {} checks, {} comparisons, {} disagreements, {} errors",
        s.scenarios,
        s.checks,
        s.comparisons,
        s.disagreements.len(),
        s.errors.len()
    );
    for d in &s.disagreements {
        eprintln!("disagreement: {d}");
    }
    for e in &s.errors {
        eprintln!("error: {e}");
    }
    if report.exit_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
