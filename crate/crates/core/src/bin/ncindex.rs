//! `ncindex`: run an experiment config, or list the suites when no config is given.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ncindex::runner::{run, suite_catalog, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "ncindex", version, about = "Run cyclic-homology and index-formula experiment suites")]
struct Cli {
    /// Experiment config (JSON). Without it the suite catalog is printed.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json and report.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Machine-readable output on stdout.
    #[arg(long)]
    json: bool,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the checks of a suite.
    #[arg(long, env = "NCG_JOBS", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
}

// a closed pipe (e.g. `| head`) is not an error worth a panic
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn list(json: bool) {
    let catalog = suite_catalog();
    if json {
        emit(&(serde_json::to_string_pretty(&catalog).expect("catalog serializes") + "\n"));
        return;
    }
    let mut out = String::new();
    for s in catalog {
        let _ = writeln!(out, "{}\n  params:    {}\n  certifies: {}", s.name, s.params.join(", "), s.certifies);
    }
    emit(&out);
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // --help and --version are not errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let Some(path) = cli.config else {
        list(cli.json);
        return ExitCode::SUCCESS;
    };
    let mut config = match ExperimentConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ncindex: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let report = match run(&config, cli.jobs.map(|j| j as usize)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("ncindex: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = report.write(&cli.out) {
        eprintln!("ncindex: {e}");
        return ExitCode::from(1);
    }
    if cli.json {
        emit(&report.to_json_string());
    } else {
        let mut out = String::new();
        for c in &report.checks {
            let status = if !c.pass { "FAIL" } else if c.tolerance.is_none() { "info" } else { "pass" };
            let _ = match (&c.error, c.residual) {
                (Some(e), _) => writeln!(out, "{status} {} error: {e}", c.check),
                (None, Some(r)) => writeln!(out, "{status} {} residual {r:.3e}", c.check),
                (None, None) => writeln!(out, "{status} {}", c.check),
            };
        }
        let failed = report.checks.iter().filter(|c| !c.pass).count();
        let _ = writeln!(out, "{}: {} checks, {failed} failed; reports in {}", report.name, report.checks.len(), cli.out.display());
        emit(&out);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
