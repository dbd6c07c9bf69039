use anyhow::Context;
use clap::Parser;
use cxeuler::cli::{self, RunConfig, EXIT_CRITERION_FAILED, EXIT_OK, EXIT_USAGE};
use std::path::PathBuf;

/// Batch experiment runner for the complex Euler / analytic-norm laboratory.
#[derive(Parser, Debug)]
#[command(name = "cxeuler", version, about)]
struct Args {
    /// Path to a JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config's `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Validate the configuration and exit without computing.
    #[arg(long)]
    validate_only: bool,

    /// List the recognized experiment names and exit.
    #[arg(long)]
    list_experiments: bool,
}

fn main() {
    let args = Args::parse();
    std::process::exit(match run(args) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            EXIT_USAGE
        }
    });
}

fn run(args: Args) -> anyhow::Result<i32> {
    if args.list_experiments {
        for name in cli::EXPERIMENT_NAMES {
            println!("{name}");
        }
        return Ok(EXIT_OK);
    }
    let config_path = args
        .config
        .context("--config <path> is required (or use --list-experiments)")?;
    let mut config = RunConfig::from_path(&config_path)
        .with_context(|| format!("loading {}", config_path.display()))?;
    if let Some(out) = args.out {
        config.output_dir = Some(out);
    }

    let report = cli::validate(&config)?;
    if !report.ok {
        for issue in &report.issues {
            eprintln!("invalid config: {issue}");
        }
        return Ok(EXIT_USAGE);
    }
    if args.validate_only {
        println!("ok: {} configuration valid", report.experiment);
        return Ok(EXIT_OK);
    }

    let summary = cli::run(&config)?;
    for c in &summary.criteria {
        println!(
            "{}: {} = {:.6e} {} {:.6e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.direction,
            c.threshold
        );
    }
    if summary.pass {
        println!("{}: all criteria passed", summary.experiment);
        Ok(EXIT_OK)
    } else {
        let failing: Vec<&str> = summary
            .criteria
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        eprintln!("{}: failed criteria: {}", summary.experiment, failing.join(", "));
        Ok(EXIT_CRITERION_FAILED)
    }
}
