use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lpheat::harness::{run_suite, ExperimentConfig, Suite, SUITES};

/// Runs the numerical experiment suites from a TOML configuration.
#[derive(Parser)]
#[command(name = "lpheat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite and write `<suite>-<hash>.{json,csv}`.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        suite: String,
        /// Report directory; overrides `LPHEAT_OUT` and the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; overrides `LPHEAT_JOBS`.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Parse and check a configuration without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the available suites.
    ListSuites,
}

fn env_jobs() -> lpheat::Result<Option<usize>> {
    match std::env::var("LPHEAT_JOBS") {
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|_| lpheat::Error::Config { path: "LPHEAT_JOBS".into(), message: format!("`{v}` is not a thread count") }),
        Err(_) => Ok(None),
    }
}

fn run(config: PathBuf, suite: String, out: Option<PathBuf>, jobs: Option<usize>) -> lpheat::Result<bool> {
    let cfg = ExperimentConfig::load(&config)?;
    let suite: Suite = suite.parse()?;
    let dir = out
        .or_else(|| std::env::var_os("LPHEAT_OUT").map(PathBuf::from))
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("reports"));
    let jobs = match jobs {
        Some(j) => Some(j),
        None => env_jobs()?,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| lpheat::Error::InvalidArgument(e.to_string()))?;
    let report = pool.install(|| run_suite(&cfg, suite))?;
    for r in &report.records {
        println!("{} {:<28} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    let (json, csv) = report.write(&dir)?;
    println!("wrote {} and {} in {:.1}s", json.display(), csv.display(), report.wall_clock_seconds);
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, suite, out, jobs } => run(config, suite, out, jobs),
        Command::Validate { config } => ExperimentConfig::load(&config).and_then(|c| c.validate(None)).map(|()| {
            println!("{}: ok", config.display());
            true
        }),
        Command::ListSuites => {
            for s in SUITES {
                println!("{:<16} {}", s.name(), s.description());
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
