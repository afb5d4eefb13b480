//! Runs one harness suite from a config file and prints its records.
//!
//! `cargo run --example run_suite -- [config] [suite]`, defaulting to the quick config and `khintchine`.

use std::path::PathBuf;

use lpheat::harness::{run_suite, ExperimentConfig, Suite};

fn main() -> lpheat::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/quick.toml"), PathBuf::from);
    let suite: Suite = args.next().as_deref().unwrap_or("khintchine").parse()?;
    let cfg = ExperimentConfig::load(&path)?;
    let report = run_suite(&cfg, suite)?;
    println!("{} (config {}) in {:.2}s", report.suite, report.config_hash, report.wall_clock_seconds);
    for r in &report.records {
        println!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.name);
        for m in &r.measurements {
            println!("      {:<32} {:.6e}", m.name, m.value);
        }
    }
    Ok(())
}
