//! Runs every suite on the shipped acceptance configuration and prints one
//! PASS/FAIL line per criterion. A criterion passes when its record passes;
//! the first one also needs the identities suite to finish within a minute.
//!
//! Built without the libtest harness so the lines are always printed.

use std::collections::HashMap;
use std::path::Path;
use std::process::ExitCode;

use lpheat::harness::{run_suite, CheckRecord, ExperimentConfig, Suite};

const CRITERIA: [(u32, &str, &str); 12] = [
    (1, "heat-identity-q", "p=2 heat identity with constant 2, 1e-6 relative"),
    (2, "heat-identity-boldq", "p=2 identity for tΔS(t) with constant 4, 1e-6 relative"),
    (3, "dhs-vs-oracle", "Helffer–Sjöstrand vs spectral oracle ≤ 1e-4, monotone refinement"),
    (4, "dbar-flatness", "∂̄ flatness slope ≥ N − 0.2 for N ∈ {2, 4}"),
    (5, "almost-orthogonality", "R(k,j) ≤ 16·2^-|j-k| and R(j,j) ≤ 0.43"),
    (6, "dyadic-continuous-window", "continuous²/dyadic² ∈ [0.25, 4]"),
    (7, "littlewood-paley-two-sided", "two-sided square-function ratio, drift ≤ 10%, p=2 envelope"),
    (8, "resolvent-growth", "resolvent growth exponents and scale invariance"),
    (9, "hilbert-uniformity", "Q_t constants uniform in N within 5%"),
    (10, "gaussian-domination", "Dirichlet kernel ≤ free kernel, row sums ≤ 1"),
    (11, "khintchine", "Khintchine ratios: exact at p=2, within [0.2, 5] at p ∈ {1, 4}"),
    (12, "factorization", "tΔS(t) = 2 Q*_{t/2} Q_{t/2} residual ≤ 1e-10"),
];

fn summary(r: &CheckRecord) -> String {
    r.measurements.iter().map(|m| format!("{}={:.3e}", m.name, m.value)).collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/acceptance.toml");
    let cfg = ExperimentConfig::load(&path).expect("acceptance config loads");
    cfg.validate(None).expect("acceptance config validates");
    let mut records: HashMap<String, CheckRecord> = HashMap::new();
    let mut identities_seconds = f64::INFINITY;
    for suite in Suite::All.expand() {
        let report = run_suite(&cfg, suite).expect("suite runs");
        if suite == Suite::Identities {
            identities_seconds = report.wall_clock_seconds;
        }
        for r in report.records {
            records.insert(r.name.clone(), r);
        }
    }
    let mut failed = Vec::new();
    for (n, name, what) in CRITERIA {
        let r = records.get(name).unwrap_or_else(|| panic!("no record `{name}`"));
        let mut passed = r.passed;
        let mut extra = String::new();
        if n == 1 {
            passed &= identities_seconds < 60.0;
            extra = format!(" runtime={identities_seconds:.1}s");
        }
        println!("{} {n:>2} {name}: {what} [{}{extra}]", if passed { "PASS" } else { "FAIL" }, summary(r));
        if !passed {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: criteria failed: {failed:?}");
        ExitCode::FAILURE
    }
}
