//! End-to-end harness behaviour on the quick configuration.

use std::path::{Path, PathBuf};

use lpheat::harness::{run_suite, ExperimentConfig, Suite};
use lpheat::{DomainDescriptor, Error};

fn quick() -> ExperimentConfig {
    ExperimentConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/quick.toml")).unwrap()
}

#[test]
fn identical_configs_give_identical_payloads() {
    let cfg = quick();
    for suite in [Suite::Identities, Suite::Equivalences, Suite::HeatflowBounds] {
        let a = run_suite(&cfg, suite).unwrap().payload().unwrap();
        let b = run_suite(&cfg, suite).unwrap().payload().unwrap();
        assert_eq!(a, b, "{}", suite.name());
    }
}

#[test]
fn every_record_carries_the_config_hash() {
    let cfg = quick();
    let report = run_suite(&cfg, Suite::Khintchine).unwrap();
    assert!(report.records.iter().all(|r| r.config_hash == cfg.hash()));
    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(run_suite(&other, Suite::Khintchine).unwrap().config_hash, report.config_hash);
}

#[test]
fn identities_pass_on_the_hundred_cell_interval() {
    let mut cfg = quick();
    cfg.domains = vec![DomainDescriptor::interval(1.0, 100)];
    let report = run_suite(&cfg, Suite::Identities).unwrap();
    assert!(report.record("heat-identity-q").unwrap().passed);
    assert!(report.passed());
}

#[test]
fn empty_corpus_is_rejected_before_running() {
    let mut cfg = quick();
    cfg.corpus.count = 0;
    assert!(matches!(run_suite(&cfg, Suite::All), Err(Error::Config { .. })));
}

#[test]
fn oversize_domain_names_the_cap() {
    let mut cfg = quick();
    cfg.domains = vec![DomainDescriptor::square(70)];
    let err = run_suite(&cfg, Suite::Identities).unwrap_err();
    assert!(matches!(err, Error::CapExceeded { dof: 4900, cap: 4096 }), "{err}");
    assert!(err.to_string().contains("4096"));
}

#[test]
fn reports_land_in_hash_named_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick();
    let report = run_suite(&cfg, Suite::Khintchine).unwrap();
    let (json, csv) = report.write(dir.path()).unwrap();
    let stem = format!("khintchine-{}", cfg.hash());
    assert_eq!(json, PathBuf::from(dir.path()).join(format!("{stem}.json")));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["records"].as_array().unwrap().len(), report.records.len());
    let rows = std::fs::read_to_string(csv).unwrap();
    assert!(rows.starts_with("schema_version,suite,config_hash,record,measurement,value,passed"));
}
