//! Experiment configuration: one TOML file with a section per suite.
//!
//! Every section has defaults except `seed` and `domains`; unknown keys are
//! rejected so that typos surface as errors with their key path.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dhs::DhsQuadrature;
use crate::error::{Error, Result};
use crate::grid::DomainDescriptor;

use super::corpus::CorpusKind;
use super::suites::Suite;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Suites this file is meant for; empty means all of them.
    #[serde(default)]
    pub suites: Vec<String>,
    /// Report directory; overridden by `LPHEAT_OUT` and `--out`.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    pub domains: Vec<DomainDescriptor>,
    #[serde(default)]
    pub symbol: SymbolConfig,
    #[serde(default)]
    pub time_grid: TimeGridConfig,
    #[serde(default)]
    pub corpus: CorpusConfig,
    #[serde(default)]
    pub identities: IdentitiesConfig,
    #[serde(default)]
    pub dhs: DhsConfig,
    #[serde(default)]
    pub equivalences: EquivalencesConfig,
    #[serde(default)]
    pub orthogonality: OrthogonalityConfig,
    #[serde(default)]
    pub resolvent: ResolventConfig,
    #[serde(default)]
    pub heatflow: HeatflowConfig,
    #[serde(default)]
    pub khintchine: KhintchineConfig,
}

/// Bump anchor `a`, DHS order `N` and derivative tower height `M_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymbolConfig {
    pub anchor: f64,
    pub dhs_order: usize,
    pub max_order: usize,
}

impl Default for SymbolConfig {
    fn default() -> Self {
        SymbolConfig { anchor: 1.0, dhs_order: 4, max_order: 6 }
    }
}

/// `t_min = t_min_factor/λ_max`, `t_max = t_max_factor/λ_min`; the identity grid uses its own `t_min`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGridConfig {
    pub t_min_factor: f64,
    pub t_max_factor: f64,
    pub ratio: f64,
    pub identity_t_min_factor: f64,
}

impl Default for TimeGridConfig {
    fn default() -> Self {
        TimeGridConfig { t_min_factor: 0.01, t_max_factor: 20.0, ratio: 2f64.powf(0.125), identity_t_min_factor: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    pub kinds: Vec<CorpusKind>,
    /// Members per domain, cycling through `kinds`.
    pub count: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig { kinds: CorpusKind::ALL.to_vec(), count: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesConfig {
    pub tolerance: f64,
    pub factorization_times: usize,
    pub factorization_tolerance: f64,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        IdentitiesConfig { tolerance: 1e-6, factorization_times: 10, factorization_tolerance: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DhsConfig {
    pub domain: DomainDescriptor,
    /// The operator is `Ψ(4^{−scale_exponent}·(−Δ))`.
    pub scale_exponent: i32,
    /// Quadratures from coarse to fine; the last one is the reference.
    pub levels: Vec<DhsQuadrature>,
    pub tolerance: f64,
    pub flatness_orders: Vec<usize>,
    pub flatness_heights: [f64; 2],
    pub flatness_points: usize,
    pub flatness_margin: f64,
}

impl Default for DhsConfig {
    fn default() -> Self {
        DhsConfig {
            domain: DomainDescriptor::interval(1.0, 200),
            scale_exponent: 7,
            levels: vec![
                DhsQuadrature::new(0.01, 0.1),
                DhsQuadrature::new(0.005, 0.05),
                DhsQuadrature::new(0.0025, 0.025),
            ],
            tolerance: 1e-4,
            flatness_orders: vec![2, 4],
            flatness_heights: [1e-3, 1e-1],
            flatness_points: 21,
            flatness_margin: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquivalencesConfig {
    /// Exponents for the dyadic/continuous window.
    pub window_p: Vec<f64>,
    pub window: [f64; 2],
    pub strict_window: [f64; 2],
    /// Exponents for the two-sided square-function ratio.
    pub square_p: Vec<f64>,
    /// Unit squares with `n × n` cells compared for drift.
    pub grids: Vec<usize>,
    pub drift_kinds: Vec<CorpusKind>,
    pub drift_count: usize,
    pub max_drift: f64,
    /// Exponents for `‖f‖_p / besov_dyadic` and the heat square-function ratio.
    pub besov_p: Vec<f64>,
    pub rademacher_p: Vec<f64>,
}

impl Default for EquivalencesConfig {
    fn default() -> Self {
        EquivalencesConfig {
            window_p: vec![2.0, 4.0],
            window: [0.25, 4.0],
            strict_window: [0.75, 3.0],
            square_p: vec![1.5, 2.0, 3.0, 4.0],
            grids: vec![32, 64],
            drift_kinds: vec![CorpusKind::Sine, CorpusKind::Gaussian, CorpusKind::BoundaryLayer],
            drift_count: 9,
            max_drift: 0.1,
            besov_p: vec![2.0, 4.0, 8.0],
            rademacher_p: vec![2.0, 4.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrthogonalityConfig {
    pub p: Vec<f64>,
    pub max_gap: i32,
    pub constant: f64,
    pub diagonal_limit: f64,
    /// Explicit `[j_min, j_max]`; defaults to the family covering the spectrum.
    pub j_range: Option<[i32; 2]>,
    /// Explicit `[k_min, k_max]`; defaults to the `j` range widened by `max_gap`.
    pub k_range: Option<[i32; 2]>,
}

impl Default for OrthogonalityConfig {
    fn default() -> Self {
        OrthogonalityConfig { p: vec![2.0, 4.0], max_gap: 6, constant: 16.0, diagonal_limit: 0.43, j_range: None, k_range: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolventConfig {
    pub domain: DomainDescriptor,
    pub thetas: Vec<f64>,
    /// Radii `r_k = radius_min_factor·λ_min·radius_ratio^k`.
    pub radius_min_factor: f64,
    pub radius_ratio: f64,
    pub radius_count: usize,
    pub max_alpha_l2: f64,
    pub l2_bound_slack: f64,
    /// Spacing refinement compared for scale invariance at `p ∈ {1, ∞}`.
    pub refinement: f64,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        ResolventConfig {
            domain: DomainDescriptor::square(16),
            thetas: vec![PI / 2.0, 5.0 * PI / 8.0, 3.0 * PI / 4.0, 7.0 * PI / 8.0, 15.0 * PI / 16.0, 31.0 * PI / 32.0],
            radius_min_factor: 0.5,
            radius_ratio: 4.0,
            radius_count: 6,
            max_alpha_l2: 0.05,
            l2_bound_slack: 1e-9,
            refinement: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatflowConfig {
    pub domain: DomainDescriptor,
    pub components: Vec<usize>,
    pub p: Vec<f64>,
    pub seeds: usize,
    pub iterations: usize,
    /// Ratio of the coarse time grid used for operator-norm sweeps.
    pub sweep_ratio: f64,
    pub uniformity: f64,
    /// Domination times are `factor/λ_min`.
    pub domination_factors: Vec<f64>,
    pub domination_cells: usize,
    pub domination_tolerance: f64,
    pub maximal_p: Vec<f64>,
    pub q_p: Vec<f64>,
    pub refinement_stability: f64,
}

impl Default for HeatflowConfig {
    fn default() -> Self {
        HeatflowConfig {
            domain: DomainDescriptor::square_with_obstacle(16, 4),
            components: vec![1, 4, 16],
            p: vec![2.0, 4.0],
            seeds: 4,
            iterations: 20,
            sweep_ratio: 2f64.sqrt(),
            uniformity: 0.05,
            domination_factors: vec![1e-3, 1e-2, 1e-1, 1.0, 10.0],
            domination_cells: 6,
            domination_tolerance: 1e-12,
            maximal_p: vec![2.0, 4.0, f64::INFINITY],
            q_p: vec![2.0, 4.0, 8.0],
            refinement_stability: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KhintchineConfig {
    pub vectors: usize,
    pub max_len: usize,
    pub p: Vec<f64>,
    pub window: [f64; 2],
    /// Rademacher samples for the Mikhlin uniformity study of `m^±(t, ·)`.
    pub symbol_samples: usize,
}

impl Default for KhintchineConfig {
    fn default() -> Self {
        KhintchineConfig { vectors: 100, max_len: 12, p: vec![1.0, 4.0], window: [0.2, 5.0], symbol_samples: 16 }
    }
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

impl ExperimentConfig {
    /// Parses TOML, reporting the key path of any schema violation.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_error("", e.message().trim().to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(&path, e.into_inner().message().trim().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form (output directory excluded).
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canonical);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Suites selected by the file, or every suite when none are listed.
    pub fn selected_suites(&self) -> Result<Vec<Suite>> {
        if self.suites.is_empty() {
            return Ok(vec![Suite::All]);
        }
        self.suites.iter().map(|s| s.parse()).collect()
    }

    /// Checks semantic constraints for the given suite (or for every selected suite).
    pub fn validate(&self, suite: Option<Suite>) -> Result<()> {
        for (i, s) in self.suites.iter().enumerate() {
            s.parse::<Suite>().map_err(|_| config_error(&format!("suites[{i}]"), format!("unknown suite `{s}`")))?;
        }
        if self.domains.is_empty() {
            return Err(config_error("domains", "at least one domain is required"));
        }
        let targets = match suite {
            Some(s) => s.expand(),
            None => self.selected_suites()?.into_iter().flat_map(Suite::expand).collect(),
        };
        let needs_corpus = targets.iter().any(|s| s.needs_corpus());
        if needs_corpus {
            if self.corpus.count == 0 {
                return Err(config_error("corpus.count", "the corpus is empty"));
            }
            if self.corpus.kinds.is_empty() {
                return Err(config_error("corpus.kinds", "no corpus kinds listed"));
            }
        }
        check_exponents("equivalences.window_p", &self.equivalences.window_p)?;
        check_exponents("equivalences.square_p", &self.equivalences.square_p)?;
        check_exponents("equivalences.besov_p", &self.equivalences.besov_p)?;
        check_exponents("equivalences.rademacher_p", &self.equivalences.rademacher_p)?;
        check_exponents("orthogonality.p", &self.orthogonality.p)?;
        check_exponents("heatflow.p", &self.heatflow.p)?;
        check_exponents("heatflow.maximal_p", &self.heatflow.maximal_p)?;
        check_exponents("heatflow.q_p", &self.heatflow.q_p)?;
        check_exponents("khintchine.p", &self.khintchine.p)?;
        let t = &self.time_grid;
        if !(t.t_min_factor > 0.0 && t.t_max_factor > 0.0 && t.identity_t_min_factor > 0.0) {
            return Err(config_error("time_grid", "time factors must be positive"));
        }
        if !(t.ratio > 1.0) {
            return Err(config_error("time_grid.ratio", "ratio must exceed 1"));
        }
        let s = &self.symbol;
        if !(s.anchor > 0.0) {
            return Err(config_error("symbol.anchor", "anchor must be positive"));
        }
        if s.dhs_order + 1 > s.max_order {
            return Err(config_error("symbol.max_order", "needs at least dhs_order + 1 derivatives"));
        }
        if targets.contains(&Suite::DhsConvergence) && self.dhs.levels.len() < 2 {
            return Err(config_error("dhs.levels", "at least two quadrature levels are needed"));
        }
        if targets.contains(&Suite::Equivalences) && (self.equivalences.grids.len() < 2 || self.equivalences.drift_count == 0) {
            return Err(config_error("equivalences.grids", "drift needs two grids and a nonempty drift corpus"));
        }
        if targets.contains(&Suite::Resolvent) && (self.resolvent.thetas.len() < 2 || self.resolvent.radius_count < 2) {
            return Err(config_error("resolvent", "the growth fit needs two angles and two radii"));
        }
        if targets.contains(&Suite::Khintchine) && !(1..=crate::symbol::MAX_KHINTCHINE_LEN).contains(&self.khintchine.max_len) {
            return Err(config_error("khintchine.max_len", "length outside the exact-integration range"));
        }
        if self.heatflow.components.contains(&0) {
            return Err(config_error("heatflow.components", "component counts must be positive"));
        }
        Ok(())
    }
}

fn check_exponents(path: &str, ps: &[f64]) -> Result<()> {
    match ps.iter().find(|p| !(**p >= 1.0)) {
        Some(p) => Err(config_error(path, format!("exponent {p} is below 1"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 3
[[domains]]
kind = "interval"
length = 1.0
cells = 20
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.symbol, SymbolConfig::default());
        assert_eq!(c.selected_suites().unwrap(), vec![Suite::All]);
        c.validate(None).unwrap();
    }

    #[test]
    fn schema_errors_carry_paths() {
        let bad = format!("{MINIMAL}\n[corpus]\ncount = \"many\"\n");
        match ExperimentConfig::from_toml(&bad) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "corpus.count"),
            other => panic!("{other:?}"),
        }
        let typo = format!("{MINIMAL}\n[symbol]\nancor = 2.0\n");
        assert!(matches!(ExperimentConfig::from_toml(&typo), Err(Error::Config { .. })));
        assert!(ExperimentConfig::from_toml("[[domains]]\nkind = \"interval\"\nlength = 1.0\ncells = 3\n").is_err());
    }

    #[test]
    fn empty_corpus_rejected_for_all() {
        let c = ExperimentConfig::from_toml(&format!("{MINIMAL}\n[corpus]\ncount = 0\n")).unwrap();
        assert!(matches!(c.validate(Some(Suite::All)), Err(Error::Config { .. })));
        c.validate(Some(Suite::Khintchine)).unwrap();
    }

    #[test]
    fn unknown_suite_rejected() {
        let c = ExperimentConfig::from_toml(&format!("suites = [\"nope\"]\n{MINIMAL}")).unwrap();
        assert!(c.validate(None).is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let mut b = a.clone();
        b.output_dir = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 4;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
