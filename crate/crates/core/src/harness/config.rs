//! Experiment configuration: a versioned TOML document.
//!
//! Every section has defaults, so a config only needs the keys it wants to
//! change. Loading fills the defaults, rejects keys the schema does not
//! know and checks every numeric bound; the echo written next to the
//! outputs is the fully populated document.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::anneal::{AnnealParams, CapacityDistribution, InstanceSpec};
use crate::ensemble::EnsembleSpec;
use crate::resilience::{RemovalMode, DEFAULT_GIANT_THRESHOLD};
use crate::rewire::{default_walk_length, ScheduleBlock};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    AnnealEquilibrate,
    EnsembleConverge,
    AdaptationCycles,
    AttackCompare,
    PercolationSweep,
    SpectrumReport,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::AnnealEquilibrate => "anneal_equilibrate",
            ExperimentKind::EnsembleConverge => "ensemble_converge",
            ExperimentKind::AdaptationCycles => "adaptation_cycles",
            ExperimentKind::AttackCompare => "attack_compare",
            ExperimentKind::PercolationSweep => "percolation_sweep",
            ExperimentKind::SpectrumReport => "spectrum_report",
        }
    }
}

/// The G(n,p) graph that rewiring experiments start from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeedGraphConfig {
    pub mean_degree: f64,
}

impl Default for SeedGraphConfig {
    fn default() -> Self {
        Self { mean_degree: 6.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealConfig {
    pub temperature: f64,
    pub distance_weight: f64,
    pub demand_weight: f64,
    /// Rounds before the capacity shock (or in total without one).
    pub rounds: usize,
    pub veto_isolation: bool,
    pub side: f64,
    pub demand_per_link: f64,
    pub capacity: CapacityDistribution,
    pub shock: bool,
    pub post_shock_rounds: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        let p = AnnealParams::default();
        let i = InstanceSpec::default();
        Self {
            temperature: p.temperature,
            distance_weight: p.distance_weight,
            demand_weight: p.demand_weight,
            rounds: p.rounds,
            veto_isolation: p.veto_isolation,
            side: i.side,
            demand_per_link: i.demand_per_link,
            capacity: i.capacity,
            shock: true,
            post_shock_rounds: 50,
        }
    }
}

impl AnnealConfig {
    pub fn params(&self) -> AnnealParams {
        AnnealParams {
            temperature: self.temperature,
            distance_weight: self.distance_weight,
            demand_weight: self.demand_weight,
            rounds: self.rounds,
            veto_isolation: self.veto_isolation,
        }
    }

    pub fn instance(&self, n: usize, mean_degree: f64) -> InstanceSpec {
        InstanceSpec {
            n,
            mean_degree,
            side: self.side,
            demand_per_link: self.demand_per_link,
            capacity: self.capacity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewireSection {
    pub gamma: f64,
    /// `ceil(ln n)` when absent.
    pub walk_length: Option<usize>,
    pub max_retries: usize,
    pub sweeps: usize,
}

impl Default for RewireSection {
    fn default() -> Self {
        Self {
            gamma: 2.5,
            walk_length: None,
            max_retries: 3,
            sweeps: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackSource {
    /// Networks produced by the rewiring protocol at each exponent.
    Rewired,
    /// Zeta configuration-model networks.
    Zeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub fraction: f64,
    pub gammas: Vec<f64>,
    pub source: AttackSource,
    pub sweeps: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            fraction: 0.1,
            gammas: vec![2.1, 3.5],
            source: AttackSource::Rewired,
            sweeps: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gnp,
    Zeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PercolationConfig {
    pub model: ModelKind,
    pub gamma: f64,
    pub mean_degree: f64,
    pub mode: RemovalMode,
    /// Ascending removal fractions; `0, 0.01, ..., 1` when absent.
    pub fractions: Option<Vec<f64>>,
    pub giant_threshold: f64,
    /// Allowed |empirical - theory| for the critical fraction.
    pub tolerance: f64,
}

impl Default for PercolationConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Zeta,
            gamma: 3.2,
            mean_degree: 2.0,
            mode: RemovalMode::Random,
            fractions: None,
            giant_threshold: DEFAULT_GIANT_THRESHOLD,
            tolerance: 0.15,
        }
    }
}

impl PercolationConfig {
    pub fn ensemble(&self, n: usize) -> EnsembleSpec {
        match self.model {
            ModelKind::Gnp => EnsembleSpec::gnp_mean_degree(n, self.mean_degree),
            ModelKind::Zeta => EnsembleSpec::zeta(n, self.gamma),
        }
    }

    pub fn resolved_fractions(&self) -> Vec<f64> {
        self.fractions
            .clone()
            .unwrap_or_else(|| (0..=100).map(|i| i as f64 / 100.0).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectrumConfig {
    /// Edge probability; derived from `mean_degree` when absent.
    pub p: Option<f64>,
    pub mean_degree: f64,
    pub bins: usize,
    pub sync_beta: f64,
    pub consensus_c: f64,
    pub consensus_epsilon: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            p: None,
            mean_degree: 10.0,
            bins: 60,
            sync_beta: 10.0,
            consensus_c: 1.0,
            consensus_epsilon: 1e-3,
        }
    }
}

impl SpectrumConfig {
    pub fn resolved_p(&self, n: usize) -> f64 {
        self.p.unwrap_or_else(|| {
            if n > 1 {
                (self.mean_degree / (n - 1) as f64).min(1.0)
            } else {
                0.0
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub n: usize,
    pub seed: u64,
    pub replicas: usize,
    pub seed_graph: SeedGraphConfig,
    pub anneal: AnnealConfig,
    pub rewire: RewireSection,
    pub schedule: Vec<ScheduleBlock>,
    pub attack: AttackConfig,
    pub percolation: PercolationConfig,
    pub spectrum: SpectrumConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: ExperimentKind::EnsembleConverge,
            n: 1000,
            seed: 1,
            replicas: 10,
            seed_graph: SeedGraphConfig::default(),
            anneal: AnnealConfig::default(),
            rewire: RewireSection::default(),
            schedule: vec![
                ScheduleBlock {
                    gamma: 2.1,
                    sweeps: 30,
                },
                ScheduleBlock {
                    gamma: 3.5,
                    sweeps: 30,
                },
            ],
            attack: AttackConfig::default(),
            percolation: PercolationConfig::default(),
            spectrum: SpectrumConfig::default(),
        }
    }
}

fn bound(field: &str, reason: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{field}: {reason}"))
}

fn check_gamma(field: &str, gamma: f64) -> Result<(), HarnessError> {
    if gamma > 2.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(bound(field, format!("gamma must exceed 2, got {gamma}")))
    }
}

impl ExperimentConfig {
    /// Config for `kind` with every other field at its default.
    pub fn for_experiment(kind: ExperimentKind) -> Self {
        let n = match kind {
            ExperimentKind::AnnealEquilibrate => 100,
            ExperimentKind::EnsembleConverge => 5000,
            ExperimentKind::AdaptationCycles => 2000,
            ExperimentKind::AttackCompare => 300,
            ExperimentKind::PercolationSweep => 10_000,
            ExperimentKind::SpectrumReport => 2000,
        };
        let replicas = match kind {
            ExperimentKind::AttackCompare | ExperimentKind::PercolationSweep => 20,
            ExperimentKind::SpectrumReport => 5,
            _ => 10,
        };
        Self {
            experiment: kind,
            n,
            replicas,
            ..Self::default()
        }
    }

    pub fn walk_length(&self) -> usize {
        self.rewire
            .walk_length
            .unwrap_or_else(|| default_walk_length(self.n))
    }

    /// Checks every bound; errors name the offending field.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bound(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        if self.replicas == 0 {
            return Err(bound("replicas", "must be at least 1"));
        }
        if self.n < 2 {
            return Err(bound("n", "must be at least 2"));
        }
        let md = self.seed_graph.mean_degree;
        if !(md >= 0.0 && md <= (self.n - 1) as f64) {
            return Err(bound(
                "seed_graph.mean_degree",
                format!("must lie in [0, n-1], got {md}"),
            ));
        }

        self.anneal
            .params()
            .validate()
            .map_err(|e| bound("anneal", e))?;
        self.anneal
            .capacity
            .validate()
            .map_err(|e| bound("anneal.capacity", e))?;
        if !(self.anneal.side > 0.0 && self.anneal.side.is_finite()) {
            return Err(bound("anneal.side", "must be positive"));
        }
        if !(self.anneal.demand_per_link >= 0.0) {
            return Err(bound("anneal.demand_per_link", "must be non-negative"));
        }
        if self.anneal.rounds == 0 {
            return Err(bound("anneal.rounds", "must be at least 1"));
        }

        check_gamma("rewire.gamma", self.rewire.gamma)?;
        if self.rewire.walk_length == Some(0) {
            return Err(bound("rewire.walk_length", "must be at least 1"));
        }
        if self.rewire.sweeps == 0 {
            return Err(bound("rewire.sweeps", "must be at least 1"));
        }
        if self.experiment == ExperimentKind::AdaptationCycles && self.schedule.is_empty() {
            return Err(bound("schedule", "must contain at least one block"));
        }
        for (i, block) in self.schedule.iter().enumerate() {
            check_gamma(&format!("schedule[{i}].gamma"), block.gamma)?;
            if block.sweeps == 0 {
                return Err(bound(
                    &format!("schedule[{i}].sweeps"),
                    "must be at least 1",
                ));
            }
        }

        if !(0.0..=1.0).contains(&self.attack.fraction) {
            return Err(bound("attack.fraction", "must lie in [0, 1]"));
        }
        if self.attack.gammas.is_empty() {
            return Err(bound("attack.gammas", "must not be empty"));
        }
        for (i, &g) in self.attack.gammas.iter().enumerate() {
            check_gamma(&format!("attack.gammas[{i}]"), g)?;
        }

        let perc = &self.percolation;
        if perc.model == ModelKind::Zeta {
            check_gamma("percolation.gamma", perc.gamma)?;
        }
        if !(perc.mean_degree >= 0.0) {
            return Err(bound("percolation.mean_degree", "must be non-negative"));
        }
        let fractions = perc.resolved_fractions();
        if fractions.is_empty() {
            return Err(bound("percolation.fractions", "must not be empty"));
        }
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(bound("percolation.fractions", "must lie in [0, 1]"));
        }
        if fractions.windows(2).any(|w| w[1] < w[0]) {
            return Err(bound("percolation.fractions", "must be sorted ascending"));
        }
        if !(perc.giant_threshold > 0.0 && perc.giant_threshold <= 1.0) {
            return Err(bound("percolation.giant_threshold", "must lie in (0, 1]"));
        }
        if !(perc.tolerance >= 0.0) {
            return Err(bound("percolation.tolerance", "must be non-negative"));
        }

        let spec = &self.spectrum;
        let p = spec.resolved_p(self.n);
        if !(p > 0.0 && p < 1.0) {
            return Err(bound(
                "spectrum.p",
                format!("must lie strictly inside (0, 1), got {p}"),
            ));
        }
        if spec.bins == 0 {
            return Err(bound("spectrum.bins", "must be at least 1"));
        }
        if !(spec.sync_beta > 0.0) {
            return Err(bound("spectrum.sync_beta", "must be positive"));
        }
        if !(spec.consensus_c > 0.0 && spec.consensus_epsilon > 0.0) {
            return Err(bound(
                "spectrum.consensus",
                "C and epsilon must be positive",
            ));
        }
        if self.experiment == ExperimentKind::SpectrumReport
            && self.n > crate::spectral::DENSE_LIMIT
        {
            return Err(bound(
                "n",
                format!(
                    "spectrum reports need the full spectrum, n must not exceed {}",
                    crate::spectral::DENSE_LIMIT
                ),
            ));
        }
        Ok(())
    }

    /// Parses, fills defaults, rejects unknown keys and validates.
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let raw: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| HarnessError::Config(format!("parse error: {e}")))?;
        let mut config: ExperimentConfig = raw
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        // Size and replica defaults depend on the experiment.
        let base = Self::for_experiment(config.experiment);
        if !raw.contains_key("n") {
            config.n = base.n;
        }
        if !raw.contains_key("replicas") {
            config.replicas = base.replicas;
        }
        let known = match toml::Value::try_from(&config).expect("config serializes") {
            toml::Value::Table(t) => key_paths(&t),
            _ => unreachable!("config serializes to a table"),
        };
        let unknown: Vec<String> = key_paths(&raw)
            .into_iter()
            .filter(|k| !known.contains(k))
            .collect();
        if !unknown.is_empty() {
            return Err(HarnessError::Config(format!(
                "unknown keys: {}",
                unknown.join(", ")
            )));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// The fully populated document.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Dotted key paths of every leaf; array-of-table entries share `name[]`.
fn key_paths(table: &toml::Table) -> BTreeSet<String> {
    fn walk(prefix: &str, value: &toml::Value, out: &mut BTreeSet<String>) {
        match value {
            toml::Value::Table(t) => {
                for (k, v) in t {
                    walk(&format!("{prefix}.{k}"), v, out);
                }
            }
            toml::Value::Array(items)
                if items.iter().all(|v| v.is_table()) && !items.is_empty() =>
            {
                for v in items {
                    walk(&format!("{prefix}[]"), v, out);
                }
            }
            _ => {
                out.insert(prefix.to_string());
            }
        }
    }
    let mut out = BTreeSet::new();
    for (k, v) in table {
        walk(k, v, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_adaptation_config() {
        let text = r#"
            experiment = "adaptation_cycles"
            n = 500
            [[schedule]]
            gamma = 2.1
            sweeps = 10
            [[schedule]]
            gamma = 3.5
            sweeps = 10
        "#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(c.schedule.len(), 2);
        assert_eq!(c.replicas, 10);
        assert_eq!(c.walk_length(), 7);
        let a = ExperimentConfig::from_toml_str("experiment = \"attack_compare\"").unwrap();
        assert_eq!((a.n, a.replicas), (300, 20));
        let echo = c.to_toml_string();
        assert!(echo.contains("schema_version = 1"));
        assert_eq!(ExperimentConfig::from_toml_str(&echo).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_bounds() {
        let err = ExperimentConfig::from_toml_str("n = 50\nbogus = 1\n[rewire]\nspeed = 2\n")
            .unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("bogus") && msg.contains("rewire.speed"),
            "{msg}"
        );
        let err = ExperimentConfig::from_toml_str("[rewire]\ngamma = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("gamma must exceed 2"));
        assert!(ExperimentConfig::from_toml_str("replicas = 0").is_err());
        assert!(ExperimentConfig::from_toml_str(
            "[[schedule]]\ngamma = 2.5\nsweeps = 3\nextra = 1"
        )
        .is_err());
        assert!(ExperimentConfig::from_toml_str(
            "[anneal.capacity]\nkind = \"constant\"\nvalue = 2.0"
        )
        .is_ok());
    }
}
