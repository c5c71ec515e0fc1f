//! Scenario configuration: JSON schema, defaults, validation and the per-RU
//! demand profile derived from the radio model.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::BanditConfig;
use crate::error::{Error, Result};
use crate::feasibility::{CostModel, Sharing};
use crate::oracle::OracleLimits;
use crate::radio::{framed_rate, rdc_effort, split72_rate, split73_rate, split_fraction, BurstConfig, Split, SplitParams};
use crate::topology::{
    generate_topology, DeploymentSpec, NetworkParams, RuDemand, SiteCapacities, SiteCapacity, Topology,
};

/// Capacity preset of Edge- and OLT-Clouds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioKind {
    I,
    II,
    III,
}

impl ScenarioKind {
    pub fn capacities(self) -> SiteCapacities {
        let pair = |edge_gops: f64, edge_gbps: f64, olt_gops: f64, olt_gbps: f64| SiteCapacities {
            edge: SiteCapacity { throughput: edge_gbps * 1e9, gops: edge_gops },
            olt: SiteCapacity { throughput: olt_gbps * 1e9, gops: olt_gops },
        };
        match self {
            ScenarioKind::I => pair(1.5e4, 50.0, 4.5e4, 600.0),
            ScenarioKind::II => pair(3e4, 100.0, 3e4, 400.0),
            ScenarioKind::III => pair(4.5e4, 150.0, 1.5e4, 200.0),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::I => "I",
            ScenarioKind::II => "II",
            ScenarioKind::III => "III",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Minmax,
    Vcg,
    NearestFirst,
    Bandit,
    /// Exact min-max solve; skipped above the oracle caps.
    Oracle,
}

impl Mechanism {
    pub const ALL: [Mechanism; 5] = [
        Mechanism::Minmax,
        Mechanism::Vcg,
        Mechanism::NearestFirst,
        Mechanism::Bandit,
        Mechanism::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Minmax => "minmax",
            Mechanism::Vcg => "vcg",
            Mechanism::NearestFirst => "nearest_first",
            Mechanism::Bandit => "bandit",
            Mechanism::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    /// Split-7.2 uplink parameters.
    pub uplink: SplitParams,
    /// Split-7.3 downlink parameters.
    pub downlink: SplitParams,
    /// Parameters of the RU-DU-CU processing effort.
    pub processing: SplitParams,
    pub burst: BurstConfig,
    /// Fraction of RU processing capacity used by the RU-side share at the
    /// calibrated base load.
    pub ru_processing_utilization: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            uplink: SplitParams::calibrated_uplink(),
            downlink: SplitParams::calibrated_downlink(),
            processing: SplitParams::calibrated_processing(),
            burst: BurstConfig::default(),
            ru_processing_utilization: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostConfig {
    /// Default per-RU cost.
    pub c_default: f64,
    /// Price per Gbps of link throughput.
    pub c_lambda_per_gbps: f64,
    /// Price per GOPS/slot of compute.
    pub c_p: f64,
    /// Compute discount when an RU uses an Edge site of its own MNO.
    pub owner_gamma: Option<f64>,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            c_default: 100.0,
            c_lambda_per_gbps: 0.5,
            c_p: 1.5,
            owner_gamma: None,
        }
    }
}

impl CostConfig {
    pub fn to_model(&self, topo: &Topology) -> CostModel {
        let model = CostModel::new(self.c_default, self.c_lambda_per_gbps * 1e-9, self.c_p);
        match self.owner_gamma {
            Some(g) => model.with_owner_discount(topo, g),
            None => model,
        }
    }
}

/// Uplink demand at the calibrated base point and the derived ratios used
/// to scale every RU demand with the sweep level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandProfile {
    pub ul_base: f64,
    pub dl_base: f64,
    /// Per-direction processing effort at the base point, GOPS/slot.
    pub effort_per_direction: f64,
    pub burst: BurstConfig,
    pub ru_processing_utilization: f64,
}

impl DemandProfile {
    pub fn from_radio(radio: &RadioConfig) -> Result<Self> {
        let u = radio.ru_processing_utilization;
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Validation(format!("ru_processing_utilization must be in (0, 1], got {u}")));
        }
        radio.burst.validate()?;
        Ok(Self {
            ul_base: split72_rate(&radio.uplink)?,
            dl_base: split73_rate(&radio.downlink)?,
            effort_per_direction: rdc_effort(&radio.processing)? / 2.0,
            burst: radio.burst,
            ru_processing_utilization: u,
        })
    }

    /// Per-RU demand when the raw uplink datarate is `level` bit/s.
    pub fn at(&self, level: f64) -> RuDemand {
        let s = level / self.ul_base;
        let (ru_ul, ducu_ul) = split_fraction(self.effort_per_direction, Split::Split72);
        let (ru_dl, ducu_dl) = split_fraction(self.effort_per_direction, Split::Split73);
        RuDemand {
            w_ul: framed_rate(level, &self.burst),
            w_dl: framed_rate(level * self.dl_base / self.ul_base, &self.burst),
            gamma_ul: ducu_ul * s,
            gamma_dl: ducu_dl * s,
            eta_ul: ru_ul * s,
            eta_dl: ru_dl * s,
            h_ul: ru_ul / self.ru_processing_utilization,
            h_dl: ru_dl / self.ru_processing_utilization,
        }
    }
}

fn default_sweep() -> Vec<f64> {
    (1..=7).map(|k| k as f64 * 0.5e9).collect()
}

fn default_mechanisms() -> Vec<Mechanism> {
    vec![Mechanism::Minmax, Mechanism::Vcg, Mechanism::NearestFirst, Mechanism::Bandit]
}

fn default_seeds() -> Vec<u64> {
    (1..=20).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub deployment: DeploymentSpec,
    #[serde(default)]
    pub radio: RadioConfig,
    #[serde(default)]
    pub cost: CostConfig,
    #[serde(default)]
    pub network: NetworkParams,
    /// Overrides the preset capacities of `scenario`.
    #[serde(default)]
    pub capacities: Option<SiteCapacities>,
    /// Raw uplink datarate per RU, bit/s, one run per level.
    #[serde(default = "default_sweep")]
    pub demand_sweep: Vec<f64>,
    #[serde(default = "default_mechanisms")]
    pub mechanisms: Vec<Mechanism>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub bandit: BanditConfig,
    /// Sharing rule of the nearest-first and bandit baselines.
    #[serde(default)]
    pub sharing: Sharing,
    /// Abort a greedy run when its first RU has no feasible site.
    #[serde(default)]
    pub strict_first: bool,
    #[serde(default)]
    pub oracle_limits: OracleLimits,
    /// Externally supplied deployment (JSON topology). Its demands are
    /// taken to be at the calibrated base point and scale linearly.
    #[serde(default)]
    pub topology_file: Option<PathBuf>,
    /// Parsed contents of `topology_file`, filled by [`load_config`].
    #[serde(skip)]
    pub external: Option<Topology>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::I,
            deployment: DeploymentSpec::default(),
            radio: RadioConfig::default(),
            cost: CostConfig::default(),
            network: NetworkParams::default(),
            capacities: None,
            demand_sweep: default_sweep(),
            mechanisms: default_mechanisms(),
            seeds: default_seeds(),
            bandit: BanditConfig::default(),
            sharing: Sharing::default(),
            strict_first: false,
            oracle_limits: OracleLimits::default(),
            topology_file: None,
            external: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.deployment.validate()?;
        self.network.validate()?;
        self.bandit.validate()?;
        DemandProfile::from_radio(&self.radio)?;
        for (name, v) in [
            ("cost.c_default", self.cost.c_default),
            ("cost.c_lambda_per_gbps", self.cost.c_lambda_per_gbps),
            ("cost.c_p", self.cost.c_p),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if let Some(g) = self.cost.owner_gamma {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::Validation(format!("cost.owner_gamma must be in [0, 1], got {g}")));
            }
        }
        if let Some(caps) = &self.capacities {
            let all = [caps.edge.throughput, caps.edge.gops, caps.olt.throughput, caps.olt.gops];
            if all.iter().any(|c| !(*c > 0.0)) {
                return Err(Error::Validation("capacities must be > 0".into()));
            }
        }
        if self.demand_sweep.is_empty() || self.demand_sweep.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::Validation("demand_sweep values must be > 0".into()));
        }
        if self.mechanisms.is_empty() {
            return Err(Error::Validation("mechanisms must not be empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Validation("seeds must not be empty".into()));
        }
        Ok(())
    }

    pub fn capacities(&self) -> SiteCapacities {
        self.capacities.unwrap_or_else(|| self.scenario.capacities())
    }

    pub fn profile(&self) -> Result<DemandProfile> {
        DemandProfile::from_radio(&self.radio)
    }

    /// Deployment for one seed with every RU at sweep level `level`.
    pub fn topology_for(&self, seed: u64, level: f64) -> Result<Topology> {
        let profile = self.profile()?;
        if let Some(external) = &self.external {
            return Ok(external.with_scaled_demands(level / profile.ul_base));
        }
        if self.topology_file.is_some() {
            return Err(Error::Validation("topology_file set but not loaded".into()));
        }
        let spec = DeploymentSpec { seed, ..self.deployment.clone() };
        generate_topology(&spec, &profile.at(level), &self.radio.burst, &self.network, &self.capacities())
    }

    /// Tenant count: taken from the loaded topology when there is one.
    pub fn n_mno(&self) -> usize {
        self.external.as_ref().map_or(self.deployment.mno_shares.len(), |t| t.n_mno)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form, plus
    /// the loaded topology so edits to that file change the hash too.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_string(self).expect("config serializes").as_bytes());
        if let Some(t) = &self.external {
            hasher.update(serde_json::to_string(t).expect("topology serializes").as_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Loads `topology_file`, resolving relative paths against `base`.
    fn load_external(&mut self, base: Option<&Path>) -> Result<()> {
        let Some(file) = &self.topology_file else { return Ok(()) };
        let path = match base {
            Some(dir) if file.is_relative() => dir.join(file),
            _ => file.clone(),
        };
        let text = std::fs::read_to_string(&path)?;
        self.external = Some(Topology::from_json(&text)?);
        Ok(())
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses and validates a config document. A `topology_file` is resolved
/// relative to the current directory.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut cfg: ScenarioConfig = serde_json::from_str(text).map_err(parse_error)?;
    cfg.validate()?;
    cfg.load_external(None)?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg: ScenarioConfig = serde_json::from_str(&text).map_err(parse_error)?;
    cfg.validate()?;
    cfg.load_external(path.parent())?;
    Ok(cfg)
}

/// Parses an `ALLOC_SEED` value: a single seed or a comma-separated list.
pub fn parse_seed_override(value: &str) -> Result<Vec<u64>> {
    let seeds: std::result::Result<Vec<u64>, _> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect();
    match seeds {
        Ok(s) if !s.is_empty() => Ok(s),
        _ => Err(Error::Validation(format!("ALLOC_SEED must be a seed or comma-separated seeds, got {value:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(r#"{"scenario": "II"}"#).unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::II);
        assert_eq!(cfg.cost, CostConfig::default());
        assert_eq!(cfg.network, NetworkParams::default());
        assert_eq!(cfg.deployment, DeploymentSpec::default());
        assert_eq!(cfg.seeds, (1..=20).collect::<Vec<_>>());
        assert_eq!(cfg.demand_sweep.len(), 7);
        let caps = cfg.capacities();
        assert_eq!(caps.edge.gops, 3e4);
        assert_eq!(caps.olt.throughput, 400e9);
    }

    #[test]
    fn bad_shares_are_a_validation_error() {
        let err = parse_config(r#"{"scenario": "I", "deployment": {"mno_shares": [0.2, 0.3, 0.4]}}"#).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn empty_and_unknown_keys_are_parse_errors() {
        assert!(matches!(parse_config(""), Err(Error::Parse { line: 1, .. })));
        let err = parse_config("{\n  \"scenario\": \"I\",\n  \"bogus\": 1\n}").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn table_presets() {
        let c = ScenarioKind::I.capacities();
        assert_eq!((c.edge.gops, c.edge.throughput, c.olt.gops, c.olt.throughput), (1.5e4, 50e9, 4.5e4, 600e9));
        let c = ScenarioKind::III.capacities();
        assert_eq!((c.edge.gops, c.edge.throughput, c.olt.gops, c.olt.throughput), (4.5e4, 150e9, 1.5e4, 200e9));
    }

    #[test]
    fn demand_profile_scales_with_level() {
        let p = ScenarioConfig::default().profile().unwrap();
        let base = p.at(p.ul_base);
        assert!((base.eta_ul / base.h_ul - 0.3).abs() < 1e-12);
        assert!((base.gamma_ul + base.eta_ul - p.effort_per_direction).abs() < 1e-9);
        assert!(base.w_ul >= p.ul_base);
        let double = p.at(2.0 * p.ul_base);
        assert!((double.gamma_dl - 2.0 * base.gamma_dl).abs() < 1e-9);
        assert_eq!(double.h_ul, base.h_ul);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ScenarioConfig::default();
        assert_eq!(a.config_hash(), a.clone().config_hash());
        assert_eq!(a.config_hash().len(), 16);
        let b = ScenarioConfig { seeds: vec![1], ..ScenarioConfig::default() };
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn seed_override_parsing() {
        assert_eq!(parse_seed_override("7").unwrap(), vec![7]);
        assert_eq!(parse_seed_override("1, 2,3").unwrap(), vec![1, 2, 3]);
        assert!(parse_seed_override("x").is_err());
        assert!(parse_seed_override("").is_err());
    }

    #[test]
    fn external_topology_scales_linearly() {
        let dir = tempfile::tempdir().unwrap();
        let base = ScenarioConfig::default();
        let p = base.profile().unwrap();
        let topo = base.topology_for(1, p.ul_base).unwrap();
        std::fs::write(dir.path().join("topo.json"), topo.to_json().unwrap()).unwrap();
        let cfg_path = dir.path().join("cfg.json");
        std::fs::write(&cfg_path, r#"{"scenario": "I", "topology_file": "topo.json"}"#).unwrap();
        let cfg = load_config(&cfg_path).unwrap();
        let half = cfg.topology_for(99, p.ul_base / 2.0).unwrap();
        assert_eq!(half.n_rus(), topo.n_rus());
        assert!((half.rus[0].demand.w_ul - topo.rus[0].demand.w_ul / 2.0).abs() < 1e-3);
    }
}
