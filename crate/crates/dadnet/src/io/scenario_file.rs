//! Scenario documents: node sets by name, budgets per (mode, phase), solver
//! knobs, and optionally an embedded generator spec so a results file can
//! state exactly where its instance came from.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{DadError, Result};
use crate::model::{BigMPolicy, NetworkInstance, Phase, ScenarioConfig};
use crate::netgen::GeneratorSpec;

pub const SCENARIO_FORMAT: &str = "dadnet-scenario";
pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFile {
    pub mode: String,
    pub phase: Phase,
    #[serde(default)]
    pub attackable: Vec<String>,
    #[serde(default)]
    pub reserves: Vec<String>,
    #[serde(default)]
    pub n_defend: u32,
    #[serde(default)]
    pub n_open: u32,
    #[serde(default)]
    pub n_attack: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyOverrideFile {
    pub node: String,
    pub phase: Phase,
    pub usd_per_bbl_h: f64,
}

fn default_gap() -> f64 {
    1e-6
}

fn default_iters() -> usize {
    64
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub format: String,
    pub version: u32,
    pub name: String,
    #[serde(default)]
    pub cells: Vec<CellFile>,
    #[serde(default = "default_gap")]
    pub epsilon_gap: f64,
    #[serde(default = "default_iters")]
    pub max_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_s: Option<f64>,
    #[serde(default)]
    pub station_throughput_cap: bool,
    #[serde(default)]
    pub big_m: BigMPolicy,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub penalty_overrides: Vec<PenaltyOverrideFile>,
    #[serde(default = "default_true")]
    pub audit_strong_duality: bool,
    /// Generator provenance, used by `generate` and echoed into results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
}

impl ScenarioFile {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            format: SCENARIO_FORMAT.into(),
            version: SCENARIO_VERSION,
            name: name.into(),
            cells: Vec::new(),
            epsilon_gap: default_gap(),
            max_iterations: default_iters(),
            time_limit_s: None,
            station_throughput_cap: false,
            big_m: BigMPolicy::default(),
            penalty_overrides: Vec::new(),
            audit_strong_duality: true,
            generator: None,
        }
    }
}

pub fn save_scenario(path: &Path, file: &ScenarioFile) -> Result<()> {
    let text = serde_json::to_string_pretty(file).map_err(|e| DadError::Model(e.to_string()))?;
    super::atomic_write(path, &text)
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path)?;
    let doc: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| DadError::parse(path.display().to_string(), e.to_string()))?;
    if doc.format != SCENARIO_FORMAT {
        return Err(DadError::parse(
            path.display().to_string(),
            format!("expected format {SCENARIO_FORMAT}, found {}", doc.format),
        ));
    }
    Ok(doc)
}

/// Binds node and mode names to a concrete instance.
pub fn resolve_scenario(file: &ScenarioFile, inst: &NetworkInstance) -> Result<ScenarioConfig> {
    let mut scen = ScenarioConfig::new(file.name.clone());
    scen.epsilon_gap = file.epsilon_gap;
    scen.max_iterations = file.max_iterations;
    scen.time_limit = file.time_limit_s.map(Duration::from_secs_f64);
    scen.station_throughput_cap = file.station_throughput_cap;
    scen.big_m = file.big_m.clone();
    scen.audit_strong_duality = file.audit_strong_duality;
    let node = |name: &str| {
        inst.node_id(name)
            .ok_or_else(|| DadError::InvalidInput(format!("unknown node `{name}` in scenario")))
    };
    for cell in &file.cells {
        let mode = inst
            .mode_id(&cell.mode)
            .ok_or_else(|| DadError::InvalidInput(format!("unknown mode `{}`", cell.mode)))?;
        let attackable = cell
            .attackable
            .iter()
            .map(|n| node(n))
            .collect::<Result<Vec<_>>>()?;
        let reserves = cell
            .reserves
            .iter()
            .map(|n| node(n))
            .collect::<Result<Vec<_>>>()?;
        scen = scen.with_cell(
            mode,
            cell.phase,
            attackable,
            reserves,
            (cell.n_defend, cell.n_open, cell.n_attack),
        );
    }
    for o in &file.penalty_overrides {
        scen.penalty_overrides
            .insert((node(&o.node)?, o.phase), o.usd_per_bbl_h);
    }
    Ok(scen)
}

/// Re-expresses a resolved scenario as a document (for results echoing).
pub fn scenario_echo(scen: &ScenarioConfig, inst: &NetworkInstance) -> ScenarioFile {
    let mut file = ScenarioFile::new(scen.name.clone());
    file.epsilon_gap = scen.epsilon_gap;
    file.max_iterations = scen.max_iterations;
    file.time_limit_s = scen.time_limit.map(|d| d.as_secs_f64());
    file.station_throughput_cap = scen.station_throughput_cap;
    file.big_m = scen.big_m.clone();
    file.audit_strong_duality = scen.audit_strong_duality;
    file.cells = scen
        .cells
        .iter()
        .map(|(key, cell)| CellFile {
            mode: inst.mode_name(key.mode).to_string(),
            phase: key.phase,
            attackable: cell
                .attackable
                .iter()
                .map(|&n| inst.node_name(n).to_string())
                .collect(),
            reserves: cell
                .reserves
                .iter()
                .map(|&n| inst.node_name(n).to_string())
                .collect(),
            n_defend: cell.n_defend,
            n_open: cell.n_open,
            n_attack: cell.n_attack,
        })
        .collect();
    file.penalty_overrides = scen
        .penalty_overrides
        .iter()
        .map(|(&(n, p), &v)| PenaltyOverrideFile {
            node: inst.node_name(n).to_string(),
            phase: p,
            usd_per_bbl_h: v,
        })
        .collect();
    file
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::NetworkInstance;

    #[test]
    fn echo_then_resolve_is_identity() {
        let inst = NetworkInstance::build(&fixtures::sweep_spec()).unwrap();
        let scen = fixtures::sweep_scenario(&inst, (2, 1, 2));
        let echo = scenario_echo(&scen, &inst);
        let resolved = resolve_scenario(&echo, &inst).unwrap();
        assert_eq!(resolved, scen);
    }

    #[test]
    fn file_roundtrip() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (1, 0, 1));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scen.json");
        save_scenario(&path, &scenario_echo(&scen, &inst)).unwrap();
        let loaded = load_scenario(&path).unwrap();
        assert_eq!(resolve_scenario(&loaded, &inst).unwrap(), scen);
    }

    #[test]
    fn unknown_node_rejected() {
        let inst = NetworkInstance::build(&fixtures::chain3_spec()).unwrap();
        let mut file = ScenarioFile::new("bad");
        file.cells.push(CellFile {
            mode: "truck".into(),
            phase: 1,
            attackable: vec!["nope".into()],
            reserves: vec![],
            n_defend: 1,
            n_open: 0,
            n_attack: 1,
        });
        assert!(resolve_scenario(&file, &inst).is_err());
    }
}
