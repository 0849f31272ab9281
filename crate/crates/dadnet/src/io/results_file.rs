//! Results documents: scenario echo, chosen plans, bound trace, and enough
//! solver metadata to rerun the case and land on the same value.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DadError, Result};
use crate::io::scenario_file::{scenario_echo, ScenarioFile};
use crate::model::{
    BoundsEntry, CellKey, DadSolution, NetworkInstance, PlanSet, ScenarioConfig, StopReason,
};
use crate::solver::SolveOutcome;

pub const RESULTS_FORMAT: &str = "dadnet-results";
pub const RESULTS_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub path: String,
    pub name: String,
    pub nodes: usize,
    pub arcs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendMeta {
    pub id: String,
    pub feasibility_tolerance: f64,
    pub integrality_tolerance: f64,
}

impl BackendMeta {
    pub fn from_outcome(out: &SolveOutcome) -> Self {
        Self {
            id: out.backend.to_string(),
            feasibility_tolerance: out.tolerances.feasibility,
            integrality_tolerance: out.tolerances.integrality,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Selection {
    pub mode: String,
    pub phase: usize,
    pub node: String,
}

/// Pairwise overlap report between the three selections.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DisjointReport {
    pub defense_reserve: bool,
    pub defense_attack: bool,
    pub reserve_attack: bool,
}

impl DisjointReport {
    pub fn all(&self) -> bool {
        self.defense_reserve && self.defense_attack && self.reserve_attack
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub objective: f64,
    pub lower_bound: f64,
    pub gap: f64,
    pub certified: bool,
    pub stop: StopReason,
    pub iterations: usize,
    pub wall_ms: f64,
    pub defense: Vec<Selection>,
    pub reserves_open: Vec<Selection>,
    pub worst_attack: Vec<Selection>,
    pub disjoint: DisjointReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_max_rel_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_max_m_utilization: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsFile {
    pub format: String,
    pub version: u32,
    pub instance: InstanceMeta,
    pub scenario: ScenarioFile,
    pub backend: BackendMeta,
    pub solution: SolutionSummary,
    pub bounds_trace: Vec<BoundsEntry>,
}

fn selections(
    inst: &NetworkInstance,
    scen: &ScenarioConfig,
    picks: impl Iterator<Item = (CellKey, crate::model::NodeId)>,
) -> Vec<Selection> {
    let _ = scen;
    picks
        .map(|(key, node)| Selection {
            mode: inst.mode_name(key.mode).to_string(),
            phase: key.phase,
            node: inst.node_name(node).to_string(),
        })
        .collect()
}

pub fn assemble_results(
    inst: &NetworkInstance,
    instance_path: &str,
    scen: &ScenarioConfig,
    sol: &DadSolution,
    backend: BackendMeta,
) -> ResultsFile {
    let defense = selections(
        inst,
        scen,
        sol.defense.defend.selected(scen, PlanSet::Attackable),
    );
    let reserves = selections(
        inst,
        scen,
        sol.defense.open.selected(scen, PlanSet::Reserves),
    );
    let attack = selections(
        inst,
        scen,
        sol.worst_attack.attack.selected(scen, PlanSet::Attackable),
    );
    let key = |s: &Selection| (s.mode.clone(), s.phase, s.node.clone());
    let overlap =
        |a: &[Selection], b: &[Selection]| a.iter().any(|x| b.iter().any(|y| key(x) == key(y)));
    let disjoint = DisjointReport {
        defense_reserve: !overlap(&defense, &reserves),
        defense_attack: !overlap(&defense, &attack),
        reserve_attack: !overlap(&reserves, &attack),
    };
    let truck_arcs: usize = inst.arcs.len();
    ResultsFile {
        format: RESULTS_FORMAT.into(),
        version: RESULTS_VERSION,
        instance: InstanceMeta {
            path: instance_path.to_string(),
            name: inst.name.clone(),
            nodes: inst.nodes.len(),
            arcs: truck_arcs,
        },
        scenario: scenario_echo(scen, inst),
        backend,
        solution: SolutionSummary {
            objective: sol.objective,
            lower_bound: sol.lower_bound,
            gap: sol.gap,
            certified: sol.certified,
            stop: sol.stop,
            iterations: sol.iterations,
            wall_ms: sol.wall.as_secs_f64() * 1e3,
            defense,
            reserves_open: reserves,
            worst_attack: attack,
            disjoint,
            audit_max_rel_gap: sol.audit.map(|a| a.max_rel_gap),
            audit_max_m_utilization: sol.audit.map(|a| a.max_m_utilization),
        },
        bounds_trace: sol.trace.entries.clone(),
    }
}

pub fn save_results(path: &Path, results: &ResultsFile) -> Result<()> {
    let text = serde_json::to_string_pretty(results).map_err(|e| DadError::Model(e.to_string()))?;
    super::atomic_write(path, &text)
}

pub fn load_results(path: &Path) -> Result<ResultsFile> {
    let text = std::fs::read_to_string(path)?;
    let doc: ResultsFile = serde_json::from_str(&text)
        .map_err(|e| DadError::parse(path.display().to_string(), e.to_string()))?;
    if doc.format != RESULTS_FORMAT {
        return Err(DadError::parse(
            path.display().to_string(),
            format!("expected format {RESULTS_FORMAT}, found {}", doc.format),
        ));
    }
    Ok(doc)
}
