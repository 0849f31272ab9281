//! Scenario configuration (who can be attacked, defended, opened, with what
//! budgets) and the binary plan vectors of the three agents.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::model::instance::{ModeId, NetworkInstance, NodeId, Phase};
use crate::model::validate::ValidationReport;

/// A (mode, phase) slot. Budgets and designated node sets are per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub mode: ModeId,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellScenario {
    /// S: attackable / defendable supply nodes, sorted; plan bit i refers to
    /// `attackable[i]`.
    pub attackable: Vec<NodeId>,
    /// R: reserve supply nodes (inactive unless opened), disjoint from S.
    pub reserves: Vec<NodeId>,
    pub n_defend: u32,
    pub n_open: u32,
    pub n_attack: u32,
}

/// How the big-M constants of the subproblem linearization are chosen.
/// Default: the node's penalty scaled by (1 + margin), following the dual
/// bound on the interdiction multiplier; `override_value` replaces that for
/// exotic cost structures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigMPolicy {
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub override_value: Option<f64>,
}

impl Default for BigMPolicy {
    fn default() -> Self {
        Self {
            margin: 0.05,
            override_value: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub cells: BTreeMap<CellKey, CellScenario>,
    pub big_m: BigMPolicy,
    /// Convergence tolerance on the normalized bound gap.
    pub epsilon_gap: f64,
    pub max_iterations: usize,
    pub time_limit: Option<Duration>,
    /// Optional station throughput cap x_i^p <= pumps * rate, off by default.
    pub station_throughput_cap: bool,
    /// Penalty overrides per (node, phase), replacing the instance values.
    pub penalty_overrides: BTreeMap<(NodeId, Phase), f64>,
    /// Re-solve the operator LP after each subproblem and compare values.
    pub audit_strong_duality: bool,
}

impl ScenarioConfig {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            cells: BTreeMap::new(),
            big_m: BigMPolicy::default(),
            epsilon_gap: 1e-6,
            max_iterations: 64,
            time_limit: None,
            station_throughput_cap: false,
            penalty_overrides: BTreeMap::new(),
            audit_strong_duality: true,
        }
    }

    pub fn with_cell(
        mut self,
        mode: ModeId,
        phase: Phase,
        attackable: Vec<NodeId>,
        reserves: Vec<NodeId>,
        budgets: (u32, u32, u32),
    ) -> Self {
        let mut attackable = attackable;
        let mut reserves = reserves;
        attackable.sort();
        reserves.sort();
        self.cells.insert(
            CellKey { mode, phase },
            CellScenario {
                attackable,
                reserves,
                n_defend: budgets.0,
                n_open: budgets.1,
                n_attack: budgets.2,
            },
        );
        self
    }

    /// Replaces every cell's budgets (used by budget sweeps).
    pub fn with_budgets(mut self, n_defend: u32, n_open: u32, n_attack: u32) -> Self {
        for cell in self.cells.values_mut() {
            cell.n_defend = n_defend;
            cell.n_open = n_open;
            cell.n_attack = n_attack;
        }
        self
    }

    pub fn validate(&self, inst: &NetworkInstance) -> ValidationReport {
        let mut r = ValidationReport::default();
        if self.epsilon_gap <= 0.0 {
            r.push("positive-gap", "epsilon_gap must be positive");
        }
        if self.max_iterations == 0 {
            r.push("iteration-cap", "max_iterations must be at least 1");
        }
        if self.big_m.margin < 0.0 {
            r.push("big-m-margin", "margin must be nonnegative");
        }
        if let Some(m) = self.big_m.override_value {
            if m <= 0.0 {
                r.push("big-m-override", "override must be positive");
            }
        }
        for (key, cell) in &self.cells {
            if key.mode.0 >= inst.modes.len() || key.phase == 0 || key.phase > inst.n_phases {
                r.push(
                    "cell-key",
                    format!("cell ({:?}, {}) outside instance", key.mode, key.phase),
                );
                continue;
            }
            for &n in &cell.attackable {
                if inst.b_mp(n, key.mode, key.phase) <= 0.0 {
                    r.push(
                        "attackable-not-supply",
                        format!(
                            "{} is not a supply node of ({}, {})",
                            inst.node_name(n),
                            inst.mode_name(key.mode),
                            key.phase
                        ),
                    );
                }
            }
            for &n in &cell.reserves {
                if inst.b_mp(n, key.mode, key.phase) <= 0.0 {
                    r.push(
                        "reserve-not-supply",
                        format!(
                            "{} is not a supply node of ({}, {})",
                            inst.node_name(n),
                            inst.mode_name(key.mode),
                            key.phase
                        ),
                    );
                }
                if cell.attackable.contains(&n) {
                    r.push(
                        "reserve-overlaps-attackable",
                        format!("{} is in both S and R", inst.node_name(n)),
                    );
                }
            }
        }
        for (&(node, phase), &p) in &self.penalty_overrides {
            if node.0 >= inst.nodes.len() || phase == 0 || phase > inst.n_phases {
                r.push("penalty-override", "override references unknown node/phase");
            } else if p < 0.0 {
                r.push(
                    "penalty-override",
                    format!("negative penalty for {}", inst.node_name(node)),
                );
            }
        }
        r
    }

    /// Effective penalty price at (node, phase): override or instance value.
    pub fn penalty(&self, inst: &NetworkInstance, node: NodeId, phase: Phase) -> f64 {
        self.penalty_overrides
            .get(&(node, phase))
            .copied()
            .unwrap_or(inst.nodes[node.0].penalty_p[phase - 1])
    }

    /// Big-M for the interdiction dual at (node, mode, phase).
    pub fn big_m(&self, inst: &NetworkInstance, node: NodeId, phase: Phase) -> f64 {
        match self.big_m.override_value {
            Some(m) => m,
            None => self.penalty(inst, node, phase) * (1.0 + self.big_m.margin),
        }
    }

    /// Replaces the penalty-scaled big-M default with a bound that holds for
    /// any cost structure: one restored unit of supply relieves at most one
    /// unit of slack at each end of the chain in every phase, so twice the
    /// sum over phases of the largest penalty dominates every interdiction
    /// dual. Use this when supply-node penalties are small relative to the
    /// demand they serve; the post-solve audit flags the cases that need it.
    pub fn with_conservative_big_m(mut self, inst: &NetworkInstance) -> Self {
        let total: f64 = (1..=inst.n_phases)
            .map(|p| {
                (0..inst.nodes.len())
                    .map(|i| self.penalty(inst, NodeId(i), p))
                    .fold(0.0_f64, f64::max)
            })
            .sum();
        self.big_m.override_value = Some(((1.0 + self.big_m.margin) * 2.0 * total).max(1.0));
        self
    }

    pub fn cell(&self, mode: ModeId, phase: Phase) -> Option<&CellScenario> {
        self.cells.get(&CellKey { mode, phase })
    }
}

/// Binary selections aligned with a scenario's per-cell node lists.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PlanBits {
    pub bits: BTreeMap<CellKey, Vec<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanSet {
    Attackable,
    Reserves,
}

impl PlanBits {
    pub fn zeros(scenario: &ScenarioConfig, set: PlanSet) -> Self {
        let bits = scenario
            .cells
            .iter()
            .map(|(key, cell)| {
                let len = match set {
                    PlanSet::Attackable => cell.attackable.len(),
                    PlanSet::Reserves => cell.reserves.len(),
                };
                (*key, vec![false; len])
            })
            .collect();
        Self { bits }
    }

    pub fn get(&self, key: CellKey, idx: usize) -> bool {
        self.bits.get(&key).is_some_and(|v| v[idx])
    }

    pub fn set(&mut self, key: CellKey, idx: usize, value: bool) {
        if let Some(v) = self.bits.get_mut(&key) {
            v[idx] = value;
        }
    }

    pub fn count(&self) -> usize {
        self.bits.values().flatten().filter(|&&b| b).count()
    }

    pub fn is_zero(&self) -> bool {
        self.count() == 0
    }

    /// Selected (cell, node) pairs, resolving indices through the scenario.
    pub fn selected<'a>(
        &'a self,
        scenario: &'a ScenarioConfig,
        set: PlanSet,
    ) -> impl Iterator<Item = (CellKey, NodeId)> + 'a {
        self.bits.iter().flat_map(move |(key, bits)| {
            let nodes = match set {
                PlanSet::Attackable => &scenario.cells[key].attackable,
                PlanSet::Reserves => &scenario.cells[key].reserves,
            };
            bits.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(move |(i, _)| (*key, nodes[i]))
        })
    }
}

/// Defender commitment: hardened supply nodes d and opened reserves o.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefensePlan {
    pub defend: PlanBits,
    pub open: PlanBits,
}

impl DefensePlan {
    pub fn none(scenario: &ScenarioConfig) -> Self {
        Self {
            defend: PlanBits::zeros(scenario, PlanSet::Attackable),
            open: PlanBits::zeros(scenario, PlanSet::Reserves),
        }
    }

    pub fn within_budgets(&self, scenario: &ScenarioConfig) -> bool {
        scenario.cells.iter().all(|(key, cell)| {
            let d = self
                .defend
                .bits
                .get(key)
                .map_or(0, |v| v.iter().filter(|&&b| b).count());
            let o = self
                .open
                .bits
                .get(key)
                .map_or(0, |v| v.iter().filter(|&&b| b).count());
            d <= cell.n_defend as usize && o <= cell.n_open as usize
        })
    }
}

/// Attacker commitment over the attackable sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AttackPlan {
    pub attack: PlanBits,
}

impl AttackPlan {
    pub fn none(scenario: &ScenarioConfig) -> Self {
        Self {
            attack: PlanBits::zeros(scenario, PlanSet::Attackable),
        }
    }

    pub fn within_budgets(&self, scenario: &ScenarioConfig) -> bool {
        scenario.cells.iter().all(|(key, cell)| {
            let a = self
                .attack
                .bits
                .get(key)
                .map_or(0, |v| v.iter().filter(|&&b| b).count());
            a <= cell.n_attack as usize
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::NetworkInstance;

    #[test]
    fn scenario_validates_against_chain() {
        let inst = NetworkInstance::build(&fixtures::chain3_spec()).unwrap();
        let scen = fixtures::chain3_scenario(&inst);
        assert!(scen.validate(&inst).is_pass());
    }

    #[test]
    fn reserve_overlap_flagged() {
        let inst = NetworkInstance::build(&fixtures::chain3_spec()).unwrap();
        let depot = inst.node_id("depot").unwrap();
        let truck = inst.mode_id("truck").unwrap();
        let scen =
            ScenarioConfig::new("bad").with_cell(truck, 1, vec![depot], vec![depot], (1, 1, 1));
        let report = scen.validate(&inst);
        assert!(report.has("reserve-overlaps-attackable"), "{report}");
    }

    #[test]
    fn non_supply_attackable_flagged() {
        let inst = NetworkInstance::build(&fixtures::chain3_spec()).unwrap();
        let station = inst.node_id("station").unwrap(); // demand in phase 1
        let truck = inst.mode_id("truck").unwrap();
        let scen = ScenarioConfig::new("bad").with_cell(truck, 1, vec![station], vec![], (1, 0, 1));
        assert!(scen.validate(&inst).has("attackable-not-supply"));
    }

    #[test]
    fn plan_budget_accounting() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (1, 0, 1));
        let mut plan = AttackPlan::none(&scen);
        assert!(plan.within_budgets(&scen));
        let key = *scen.cells.keys().next().unwrap();
        plan.attack.set(key, 0, true);
        assert!(plan.within_budgets(&scen));
        plan.attack.set(key, 1, true);
        assert!(!plan.within_budgets(&scen));
        assert_eq!(plan.attack.count(), 2);
    }
}
