//! Solution containers for the three levels of the game.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::model::instance::{ArcId, ModeId, NodeId, Phase};
use crate::model::scenario::{AttackPlan, DefensePlan};

/// Carrier position within `NetworkInstance::carriers(mode, phase)`.
pub type CarrierIdx = usize;

/// Primal operator outcome for one fixed (defense, attack) pair.
#[derive(Debug, Clone)]
pub struct OperatorSolution {
    /// Backend objective value ($).
    pub objective: f64,
    pub flow_cost: f64,
    pub penalty_cost: f64,
    pub congestion_cost: f64,
    /// Vehicle flow f per (mode, phase, carrier, arc), v/h.
    pub flows: BTreeMap<(ModeId, Phase, CarrierIdx, ArcId), f64>,
    /// Fuel flow f-hat per (mode, phase, carrier, arc), bbl/h.
    pub flows_bbl: BTreeMap<(ModeId, Phase, CarrierIdx, ArcId), f64>,
    /// Carrier- and phase-aggregated vehicle flow f^m, v/h.
    pub mode_flows: BTreeMap<(ModeId, ArcId), f64>,
    /// Supply rates per carrier, bbl/h.
    pub supply_c: BTreeMap<(ModeId, Phase, CarrierIdx, NodeId), f64>,
    /// Carrier-aggregated supply x^{mp}, bbl/h.
    pub supply_mp: BTreeMap<(ModeId, Phase, NodeId), f64>,
    /// Mode-aggregated supply x^p, bbl/h.
    pub supply_p: BTreeMap<(Phase, NodeId), f64>,
    /// Slack (unmet rate) s^{mp}, bbl/h.
    pub slack: BTreeMap<(ModeId, Phase, NodeId), f64>,
    /// Congestion aggregates g^m, (v/h)-h.
    pub congestion: BTreeMap<(ModeId, ArcId), f64>,
}

/// Dual vectors of the operator LP, as produced by the subproblem.
#[derive(Debug, Clone, Default)]
pub struct DualSolution {
    /// Conservation duals (free).
    pub phi: BTreeMap<(ModeId, Phase, CarrierIdx, NodeId), f64>,
    /// Unit-coupling duals (free).
    pub kappa_c: BTreeMap<(ModeId, Phase, CarrierIdx, ArcId), f64>,
    /// Carrier capacity duals (>= 0).
    pub beta_c: BTreeMap<(ModeId, Phase, CarrierIdx, NodeId), f64>,
    /// Carrier flow-cap duals (>= 0).
    pub mu_c: BTreeMap<(ModeId, Phase, CarrierIdx, ArcId), f64>,
    /// Carrier-aggregation duals (free).
    pub sigma_mp: BTreeMap<(ModeId, Phase, NodeId), f64>,
    /// Interdiction duals on S (>= 0).
    pub delta: BTreeMap<(ModeId, Phase, NodeId), f64>,
    /// Linearized interdiction duals (>= 0).
    pub delta_bar: BTreeMap<(ModeId, Phase, NodeId), f64>,
    /// Reserve balance duals on R (free).
    pub omega: BTreeMap<(ModeId, Phase, NodeId), f64>,
    /// Balance duals off R (free).
    pub beta_mp: BTreeMap<(ModeId, Phase, NodeId), f64>,
    /// Mode-aggregation duals (free).
    pub sigma_p: BTreeMap<(Phase, NodeId), f64>,
    /// Phase capacity duals (>= 0).
    pub beta_p: BTreeMap<(Phase, NodeId), f64>,
    /// Arc-aggregation duals (free).
    pub kappa_m: BTreeMap<(ModeId, ArcId), f64>,
    /// Mode flow-cap duals (>= 0).
    pub mu_m: BTreeMap<(ModeId, ArcId), f64>,
    /// Congestion piece duals (>= 0), keyed by (mode, arc, piece).
    pub tau: BTreeMap<(ModeId, ArcId, usize), f64>,
    /// Phase monotonicity duals (>= 0).
    pub upsilon: BTreeMap<(Phase, NodeId), f64>,
    /// Round-trip linkage duals (free), keyed by the final-phase carrier.
    pub theta: BTreeMap<(ModeId, CarrierIdx), f64>,
}

/// One row of the bound history.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundsEntry {
    pub iteration: usize,
    pub lower: f64,
    pub sp_value: f64,
    pub best_upper: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BoundsTrace {
    pub entries: Vec<BoundsEntry>,
}

impl BoundsTrace {
    /// Lower bounds must never decrease and best upper bounds never
    /// increase; `slack` absorbs backend round-off.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.entries
            .windows(2)
            .all(|w| w[1].lower >= w[0].lower - slack && w[1].best_upper <= w[0].best_upper + slack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// Bound gap closed below tolerance.
    Converged,
    /// Subproblem returned an attack already in the pool.
    RepeatAttack,
    IterationCap,
    TimeLimit,
}

/// Post-solve consistency numbers from the strong-duality audit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AuditSummary {
    /// Worst relative difference between subproblem value and re-solved
    /// primal operator value.
    pub max_rel_gap: f64,
    /// Worst delta / big-M utilization observed (must stay below 0.99).
    pub max_m_utilization: f64,
    pub checks: usize,
}

/// Certified output of the column-and-constraint generation loop.
#[derive(Debug, Clone)]
pub struct DadSolution {
    pub defense: DefensePlan,
    /// Attack pool I in generation order (first entry is the zero seed).
    pub attacks: Vec<AttackPlan>,
    /// Worst-case attack against the returned defense.
    pub worst_attack: AttackPlan,
    /// Certified game value ($) = best upper bound at termination.
    pub objective: f64,
    pub lower_bound: f64,
    pub gap: f64,
    pub certified: bool,
    pub stop: StopReason,
    pub iterations: usize,
    pub trace: BoundsTrace,
    pub wall: Duration,
    pub audit: Option<AuditSummary>,
}
