//! Instance data, index sets, derived constants, and plan/solution types.

mod instance;
mod scenario;
mod solution;
mod validate;

pub use instance::{
    derive_constants, mode_phase_key, validate_instance, ArcData, ArcId, ArcSpec, Carrier,
    CarrierClassData, CarrierClassSpec, InstanceSpec, ModeData, ModeId, ModeSpec, NetworkInstance,
    NodeData, NodeId, NodeSpec, Phase, PumpSpec,
};
pub use scenario::{
    AttackPlan, BigMPolicy, CellKey, CellScenario, DefensePlan, PlanBits, PlanSet, ScenarioConfig,
};
pub use solution::{
    AuditSummary, BoundsEntry, BoundsTrace, CarrierIdx, DadSolution, DualSolution,
    OperatorSolution, StopReason,
};
pub use validate::{ValidationReport, Violation};
