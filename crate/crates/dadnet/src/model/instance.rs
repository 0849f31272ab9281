//! Network instance data: raw specs as read from files or generators, and
//! the validated, fully-derived form every model builder consumes.
//!
//! Units follow the data files: barrels (bbl), standard vehicles (v), miles
//! (mi), hours (h), dollars ($). Rates are averages over the planning
//! horizon (bbl/h, v/h); nothing here is an instantaneous quantity.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::bpr::{build_pieces, BprPieces};
use crate::error::{DadError, Result};
use crate::model::validate::{validate_spec, ValidationReport};

/// Index of a node in `NetworkInstance::nodes` (nodes sorted by id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

/// Index of an arc in `NetworkInstance::arcs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArcId(pub usize);

/// Index of a mode in `NetworkInstance::modes` (modes sorted by id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeId(pub usize);

/// 1-based supply phase number, matching the data files.
pub type Phase = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub count: u32,
    pub rate_bbl_per_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub id: String,
    /// Standard vehicle length (mi/v); divisor in capacity and unit
    /// conversions.
    pub std_vehicle_len_mi: f64,
    /// Max trip travel time q (h). Feeds default phase-2/3 flow costs (q/2).
    pub max_trip_h: f64,
}

/// Vehicle class constants shared by every carrier of one (mode, phase).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierClassSpec {
    /// Vehicle length (mi/u).
    pub vehicle_len_mi: f64,
    /// Fuel moved per vehicle (bbl/u).
    pub demand_bbl_per_vehicle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<[f64; 2]>,
    /// Mode-aggregated capacity b_i^p (bbl/h, signed) per phase. Zero means
    /// neither supply nor demand; the phase chain completes later phases from
    /// earlier ones (see `derive_constants`).
    pub b_phase: Vec<f64>,
    /// Explicit per-(mode, phase) capacities. Anything not listed defaults to
    /// the phase aggregate on every mode the node belongs to.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub b_mode_phase: BTreeMap<String, f64>,
    /// Unmet-rate penalty ($ per bbl/h) per phase.
    pub penalty_phase: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pumps_phase: Vec<Option<PumpSpec>>,
}

impl NodeSpec {
    pub fn new(id: impl Into<String>, n_phases: usize) -> Self {
        Self {
            id: id.into(),
            coords: None,
            b_phase: vec![0.0; n_phases],
            b_mode_phase: BTreeMap::new(),
            penalty_phase: vec![0.0; n_phases],
            pumps_phase: Vec::new(),
        }
    }
}

/// Key format for `NodeSpec::b_mode_phase`: `"<mode>:<phase>"`.
pub fn mode_phase_key(mode: &str, phase: Phase) -> String {
    format!("{mode}:{phase}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub mode: String,
    pub tail: String,
    pub head: String,
    pub length_mi: f64,
    pub speed_mph: f64,
    pub lanes: u32,
    /// Aggregate flow capacity u (v/h). Derived as lanes * speed / std
    /// vehicle length when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_vph: Option<f64>,
    /// Flow cost c ($ per v/h) per phase, identical across carriers of the
    /// phase. Missing phase-2+ entries default to q/2 for the arc's mode.
    pub flow_cost_phase: Vec<Option<f64>>,
    /// Congestion cost w ($ per (v/h)-h).
    pub time_cost: f64,
}

/// Raw instance as read from a file or produced by a generator. Optional
/// fields may be incomplete until [`derive_constants`] fills them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub name: String,
    pub n_phases: usize,
    pub n_bpr_pieces: usize,
    pub modes: Vec<ModeSpec>,
    /// Keyed by `"<mode>:<phase>"`.
    pub carrier_classes: BTreeMap<String, CarrierClassSpec>,
    pub nodes: Vec<NodeSpec>,
    pub arcs: Vec<ArcSpec>,
}

impl InstanceSpec {
    pub fn carrier_class(&self, mode: &str, phase: Phase) -> Option<&CarrierClassSpec> {
        self.carrier_classes.get(&mode_phase_key(mode, phase))
    }
}

/// Fills every derived constant of the instance:
///
/// * phase-chain capacities: demand nodes of phase p supply phase p+1
///   (`b^{p+1} = -b^p`), and suppliers of the next-to-last phase become
///   final-phase demand (`b^{n_P} = -b^{n_P-1}`);
/// * arc capacity `u = lanes * speed / std_vehicle_len` where absent;
/// * phase >= 2 flow costs `q/2` where absent;
/// * phase-3 penalties copied from phase 2 where zero;
/// * normalizes `pumps_phase` / `flow_cost_phase` lengths.
///
/// Pure and idempotent; rejects zero standard-vehicle lengths and zero
/// per-vehicle demands since both are divisors downstream.
pub fn derive_constants(spec: &InstanceSpec) -> Result<InstanceSpec> {
    let mut out = spec.clone();
    let np = out.n_phases;

    for mode in &out.modes {
        if mode.std_vehicle_len_mi <= 0.0 {
            return Err(DadError::Model(format!(
                "mode {}: standard vehicle length must be positive",
                mode.id
            )));
        }
    }
    for (key, class) in &out.carrier_classes {
        if class.demand_bbl_per_vehicle <= 0.0 {
            return Err(DadError::Model(format!(
                "carrier class {key}: demand per vehicle must be positive"
            )));
        }
    }

    for node in &mut out.nodes {
        node.b_phase.resize(np, 0.0);
        node.penalty_phase.resize(np, 0.0);
        node.pumps_phase.resize(np, None);
        // demand in phase p becomes supply in phase p+1
        for p in 0..np.saturating_sub(1) {
            if node.b_phase[p] < 0.0 && node.b_phase[p + 1] == 0.0 {
                node.b_phase[p + 1] = -node.b_phase[p];
            }
        }
        // suppliers of phase n_P-1 turn into final-phase demand (round trip)
        if np >= 3 {
            let last = np - 1;
            if node.b_phase[last - 1] > 0.0 && node.b_phase[last] == 0.0 {
                node.b_phase[last] = -node.b_phase[last - 1];
            }
        }
        // phase-2 and phase-3 penalties are tied
        if np >= 3 && node.penalty_phase[2] == 0.0 {
            node.penalty_phase[2] = node.penalty_phase[1];
        }
    }

    for arc in &mut out.arcs {
        arc.flow_cost_phase.resize(np, None);
        let mode =
            out.modes.iter().find(|m| m.id == arc.mode).ok_or_else(|| {
                DadError::Model(format!("arc references unknown mode {}", arc.mode))
            })?;
        if arc.capacity_vph.is_none() {
            arc.capacity_vph = Some(arc.lanes as f64 * arc.speed_mph / mode.std_vehicle_len_mi);
        }
        for p in 1..np {
            if arc.flow_cost_phase[p].is_none() {
                arc.flow_cost_phase[p] = Some(mode.max_trip_h / 2.0);
            }
        }
        if arc.flow_cost_phase[0].is_none() {
            arc.flow_cost_phase[0] = Some(0.0);
        }
    }

    Ok(out)
}

/// One carrier of a (mode, phase).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Carrier {
    /// The single phase-1 fleet (tanker trucks).
    Fleet,
    /// Origin-destination customer class: supplies at `supply`, consumes at
    /// `demand`.
    OdPair { demand: NodeId, supply: NodeId },
}

#[derive(Debug, Clone)]
pub struct CarrierClassData {
    pub vehicle_len_mi: f64,
    pub demand_bbl_per_vehicle: f64,
    /// Unit conversion gamma = len / (std_len * demand_per_vehicle) (v/bbl).
    pub gamma: f64,
}

#[derive(Debug, Clone)]
pub struct ModeData {
    pub id: String,
    pub std_vehicle_len_mi: f64,
    pub max_trip_h: f64,
    pub arcs: Vec<ArcId>,
    pub member_mask: Vec<bool>,
    pub out_arcs: Vec<Vec<ArcId>>,
    pub in_arcs: Vec<Vec<ArcId>>,
    /// Per phase (index p-1).
    pub carrier_class: Vec<CarrierClassData>,
    /// Enumerated carriers per phase, OD pairs pruned to reachable ones.
    pub carriers: Vec<Vec<Carrier>>,
    /// OD-pair counts before pruning, per phase.
    pub carriers_unpruned: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct NodeData {
    pub id: String,
    pub coords: Option<[f64; 2]>,
    pub b_p: Vec<f64>,
    /// b per (mode, phase): `b_mp[mode.0][phase-1]`.
    pub b_mp: Vec<Vec<f64>>,
    pub penalty_p: Vec<f64>,
    pub pumps_p: Vec<Option<PumpSpec>>,
}

#[derive(Debug, Clone)]
pub struct ArcData {
    pub mode: ModeId,
    pub tail: NodeId,
    pub head: NodeId,
    pub length_mi: f64,
    pub speed_mph: f64,
    pub lanes: u32,
    /// Aggregate capacity u (v/h).
    pub capacity_vph: f64,
    pub flow_cost_p: Vec<f64>,
    pub time_cost: f64,
    pub bpr: BprPieces,
}

/// Validated instance with every constant resolved. Immutable once built;
/// share freely across concurrent scenario evaluations.
#[derive(Debug, Clone)]
pub struct NetworkInstance {
    pub name: String,
    pub n_phases: usize,
    pub n_bpr_pieces: usize,
    pub modes: Vec<ModeData>,
    pub nodes: Vec<NodeData>,
    pub arcs: Vec<ArcData>,
    node_index: BTreeMap<String, NodeId>,
    mode_index: BTreeMap<String, ModeId>,
    /// The derived spec this instance was built from (canonical form for
    /// serialization).
    spec: InstanceSpec,
}

impl NetworkInstance {
    /// Derives constants, validates, and indexes a spec. The returned
    /// instance has nodes sorted by id and arcs sorted by
    /// (mode, tail, head), which fixes variable ordering in every model
    /// built from it.
    pub fn build(spec: &InstanceSpec) -> Result<NetworkInstance> {
        let derived = derive_constants(spec)?;
        let report = validate_spec(&derived);
        if !report.is_pass() {
            return Err(DadError::Validation(report));
        }
        Ok(Self::index(derived))
    }

    fn index(mut spec: InstanceSpec) -> NetworkInstance {
        spec.modes.sort_by(|a, b| a.id.cmp(&b.id));
        spec.nodes.sort_by(|a, b| a.id.cmp(&b.id));
        spec.arcs
            .sort_by(|a, b| (&a.mode, &a.tail, &a.head).cmp(&(&b.mode, &b.tail, &b.head)));

        let node_index: BTreeMap<String, NodeId> = spec
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), NodeId(i)))
            .collect();
        let mode_index: BTreeMap<String, ModeId> = spec
            .modes
            .iter()
            .enumerate()
            .map(|(i, m)| (m.id.clone(), ModeId(i)))
            .collect();
        let np = spec.n_phases;
        let n_nodes = spec.nodes.len();

        let arcs: Vec<ArcData> = spec
            .arcs
            .iter()
            .map(|a| ArcData {
                mode: mode_index[&a.mode],
                tail: node_index[&a.tail],
                head: node_index[&a.head],
                length_mi: a.length_mi,
                speed_mph: a.speed_mph,
                lanes: a.lanes,
                capacity_vph: a.capacity_vph.expect("derived"),
                flow_cost_p: a
                    .flow_cost_phase
                    .iter()
                    .map(|c| c.expect("derived"))
                    .collect(),
                time_cost: a.time_cost,
                bpr: build_pieces(
                    a.length_mi,
                    a.speed_mph,
                    a.capacity_vph.expect("derived"),
                    spec.n_bpr_pieces,
                ),
            })
            .collect();

        let mut modes: Vec<ModeData> = spec
            .modes
            .iter()
            .map(|m| ModeData {
                id: m.id.clone(),
                std_vehicle_len_mi: m.std_vehicle_len_mi,
                max_trip_h: m.max_trip_h,
                arcs: Vec::new(),
                member_mask: vec![false; n_nodes],
                out_arcs: vec![Vec::new(); n_nodes],
                in_arcs: vec![Vec::new(); n_nodes],
                carrier_class: (1..=np)
                    .map(|p| {
                        let class = spec
                            .carrier_class(&m.id, p)
                            .expect("validated carrier class");
                        CarrierClassData {
                            vehicle_len_mi: class.vehicle_len_mi,
                            demand_bbl_per_vehicle: class.demand_bbl_per_vehicle,
                            gamma: class.vehicle_len_mi
                                / (m.std_vehicle_len_mi * class.demand_bbl_per_vehicle),
                        }
                    })
                    .collect(),
                carriers: Vec::new(),
                carriers_unpruned: Vec::new(),
            })
            .collect();

        for (i, arc) in arcs.iter().enumerate() {
            let m = &mut modes[arc.mode.0];
            m.arcs.push(ArcId(i));
            m.member_mask[arc.tail.0] = true;
            m.member_mask[arc.head.0] = true;
            m.out_arcs[arc.tail.0].push(ArcId(i));
            m.in_arcs[arc.head.0].push(ArcId(i));
        }

        let nodes: Vec<NodeData> = spec
            .nodes
            .iter()
            .map(|n| {
                let b_mp: Vec<Vec<f64>> = modes
                    .iter()
                    .map(|m| {
                        (1..=np)
                            .map(|p| {
                                if let Some(v) = n.b_mode_phase.get(&mode_phase_key(&m.id, p)) {
                                    *v
                                } else if m.member_mask[node_index[&n.id].0] {
                                    n.b_phase[p - 1]
                                } else {
                                    0.0
                                }
                            })
                            .collect()
                    })
                    .collect();
                NodeData {
                    id: n.id.clone(),
                    coords: n.coords,
                    b_p: n.b_phase.clone(),
                    b_mp,
                    penalty_p: n.penalty_phase.clone(),
                    pumps_p: n.pumps_phase.clone(),
                }
            })
            .collect();

        let mut inst = NetworkInstance {
            name: spec.name.clone(),
            n_phases: np,
            n_bpr_pieces: spec.n_bpr_pieces,
            modes,
            nodes,
            arcs,
            node_index,
            mode_index,
            spec,
        };
        inst.enumerate_all_carriers();
        inst
    }

    fn enumerate_all_carriers(&mut self) {
        let np = self.n_phases;
        for m in 0..self.modes.len() {
            let mut per_phase: Vec<Vec<Carrier>> = Vec::with_capacity(np);
            let mut unpruned: Vec<usize> = Vec::with_capacity(np);
            for p in 1..=np {
                let (carriers, raw) = self.enumerate_carriers_inner(ModeId(m), p, &per_phase);
                per_phase.push(carriers);
                unpruned.push(raw);
            }
            self.modes[m].carriers = per_phase;
            self.modes[m].carriers_unpruned = unpruned;
        }
    }

    /// Phase 1 is the single fleet; phases 2+ get every (demand, supply)
    /// ordered pair. Pairs whose supply endpoint cannot reach the demand
    /// endpoint in the mode graph are dropped (they can carry no flow), and
    /// final-phase pairs additionally require their reversed previous-phase
    /// partner so the round-trip link has both sides.
    fn enumerate_carriers_inner(
        &self,
        mode: ModeId,
        phase: Phase,
        earlier: &[Vec<Carrier>],
    ) -> (Vec<Carrier>, usize) {
        if phase == 1 {
            return (vec![Carrier::Fleet], 1);
        }
        let demand = self.mode_phase_nodes(mode, phase, false);
        let supply = self.mode_phase_nodes(mode, phase, true);
        let raw = demand.len() * supply.len();
        let is_final = phase == self.n_phases && phase >= 3;
        let prev: BTreeSet<(NodeId, NodeId)> = if is_final {
            earlier[phase - 2]
                .iter()
                .filter_map(|c| match c {
                    Carrier::OdPair { demand, supply } => Some((*demand, *supply)),
                    Carrier::Fleet => None,
                })
                .collect()
        } else {
            BTreeSet::new()
        };
        let mut out = Vec::new();
        for &d in &demand {
            for &s in &supply {
                if !self.reaches(mode, s, d) {
                    continue;
                }
                if is_final && !prev.contains(&(s, d)) {
                    continue;
                }
                out.push(Carrier::OdPair {
                    demand: d,
                    supply: s,
                });
            }
        }
        (out, raw)
    }

    fn reaches(&self, mode: ModeId, from: NodeId, to: NodeId) -> bool {
        if from == to {
            return true;
        }
        let m = &self.modes[mode.0];
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::new();
        seen[from.0] = true;
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            for &a in &m.out_arcs[v.0] {
                let h = self.arcs[a.0].head;
                if h == to {
                    return true;
                }
                if !seen[h.0] {
                    seen[h.0] = true;
                    queue.push_back(h);
                }
            }
        }
        false
    }

    /// Nodes of (mode, phase) with positive (supply) or negative (demand)
    /// capacity, in id order.
    pub fn mode_phase_nodes(&self, mode: ModeId, phase: Phase, supply: bool) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&i| {
                let b = self.nodes[i].b_mp[mode.0][phase - 1];
                if supply {
                    b > 0.0
                } else {
                    b < 0.0
                }
            })
            .map(NodeId)
            .collect()
    }

    /// Mode-aggregate supply/demand nodes of a phase.
    pub fn phase_nodes(&self, phase: Phase, supply: bool) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&i| {
                let b = self.nodes[i].b_p[phase - 1];
                if supply {
                    b > 0.0
                } else {
                    b < 0.0
                }
            })
            .map(NodeId)
            .collect()
    }

    pub fn carriers(&self, mode: ModeId, phase: Phase) -> &[Carrier] {
        &self.modes[mode.0].carriers[phase - 1]
    }

    pub fn b_mp(&self, node: NodeId, mode: ModeId, phase: Phase) -> f64 {
        self.nodes[node.0].b_mp[mode.0][phase - 1]
    }

    /// Carrier-level capacity per the instantiation rule: the fleet sees the
    /// full (mode, phase) capacity, an OD pair sees it only at its own two
    /// endpoints.
    pub fn b_carrier(&self, node: NodeId, mode: ModeId, phase: Phase, carrier: &Carrier) -> f64 {
        match carrier {
            Carrier::Fleet => self.b_mp(node, mode, phase),
            Carrier::OdPair { demand, supply } => {
                if node == *demand || node == *supply {
                    self.b_mp(node, mode, phase)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn gamma(&self, mode: ModeId, phase: Phase) -> f64 {
        self.modes[mode.0].carrier_class[phase - 1].gamma
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_index.get(name).copied()
    }

    pub fn mode_id(&self, name: &str) -> Option<ModeId> {
        self.mode_index.get(name).copied()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.0].id
    }

    pub fn mode_name(&self, id: ModeId) -> &str {
        &self.modes[id.0].id
    }

    /// The canonical (sorted, derived) spec. Serializing this and rebuilding
    /// reproduces the instance exactly.
    pub fn spec(&self) -> &InstanceSpec {
        &self.spec
    }

    /// True if the undirected projection of the mode graph connects all its
    /// member nodes.
    pub fn mode_connected(&self, mode: ModeId) -> bool {
        let m = &self.modes[mode.0];
        let members: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| m.member_mask[i])
            .collect();
        let Some(&start) = members.first() else {
            return true;
        };
        let mut seen = vec![false; self.nodes.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let push = |w: usize, seen: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            };
            for &a in &m.out_arcs[v] {
                push(self.arcs[a.0].head.0, &mut seen, &mut queue);
            }
            for &a in &m.in_arcs[v] {
                push(self.arcs[a.0].tail.0, &mut seen, &mut queue);
            }
        }
        members.into_iter().all(|i| seen[i])
    }
}

/// Standalone validation entry point: derives what can be derived, then
/// reports every violated invariant (never panics, never errors).
pub fn validate_instance(spec: &InstanceSpec) -> ValidationReport {
    match derive_constants(spec) {
        Ok(derived) => validate_spec(&derived),
        Err(e) => {
            let mut report = ValidationReport::default();
            report.push("derive", e.to_string());
            report
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn capacity_derives_from_lanes_and_speed() {
        // 2 lanes at 30 mi/h over 0.006 mi standard vehicles
        let inst = NetworkInstance::build(&fixtures::chain3_spec()).unwrap();
        assert!((inst.arcs[0].capacity_vph - 10_000.0).abs() < 1e-9);
    }

    #[test]
    fn bpr_width_is_twice_capacity_over_pieces() {
        let mut spec = fixtures::chain3_spec();
        spec.arcs[0].capacity_vph = Some(100.0);
        let inst = NetworkInstance::build(&spec).unwrap();
        let arc = inst
            .arcs
            .iter()
            .find(|a| (a.capacity_vph - 100.0).abs() < 1e-12)
            .unwrap();
        assert_eq!(arc.bpr.width, 50.0);
    }

    #[test]
    fn unit_conversion_identity() {
        // vehicle length equal to the standard and 1 bbl per vehicle
        let inst = NetworkInstance::build(&fixtures::chain3_spec()).unwrap();
        let truck = inst.mode_id("truck").unwrap();
        assert_eq!(inst.gamma(truck, 1), 1.0);
    }

    #[test]
    fn zero_divisors_rejected() {
        let mut spec = fixtures::chain3_spec();
        spec.modes[0].std_vehicle_len_mi = 0.0;
        assert!(derive_constants(&spec).is_err());
        let mut spec = fixtures::chain3_spec();
        spec.carrier_classes
            .get_mut(&mode_phase_key("truck", 1))
            .unwrap()
            .demand_bbl_per_vehicle = 0.0;
        assert!(derive_constants(&spec).is_err());
    }

    #[test]
    fn derive_is_idempotent() {
        let once = derive_constants(&fixtures::three_phase_spec()).unwrap();
        let twice = derive_constants(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn od_carrier_count_before_pruning_is_cartesian() {
        // 2 stations (phase-2 supply) x 3 customers (phase-2 demand)
        let mut spec = fixtures::three_phase_spec();
        let mut extra_station = NodeSpec::new("station2", 3);
        extra_station.b_phase[0] = -4.0;
        extra_station.penalty_phase = vec![50.0, 5.0, 0.0];
        let mut h2 = NodeSpec::new("home2", 3);
        h2.b_phase[1] = -2.0;
        h2.penalty_phase = vec![0.0, 40.0, 0.0];
        let mut h3 = NodeSpec::new("home3", 3);
        h3.b_phase[1] = -3.0;
        h3.penalty_phase = vec![0.0, 40.0, 0.0];
        spec.nodes.extend([extra_station, h2, h3]);
        for (tail, head) in [
            ("depot", "station2"),
            ("station2", "home2"),
            ("home2", "station2"),
            ("station", "home2"),
            ("home2", "station"),
            ("station2", "home3"),
            ("home3", "station2"),
            ("station2", "home"),
            ("home", "station2"),
            ("station", "home3"),
            ("home3", "station"),
        ] {
            spec.arcs.push(ArcSpec {
                mode: "truck".into(),
                tail: tail.into(),
                head: head.into(),
                length_mi: 1.0,
                speed_mph: 30.0,
                lanes: 2,
                capacity_vph: None,
                flow_cost_phase: vec![Some(1.0), None, None],
                time_cost: 0.0,
            });
        }
        let inst = NetworkInstance::build(&spec).unwrap();
        let truck = inst.mode_id("truck").unwrap();
        assert_eq!(inst.modes[truck.0].carriers_unpruned[1], 6);
        // everything is mutually reachable here, so nothing was pruned
        assert_eq!(inst.carriers(truck, 2).len(), 6);
        assert_eq!(inst.carriers(truck, 3).len(), 6);
    }

    #[test]
    fn empty_demand_side_gives_no_carriers() {
        // single-phase chain re-phased to 3: no customers anywhere
        let mut spec = fixtures::chain3_spec();
        spec.n_phases = 3;
        for p in 2..=3 {
            spec.carrier_classes.insert(
                mode_phase_key("truck", p),
                spec.carrier_classes[&mode_phase_key("truck", 1)].clone(),
            );
        }
        for n in &mut spec.nodes {
            n.b_phase.resize(3, 0.0);
            n.penalty_phase.resize(3, 0.0);
        }
        let inst = NetworkInstance::build(&spec).unwrap();
        let truck = inst.mode_id("truck").unwrap();
        assert!(inst.carriers(truck, 2).is_empty());
        assert_eq!(inst.modes[truck.0].carriers_unpruned[1], 0);
    }
}
