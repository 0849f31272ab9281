//! Relational validation of instance specs. Report-style: every violated
//! invariant is collected with the offending element ids rather than
//! stopping at the first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::instance::InstanceSpec;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Stable short code, e.g. `sign-consistency`.
    pub code: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, code: &str, detail: impl Into<String>) {
        self.violations.push(Violation {
            code: code.to_string(),
            detail: detail.into(),
        });
    }

    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pass() {
            return write!(f, "pass");
        }
        for v in &self.violations {
            writeln!(f, "[{}] {}", v.code, v.detail)?;
        }
        Ok(())
    }
}

fn sgn(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Checks a derived spec against the relational invariants of the data
/// tables. Callers that start from raw data should go through
/// [`crate::model::validate_instance`], which derives first.
pub fn validate_spec(spec: &InstanceSpec) -> ValidationReport {
    let mut r = ValidationReport::default();
    let np = spec.n_phases;

    if spec.nodes.is_empty() {
        r.push("nonempty-node-set", "instance has no nodes");
    }
    if spec.modes.is_empty() {
        r.push("nonempty-mode-set", "instance has no modes");
    }
    if np < 1 {
        r.push("phase-count", "n_phases must be at least 1");
    }
    if spec.n_bpr_pieces < 1 {
        r.push("bpr-piece-count", "n_bpr_pieces must be at least 1");
    }

    let mut mode_ids = BTreeSet::new();
    for m in &spec.modes {
        if !mode_ids.insert(m.id.clone()) {
            r.push("unique-mode-id", format!("duplicate mode id {}", m.id));
        }
        if m.std_vehicle_len_mi <= 0.0 {
            r.push(
                "positive-std-vehicle-length",
                format!("mode {}: std vehicle length {}", m.id, m.std_vehicle_len_mi),
            );
        }
        if m.max_trip_h < 0.0 {
            r.push("nonnegative-trip-time", format!("mode {}", m.id));
        }
        for p in 1..=np {
            match spec.carrier_class(&m.id, p) {
                None => r.push(
                    "carrier-class-present",
                    format!("missing carrier class for {}:{}", m.id, p),
                ),
                Some(c) => {
                    if c.vehicle_len_mi <= 0.0 || c.demand_bbl_per_vehicle <= 0.0 {
                        r.push(
                            "positive-carrier-constants",
                            format!("carrier class {}:{}", m.id, p),
                        );
                    }
                }
            }
        }
    }

    let mut node_ids = BTreeSet::new();
    for n in &spec.nodes {
        if !node_ids.insert(n.id.clone()) {
            r.push("unique-node-id", format!("duplicate node id {}", n.id));
        }
        if n.b_phase.len() != np || n.penalty_phase.len() != np {
            r.push(
                "phase-vector-length",
                format!("node {}: expected {} phase entries", n.id, np),
            );
            continue;
        }
        for (p, pen) in n.penalty_phase.iter().enumerate() {
            if *pen < 0.0 {
                r.push(
                    "nonnegative-penalty",
                    format!("node {} phase {}", n.id, p + 1),
                );
            }
        }
        for (key, b_mp) in &n.b_mode_phase {
            let Some((mode, phase)) = key.split_once(':') else {
                r.push("mode-phase-key", format!("node {}: bad key {key}", n.id));
                continue;
            };
            let Ok(phase) = phase.parse::<usize>() else {
                r.push("mode-phase-key", format!("node {}: bad key {key}", n.id));
                continue;
            };
            if !mode_ids.contains(mode) || phase == 0 || phase > np {
                r.push(
                    "mode-phase-key",
                    format!("node {}: key {key} references unknown mode or phase", n.id),
                );
                continue;
            }
            // sign chain: sgn(b_mp) * sgn(b_p) >= 0
            let b_p = n.b_phase[phase - 1];
            if sgn(*b_mp) * sgn(b_p) < 0 {
                r.push(
                    "sign-consistency",
                    format!(
                        "node {}: b[{key}] = {b_mp} contradicts phase aggregate {b_p}",
                        n.id
                    ),
                );
            }
        }
    }

    // membership: nodes incident to mode arcs
    let mut member: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut arc_keys = BTreeSet::new();
    for a in &spec.arcs {
        if !mode_ids.contains(&a.mode) {
            r.push(
                "arc-mode",
                format!("arc {}->{}: unknown mode {}", a.tail, a.head, a.mode),
            );
        }
        if !node_ids.contains(&a.tail) || !node_ids.contains(&a.head) {
            r.push(
                "arc-endpoint",
                format!("arc {}->{} references a missing node", a.tail, a.head),
            );
        }
        if a.tail == a.head {
            r.push("no-self-loop", format!("arc {}->{}", a.tail, a.head));
        }
        if !arc_keys.insert((a.mode.clone(), a.tail.clone(), a.head.clone())) {
            r.push(
                "duplicate-arc",
                format!("arc {}->{} in mode {}", a.tail, a.head, a.mode),
            );
        }
        if a.length_mi <= 0.0 {
            r.push("positive-length", format!("arc {}->{}", a.tail, a.head));
        }
        if a.speed_mph <= 0.0 {
            r.push("positive-speed", format!("arc {}->{}", a.tail, a.head));
        }
        if a.lanes < 1 {
            r.push("positive-lanes", format!("arc {}->{}", a.tail, a.head));
        }
        match a.capacity_vph {
            Some(u) if u <= 0.0 => {
                r.push("positive-capacity", format!("arc {}->{}", a.tail, a.head))
            }
            _ => {}
        }
        for (p, c) in a.flow_cost_phase.iter().enumerate() {
            if let Some(c) = c {
                if *c < 0.0 {
                    r.push(
                        "nonnegative-cost",
                        format!("arc {}->{} phase {}", a.tail, a.head, p + 1),
                    );
                }
            }
        }
        if a.time_cost < 0.0 {
            r.push(
                "nonnegative-cost",
                format!("arc {}->{} time cost", a.tail, a.head),
            );
        }
        member
            .entry(a.mode.as_str())
            .or_default()
            .insert(a.tail.as_str());
        member
            .entry(a.mode.as_str())
            .or_default()
            .insert(a.head.as_str());
    }

    // per-mode capacity entries must sit on member nodes
    for n in &spec.nodes {
        for (key, value) in &n.b_mode_phase {
            if let Some((mode, _)) = key.split_once(':') {
                if mode_ids.contains(mode)
                    && *value != 0.0
                    && !member.get(mode).is_some_and(|s| s.contains(n.id.as_str()))
                {
                    r.push(
                        "capacity-off-graph",
                        format!("node {}: capacity {key} but node has no {mode} arcs", n.id),
                    );
                }
            }
        }
        // aggregate capacity on a node belonging to no mode at all
        if n.b_phase.iter().any(|&b| b != 0.0)
            && !member.values().any(|s| s.contains(n.id.as_str()))
        {
            r.push(
                "capacity-off-graph",
                format!("node {}: nonzero capacity but no incident arcs", n.id),
            );
        }
    }

    // phase chain: suppliers of phase p+1 are exactly the demand nodes of p
    for p in 1..np {
        let demand_p: BTreeSet<&str> = spec
            .nodes
            .iter()
            .filter(|n| n.b_phase.len() == np && n.b_phase[p - 1] < 0.0)
            .map(|n| n.id.as_str())
            .collect();
        let supply_next: BTreeSet<&str> = spec
            .nodes
            .iter()
            .filter(|n| n.b_phase.len() == np && n.b_phase[p] > 0.0)
            .map(|n| n.id.as_str())
            .collect();
        if demand_p != supply_next {
            let missing: Vec<&&str> = demand_p.difference(&supply_next).collect();
            let extra: Vec<&&str> = supply_next.difference(&demand_p).collect();
            r.push(
                "phase-chain",
                format!(
                    "phase {} supply set != phase {} demand set (missing {:?}, extra {:?})",
                    p + 1,
                    p,
                    missing,
                    extra
                ),
            );
        }
    }

    r
}

#[cfg(test)]
mod tests {
    use crate::fixtures as fixture;
    use crate::model::mode_phase_key;

    #[test]
    fn chain_fixture_passes() {
        let spec = fixture::chain3_spec();
        let report = crate::model::validate_instance(&spec);
        assert!(report.is_pass(), "{report}");
    }

    #[test]
    fn empty_instance_flagged() {
        let mut spec = fixture::chain3_spec();
        spec.nodes.clear();
        spec.arcs.clear();
        let report = crate::model::validate_instance(&spec);
        assert!(report.has("nonempty-node-set"));
    }

    #[test]
    fn sign_consistency_flagged() {
        let mut spec = fixture::chain3_spec();
        // depot has b^1 > 0; contradict it at the mode level
        let depot = spec.nodes.iter_mut().find(|n| n.id == "depot").unwrap();
        depot.b_mode_phase.insert(mode_phase_key("truck", 1), -5.0);
        let report = crate::model::validate_instance(&spec);
        assert!(report.has("sign-consistency"), "{report}");
    }

    #[test]
    fn negative_lanes_flagged() {
        let mut spec = fixture::chain3_spec();
        spec.arcs[0].lanes = 0;
        let report = crate::model::validate_instance(&spec);
        assert!(report.has("positive-lanes"));
    }

    #[test]
    fn broken_phase_chain_flagged() {
        let mut spec = fixture::three_phase_spec();
        // delete the derived phase-2 supply at the station
        let station = spec.nodes.iter_mut().find(|n| n.id == "station").unwrap();
        station.b_phase[1] = -1.0; // station also demands in phase 2: chain broken
        let report = crate::model::validate_instance(&spec);
        assert!(report.has("phase-chain"), "{report}");
    }

    #[test]
    fn zero_capacity_arc_flagged() {
        let mut spec = fixture::chain3_spec();
        spec.arcs[0].capacity_vph = Some(0.0);
        let report = crate::model::validate_instance(&spec);
        assert!(report.has("positive-capacity"));
    }
}
