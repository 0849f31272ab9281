//! Small hand-checkable instances used throughout the test suite and as CLI
//! demos. Every value here was chosen so the optimal operator plans can be
//! worked out on paper; tests freeze those hand values.

use std::collections::BTreeMap;

use crate::model::{
    mode_phase_key, ArcSpec, CarrierClassSpec, InstanceSpec, ModeSpec, NetworkInstance, NodeSpec,
    PumpSpec, ScenarioConfig,
};

fn truck_mode() -> ModeSpec {
    ModeSpec {
        id: "truck".into(),
        std_vehicle_len_mi: 0.006,
        max_trip_h: 2.0,
    }
}

/// Unit carrier class: one vehicle per barrel, standard length, so the
/// fuel-to-vehicle conversion gamma is exactly 1.
fn unit_class() -> CarrierClassSpec {
    CarrierClassSpec {
        vehicle_len_mi: 0.006,
        demand_bbl_per_vehicle: 1.0,
    }
}

fn classes(mode: &str, n_phases: usize) -> BTreeMap<String, CarrierClassSpec> {
    (1..=n_phases)
        .map(|p| (mode_phase_key(mode, p), unit_class()))
        .collect()
}

fn arc(mode: &str, tail: &str, head: &str, cost: f64) -> ArcSpec {
    ArcSpec {
        mode: mode.into(),
        tail: tail.into(),
        head: head.into(),
        length_mi: 1.0,
        speed_mph: 30.0,
        lanes: 2,
        capacity_vph: None, // derives to 2 * 30 / 0.006 = 10000 v/h
        flow_cost_phase: vec![Some(cost)],
        time_cost: 0.0,
    }
}

fn supply(id: &str, rate: f64) -> NodeSpec {
    let mut n = NodeSpec::new(id, 1);
    n.b_phase[0] = rate;
    n
}

fn demand(id: &str, rate: f64, penalty: f64) -> NodeSpec {
    let mut n = NodeSpec::new(id, 1);
    n.b_phase[0] = -rate;
    n.penalty_phase[0] = penalty;
    n
}

/// One-phase chain: depot (+10 bbl/h) -> junction -> station (-10 bbl/h,
/// penalty 50 $/(bbl/h)), both arcs cost 1 $/(v/h), no congestion pricing.
///
/// Hand LP: route 10 bbl/h over two arcs at gamma 1 => objective 20.
/// With the depot interdicted the whole demand slips to slack => 500.
pub fn chain3_spec() -> InstanceSpec {
    InstanceSpec {
        name: "chain3".into(),
        n_phases: 1,
        n_bpr_pieces: 4,
        modes: vec![truck_mode()],
        carrier_classes: classes("truck", 1),
        nodes: vec![
            supply("depot", 10.0),
            NodeSpec::new("junction", 1),
            demand("station", 10.0, 50.0),
        ],
        arcs: vec![
            arc("truck", "depot", "junction", 1.0),
            arc("truck", "junction", "station", 1.0),
        ],
    }
}

/// Same chain with congestion priced (w = 2 $/((v/h)-h)) and a tight arc
/// capacity so the flow of 10 v/h sits inside the first BPR piece.
pub fn chain3_congested_spec() -> InstanceSpec {
    let mut spec = chain3_spec();
    spec.name = "chain3-congested".into();
    for a in &mut spec.arcs {
        a.capacity_vph = Some(20.0);
        a.time_cost = 2.0;
    }
    spec
}

/// Scenario for the chain: the depot is attackable, one defense, one attack.
pub fn chain3_scenario(inst: &NetworkInstance) -> ScenarioConfig {
    let truck = inst.mode_id("truck").unwrap();
    let depot = inst.node_id("depot").unwrap();
    ScenarioConfig::new("chain3")
        .with_cell(truck, 1, vec![depot], vec![], (1, 0, 1))
        .with_conservative_big_m(inst)
}

/// Two depots (6 bbl/h each) feeding a 10 bbl/h station through a hub, so
/// both run in the base plan and every interdiction hurts a different
/// amount:
///
/// * no attack: 6*1 + 4*3 + 10*1 = 28
/// * d1 out:    6*3 + 6*1 + 4*50 = 224
/// * d2 out:    6*1 + 6*1 + 4*50 = 212
pub fn two_depot_spec() -> InstanceSpec {
    InstanceSpec {
        name: "two-depot".into(),
        n_phases: 1,
        n_bpr_pieces: 4,
        modes: vec![truck_mode()],
        carrier_classes: classes("truck", 1),
        nodes: vec![
            supply("d1", 6.0),
            supply("d2", 6.0),
            NodeSpec::new("hub", 1),
            demand("station", 10.0, 50.0),
        ],
        arcs: vec![
            arc("truck", "d1", "hub", 1.0),
            arc("truck", "d2", "hub", 3.0),
            arc("truck", "hub", "station", 1.0),
        ],
    }
}

pub fn two_depot_scenario(inst: &NetworkInstance, budgets: (u32, u32, u32)) -> ScenarioConfig {
    let truck = inst.mode_id("truck").unwrap();
    let d1 = inst.node_id("d1").unwrap();
    let d2 = inst.node_id("d2").unwrap();
    ScenarioConfig::new("two-depot")
        .with_cell(truck, 1, vec![d1, d2], vec![], budgets)
        .with_conservative_big_m(inst)
}

/// Three-phase round trip on depot -> station -> home -> station.
///
/// Phase 1 trucks deliver 10 bbl/h to the station; phase 2 moves it to the
/// home customers; phase 3 returns them. All sign data beyond phase 1 and
/// the home demand derives from the phase chain. With every arc cost 1 (the
/// phase-2/3 costs derive from q/2 = 1) the undisturbed optimum is 30.
pub fn three_phase_spec() -> InstanceSpec {
    let mut station = NodeSpec::new("station", 3);
    station.b_phase[0] = -10.0;
    station.penalty_phase = vec![50.0, 5.0, 0.0]; // phase 3 ties to phase 2
    let mut home = NodeSpec::new("home", 3);
    home.b_phase[1] = -10.0;
    home.penalty_phase = vec![0.0, 40.0, 0.0];
    let mut depot = NodeSpec::new("depot", 3);
    depot.b_phase[0] = 10.0;

    let mut d_t = arc("truck", "depot", "station", 1.0);
    let mut t_h = arc("truck", "station", "home", 1.0);
    let mut h_t = arc("truck", "home", "station", 1.0);
    for a in [&mut d_t, &mut t_h, &mut h_t] {
        a.flow_cost_phase = vec![Some(1.0), None, None]; // phases 2,3 derive to q/2 = 1
    }

    InstanceSpec {
        name: "three-phase".into(),
        n_phases: 3,
        n_bpr_pieces: 4,
        modes: vec![truck_mode()],
        carrier_classes: classes("truck", 3),
        nodes: vec![depot, station, home],
        arcs: vec![d_t, t_h, h_t],
    }
}

/// Variant with pumps at the station in phase 2: 2 pumps at 3 bbl/h cap the
/// phase-2 throughput at 6 when the scenario enables the cap.
pub fn three_phase_pumped_spec() -> InstanceSpec {
    let mut spec = three_phase_spec();
    spec.name = "three-phase-pumped".into();
    let station = spec.nodes.iter_mut().find(|n| n.id == "station").unwrap();
    station.pumps_phase = vec![
        None,
        Some(PumpSpec {
            count: 2,
            rate_bbl_per_h: 3.0,
        }),
        None,
    ];
    spec
}

/// Scenario attacking the station's phase-2 supply role.
pub fn three_phase_scenario(inst: &NetworkInstance) -> ScenarioConfig {
    let truck = inst.mode_id("truck").unwrap();
    let station = inst.node_id("station").unwrap();
    ScenarioConfig::new("three-phase")
        .with_cell(truck, 2, vec![station], vec![], (1, 0, 1))
        .with_conservative_big_m(inst)
}

/// Five depots with strictly increasing path costs (1..5 $), two reserves
/// (1.5 and 2.5 $), one station demanding 10 bbl/h while every source caps
/// at 4 bbl/h. Cheapest-three sourcing makes every interdiction strictly
/// harmful, so optimal attacks are unique and never waste budget on
/// defended or unused depots.
pub fn sweep_spec() -> InstanceSpec {
    let mut nodes = vec![NodeSpec::new("hub", 1), demand("station", 10.0, 50.0)];
    let mut arcs = vec![arc("truck", "hub", "station", 0.0)];
    for (i, cost) in [1.0, 2.0, 3.0, 4.0, 5.0].into_iter().enumerate() {
        let id = format!("d{}", i + 1);
        nodes.push(supply(&id, 4.0));
        arcs.push(arc("truck", &id, "hub", cost));
    }
    for (id, cost) in [("r1", 1.5), ("r2", 2.5)] {
        nodes.push(supply(id, 4.0));
        arcs.push(arc("truck", id, "hub", cost));
    }
    InstanceSpec {
        name: "sweep".into(),
        n_phases: 1,
        n_bpr_pieces: 4,
        modes: vec![truck_mode()],
        carrier_classes: classes("truck", 1),
        nodes,
        arcs,
    }
}

pub fn sweep_scenario(inst: &NetworkInstance, budgets: (u32, u32, u32)) -> ScenarioConfig {
    let truck = inst.mode_id("truck").unwrap();
    let depots: Vec<_> = (1..=5)
        .map(|i| inst.node_id(&format!("d{i}")).unwrap())
        .collect();
    let reserves = vec![inst.node_id("r1").unwrap(), inst.node_id("r2").unwrap()];
    ScenarioConfig::new("sweep")
        .with_cell(truck, 1, depots, reserves, budgets)
        .with_conservative_big_m(inst)
}

/// Two modes between one depot and one station. The alt mode is cheaper but
/// its arc capacity (4 v/h, so flow cap 8) cannot carry the whole 10 bbl/h:
/// the optimum splits 8 on alt + 2 on road.
///
/// Because both modes see the full +-10 capacity, total slack at shared
/// nodes carries a constant floor of 10 (see the mode-aggregation rows);
/// with the station penalty 50 the undisturbed optimum is
/// 8*1 + 2*2 + 50*10 = 512.
pub fn two_mode_spec() -> InstanceSpec {
    let mut road = arc("road", "depot", "station", 2.0);
    road.mode = "road".into();
    let mut alt = arc("alt", "depot", "station", 1.0);
    alt.mode = "alt".into();
    alt.capacity_vph = Some(4.0);

    let mut cc = classes("road", 1);
    cc.extend(classes("alt", 1));

    InstanceSpec {
        name: "two-mode".into(),
        n_phases: 1,
        n_bpr_pieces: 4,
        modes: vec![
            ModeSpec {
                id: "road".into(),
                std_vehicle_len_mi: 0.006,
                max_trip_h: 2.0,
            },
            ModeSpec {
                id: "alt".into(),
                std_vehicle_len_mi: 0.006,
                max_trip_h: 2.0,
            },
        ],
        carrier_classes: cc,
        nodes: vec![supply("depot", 10.0), demand("station", 10.0, 50.0)],
        arcs: vec![road, alt],
    }
}

pub fn two_mode_scenario(inst: &NetworkInstance, budgets: (u32, u32, u32)) -> ScenarioConfig {
    let depot = inst.node_id("depot").unwrap();
    let road = inst.mode_id("road").unwrap();
    let alt = inst.mode_id("alt").unwrap();
    ScenarioConfig::new("two-mode")
        .with_cell(road, 1, vec![depot], vec![], budgets)
        .with_cell(alt, 1, vec![depot], vec![], budgets)
        .with_conservative_big_m(inst)
}
