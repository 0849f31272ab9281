//! Static plot exports: a DOT graph document always, and a GeoJSON feature
//! collection when the instance carries coordinates. Defense, reserve, and
//! attack selections are tagged blue/green/red.

use std::collections::BTreeMap;

use crate::model::{AttackPlan, DefensePlan, NetworkInstance, NodeId, PlanSet, ScenarioConfig};

pub struct PlanTags<'a> {
    pub scenario: &'a ScenarioConfig,
    pub defense: &'a DefensePlan,
    pub attack: &'a AttackPlan,
}

#[derive(Default, Clone, Copy)]
struct NodeTag {
    defense: bool,
    reserve_open: bool,
    attacked: bool,
}

fn collect_tags(tags: Option<&PlanTags>) -> BTreeMap<NodeId, NodeTag> {
    let mut map: BTreeMap<NodeId, NodeTag> = BTreeMap::new();
    let Some(t) = tags else {
        return map;
    };
    for (_, node) in t.defense.defend.selected(t.scenario, PlanSet::Attackable) {
        map.entry(node).or_default().defense = true;
    }
    for (_, node) in t.defense.open.selected(t.scenario, PlanSet::Reserves) {
        map.entry(node).or_default().reserve_open = true;
    }
    for (_, node) in t.attack.attack.selected(t.scenario, PlanSet::Attackable) {
        map.entry(node).or_default().attacked = true;
    }
    map
}

fn role_of(inst: &NetworkInstance, node: usize) -> &'static str {
    let b = &inst.nodes[node].b_p;
    if b.first().copied().unwrap_or(0.0) > 0.0 {
        "depot"
    } else if b.first().copied().unwrap_or(0.0) < 0.0 {
        "station"
    } else if b.len() > 1 && b[1] < 0.0 {
        "customer"
    } else {
        "junction"
    }
}

fn color_of(tag: &NodeTag) -> Option<&'static str> {
    // defense wins over attack in the picture: a defended node shrugs the
    // attack off
    if tag.defense {
        Some("blue")
    } else if tag.reserve_open {
        Some("green")
    } else if tag.attacked {
        Some("red")
    } else {
        None
    }
}

fn display_names(inst: &NetworkInstance, anonymize: bool) -> Vec<String> {
    if anonymize {
        (0..inst.nodes.len())
            .map(|i| format!("v{}", i + 1))
            .collect()
    } else {
        inst.nodes.iter().map(|n| n.id.clone()).collect()
    }
}

/// DOT digraph with role/selection attributes, deterministic ordering.
pub fn to_dot(inst: &NetworkInstance, tags: Option<&PlanTags>, anonymize: bool) -> String {
    let tag_map = collect_tags(tags);
    let names = display_names(inst, anonymize);
    let mut s = String::new();
    s.push_str(&format!("digraph \"{}\" {{\n", inst.name));
    s.push_str("  node [shape=circle, style=filled, fillcolor=white];\n");
    for (i, name) in names.iter().enumerate() {
        let role = role_of(inst, i);
        let tag = tag_map.get(&NodeId(i)).copied().unwrap_or_default();
        let mut attrs = vec![format!("role={role}")];
        if let Some(color) = color_of(&tag) {
            attrs.push(format!("fillcolor={color}"));
        }
        if tag.defense {
            attrs.push("defense=true".into());
        }
        if tag.reserve_open {
            attrs.push("reserve=true".into());
        }
        if tag.attacked {
            attrs.push("attack=true".into());
        }
        s.push_str(&format!("  \"{}\" [{}];\n", name, attrs.join(", ")));
    }
    for arc in &inst.arcs {
        s.push_str(&format!(
            "  \"{}\" -> \"{}\" [mode=\"{}\"];\n",
            names[arc.tail.0],
            names[arc.head.0],
            inst.mode_name(arc.mode)
        ));
    }
    s.push_str("}\n");
    s
}

/// GeoJSON FeatureCollection (points + arc line strings); `None` when no
/// node has coordinates.
pub fn to_geojson(
    inst: &NetworkInstance,
    tags: Option<&PlanTags>,
    anonymize: bool,
) -> Option<String> {
    if inst.nodes.iter().all(|n| n.coords.is_none()) {
        return None;
    }
    let tag_map = collect_tags(tags);
    let names = display_names(inst, anonymize);
    let mut features = Vec::new();
    for (i, node) in inst.nodes.iter().enumerate() {
        let Some([x, y]) = node.coords else {
            continue;
        };
        let tag = tag_map.get(&NodeId(i)).copied().unwrap_or_default();
        features.push(serde_json::json!({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [x, y]},
            "properties": {
                "id": names[i],
                "role": role_of(inst, i),
                "defense": tag.defense,
                "reserve_open": tag.reserve_open,
                "attacked": tag.attacked,
                "color": color_of(&tag).unwrap_or("gray"),
            }
        }));
    }
    for arc in &inst.arcs {
        let (Some(a), Some(b)) = (inst.nodes[arc.tail.0].coords, inst.nodes[arc.head.0].coords)
        else {
            continue;
        };
        features.push(serde_json::json!({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": [[a[0], a[1]], [b[0], b[1]]]},
            "properties": {"mode": inst.mode_name(arc.mode)}
        }));
    }
    let doc = serde_json::json!({"type": "FeatureCollection", "features": features});
    Some(serde_json::to_string_pretty(&doc).expect("geojson serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::NetworkInstance;

    #[test]
    fn plain_topology_without_plans() {
        let inst = NetworkInstance::build(&fixtures::chain3_spec()).unwrap();
        let dot = to_dot(&inst, None, false);
        assert!(dot.contains("\"depot\" [role=depot]"));
        assert!(dot.contains("\"depot\" -> \"junction\""));
        assert!(!dot.contains("fillcolor=blue"));
    }

    #[test]
    fn tags_follow_the_plan_vectors() {
        let inst = NetworkInstance::build(&fixtures::sweep_spec()).unwrap();
        let scen = fixtures::sweep_scenario(&inst, (1, 1, 1));
        let key = *scen.cells.keys().next().unwrap();
        let mut defense = DefensePlan::none(&scen);
        defense.defend.set(key, 0, true); // d1
        defense.open.set(key, 0, true); // r1
        let mut attack = AttackPlan::none(&scen);
        attack.attack.set(key, 1, true); // d2
        let tags = PlanTags {
            scenario: &scen,
            defense: &defense,
            attack: &attack,
        };
        let dot = to_dot(&inst, Some(&tags), false);
        assert!(dot.contains("\"d1\" [role=depot, fillcolor=blue, defense=true]"));
        assert!(dot.contains("\"r1\" [role=depot, fillcolor=green, reserve=true]"));
        assert!(dot.contains("\"d2\" [role=depot, fillcolor=red, attack=true]"));
        assert!(dot.contains("\"d3\" [role=depot]"));
    }

    #[test]
    fn geojson_only_with_coordinates() {
        let inst = NetworkInstance::build(&fixtures::chain3_spec()).unwrap();
        assert!(to_geojson(&inst, None, false).is_none());
        let mut spec = fixtures::chain3_spec();
        for (i, node) in spec.nodes.iter_mut().enumerate() {
            node.coords = Some([i as f64, 0.5]);
        }
        let inst = NetworkInstance::build(&spec).unwrap();
        let geo = to_geojson(&inst, None, false).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&geo).unwrap();
        let features = doc["features"].as_array().unwrap();
        // 3 points + 2 arcs
        assert_eq!(features.len(), 5);
    }

    #[test]
    fn anonymization_hides_ids() {
        let inst = NetworkInstance::build(&fixtures::chain3_spec()).unwrap();
        let dot = to_dot(&inst, None, true);
        assert!(!dot.contains("depot\" ["));
        assert!(dot.contains("\"v1\""));
    }
}
