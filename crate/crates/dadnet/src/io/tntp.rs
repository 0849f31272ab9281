//! Reader for the transportation-research network text format: a metadata
//! header, then one link row per line
//! `init term capacity length free_flow_time b power speed toll type ;`.
//! An optional companion node table carries coordinates. The output is a
//! skeleton instance (roads only) awaiting role assignment.

use std::path::Path;

use crate::error::{DadError, Result};
use crate::model::{mode_phase_key, ArcSpec, CarrierClassSpec, InstanceSpec, ModeSpec, NodeSpec};

#[derive(Debug, Clone)]
pub struct TntpOptions {
    /// Multiply raw lengths into miles.
    pub length_scale: f64,
    /// Multiply raw free-flow times into hours (the common convention is
    /// minutes, hence 1/60).
    pub time_scale: f64,
    pub std_vehicle_len_mi: f64,
    pub max_trip_h: f64,
}

impl Default for TntpOptions {
    fn default() -> Self {
        Self {
            length_scale: 1.0,
            time_scale: 1.0 / 60.0,
            std_vehicle_len_mi: 0.006,
            max_trip_h: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TntpLink {
    pub init: u64,
    pub term: u64,
    pub capacity: f64,
    pub length: f64,
    pub free_flow_time: f64,
    pub speed: f64,
}

/// Parses the link table, ignoring metadata tags (`<...>`) and `~` comment
/// lines. Malformed or zero-capacity rows are hard errors with the line
/// number.
pub fn parse_tntp_links(text: &str) -> Result<Vec<TntpLink>> {
    let mut links = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('<') || line.starts_with('~') {
            continue;
        }
        let row = line.trim_end_matches(';').trim();
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split_whitespace().collect();
        if fields.len() < 5 {
            return Err(DadError::parse(
                format!("line {}", lineno + 1),
                format!("expected at least 5 link fields, found {}", fields.len()),
            ));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].parse().map_err(|_| {
                DadError::parse(
                    format!("line {}", lineno + 1),
                    format!("bad number `{}`", fields[i]),
                )
            })
        };
        let init = num(0)? as u64;
        let term = num(1)? as u64;
        let capacity = num(2)?;
        let length = num(3)?;
        let fft = num(4)?;
        let speed = if fields.len() > 7 { num(7)? } else { 0.0 };
        if capacity <= 0.0 {
            return Err(DadError::parse(
                format!("line {}", lineno + 1),
                "link capacity must be positive".to_string(),
            ));
        }
        if init == term {
            return Err(DadError::parse(
                format!("line {}", lineno + 1),
                "self-loop link".to_string(),
            ));
        }
        links.push(TntpLink {
            init,
            term,
            capacity,
            length,
            free_flow_time: fft,
            speed,
        });
    }
    Ok(links)
}

fn parse_node_table(text: &str) -> Result<Vec<(u64, f64, f64)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('<') || line.starts_with('~') {
            continue;
        }
        let row = line.trim_end_matches(';').trim();
        let fields: Vec<&str> = row.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        // skip a header row like "Node X Y"
        if fields[0].parse::<u64>().is_err() {
            continue;
        }
        if fields.len() < 3 {
            return Err(DadError::parse(
                format!("line {}", lineno + 1),
                "node rows need id, x, y".to_string(),
            ));
        }
        let id: u64 = fields[0].parse().unwrap();
        let x: f64 = fields[1]
            .parse()
            .map_err(|_| DadError::parse(format!("line {}", lineno + 1), "bad x coordinate"))?;
        let y: f64 = fields[2]
            .parse()
            .map_err(|_| DadError::parse(format!("line {}", lineno + 1), "bad y coordinate"))?;
        out.push((id, x, y));
    }
    Ok(out)
}

/// Reads a link file (and optional node coordinate file) into a skeleton:
/// one truck mode, three phases, zero capacities everywhere. Speeds use the
/// speed column when positive, otherwise length over free-flow time.
pub fn load_tntp_like(
    net_path: &Path,
    node_path: Option<&Path>,
    options: &TntpOptions,
) -> Result<InstanceSpec> {
    let text = std::fs::read_to_string(net_path)?;
    let links = parse_tntp_links(&text)?;
    if links.is_empty() {
        return Err(DadError::parse(
            net_path.display().to_string(),
            "no link rows found".to_string(),
        ));
    }
    let coords = match node_path {
        Some(p) => parse_node_table(&std::fs::read_to_string(p)?)?,
        None => Vec::new(),
    };

    let mut ids: Vec<u64> = links.iter().flat_map(|l| [l.init, l.term]).collect();
    ids.sort_unstable();
    ids.dedup();
    let width = ids.iter().max().map_or(1, |m| m.to_string().len());
    let name_of = |id: u64| format!("n{id:0width$}");

    let mut nodes: Vec<NodeSpec> = ids
        .iter()
        .map(|&id| NodeSpec::new(name_of(id), 3))
        .collect();
    for (id, x, y) in coords {
        if let Some(node) = nodes.iter_mut().find(|n| n.id == name_of(id)) {
            node.coords = Some([x, y]);
        }
    }

    let arcs: Vec<ArcSpec> = links
        .iter()
        .map(|l| {
            let length_mi = (l.length * options.length_scale).max(1e-3);
            let fft_h = l.free_flow_time * options.time_scale;
            let speed_mph = if l.speed > 0.0 {
                l.speed
            } else if fft_h > 0.0 {
                length_mi / fft_h
            } else {
                30.0
            };
            ArcSpec {
                mode: "truck".into(),
                tail: name_of(l.init),
                head: name_of(l.term),
                length_mi,
                speed_mph,
                lanes: 1,
                capacity_vph: Some(l.capacity),
                flow_cost_phase: vec![Some(fft_h.max(0.01)), None, None],
                time_cost: 0.01,
            }
        })
        .collect();

    Ok(InstanceSpec {
        name: net_path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "tntp".into()),
        n_phases: 3,
        n_bpr_pieces: 4,
        modes: vec![ModeSpec {
            id: "truck".into(),
            std_vehicle_len_mi: options.std_vehicle_len_mi,
            max_trip_h: options.max_trip_h,
        }],
        carrier_classes: (1..=3)
            .map(|p| {
                (
                    mode_phase_key("truck", p),
                    CarrierClassSpec {
                        vehicle_len_mi: options.std_vehicle_len_mi,
                        demand_bbl_per_vehicle: 1.0,
                    },
                )
            })
            .collect(),
        nodes,
        arcs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NetworkInstance;

    const MINI: &str = "\
<NUMBER OF NODES> 2
<NUMBER OF LINKS> 1
<END OF METADATA>
~ init term capacity length fft b power speed toll type ;
1 2 900.0 0.5 1.2 0.15 4 0 0 1 ;
";

    #[test]
    fn minimal_two_node_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mini.tntp");
        std::fs::write(&path, MINI).unwrap();
        let spec = load_tntp_like(&path, None, &TntpOptions::default()).unwrap();
        assert_eq!(spec.nodes.len(), 2);
        assert_eq!(spec.arcs.len(), 1);
        assert_eq!(spec.arcs[0].capacity_vph, Some(900.0));
        // skeleton validates once built (no fuel roles yet)
        NetworkInstance::build(&spec).unwrap();
    }

    #[test]
    fn zero_capacity_rejected() {
        let text = MINI.replace("900.0", "0.0");
        assert!(matches!(
            parse_tntp_links(&text),
            Err(DadError::Parse { .. })
        ));
    }

    #[test]
    fn six_node_net_with_coordinates() {
        let net = "\
<NUMBER OF NODES> 6
<END OF METADATA>
1 2 500 1.0 2.0 0.15 4 0 0 1 ;
2 3 500 1.0 2.0 0.15 4 0 0 1 ;
3 4 500 1.0 2.0 0.15 4 0 0 1 ;
4 5 500 1.0 2.0 0.15 4 0 0 1 ;
5 6 500 1.0 2.0 0.15 4 0 0 1 ;
6 1 500 1.0 2.0 0.15 4 0 0 1 ;
2 1 500 1.0 2.0 0.15 4 0 0 1 ;
";
        let nodes = "\
Node X Y ;
1 0.0 0.0 ;
2 1.0 0.0 ;
3 2.0 0.5 ;
4 2.0 1.5 ;
5 1.0 2.0 ;
6 0.0 1.0 ;
";
        let dir = tempfile::tempdir().unwrap();
        let net_path = dir.path().join("ring.tntp");
        let node_path = dir.path().join("ring_node.tntp");
        std::fs::write(&net_path, net).unwrap();
        std::fs::write(&node_path, nodes).unwrap();
        let spec = load_tntp_like(&net_path, Some(&node_path), &TntpOptions::default()).unwrap();
        assert_eq!(spec.nodes.len(), 6);
        assert_eq!(spec.arcs.len(), 7);
        assert!(spec.nodes.iter().all(|n| n.coords.is_some()));
        // derived speed: 1 mile over 2 minutes = 30 mph
        let built = NetworkInstance::build(&spec).unwrap();
        assert!((built.arcs[0].speed_mph - 30.0).abs() < 1e-9);
    }
}
