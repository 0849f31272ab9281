//! Summary network statistics per mode graph.
//!
//! Conventions: `arcs` counts directed arcs as stored; density, degrees and
//! betweenness are computed on the undirected simple projection (parallel
//! directions collapse into one edge). Betweenness is exact Brandes over
//! unweighted shortest paths, reported as the l1-normalized vector's mean.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{ModeId, NetworkInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub nodes: usize,
    /// Directed arc count of the mode graph.
    pub arcs: usize,
    /// Undirected simple edge count.
    pub edges: usize,
    pub density: f64,
    /// 2 * edges / nodes on the undirected view.
    pub avg_degree: f64,
    /// Standard deviation of the degree distribution.
    pub degree_heterogeneity: f64,
    pub max_degree: usize,
    /// Mean of the l1-normalized betweenness vector (1/n when any interior
    /// shortest paths exist, 0 otherwise — leaves always score zero).
    pub avg_betweenness: f64,
}

/// Undirected simple projection of one mode graph: member nodes (dense
/// relabeling) and unordered edges.
fn undirected_projection(
    inst: &NetworkInstance,
    mode: ModeId,
) -> (Vec<usize>, Vec<(usize, usize)>) {
    let m = &inst.modes[mode.0];
    let members: Vec<usize> = (0..inst.nodes.len())
        .filter(|&i| m.member_mask[i])
        .collect();
    let relabel: std::collections::BTreeMap<usize, usize> = members
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &a in &m.arcs {
        let arc = &inst.arcs[a.0];
        let (u, v) = (relabel[&arc.tail.0], relabel[&arc.head.0]);
        let key = if u < v { (u, v) } else { (v, u) };
        if u != v {
            edges.insert(key);
        }
    }
    (members, edges.into_iter().collect())
}

/// Raw betweenness centrality (each unordered pair counted once) on an
/// undirected unweighted graph given as an adjacency list.
pub fn betweenness(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let mut centrality = vec![0.0f64; n];
    for s in 0..n {
        let mut stack: Vec<usize> = Vec::new();
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist: Vec<i64> = vec![-1; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    pred[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        while let Some(w) = stack.pop() {
            for &v in &pred[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
    }
    // every unordered pair was visited from both endpoints
    for c in &mut centrality {
        *c /= 2.0;
    }
    centrality
}

pub fn compute_stats(inst: &NetworkInstance, mode: ModeId) -> NetworkStats {
    let (members, edges) = undirected_projection(inst, mode);
    let n = members.len();
    let e = edges.len();
    let mut degree = vec![0usize; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
        adj[u].push(v);
        adj[v].push(u);
    }
    let avg_degree = if n > 0 {
        2.0 * e as f64 / n as f64
    } else {
        0.0
    };
    let density = if n > 1 {
        2.0 * e as f64 / (n as f64 * (n - 1) as f64)
    } else {
        0.0
    };
    let het = if n > 0 {
        let mean = avg_degree;
        (degree
            .iter()
            .map(|&d| (d as f64 - mean).powi(2))
            .sum::<f64>()
            / n as f64)
            .sqrt()
    } else {
        0.0
    };
    let bw = betweenness(&adj);
    let total: f64 = bw.iter().sum();
    let avg_betweenness = if total > 0.0 {
        bw.iter().map(|b| b / total).sum::<f64>() / n as f64
    } else {
        0.0
    };
    NetworkStats {
        nodes: n,
        arcs: inst.modes[mode.0].arcs.len(),
        edges: e,
        density,
        avg_degree,
        degree_heterogeneity: het,
        max_degree: degree.iter().copied().max().unwrap_or(0),
        avg_betweenness,
    }
}

/// Stats per mode, keyed by mode id.
pub fn compute_all(inst: &NetworkInstance) -> Vec<(String, NetworkStats)> {
    (0..inst.modes.len())
        .map(|m| (inst.modes[m].id.clone(), compute_stats(inst, ModeId(m))))
        .collect()
}
