//! Generalized triangle strip selection on a meshlet's dual graph.
//!
//! A strip cover is a set of dual edges in which every triangle has at most
//! two selected edges and the selection has no cycle. Each connected
//! component of the selection is one strip; every extra strip costs a restart.

mod brute;
mod eta;
mod exact;
mod milp;
mod union_find;

use std::collections::HashMap;

use thiserror::Error;

use crate::mesh::{AdjacencyMap, EdgeSlot};
use crate::meshlet::Meshlet;

pub use brute::{brute_force_min_restarts, BRUTE_FORCE_MAX_EDGES};
pub use eta::solve_eta;
pub use exact::{solve_exact, DEFAULT_TIME_BUDGET};
pub use milp::{
    build_milp, build_milp_with, export_lp, import_solution, parse_solution, write_lp, Constraint,
    FlowCertificate, MilpModel, Sense, Var, DEFAULT_EPSILON, DEFAULT_FLOW,
};

use union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualEdge {
    pub a: u32,
    pub b: u32,
    pub slot_a: EdgeSlot,
    pub slot_b: EdgeSlot,
}

impl DualEdge {
    pub fn other(&self, node: u32) -> u32 {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn slot_at(&self, node: u32) -> EdgeSlot {
        if node == self.a {
            self.slot_a
        } else {
            self.slot_b
        }
    }
}

/// One node per local triangle, one edge per shared manifold edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGraph {
    node_count: usize,
    edges: Vec<DualEdge>,
    incident: Vec<Vec<u32>>,
}

impl DualGraph {
    pub fn new(node_count: usize, edges: Vec<DualEdge>) -> Self {
        let mut incident = vec![Vec::new(); node_count];
        for (i, e) in edges.iter().enumerate() {
            assert!(e.a != e.b, "dual self-loop at node {}", e.a);
            incident[e.a as usize].push(i as u32);
            incident[e.b as usize].push(i as u32);
        }
        debug_assert!(incident.iter().all(|inc| inc.len() <= 3));
        Self {
            node_count,
            edges,
            incident,
        }
    }

    /// Graph from bare node pairs, with edge slots assigned per node in order.
    /// For tests and oracles that need no geometry.
    pub fn from_pairs(node_count: usize, pairs: &[(u32, u32)]) -> Self {
        let mut used = vec![0u8; node_count];
        let edges = pairs
            .iter()
            .map(|&(a, b)| {
                let e = DualEdge {
                    a,
                    b,
                    slot_a: EdgeSlot(used[a as usize]),
                    slot_b: EdgeSlot(used[b as usize]),
                };
                used[a as usize] += 1;
                used[b as usize] += 1;
                assert!(
                    used[a as usize] <= 3 && used[b as usize] <= 3,
                    "node degree above 3"
                );
                e
            })
            .collect();
        Self::new(node_count, edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[DualEdge] {
        &self.edges
    }

    pub fn edge(&self, e: u32) -> &DualEdge {
        &self.edges[e as usize]
    }

    pub fn incident(&self, node: u32) -> &[u32] {
        &self.incident[node as usize]
    }
}

/// Dual graph of a localized meshlet under the mesh adjacency.
pub fn build_dual(meshlet: &Meshlet, adjacency: &AdjacencyMap) -> DualGraph {
    let local: HashMap<u32, u32> = meshlet
        .source_triangles
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, i as u32))
        .collect();
    let mut edges = Vec::new();
    for (i, &t) in meshlet.source_triangles.iter().enumerate() {
        for (k, n) in adjacency.neighbors(t as usize).iter().enumerate() {
            let Some(n) = n else { continue };
            let Some(&j) = local.get(&n.triangle) else {
                continue;
            };
            if (i as u32) < j {
                edges.push(DualEdge {
                    a: i as u32,
                    b: j,
                    slot_a: EdgeSlot(k as u8),
                    slot_b: n.slot,
                });
            }
        }
    }
    DualGraph::new(meshlet.triangle_count(), edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimality {
    ProvenOptimal,
    Heuristic,
    TimeoutBest,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("selection has {got} bits, graph has {expected} edges")]
    Length { got: usize, expected: usize },
    #[error("strip forks at node {node} ({degree} selected edges)")]
    Fork { node: u32, degree: usize },
    #[error("selected edges {edges:?} form a cycle")]
    Cycle { edges: Vec<u32> },
    #[error("strip of {edges} edges is too long for a flow certificate")]
    FlowInfeasible { edges: usize },
    #[error("flow certificate rejected: {0}")]
    Certificate(String),
    #[error("path nodes {a} and {b} are not adjacent")]
    NotAdjacent { a: u32, b: u32 },
}

/// A validated strip cover plus its path decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripSolution {
    pub selected: Vec<bool>,
    pub optimality: Optimality,
    pub paths: Vec<Vec<u32>>,
}

impl StripSolution {
    /// Validates the selection and extracts its strips.
    pub fn new(
        g: &DualGraph,
        selected: Vec<bool>,
        optimality: Optimality,
    ) -> Result<Self, Violation> {
        validate_solution(g, &selected)?;
        let paths = extract_paths(g, &selected);
        Ok(Self {
            selected,
            optimality,
            paths,
        })
    }

    pub fn selected_count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }

    pub fn restart_count(&self) -> usize {
        self.paths.len().saturating_sub(1)
    }
}

/// Checks the no-fork rule, acyclicity and existence of a flow certificate.
pub fn validate_solution(g: &DualGraph, selected: &[bool]) -> Result<FlowCertificate, Violation> {
    check_structure(g, selected)?;
    let paths = extract_paths(g, selected);
    let model = build_milp(g);
    let cert = FlowCertificate::construct(g, &paths, model.flow, model.epsilon)?;
    let x: Vec<f64> = selected
        .iter()
        .map(|&s| if s { 1.0 } else { 0.0 })
        .collect();
    model
        .check_assignment(&x, &cert.flat())
        .map_err(Violation::Certificate)?;
    Ok(cert)
}

/// Degree and cycle checks only.
pub(crate) fn check_structure(g: &DualGraph, selected: &[bool]) -> Result<(), Violation> {
    if selected.len() != g.edge_count() {
        return Err(Violation::Length {
            got: selected.len(),
            expected: g.edge_count(),
        });
    }
    for node in 0..g.node_count() as u32 {
        let degree = g
            .incident(node)
            .iter()
            .filter(|&&e| selected[e as usize])
            .count();
        if degree > 2 {
            return Err(Violation::Fork { node, degree });
        }
    }
    let mut uf = UnionFind::new(g.node_count());
    for (i, e) in g.edges().iter().enumerate() {
        if !selected[i] {
            continue;
        }
        if !uf.union(e.a, e.b) {
            return Err(Violation::Cycle {
                edges: cycle_through(g, selected, i as u32),
            });
        }
    }
    Ok(())
}

/// Edges of the cycle closed by `closing`, using only selected edges with a
/// lower index (those were already in the forest).
fn cycle_through(g: &DualGraph, selected: &[bool], closing: u32) -> Vec<u32> {
    let e = g.edge(closing);
    let mut prev: Vec<Option<u32>> = vec![None; g.node_count()];
    let mut seen = vec![false; g.node_count()];
    let mut queue = std::collections::VecDeque::from([e.a]);
    seen[e.a as usize] = true;
    while let Some(v) = queue.pop_front() {
        if v == e.b {
            break;
        }
        for &f in g.incident(v) {
            if f >= closing || !selected[f as usize] {
                continue;
            }
            let u = g.edge(f).other(v);
            if !seen[u as usize] {
                seen[u as usize] = true;
                prev[u as usize] = Some(f);
                queue.push_back(u);
            }
        }
    }
    let mut cycle = vec![closing];
    let mut v = e.b;
    while let Some(f) = prev[v as usize] {
        cycle.push(f);
        v = g.edge(f).other(v);
    }
    cycle.sort_unstable();
    cycle
}

/// Splits a validated selection into ordered node paths.
///
/// Each path starts at its lowest-id endpoint; paths are ordered by that
/// start node. Isolated nodes are length-1 paths.
pub fn extract_paths(g: &DualGraph, selected: &[bool]) -> Vec<Vec<u32>> {
    let degree = |v: u32| {
        g.incident(v)
            .iter()
            .filter(|&&e| selected[e as usize])
            .count()
    };
    let mut visited = vec![false; g.node_count()];
    let mut paths = Vec::new();
    for start in 0..g.node_count() as u32 {
        if visited[start as usize] || degree(start) > 1 {
            continue;
        }
        let mut path = vec![start];
        visited[start as usize] = true;
        let mut current = start;
        loop {
            let next = g
                .incident(current)
                .iter()
                .filter(|&&e| selected[e as usize])
                .map(|&e| g.edge(e).other(current))
                .find(|&u| !visited[u as usize]);
            match next {
                Some(u) => {
                    visited[u as usize] = true;
                    path.push(u);
                    current = u;
                }
                None => break,
            }
        }
        paths.push(path);
    }
    debug_assert!(visited.iter().all(|&v| v), "selection contains a cycle");
    paths
}

/// Selected-edge bits for a set of node paths.
pub fn selection_from_paths(g: &DualGraph, paths: &[Vec<u32>]) -> Result<Vec<bool>, Violation> {
    let mut selected = vec![false; g.edge_count()];
    for path in paths {
        for w in path.windows(2) {
            let e = g
                .incident(w[0])
                .iter()
                .copied()
                .find(|&e| g.edge(e).other(w[0]) == w[1] && !selected[e as usize])
                .ok_or(Violation::NotAdjacent { a: w[0], b: w[1] })?;
            selected[e as usize] = true;
        }
    }
    Ok(selected)
}
