//! Tunneling heuristic for strip covers.
//!
//! A tunnel is an alternating path that starts and ends at strip endpoints
//! (nodes with fewer than two selected edges), begins and ends with an
//! unselected edge, and alternates with selected edges in between. Flipping
//! it keeps interior degrees, adds one edge at each end, and so joins two
//! strips into one. Tunnels are found breadth-first from every endpoint;
//! flips that would close a cycle are rejected.

use std::collections::VecDeque;

use super::union_find::UnionFind;
use super::{check_structure, DualGraph, Optimality, StripSolution};

/// Heuristic strip cover: greedy seed followed by tunneling to a fixpoint.
pub fn solve_eta(g: &DualGraph) -> StripSolution {
    let mut selected = greedy(g);
    while tunnel_once(g, &mut selected) {}
    StripSolution::new(g, selected, Optimality::Heuristic)
        .expect("tunneling produced an invalid strip cover")
}

/// Adds edges in index order whenever both ends have room and no cycle forms.
/// Equivalent to flipping every length-1 tunnel in order.
fn greedy(g: &DualGraph) -> Vec<bool> {
    let mut selected = vec![false; g.edge_count()];
    let mut degree = vec![0u8; g.node_count()];
    let mut forest = UnionFind::new(g.node_count());
    for (i, e) in g.edges().iter().enumerate() {
        if degree[e.a as usize] < 2 && degree[e.b as usize] < 2 && forest.union(e.a, e.b) {
            selected[i] = true;
            degree[e.a as usize] += 1;
            degree[e.b as usize] += 1;
        }
    }
    selected
}

fn degrees(g: &DualGraph, selected: &[bool]) -> Vec<u8> {
    let mut degree = vec![0u8; g.node_count()];
    for (i, e) in g.edges().iter().enumerate() {
        if selected[i] {
            degree[e.a as usize] += 1;
            degree[e.b as usize] += 1;
        }
    }
    degree
}

/// Finds and applies one improving tunnel. Returns false at a fixpoint.
fn tunnel_once(g: &DualGraph, selected: &mut [bool]) -> bool {
    let n = g.node_count();
    let degree = degrees(g, selected);
    // State index: node * 2 + parity. Parity 0: the next edge must be
    // unselected; parity 1: arrived over an unselected edge.
    let mut prev: Vec<Option<(usize, u32)>> = vec![None; 2 * n];
    let mut seen = vec![false; 2 * n];
    let mut queue = VecDeque::new();

    for start in 0..n as u32 {
        if degree[start as usize] >= 2 {
            continue;
        }
        prev.iter_mut().for_each(|p| *p = None);
        seen.iter_mut().for_each(|s| *s = false);
        queue.clear();
        let root = start as usize * 2;
        seen[root] = true;
        queue.push_back(root);
        while let Some(state) = queue.pop_front() {
            let node = (state / 2) as u32;
            let parity = state % 2;
            for &e in g.incident(node) {
                if selected[e as usize] != (parity == 1) {
                    continue;
                }
                let next_node = g.edge(e).other(node);
                let next = next_node as usize * 2 + (1 - parity);
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                prev[next] = Some((state, e));
                if parity == 0 && next_node != start && degree[next_node as usize] < 2 {
                    let path = trace(&prev, next);
                    if try_flip(g, selected, &path) {
                        return true;
                    }
                }
                queue.push_back(next);
            }
        }
    }
    false
}

fn trace(prev: &[Option<(usize, u32)>], mut state: usize) -> Vec<u32> {
    let mut edges = Vec::new();
    while let Some((p, e)) = prev[state] {
        edges.push(e);
        state = p;
    }
    edges
}

fn try_flip(g: &DualGraph, selected: &mut [bool], path: &[u32]) -> bool {
    let mut sorted = path.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    for &e in path {
        selected[e as usize] = !selected[e as usize];
    }
    if check_structure(g, selected).is_ok() {
        return true;
    }
    for &e in path {
        selected[e as usize] = !selected[e as usize];
    }
    false
}
