//! Exhaustive strip-cover oracle for small dual graphs.

use super::union_find::UnionFind;
use super::DualGraph;
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX_EDGES: usize = 20;

/// Minimum restart count over every fork-free, acyclic edge subset.
///
/// Enumerates all `2^|E|` subsets; shares no code with the solvers beyond
/// the union-find.
pub fn brute_force_min_restarts(g: &DualGraph) -> Result<usize> {
    let m = g.edge_count();
    if m > BRUTE_FORCE_MAX_EDGES {
        return Err(Error::GraphTooLarge(m));
    }
    let n = g.node_count();
    if n == 0 {
        return Ok(0);
    }
    let incident: Vec<u32> = (0..n as u32)
        .map(|v| g.incident(v).iter().fold(0u32, |acc, &e| acc | (1 << e)))
        .collect();
    let mut best = 0u32;
    for mask in 0u32..(1u32 << m) {
        let count = mask.count_ones();
        if count <= best {
            continue;
        }
        if incident.iter().any(|&inc| (mask & inc).count_ones() > 2) {
            continue;
        }
        let mut uf = UnionFind::new(n);
        let acyclic = (0..m).filter(|&e| mask & (1 << e) != 0).all(|e| {
            let edge = g.edge(e as u32);
            uf.union(edge.a, edge.b)
        });
        if acyclic {
            best = count;
        }
    }
    Ok(n - best as usize - 1)
}

#[cfg(test)]
mod tests {
    use super::super::tests::k4;
    use super::*;

    #[test]
    fn k4_needs_no_restart() {
        assert_eq!(brute_force_min_restarts(&k4()).unwrap(), 0);
    }

    #[test]
    fn two_components_force_one_restart() {
        let g = DualGraph::from_pairs(4, &[(0, 1), (2, 3)]);
        assert_eq!(brute_force_min_restarts(&g).unwrap(), 1);
    }

    #[test]
    fn single_node() {
        assert_eq!(
            brute_force_min_restarts(&DualGraph::from_pairs(1, &[])).unwrap(),
            0
        );
    }

    #[test]
    fn six_cycle() {
        let pairs: Vec<(u32, u32)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        assert_eq!(
            brute_force_min_restarts(&DualGraph::from_pairs(6, &pairs)).unwrap(),
            0
        );
    }

    #[test]
    fn too_large_is_an_error() {
        let pairs: Vec<(u32, u32)> = (0..21).map(|i| (i, i + 1)).collect();
        let g = DualGraph::from_pairs(22, &pairs);
        assert!(matches!(
            brute_force_min_restarts(&g),
            Err(Error::GraphTooLarge(21))
        ));
    }
}
