//! Exact maximum strip cover by combinatorial branch-and-bound.
//!
//! Branches on dual edges (take / drop). Taking an edge saturates nodes that
//! reach degree two and drops every undecided edge that would close a cycle.
//! The bound counts strip endpoints: a strip cover with `p` strips has
//! exactly `2p` degree deficits, and every connected piece of the still
//! reachable graph holds at least one strip.

use std::time::{Duration, Instant};

use super::union_find::UnionFind;
use super::{solve_eta, DualGraph, Optimality, StripSolution};

pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(10);

const UNDECIDED: i8 = -1;
const DROPPED: i8 = 0;
const TAKEN: i8 = 1;

#[derive(Clone)]
struct State {
    status: Vec<i8>,
    degree: Vec<u8>,
    /// Undecided incident edges per node.
    open: Vec<u8>,
    forest: UnionFind,
    taken: usize,
}

impl State {
    fn new(g: &DualGraph) -> Self {
        Self {
            status: vec![UNDECIDED; g.edge_count()],
            degree: vec![0; g.node_count()],
            open: (0..g.node_count() as u32)
                .map(|v| g.incident(v).len() as u8)
                .collect(),
            forest: UnionFind::new(g.node_count()),
            taken: 0,
        }
    }

    fn drop_edge(&mut self, g: &DualGraph, e: u32) {
        debug_assert_eq!(self.status[e as usize], UNDECIDED);
        self.status[e as usize] = DROPPED;
        let edge = g.edge(e);
        self.open[edge.a as usize] -= 1;
        self.open[edge.b as usize] -= 1;
    }

    fn take_edge(&mut self, g: &DualGraph, e: u32) {
        debug_assert_eq!(self.status[e as usize], UNDECIDED);
        self.status[e as usize] = TAKEN;
        let edge = *g.edge(e);
        self.open[edge.a as usize] -= 1;
        self.open[edge.b as usize] -= 1;
        self.degree[edge.a as usize] += 1;
        self.degree[edge.b as usize] += 1;
        self.forest.union(edge.a, edge.b);
        self.taken += 1;
        for v in [edge.a, edge.b] {
            if self.degree[v as usize] == 2 {
                for &f in g.incident(v) {
                    if self.status[f as usize] == UNDECIDED {
                        self.drop_edge(g, f);
                    }
                }
            }
        }
        for f in 0..g.edge_count() as u32 {
            if self.status[f as usize] != UNDECIDED {
                continue;
            }
            let fe = g.edge(f);
            if self.forest.find(fe.a) == self.forest.find(fe.b) {
                self.drop_edge(g, f);
            }
        }
    }

    /// Upper bound on the number of edges any completion can reach.
    fn upper_bound(&self, g: &DualGraph) -> usize {
        let n = g.node_count();
        let mut pieces = UnionFind::new(n);
        for (i, e) in g.edges().iter().enumerate() {
            if self.status[i] != DROPPED {
                pieces.union(e.a, e.b);
            }
        }
        let mut deficit = vec![0usize; n];
        let mut present = vec![false; n];
        for v in 0..n as u32 {
            let reach = (self.degree[v as usize] + self.open[v as usize]).min(2) as usize;
            let root = pieces.find(v) as usize;
            deficit[root] += 2 - reach;
            present[root] = true;
        }
        let min_strips: usize = (0..n)
            .filter(|&r| present[r])
            .map(|r| deficit[r].div_ceil(2).max(1))
            .sum();
        n - min_strips
    }

    fn branch_edge(&self, g: &DualGraph) -> Option<u32> {
        // Most constrained node first: fewest undecided edges, lowest id.
        let node = (0..g.node_count() as u32)
            .filter(|&v| self.open[v as usize] > 0)
            .min_by_key(|&v| (self.open[v as usize], v))?;
        g.incident(node)
            .iter()
            .copied()
            .filter(|&e| self.status[e as usize] == UNDECIDED)
            .min()
    }
}

struct Search<'a> {
    g: &'a DualGraph,
    best: Vec<bool>,
    best_count: usize,
    deadline: Instant,
    visited: u64,
    timed_out: bool,
}

impl Search<'_> {
    fn run(&mut self, state: State) {
        if self.timed_out {
            return;
        }
        self.visited += 1;
        if self.visited.is_multiple_of(256) && Instant::now() >= self.deadline {
            self.timed_out = true;
            return;
        }
        if state.upper_bound(self.g) <= self.best_count {
            return;
        }
        let Some(e) = state.branch_edge(self.g) else {
            // Leaf: bound exceeded best, so this is an improvement.
            self.best_count = state.taken;
            self.best = state.status.iter().map(|&s| s == TAKEN).collect();
            return;
        };
        let mut take = state.clone();
        take.take_edge(self.g, e);
        self.run(take);
        let mut drop = state;
        drop.drop_edge(self.g, e);
        self.run(drop);
    }
}

/// Maximum strip cover, or the best cover found within `budget`.
///
/// The tunneling heuristic seeds the incumbent, so a timeout never returns
/// anything worse than [`solve_eta`].
pub fn solve_exact(g: &DualGraph, budget: Duration) -> StripSolution {
    let seed = solve_eta(g);
    let best_count = seed.selected_count();
    let mut search = Search {
        g,
        best: seed.selected,
        best_count,
        deadline: Instant::now() + budget,
        visited: 0,
        timed_out: false,
    };
    search.run(State::new(g));
    let optimality = if search.timed_out {
        Optimality::TimeoutBest
    } else {
        Optimality::ProvenOptimal
    };
    StripSolution::new(g, search.best, optimality)
        .expect("branch-and-bound produced an invalid strip cover")
}

#[cfg(test)]
mod tests {
    use super::super::tests::k4;
    use super::*;

    #[test]
    fn k4_is_one_strip() {
        let s = solve_exact(&k4(), DEFAULT_TIME_BUDGET);
        assert_eq!(s.selected_count(), 3);
        assert_eq!(s.restart_count(), 0);
        assert_eq!(s.optimality, Optimality::ProvenOptimal);
        assert_eq!(s.paths.len(), 1);
        assert_eq!(s.paths[0].len(), 4);
    }

    #[test]
    fn six_cycle_drops_one_edge() {
        let pairs: Vec<(u32, u32)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let g = DualGraph::from_pairs(6, &pairs);
        let s = solve_exact(&g, DEFAULT_TIME_BUDGET);
        assert_eq!(s.selected_count(), 5);
        assert_eq!(s.restart_count(), 0);
    }

    #[test]
    fn two_node_path() {
        let g = DualGraph::from_pairs(2, &[(0, 1)]);
        assert_eq!(solve_exact(&g, DEFAULT_TIME_BUDGET).selected_count(), 1);
    }

    #[test]
    fn star_needs_restart() {
        // Claw: center 0 with three leaves. Only two leaves fit one strip.
        let g = DualGraph::from_pairs(4, &[(0, 1), (0, 2), (0, 3)]);
        let s = solve_exact(&g, DEFAULT_TIME_BUDGET);
        assert_eq!(s.restart_count(), 1);
    }

    #[test]
    fn zero_budget_still_returns_valid_cover() {
        let mesh = crate::synth::grid_random(10, 10, 4);
        let limits = crate::meshlet::MeshletLimits::default();
        let m = crate::meshlet::localize(&mesh, &(0..200).collect::<Vec<_>>(), &limits).unwrap();
        let g = super::super::build_dual(&m, &mesh.build_adjacency());
        let s = solve_exact(&g, Duration::ZERO);
        assert!(s.restart_count() <= solve_eta(&g).restart_count());
    }
}
