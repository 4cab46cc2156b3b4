//! Rooted neighbourhoods `V_k` (graph distance) and `U_k` (block distance).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::canon::{canonical_code_capped, CanonicalCode, CANON_CAP};
use crate::decode::{biconnected_components, LabelledGraph, PlanarMap};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    /// Number of edges on a shortest path.
    Graph,
    /// Least number of blocks covering a path.
    Block,
}

/// Distances from `root`, `usize::MAX` when unreachable.
pub fn distances(adj: &[Vec<u32>], root: u32, metric: Metric) -> Vec<usize> {
    let n = adj.len();
    let mut d = vec![usize::MAX; n];
    d[root as usize] = 0;
    match metric {
        Metric::Graph => {
            let mut q = VecDeque::from([root]);
            while let Some(v) = q.pop_front() {
                for &u in &adj[v as usize] {
                    if d[u as usize] == usize::MAX {
                        d[u as usize] = d[v as usize] + 1;
                        q.push_back(u);
                    }
                }
            }
        }
        Metric::Block => {
            let blocks = biconnected_components(adj);
            let mut of: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (b, vs) in blocks.iter().enumerate() {
                for &v in vs {
                    of[v as usize].push(b);
                }
            }
            // BFS on the vertex-block incidence graph; entering a block costs one.
            let mut seen = vec![false; blocks.len()];
            let mut q = VecDeque::from([root]);
            while let Some(v) = q.pop_front() {
                for &b in &of[v as usize] {
                    if seen[b] {
                        continue;
                    }
                    seen[b] = true;
                    for &u in &blocks[b] {
                        if d[u as usize] == usize::MAX {
                            d[u as usize] = d[v as usize] + 1;
                            q.push_back(u);
                        }
                    }
                }
            }
        }
    }
    d
}

/// The induced subgraph on the vertices within distance `k` of `root`,
/// relabelled in BFS order so that the root is vertex 0.
pub fn ball_graph(g: &LabelledGraph, root: u32, k: usize, metric: Metric) -> LabelledGraph {
    let adj = g.adjacency();
    ball_from_adjacency(&adj, root, k, metric)
}

fn ball_from_adjacency(adj: &[Vec<u32>], root: u32, k: usize, metric: Metric) -> LabelledGraph {
    let d = distances(adj, root, metric);
    let mut inside: Vec<u32> = (0..adj.len() as u32).filter(|&v| d[v as usize] <= k).collect();
    inside.sort_by_key(|&v| (d[v as usize], v));
    let mut idx = vec![u32::MAX; adj.len()];
    for (i, &v) in inside.iter().enumerate() {
        idx[v as usize] = i as u32;
    }
    let mut edges = Vec::new();
    for &v in &inside {
        for &u in &adj[v as usize] {
            if v < u && idx[u as usize] != u32::MAX {
                edges.push((idx[v as usize], idx[u as usize]));
            }
        }
    }
    LabelledGraph::new(inside.len(), Some(0), edges).expect("induced subgraph")
}

/// Canonical code of the rooted ball of radius `k` around `root`.
pub fn ball(g: &LabelledGraph, root: u32, k: usize, metric: Metric) -> Result<CanonicalCode> {
    ball_capped(g, root, k, metric, CANON_CAP)
}

pub fn ball_capped(g: &LabelledGraph, root: u32, k: usize, metric: Metric, cap: usize) -> Result<CanonicalCode> {
    let b = ball_graph(g, root, k, metric);
    canonical_code_capped(&b, 0, cap)
}

/// Simple graph underlying a map, rooted at the origin of the root half-edge.
pub fn map_graph(m: &PlanarMap) -> LabelledGraph {
    let (n, edges) = m.multigraph();
    let root = if m.half_edges() == 0 { 0 } else { m.vertex_of()[m.root as usize] };
    LabelledGraph::new(n, Some(root), edges.into_iter().filter(|&(a, b)| a != b)).expect("map vertices")
}

/// [`ball`] for the simple graph underlying a map.
pub fn map_ball(m: &PlanarMap, root: u32, k: usize, metric: Metric) -> Result<CanonicalCode> {
    ball(&map_graph(m), root, k, metric)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u32, root: u32) -> LabelledGraph {
        LabelledGraph::new(n as usize, Some(root), (1..n).map(|v| (v - 1, v))).unwrap()
    }

    #[test]
    fn radius_zero_is_one_vertex() {
        let g = path(5, 2);
        let single = LabelledGraph::new(1, Some(0), []).unwrap();
        let want = canonical_code_capped(&single, 0, 1).unwrap();
        assert_eq!(ball(&g, 2, 0, Metric::Graph).unwrap(), want);
        assert_eq!(ball(&g, 2, 0, Metric::Block).unwrap(), want);
    }

    #[test]
    fn triangle_radius_one() {
        let t = LabelledGraph::new(3, Some(0), [(0, 1), (1, 2), (0, 2)]).unwrap();
        for r in 0..3 {
            assert_eq!(ball_graph(&t, r, 1, Metric::Graph).edges.len(), 3);
            assert_eq!(ball(&t, r, 1, Metric::Graph).unwrap(), ball(&t, 0, 1, Metric::Graph).unwrap());
        }
    }

    #[test]
    fn block_ball_of_a_path_centre() {
        let g = path(5, 2);
        let b = ball_graph(&g, 2, 1, Metric::Block);
        assert_eq!(b.n, 3);
        assert_eq!(ball(&g, 2, 1, Metric::Block).unwrap(), ball(&path(3, 1), 1, 1, Metric::Graph).unwrap());
    }

    #[test]
    fn block_distance_crosses_a_cycle_in_one_step() {
        // A 6-cycle with a pendant edge at vertex 3.
        let g = LabelledGraph::new(7, Some(0), [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (3, 6)]).unwrap();
        let d = distances(&g.adjacency(), 0, Metric::Block);
        assert_eq!(d, vec![0, 1, 1, 1, 1, 1, 2]);
        let d = distances(&g.adjacency(), 0, Metric::Graph);
        assert_eq!(d, vec![0, 1, 2, 3, 2, 1, 4]);
    }

    #[test]
    fn oversized_ball_is_an_error() {
        let star = LabelledGraph::new(60, Some(0), (1..60).map(|v| (0, v))).unwrap();
        let err = ball(&star, 0, 1, Metric::Graph).unwrap_err();
        assert!(err.to_string().contains("ball too large"));
    }
}
