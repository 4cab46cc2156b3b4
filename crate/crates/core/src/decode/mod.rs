//! Bijections between enriched trees and concrete structures.

mod dissection;
mod graph;
mod ktree;
pub mod maps;
mod outerplanar;
mod planar;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dissection::{
    dissection_from_enriched, dissection_from_leaf_tree, enriched_from_dissection, leaf_tree_from_dissection,
    polygon_of_block, schroeder_from_enriched, Dissection, Polygon,
};
pub use graph::{biconnected_components, graph_from_enriched, graph_to_enriched};
pub use ktree::{is_ktree, ktree_from_enriched, KTree};
pub use outerplanar::outerplanar_from_enriched;
pub use planar::planarmap_from_enriched;

/// Simple graph on `0..n`, optionally rooted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledGraph {
    pub n: usize,
    pub root: Option<u32>,
    pub edges: Vec<(u32, u32)>,
}

impl LabelledGraph {
    /// Edges normalised to `a < b`, sorted and deduplicated.
    pub fn new(n: usize, root: Option<u32>, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b || a as usize >= n || b as usize >= n {
                return Err(Error::InvalidStructure(format!("bad edge ({a}, {b}) on {n} vertices")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        if root.is_some_and(|r| r as usize >= n) {
            return Err(Error::InvalidStructure("root out of range".into()));
        }
        Ok(Self { n, root, edges: set.into_iter().collect() })
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
        }
        adj
    }

    pub fn degree(&self, v: u32) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    count += 1;
                    stack.push(u as usize);
                }
            }
        }
        count == self.n
    }
}

/// Rooted combinatorial map on half-edges `0..H`: `alpha` pairs half-edges
/// into edges and `sigma` is the counterclockwise rotation at each vertex.
/// The vertex map has `H = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanarMap {
    pub alpha: Vec<u32>,
    pub sigma: Vec<u32>,
    pub root: u32,
}

fn cycles(perm: &[u32]) -> Vec<Vec<u32>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            c.push(x as u32);
            x = perm[x] as usize;
        }
        out.push(c);
    }
    out
}

impl PlanarMap {
    pub fn vertex_map() -> Self {
        Self { alpha: Vec::new(), sigma: Vec::new(), root: 0 }
    }

    pub fn half_edges(&self) -> usize {
        self.alpha.len()
    }

    pub fn edge_count(&self) -> usize {
        self.alpha.len() / 2
    }

    /// Face permutation `φ = σ ∘ α`.
    pub fn phi(&self) -> Vec<u32> {
        self.alpha.iter().map(|&a| self.sigma[a as usize]).collect()
    }

    pub fn vertices(&self) -> Vec<Vec<u32>> {
        if self.alpha.is_empty() {
            return vec![Vec::new()];
        }
        cycles(&self.sigma)
    }

    pub fn faces(&self) -> Vec<Vec<u32>> {
        if self.alpha.is_empty() {
            return vec![Vec::new()];
        }
        cycles(&self.phi())
    }

    /// `vertex_of[h]` indexes [`PlanarMap::vertices`].
    pub fn vertex_of(&self) -> Vec<u32> {
        let mut v = vec![0u32; self.half_edges()];
        for (i, c) in self.vertices().iter().enumerate() {
            for &h in c {
                v[h as usize] = i as u32;
            }
        }
        v
    }

    pub fn face_degrees(&self) -> Vec<usize> {
        self.faces().iter().map(|c| c.len()).collect()
    }

    /// Index of the face containing half-edge `h`.
    pub fn face_of(&self) -> Vec<u32> {
        let mut f = vec![0u32; self.half_edges()];
        for (i, c) in self.faces().iter().enumerate() {
            for &h in c {
                f[h as usize] = i as u32;
            }
        }
        f
    }

    fn is_transitive(&self) -> bool {
        let h = self.half_edges();
        if h == 0 {
            return true;
        }
        let mut seen = vec![false; h];
        let mut stack = vec![self.root as usize];
        seen[self.root as usize] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for y in [self.alpha[x] as usize, self.sigma[x] as usize] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == h
    }

    /// Permutation checks, connectivity and Euler's formula `V - E + F = 2`.
    pub fn validate(&self) -> Result<()> {
        let h = self.half_edges();
        let bad = |m: &str| Err(Error::InvalidStructure(m.to_string()));
        if self.sigma.len() != h {
            return bad("sigma and alpha differ in length");
        }
        if h == 0 {
            return Ok(());
        }
        if self.root as usize >= h {
            return bad("root out of range");
        }
        let mut hit = vec![false; h];
        for &s in &self.sigma {
            if s as usize >= h || std::mem::replace(&mut hit[s as usize], true) {
                return bad("sigma is not a permutation");
            }
        }
        for (x, &a) in self.alpha.iter().enumerate() {
            if a as usize >= h || a as usize == x || self.alpha[a as usize] as usize != x {
                return bad("alpha is not a fixed-point-free involution");
            }
        }
        if !self.is_transitive() {
            return bad("map is not connected");
        }
        if !self.is_planar() {
            return bad("Euler characteristic is not 2");
        }
        Ok(())
    }

    pub fn is_planar(&self) -> bool {
        let v = self.vertices().len() as i64;
        let e = self.edge_count() as i64;
        let f = self.faces().len() as i64;
        v - e + f == 2
    }

    /// Underlying multigraph on vertex indices (loops and parallel edges kept).
    pub fn multigraph(&self) -> (usize, Vec<(u32, u32)>) {
        let vo = self.vertex_of();
        let edges = (0..self.half_edges())
            .filter(|&x| x < self.alpha[x] as usize)
            .map(|x| (vo[x], vo[self.alpha[x] as usize]))
            .collect();
        (self.vertices().len(), edges)
    }

    /// Build a map from per-vertex counterclockwise neighbour lists of a
    /// simple graph. `root` is the directed edge `(from, to)`.
    pub fn from_rotations(rot: &[Vec<u32>], root: Option<(u32, u32)>) -> Result<Self> {
        let mut offset = vec![0usize; rot.len() + 1];
        for (v, l) in rot.iter().enumerate() {
            offset[v + 1] = offset[v] + l.len();
        }
        let h = offset[rot.len()];
        if h == 0 {
            return Ok(Self::vertex_map());
        }
        let pos = |v: u32, u: u32| -> Result<usize> {
            rot[v as usize]
                .iter()
                .position(|&x| x == u)
                .map(|i| offset[v as usize] + i)
                .ok_or_else(|| Error::InvalidStructure(format!("rotation at {u} lacks {v}")))
        };
        let mut alpha = vec![0u32; h];
        let mut sigma = vec![0u32; h];
        for (v, l) in rot.iter().enumerate() {
            for (i, &u) in l.iter().enumerate() {
                let x = offset[v] + i;
                sigma[x] = (offset[v] + (i + 1) % l.len()) as u32;
                alpha[x] = pos(u, v as u32)? as u32;
            }
        }
        let root = match root {
            Some((a, b)) => pos(a, b)? as u32,
            None => 0,
        };
        Ok(Self { alpha, sigma, root })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_map() {
        let rot = vec![vec![1, 2], vec![2, 0], vec![0, 1]];
        let m = PlanarMap::from_rotations(&rot, Some((0, 1))).unwrap();
        m.validate().unwrap();
        assert_eq!(m.face_degrees(), vec![3, 3]);
        assert_eq!(m.vertices().len(), 3);
    }

    #[test]
    fn graph_normalises_edges() {
        let g = LabelledGraph::new(3, Some(0), [(1, 0), (0, 1), (2, 1)]).unwrap();
        assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
        assert!(g.is_connected());
        assert!(LabelledGraph::new(2, None, [(0, 0)]).is_err());
    }
}
