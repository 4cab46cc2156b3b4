//! Front-rooted k-trees. A hedron glued to a front `F` adds one vertex `x`;
//! the children listed in its `i`-th set are glued to `F` with the `i`-th
//! front vertex replaced by `x`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::LabelledGraph;
use crate::enrich::EnrichedTree;
use crate::error::{Error, Result};
use crate::species::Structure;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KTree {
    pub k: usize,
    pub n_vertices: usize,
    /// Each hedron as its front followed by its new vertex; the root front is `0..k`.
    pub hedra: Vec<Vec<u32>>,
}

impl KTree {
    /// Number of hedra, the size of the k-tree.
    pub fn hedron_count(&self) -> usize {
        self.hedra.len()
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let k = self.k as u32;
        let mut out: Vec<(u32, u32)> = (0..k).flat_map(|a| ((a + 1)..k).map(move |b| (a, b))).collect();
        for h in &self.hedra {
            let x = *h.last().expect("hedron");
            out.extend(h[..self.k].iter().map(|&f| (f, x)));
        }
        out
    }

    pub fn to_graph(&self) -> LabelledGraph {
        LabelledGraph::new(self.n_vertices, Some(0), self.edges()).expect("k-tree edges are valid")
    }

    /// Edge count `binom(k, 2) + n k` and a perfect elimination order ending
    /// in a `k`-clique.
    pub fn validate(&self) -> Result<()> {
        let g = self.to_graph();
        let k = self.k;
        let n = self.hedra.len();
        let bad = |m: &str| Err(Error::InvalidStructure(m.to_string()));
        if self.n_vertices != k + n {
            return bad("vertex count differs from k + hedra");
        }
        if g.edges.len() != k * (k - 1) / 2 + n * k {
            return bad("edge count of a k-tree is binom(k, 2) + n k");
        }
        is_ktree(&g, k).then_some(()).ok_or(Error::InvalidStructure("no perfect elimination".into()))
    }
}

/// Greedy elimination of simplicial vertices of degree `k`.
pub fn is_ktree(g: &LabelledGraph, k: usize) -> bool {
    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); g.n];
    for &(a, b) in &g.edges {
        adj[a as usize].insert(b);
        adj[b as usize].insert(a);
    }
    let simplicial = |adj: &[BTreeSet<u32>], v: usize| {
        adj[v].len() == k
            && adj[v].iter().all(|&a| adj[v].iter().all(|&b| a == b || adj[a as usize].contains(&b)))
    };
    let mut alive = vec![true; g.n];
    let mut left = g.n;
    let mut queue: Vec<usize> = (0..g.n).filter(|&v| simplicial(&adj, v)).collect();
    while left > k {
        let Some(v) = queue.pop() else { return false };
        if !alive[v] || !simplicial(&adj, v) {
            continue;
        }
        alive[v] = false;
        left -= 1;
        let nb: Vec<u32> = adj[v].iter().copied().collect();
        for &u in &nb {
            adj[u as usize].remove(&(v as u32));
        }
        adj[v].clear();
        queue.extend(nb.iter().map(|&u| u as usize).filter(|&u| simplicial(&adj, u)));
    }
    let rest: Vec<usize> = (0..g.n).filter(|&v| alive[v]).collect();
    rest.iter().all(|&v| adj[v].len() == k - 1)
}

/// The sets of a `SET^k` structure, front by front.
fn fronts(s: &Structure, k: usize) -> Result<Vec<&Vec<u32>>> {
    let mut out = Vec::with_capacity(k);
    let mut cur = s;
    for _ in 1..k {
        let Structure::Pair(a, b) = cur else {
            return Err(Error::InvalidStructure("expected a k-fold product".into()));
        };
        let Structure::Set(x) = &**a else {
            return Err(Error::InvalidStructure("expected sets".into()));
        };
        out.push(x);
        cur = b;
    }
    let Structure::Set(x) = cur else {
        return Err(Error::InvalidStructure("expected sets".into()));
    };
    out.push(x);
    Ok(out)
}

/// A forest of hedron trees glued to the root front `0..k`. Hedra are
/// numbered in preorder across the forest and hedron `h` adds vertex `k + h`.
pub fn ktree_from_enriched(forest: &[EnrichedTree], k: usize) -> Result<KTree> {
    if k == 0 {
        return Err(Error::InvalidStructure("k-trees need k ≥ 1".into()));
    }
    let mut hedra = Vec::new();
    let mut base = 0usize;
    for e in forest {
        let ch = e.children();
        let mut front: Vec<Vec<u32>> = vec![Vec::new(); e.len()];
        if !e.is_empty() {
            front[0] = (0..k as u32).collect();
        }
        for v in 0..e.len() {
            let x = (k + base + v) as u32;
            let s = e.deco[v].as_ref().ok_or_else(|| Error::InvalidStructure(format!("hedron {v} is undecorated")))?;
            for (i, set) in fronts(s, k)?.into_iter().enumerate() {
                for &a in set {
                    let c = e.child_of_atom(&ch, v, a);
                    let mut f = front[v].clone();
                    f[i] = x;
                    front[c] = f;
                }
            }
            let mut h = front[v].clone();
            h.push(x);
            hedra.push(h);
        }
        base += e.len();
    }
    Ok(KTree { k, n_vertices: k + hedra.len(), hedra })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treegen::PlaneTree;

    fn pair(a: Vec<u32>, b: Vec<u32>) -> Structure {
        Structure::Pair(Box::new(Structure::Set(a)), Box::new(Structure::Set(b)))
    }

    #[test]
    fn two_tree_fan_and_strip() {
        // Root hedron with one child on each front.
        let e = EnrichedTree {
            tree: PlaneTree::new(vec![2, 0, 0]).unwrap(),
            deco: vec![Some(pair(vec![0], vec![1])), Some(pair(vec![], vec![])), Some(pair(vec![], vec![]))],
            matching: vec![vec![0, 1], vec![], vec![]],
        };
        let t = ktree_from_enriched(&[e], 2).unwrap();
        assert_eq!(t.hedra, vec![vec![0, 1, 2], vec![2, 1, 3], vec![0, 2, 4]]);
        t.validate().unwrap();
        assert_eq!(t.to_graph().edges.len(), 1 + 3 * 2);
    }

    #[test]
    fn cycle_is_not_a_two_tree() {
        let g = LabelledGraph::new(4, None, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(!is_ktree(&g, 2));
        let g = LabelledGraph::new(4, None, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        assert!(is_ktree(&g, 2));
    }

    #[test]
    fn forest_of_one_trees_is_a_tree() {
        let leaf = || EnrichedTree {
            tree: PlaneTree::single(),
            deco: vec![Some(Structure::Set(vec![]))],
            matching: vec![vec![]],
        };
        let t = ktree_from_enriched(&[leaf(), leaf(), leaf()], 1).unwrap();
        t.validate().unwrap();
        assert_eq!(t.to_graph().degree(0), 3);
    }
}
