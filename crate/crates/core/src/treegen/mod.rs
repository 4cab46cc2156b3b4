//! Simply generated trees: exact samplers, truncated limit trees and
//! depth-first-search profiles.

mod backends;
mod leaf;
mod limits;
mod offspring;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use backends::{sample_sgt, Backend, SgtSampler};
pub use leaf::{
    leaf_weights, parts_from_schroeder, sample_leaf_tree, schroeder_from_parts, LeafTreeSampler, SchroederTree,
};
pub use limits::{
    condensation_threshold, root_degree_law, sample_condensation, sample_kesten, sample_tstar, DEFAULT_WINDOW,
};
pub use offspring::OffspringSampler;

/// Plane tree given by its outdegrees in depth-first preorder.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlaneTree {
    pub outdeg: Vec<usize>,
}

impl PlaneTree {
    pub fn new(outdeg: Vec<usize>) -> Result<Self> {
        if !is_lukasiewicz(&outdeg) {
            return Err(Error::InvalidStructure("not a Łukasiewicz sequence".into()));
        }
        Ok(Self { outdeg })
    }

    pub fn single() -> Self {
        Self { outdeg: vec![0] }
    }

    pub fn len(&self) -> usize {
        self.outdeg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outdeg.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        is_lukasiewicz(&self.outdeg)
    }

    /// Children of every vertex, in order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let n = self.outdeg.len();
        let mut ch: Vec<Vec<usize>> = self.outdeg.iter().map(|&d| Vec::with_capacity(d)).collect();
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..n {
            if let Some(&p) = stack.last() {
                ch[p].push(i);
                if ch[p].len() == self.outdeg[p] {
                    stack.pop();
                }
            }
            if self.outdeg[i] > 0 {
                stack.push(i);
            }
        }
        ch
    }

    /// Parent of every vertex (`usize::MAX` for the root).
    pub fn parents(&self) -> Vec<usize> {
        let mut par = vec![usize::MAX; self.outdeg.len()];
        for (v, c) in self.children().iter().enumerate() {
            for &u in c {
                par[u] = v;
            }
        }
        par
    }

    pub fn depths(&self) -> Vec<usize> {
        let par = self.parents();
        let mut d = vec![0usize; par.len()];
        for v in 1..par.len() {
            d[v] = d[par[v]] + 1;
        }
        d
    }

    pub fn leaves(&self) -> usize {
        self.outdeg.iter().filter(|&&d| d == 0).count()
    }

    /// Preorder outdegrees of a tree given by child lists rooted at `root`.
    pub fn from_children(children: &[Vec<usize>], root: usize) -> (Self, Vec<usize>) {
        let mut outdeg = Vec::with_capacity(children.len());
        let mut order = Vec::with_capacity(children.len());
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            outdeg.push(children[v].len());
            order.push(v);
            stack.extend(children[v].iter().rev());
        }
        (Self { outdeg }, order)
    }
}

/// Partial sums of `d_i - 1` stay ≥ 0 before the end and reach −1 exactly at the end.
pub fn is_lukasiewicz(outdeg: &[usize]) -> bool {
    if outdeg.is_empty() {
        return false;
    }
    let mut s: i64 = 0;
    for (i, &d) in outdeg.iter().enumerate() {
        s += d as i64 - 1;
        if s < 0 && i + 1 < outdeg.len() {
            return false;
        }
    }
    s == -1
}

/// Every plane tree with `n` vertices, in lexicographic order of the
/// outdegree sequence.
pub fn all_plane_trees(n: usize) -> Vec<PlaneTree> {
    fn go(prefix: &mut Vec<usize>, open: usize, n: usize, out: &mut Vec<PlaneTree>) {
        if prefix.len() == n {
            if open == 0 {
                out.push(PlaneTree { outdeg: prefix.clone() });
            }
            return;
        }
        if open == 0 {
            return;
        }
        // Each remaining vertex closes at most one slot.
        for d in 0..=(n - prefix.len()).saturating_sub(open) {
            prefix.push(d);
            go(prefix, open + d - 1, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), 1, n, &mut out);
    out
}

/// Start of the unique rotation of `inc` (steps ≥ −1, total −1) whose
/// proper prefix sums are all ≥ 0: the position after the first minimum.
pub fn cycle_shift(inc: &[i64]) -> usize {
    let mut s = 0i64;
    let mut best = i64::MAX;
    let mut at = 0;
    for (i, &x) in inc.iter().enumerate() {
        s += x;
        if s < best {
            best = s;
            at = i;
        }
    }
    (at + 1) % inc.len().max(1)
}

/// Tree with possibly infinite vertices, a distinguished spine and an
/// optional pointed vertex. Infinite vertices have `window` materialised
/// children; vertices at the truncation depth are flagged and childless.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkedTree {
    pub tree: PlaneTree,
    pub infinite: Vec<bool>,
    pub truncated: Vec<bool>,
    pub spine: Vec<usize>,
    pub window: usize,
    pub pointer: Option<usize>,
}

/// Depth-first queue, level profile, height and diameter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DfsProfile {
    pub queue: Vec<i64>,
    pub levels: Vec<usize>,
    pub height: usize,
    pub diameter: usize,
}

pub fn dfs_profile(t: &PlaneTree) -> DfsProfile {
    let n = t.len();
    let mut queue = Vec::with_capacity(n + 1);
    queue.push(1i64);
    for i in 1..=n {
        queue.push(queue[i - 1] - 1 + t.outdeg[i - 1] as i64);
    }
    let depth = t.depths();
    let height = depth.iter().copied().max().unwrap_or(0);
    let mut levels = vec![0usize; height + 1];
    for &d in &depth {
        levels[d] += 1;
    }
    // Longest path through each vertex from its two deepest child branches.
    let children = t.children();
    let mut down = vec![0usize; n];
    let mut diameter = 0;
    for v in (0..n).rev() {
        let (mut a, mut b) = (0usize, 0usize);
        for &c in &children[v] {
            let h = down[c] + 1;
            if h > a {
                b = a;
                a = h;
            } else if h > b {
                b = h;
            }
        }
        down[v] = a;
        diameter = diameter.max(a + b);
    }
    DfsProfile { queue, levels, height, diameter }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_shift_examples() {
        assert_eq!(cycle_shift(&[-1, 1, -1]), 1);
        assert_eq!(cycle_shift(&[-1]), 0);
        assert_eq!(cycle_shift(&[2, -1, -1, -1]), 0);
    }

    #[test]
    fn profiles() {
        let path = PlaneTree::new(vec![1, 1, 0]).unwrap();
        let p = dfs_profile(&path);
        assert_eq!((p.height, p.diameter), (2, 2));
        assert_eq!(p.queue, vec![1, 1, 1, 0]);
        let star = PlaneTree::new(vec![4, 0, 0, 0, 0]).unwrap();
        let p = dfs_profile(&star);
        assert_eq!((p.height, p.diameter, p.levels[1]), (1, 2, 4));
        let t = PlaneTree::new(vec![2, 1, 0, 0]).unwrap();
        assert_eq!(dfs_profile(&t).queue, vec![1, 2, 2, 1, 0]);
    }

    #[test]
    fn lukasiewicz_rejects() {
        assert!(PlaneTree::new(vec![0, 0]).is_err());
        assert!(PlaneTree::new(vec![2, 0]).is_err());
        assert!(PlaneTree::new(vec![]).is_err());
    }

    #[test]
    fn children_round_trip() {
        let t = PlaneTree::new(vec![3, 0, 2, 0, 1, 0, 0]).unwrap();
        let (back, order) = PlaneTree::from_children(&t.children(), 0);
        assert_eq!(back, t);
        assert_eq!(order, (0..7).collect::<Vec<_>>());
    }
}
