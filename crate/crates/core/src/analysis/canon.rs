//! Canonical codes of rooted graphs by colour refinement with
//! individualisation and backtracking. Twins and automorphisms found along
//! the way prune the search.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decode::LabelledGraph;
use crate::error::{Error, Result};

/// Default vertex cap for canonicalisation.
pub const CANON_CAP: usize = 50;

/// Byte string identifying a rooted graph up to root-preserving isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalCode(pub Vec<u8>);

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

struct Search<'a> {
    n: usize,
    adj: &'a [Vec<u32>],
    mat: Vec<bool>,
    best: Option<(Vec<u8>, Vec<usize>)>,
    autos: Vec<Vec<usize>>,
    leaves: usize,
}

const LEAF_BUDGET: usize = 200_000;

impl Search<'_> {
    /// Refine to the coarsest equitable colouring; colours are ranks of
    /// isomorphism-invariant signatures.
    fn refine(&self, mut col: Vec<u32>) -> Vec<u32> {
        let mut classes = distinct(&col);
        loop {
            let mut sig: Vec<(u32, Vec<u32>, usize)> = (0..self.n)
                .map(|v| {
                    let mut nb: Vec<u32> = self.adj[v].iter().map(|&u| col[u as usize]).collect();
                    nb.sort_unstable();
                    (col[v], nb, v)
                })
                .collect();
            sig.sort();
            let mut next = vec![0u32; self.n];
            let mut c = 0u32;
            for i in 0..sig.len() {
                if i > 0 && (sig[i].0, &sig[i].1) != (sig[i - 1].0, &sig[i - 1].1) {
                    c += 1;
                }
                next[sig[i].2] = c;
            }
            col = next;
            let k = distinct(&col);
            if k == classes {
                return col;
            }
            classes = k;
        }
    }

    fn leaf_code(&self, col: &[u32]) -> (Vec<u8>, Vec<usize>) {
        let mut order = vec![0usize; self.n];
        for (v, &c) in col.iter().enumerate() {
            order[c as usize] = v;
        }
        let mut code = Vec::with_capacity(2 + self.n * self.n / 16);
        code.extend_from_slice(&(self.n as u16).to_be_bytes());
        let mut byte = 0u8;
        let mut bits = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                byte = byte << 1 | self.mat[order[i] * self.n + order[j]] as u8;
                bits += 1;
                if bits == 8 {
                    code.push(byte);
                    byte = 0;
                    bits = 0;
                }
            }
        }
        if bits > 0 {
            code.push(byte << (8 - bits));
        }
        (code, order)
    }

    fn twins(&self, u: usize, v: usize) -> bool {
        let strip = |x: usize, y: usize| self.adj[x].iter().copied().filter(move |&w| w as usize != y);
        self.adj[u].len() == self.adj[v].len() && strip(u, v).eq(strip(v, u))
    }

    fn go(&mut self, col: Vec<u32>, path: &mut Vec<usize>) -> Result<()> {
        let col = self.refine(col);
        let k = distinct(&col);
        if k == self.n {
            self.leaves += 1;
            if self.leaves > LEAF_BUDGET {
                return Err(Error::Unsupported("ball too symmetric to canonicalise".into()));
            }
            let (code, order) = self.leaf_code(&col);
            match &self.best {
                Some((b, border)) if *b == code => {
                    // order[i] ↦ border[i] is an automorphism.
                    let mut g = vec![0usize; self.n];
                    for i in 0..self.n {
                        g[order[i]] = border[i];
                    }
                    self.autos.push(g);
                }
                Some((b, _)) if *b < code => {}
                _ => self.best = Some((code, order)),
            }
            return Ok(());
        }
        // Target cell: the first colour class with more than one vertex.
        let mut size = vec![0usize; k];
        for &c in &col {
            size[c as usize] += 1;
        }
        let target = size.iter().position(|&s| s > 1).expect("non-discrete") as u32;
        let cell: Vec<usize> = (0..self.n).filter(|&v| col[v] == target).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &v in &cell {
            if tried.iter().any(|&u| self.twins(u, v)) {
                continue;
            }
            // Skip v if an automorphism fixing the path maps a tried vertex to it.
            let fixing: Vec<&Vec<usize>> =
                self.autos.iter().filter(|g| path.iter().all(|&p| g[p] == p)).collect();
            if !fixing.is_empty() && in_orbit(&fixing, &tried, v, self.n) {
                continue;
            }
            tried.push(v);
            let mut next: Vec<u32> = col.iter().map(|&c| 2 * c + u32::from(c == target)).collect();
            next[v] = 2 * target;
            path.push(v);
            self.go(next, path)?;
            path.pop();
        }
        Ok(())
    }
}

fn distinct(col: &[u32]) -> usize {
    let mut c = col.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn in_orbit(gens: &[&Vec<usize>], from: &[usize], v: usize, n: usize) -> bool {
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = from.to_vec();
    for &s in from {
        seen[s] = true;
    }
    while let Some(x) = stack.pop() {
        if x == v {
            return true;
        }
        for g in gens {
            let y = g[x];
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    false
}

/// Canonical code of `g` rooted at `root`, for graphs of at most `cap` vertices.
pub fn canonical_code_capped(g: &LabelledGraph, root: u32, cap: usize) -> Result<CanonicalCode> {
    if g.n > cap {
        return Err(Error::Unsupported(format!("ball too large: {} vertices exceed the cap {cap}", g.n)));
    }
    if root as usize >= g.n {
        return Err(Error::InvalidStructure("root out of range".into()));
    }
    let adj = g.adjacency();
    let mut mat = vec![false; g.n * g.n];
    for &(a, b) in &g.edges {
        mat[a as usize * g.n + b as usize] = true;
        mat[b as usize * g.n + a as usize] = true;
    }
    let mut s = Search { n: g.n, adj: &adj, mat, best: None, autos: Vec::new(), leaves: 0 };
    let col: Vec<u32> = (0..g.n).map(|v| u32::from(v as u32 != root)).collect();
    s.go(col, &mut Vec::new())?;
    let (code, _) = s.best.expect("at least one leaf");
    Ok(CanonicalCode(code))
}

/// [`canonical_code_capped`] at the default cap, rooted at `g.root` (or 0).
pub fn canonical_code(g: &LabelledGraph) -> Result<CanonicalCode> {
    canonical_code_capped(g, g.root.unwrap_or(0), CANON_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_with_many_leaves_is_fast() {
        let g = LabelledGraph::new(45, Some(0), (1..45).map(|v| (0, v))).unwrap();
        let h = LabelledGraph::new(45, Some(0), (1..45).map(|v| (0, 45 - v))).unwrap();
        assert_eq!(canonical_code(&g).unwrap(), canonical_code(&h).unwrap());
    }

    #[test]
    fn root_matters() {
        let path = |r| LabelledGraph::new(3, Some(r), [(0, 1), (1, 2)]).unwrap();
        assert_eq!(canonical_code(&path(0)).unwrap(), canonical_code(&path(2)).unwrap());
        assert_ne!(canonical_code(&path(0)).unwrap(), canonical_code(&path(1)).unwrap());
    }

    #[test]
    fn complete_binary_tree() {
        let n = 63u32;
        let edges: Vec<(u32, u32)> = (1..n).map(|v| ((v - 1) / 2, v)).collect();
        let g = LabelledGraph::new(n as usize, Some(0), edges.iter().copied()).unwrap();
        // Reverse the labels below the root.
        let perm = |v: u32| if v == 0 { 0 } else { n - v };
        let h = LabelledGraph::new(n as usize, Some(0), edges.iter().map(|&(a, b)| (perm(a), perm(b)))).unwrap();
        assert_eq!(canonical_code_capped(&g, 0, 64).unwrap(), canonical_code_capped(&h, 0, 64).unwrap());
    }
}
