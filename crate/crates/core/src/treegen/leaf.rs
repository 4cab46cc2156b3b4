//! Trees counted by leaves (Schröder trees) through the Ehrenborg–Méndez
//! transformation to vertex-counted simply generated trees.
//!
//! A vertex of `T` with `k` children carries a composition of `k`; every
//! part `j` becomes an internal node of outdegree `j + 1` whose last child
//! continues the chain, and the chain ends at the leaf standing for the
//! vertex itself.

use rand::Rng;

use super::backends::{Backend, SgtSampler};
use super::PlaneTree;
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;
use crate::series::{classify, eval_phi, SeriesProfile, WeightSequence};
use crate::species::sample::pick_ln;

/// A leaf-counted tree with the vertex of `T` behind each leaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchroederTree {
    pub tree: PlaneTree,
    /// `leaf_of[v]` is the preorder index of the leaf standing for vertex `v` of `T`.
    pub leaf_of: Vec<usize>,
}

/// `g(z) = Σ_{j≥1} p_{j+1} z^j`.
fn g(p: &WeightSequence, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    let (phi, _) = eval_phi(p, z, 1e-13)?;
    Ok((phi - p.coeff(0) - p.coeff(1) * z) / z)
}

/// `ω_k = [z^k] 1/(1 - g(z))`, the vertex weights that make leaf trees with
/// weight `Π p_{d⁺}` simply generated.
pub fn leaf_weights(p: &WeightSequence) -> Result<WeightSequence> {
    if p.coeff(1) != 0.0 {
        return Err(Error::InvalidWeights("leaf trees need p_1 = 0".into()));
    }
    p.validate()?;
    let rp = classify(p).map(|pr| pr.rho_phi).unwrap_or(0.0);
    // Smallest root of g = 1 below the radius of p, else the radius of p.
    let radius = if rp == 0.0 {
        0.0
    } else {
        let top = if rp.is_finite() { rp } else { 1.0 };
        let mut hi = top;
        if !rp.is_finite() {
            while g(p, hi)? < 1.0 {
                hi *= 2.0;
            }
        }
        let at_top = if rp.is_finite() { g(p, rp * (1.0 - 1e-12)).unwrap_or(f64::INFINITY) } else { f64::INFINITY };
        if at_top < 1.0 {
            rp
        } else {
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(p, mid).unwrap_or(f64::INFINITY) < 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    let bound = p.support_bound();
    let p = p.clone();
    Ok(WeightSequence::from_bulk(format!("leaf({})", p.name()), Some(radius), None, move |len| {
        let lp = p.ln_coeffs(len + 1);
        let mut lw = vec![f64::NEG_INFINITY; len];
        if len == 0 {
            return lw;
        }
        lw[0] = 0.0;
        let mut buf = Vec::new();
        for k in 1..len {
            buf.clear();
            let top = bound.map_or(k, |b| k.min(b.saturating_sub(1)));
            for j in 1..=top {
                let a = lp[j + 1];
                let b = lw[k - j];
                if a.is_finite() && b.is_finite() {
                    buf.push(a + b);
                }
            }
            lw[k] = log_sum_exp(&buf);
        }
        lw
    }))
}

/// Build the leaf tree from `T` and a composition of each outdegree.
pub fn schroeder_from_parts(t: &PlaneTree, parts: &[Vec<usize>]) -> Result<SchroederTree> {
    let n = t.len();
    if parts.len() != n {
        return Err(Error::InvalidStructure("one composition per vertex".into()));
    }
    let ch = t.children();
    let mut children: Vec<Vec<usize>> = Vec::with_capacity(2 * n);
    let mut node_of = vec![0usize; n];
    let mut leaf_node = vec![0usize; n];
    for v in (0..n).rev() {
        if parts[v].iter().sum::<usize>() != ch[v].len() || parts[v].contains(&0) {
            return Err(Error::InvalidStructure(format!("bad composition at vertex {v}")));
        }
        children.push(Vec::new());
        let mut cur = children.len() - 1;
        leaf_node[v] = cur;
        let mut idx = 0;
        for &j in &parts[v] {
            let mut kids: Vec<usize> = ch[v][idx..idx + j].iter().map(|&c| node_of[c]).collect();
            kids.push(cur);
            children.push(kids);
            cur = children.len() - 1;
            idx += j;
        }
        node_of[v] = cur;
    }
    let (tree, order) = PlaneTree::from_children(&children, node_of[0]);
    let mut pos = vec![0usize; children.len()];
    for (i, &o) in order.iter().enumerate() {
        pos[o] = i;
    }
    Ok(SchroederTree { tree, leaf_of: leaf_node.iter().map(|&l| pos[l]).collect() })
}

/// Inverse of [`schroeder_from_parts`]: the vertex tree and the compositions.
pub fn parts_from_schroeder(s: &PlaneTree) -> Result<(PlaneTree, Vec<Vec<usize>>)> {
    if s.outdeg.contains(&1) {
        return Err(Error::InvalidStructure("leaf trees have no outdegree 1".into()));
    }
    let ch = s.children();
    // Every chain of last children ends at a leaf: that leaf names the vertex.
    let leaves: Vec<usize> = (0..s.len()).filter(|&v| s.outdeg[v] == 0).collect();
    let mut vid = vec![usize::MAX; s.len()];
    for (i, &l) in leaves.iter().enumerate() {
        vid[l] = i;
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); leaves.len()];
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); leaves.len()];
    // Chain heads: the root and every non-last child.
    let mut heads = vec![0usize];
    let mut head_vertex = vec![usize::MAX; s.len()];
    while let Some(h) = heads.pop() {
        let mut chain = Vec::new();
        let mut x = h;
        while s.outdeg[x] > 0 {
            chain.push(x);
            x = *ch[x].last().expect("internal");
        }
        let v = vid[x];
        head_vertex[h] = v;
        // Bottom-first parts.
        for &c in chain.iter().rev() {
            let kids = &ch[c][..ch[c].len() - 1];
            parts[v].push(kids.len());
            children[v].extend(kids.iter().copied());
            heads.extend(kids.iter().copied());
        }
    }
    // Map head nodes to vertex ids.
    let kids: Vec<Vec<usize>> = children.iter().map(|c| c.iter().map(|&h| head_vertex[h]).collect()).collect();
    let (t, order) = PlaneTree::from_children(&kids, head_vertex[0]);
    let parts = order.iter().map(|&o| parts[o].clone()).collect();
    Ok((t, parts))
}

/// Sampler of leaf trees with `n` leaves and law `∝ Π p_{d⁺(v)}`.
#[derive(Debug)]
pub struct LeafTreeSampler {
    ln_p: Vec<f64>,
    ln_w: Vec<f64>,
    sgt: SgtSampler,
    pub weights: WeightSequence,
    pub profile: SeriesProfile,
}

impl LeafTreeSampler {
    pub fn new(p: &WeightSequence, n: usize, backend: Backend) -> Result<Self> {
        let weights = leaf_weights(p)?;
        let profile = classify(&weights)?;
        let sgt = SgtSampler::new(&weights, &profile, n, backend)?;
        Ok(Self { ln_p: p.ln_coeffs(n + 2), ln_w: weights.ln_coeffs(n + 1), sgt, weights, profile })
    }

    /// Composition of `k` with weight `Π p_{j+1}`, drawn part by part.
    fn composition<R: Rng + ?Sized>(&self, mut k: usize, rng: &mut R) -> Vec<usize> {
        let mut out = Vec::new();
        let mut w = Vec::new();
        while k > 0 {
            w.clear();
            w.extend((1..=k).map(|j| self.ln_p[j + 1] + self.ln_w[k - j]));
            let j = 1 + pick_ln(&w, rng).expect("ω_k > 0");
            out.push(j);
            k -= j;
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SchroederTree> {
        let t = self.sgt.sample(rng)?;
        let parts: Vec<Vec<usize>> = t.outdeg.iter().map(|&k| self.composition(k, rng)).collect();
        schroeder_from_parts(&t, &parts)
    }
}

pub fn sample_leaf_tree<R: Rng + ?Sized>(
    p: &WeightSequence,
    n_leaves: usize,
    backend: Backend,
    rng: &mut R,
) -> Result<PlaneTree> {
    Ok(LeafTreeSampler::new(p, n_leaves, backend)?.sample(rng)?.tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_p() -> WeightSequence {
        WeightSequence::from_ln_fn("unit", Some(1.0), |k| if k == 1 { f64::NEG_INFINITY } else { 0.0 })
    }

    #[test]
    fn uniform_leaf_weights() {
        // 1/(1 - z/(1-z)) = (1-z)/(1-2z): 1, 1, 2, 4, 8, ...
        let w = leaf_weights(&unit_p()).unwrap();
        let want = [1.0, 1.0, 2.0, 4.0, 8.0, 16.0];
        for (k, x) in want.iter().enumerate() {
            assert!((w.coeff(k) - x).abs() < 1e-9, "k = {k}");
        }
    }

    #[test]
    fn parts_round_trip() {
        let t = PlaneTree::new(vec![3, 0, 2, 0, 0, 0]).unwrap();
        let parts = vec![vec![1, 2], vec![], vec![2], vec![], vec![], vec![]];
        let s = schroeder_from_parts(&t, &parts).unwrap();
        assert_eq!(s.tree.leaves(), 6);
        assert!(!s.tree.outdeg.contains(&1));
        let (back, bp) = parts_from_schroeder(&s.tree).unwrap();
        assert_eq!(back, t);
        assert_eq!(bp, parts);
    }
}
