//! Edge-rooted polygon dissections, their leaf trees (one internal node per
//! inner face, one leaf per non-root vertex) and the vertex-form enriched
//! trees over `SEQ ∘ SEQ_{≥1}`.

use serde::{Deserialize, Serialize};

use super::{LabelledGraph, PlanarMap};
use crate::enrich::EnrichedTree;
use crate::error::{Error, Result};
use crate::species::Structure;
use crate::treegen::{parts_from_schroeder, schroeder_from_parts, PlaneTree, SchroederTree};

/// Polygon on the vertices `0..=n` (counterclockwise) with root edge
/// `0 → n`. Vertex `0` is the `*`-vertex, so the size is `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dissection {
    pub n: usize,
    /// Sorted pairs `a < b` with `b - a ≥ 2` and `(a, b) ≠ (0, n)`.
    pub diagonals: Vec<(u32, u32)>,
}

impl Dissection {
    /// The single root edge.
    pub fn edge() -> Self {
        Self { n: 1, diagonals: Vec::new() }
    }

    /// Polygon sides, root edge and diagonals.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let n = self.n as u32;
        let mut e: Vec<(u32, u32)> = (0..n).map(|i| (i, i + 1)).collect();
        if n >= 2 {
            e.push((0, n));
        }
        e.extend(self.diagonals.iter().copied());
        e
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n + 1];
        for (a, b) in self.edges() {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        adj
    }

    pub fn to_graph(&self) -> LabelledGraph {
        LabelledGraph::new(self.n + 1, Some(0), self.edges()).expect("valid dissection edges")
    }

    /// Counterclockwise rotation at `i`: neighbours by `(u - i) mod (n+1)`.
    pub fn to_map(&self) -> PlanarMap {
        let m = self.n as u32 + 1;
        let mut rot = self.adjacency();
        for (i, r) in rot.iter_mut().enumerate() {
            r.sort_by_key(|&u| (u + m - i as u32) % m);
        }
        PlanarMap::from_rotations(&rot, Some((0, self.n as u32))).expect("rotations of a dissection")
    }

    /// Degrees of the inner faces, descending.
    pub fn face_sizes(&self) -> Vec<usize> {
        if self.n < 2 {
            return Vec::new();
        }
        let mut f = self.to_map().face_degrees();
        f.sort_unstable_by(|a, b| b.cmp(a));
        // The outer face is the Hamiltonian cycle.
        let outer = f.iter().position(|&d| d == self.n + 1).expect("outer face");
        f.remove(outer);
        f
    }

    /// Range, non-crossing and distinctness of the diagonals.
    pub fn validate(&self) -> Result<()> {
        let n = self.n as u32;
        let bad = |m: String| Err(Error::InvalidStructure(m));
        if n == 0 {
            return bad("a dissection has at least one non-root vertex".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b) in &self.diagonals {
            if !(a < b && b <= n && b - a >= 2 && (a, b) != (0, n)) {
                return bad(format!("({a}, {b}) is not a diagonal"));
            }
            if !seen.insert((a, b)) {
                return bad(format!("diagonal ({a}, {b}) repeated"));
            }
        }
        for &(a, b) in &self.diagonals {
            for &(c, d) in &self.diagonals {
                if a < c && c < b && b < d {
                    return bad(format!("diagonals ({a}, {b}) and ({c}, {d}) cross"));
                }
            }
        }
        self.to_map().validate()
    }
}

/// Leaf counts of every subtree.
fn leaf_counts(t: &PlaneTree, ch: &[Vec<usize>]) -> Vec<usize> {
    let mut l = vec![0usize; t.len()];
    for v in (0..t.len()).rev() {
        l[v] = if ch[v].is_empty() { 1 } else { ch[v].iter().map(|&c| l[c]).sum() };
    }
    l
}

/// Interval recursion: the root covers `[0, n]`, a node covering `[a, b]`
/// splits it among its children by their leaf counts, and every internal
/// non-root node is the diagonal `(a, b)`.
pub fn dissection_from_leaf_tree(t: &PlaneTree) -> Result<Dissection> {
    if t.outdeg.contains(&1) {
        return Err(Error::InvalidStructure("leaf trees have no outdegree 1".into()));
    }
    let ch = t.children();
    let l = leaf_counts(t, &ch);
    let n = l[0];
    let mut diagonals = Vec::new();
    let mut stack = vec![(0usize, 0u32, n as u32)];
    while let Some((v, a, b)) = stack.pop() {
        if v != 0 && !ch[v].is_empty() {
            diagonals.push((a, b));
        }
        let mut x = a;
        for &c in &ch[v] {
            let y = x + l[c] as u32;
            stack.push((c, x, y));
            x = y;
        }
    }
    diagonals.sort_unstable();
    Ok(Dissection { n, diagonals })
}

/// Inverse of [`dissection_from_leaf_tree`]. The face on the inner side of
/// `(a, b)` is traced from `a` by always moving to the largest neighbour not
/// beyond `b`.
pub fn leaf_tree_from_dissection(d: &Dissection) -> Result<PlaneTree> {
    d.validate()?;
    let mut adj = d.adjacency();
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    let n = d.n as u32;
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut stack = vec![(0usize, 0u32, n)];
    while let Some((node, a, b)) = stack.pop() {
        if b == a + 1 {
            continue;
        }
        let mut cur = a;
        let mut first = true;
        while cur != b {
            let next = adj[cur as usize]
                .iter()
                .copied()
                .filter(|&u| u > cur && (u < b || (u == b && !first)))
                .max()
                .ok_or_else(|| Error::InvalidStructure("face walk stuck".into()))?;
            first = false;
            children.push(Vec::new());
            let c = children.len() - 1;
            children[node].push(c);
            stack.push((c, cur, next));
            cur = next;
        }
    }
    Ok(PlaneTree::from_children(&children, 0).0)
}

/// Ordered children and compositions of a vertex-form enriched tree.
fn ordered_parts(e: &EnrichedTree) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    let ch = e.children();
    let mut kids = vec![Vec::new(); e.len()];
    let mut parts = vec![Vec::new(); e.len()];
    for v in 0..e.len() {
        let Some(s) = &e.deco[v] else {
            return Err(Error::InvalidStructure(format!("vertex {v} is undecorated")));
        };
        let Structure::Subst { outer, parts: ps } = s else {
            return Err(Error::InvalidStructure("expected a SEQ ∘ SEQ≥1 structure".into()));
        };
        let Structure::Seq(order) = &**outer else {
            return Err(Error::InvalidStructure("expected an outer sequence".into()));
        };
        for &pi in order {
            let Structure::Seq(atoms) = &ps[pi as usize] else {
                return Err(Error::InvalidStructure("expected inner sequences".into()));
            };
            parts[v].push(atoms.len());
            kids[v].extend(atoms.iter().map(|&a| e.child_of_atom(&ch, v, a)));
        }
    }
    Ok((kids, parts))
}

/// Ehrenborg–Méndez image of a vertex-form dissection tree; `leaf_of` is
/// indexed by the vertices of `e`.
pub fn schroeder_from_enriched(e: &EnrichedTree) -> Result<SchroederTree> {
    let (kids, parts) = ordered_parts(e)?;
    let (t, order) = PlaneTree::from_children(&kids, 0);
    let p: Vec<Vec<usize>> = order.iter().map(|&o| parts[o].clone()).collect();
    let s = schroeder_from_parts(&t, &p)?;
    let mut leaf_of = vec![0usize; e.len()];
    for (i, &o) in order.iter().enumerate() {
        leaf_of[o] = s.leaf_of[i];
    }
    Ok(SchroederTree { tree: s.tree, leaf_of })
}

pub fn dissection_from_enriched(e: &EnrichedTree) -> Result<Dissection> {
    dissection_from_leaf_tree(&schroeder_from_enriched(e)?.tree)
}

/// Inverse direction, with atoms numbered in sequence order and identity matchings.
pub fn enriched_from_dissection(d: &Dissection) -> Result<EnrichedTree> {
    let (t, parts) = parts_from_schroeder(&leaf_tree_from_dissection(d)?)?;
    let mut deco = Vec::with_capacity(t.len());
    for p in &parts {
        let mut next = 0u32;
        let mut ps = Vec::new();
        for &j in p {
            ps.push(Structure::Seq((next..next + j as u32).collect()));
            next += j as u32;
        }
        deco.push(Some(Structure::Subst {
            outer: Box::new(Structure::Seq((0..ps.len() as u32).collect())),
            parts: ps,
        }));
    }
    let matching = t.outdeg.iter().map(|&d| (0..d as u32).collect()).collect();
    Ok(EnrichedTree { tree: t, deco, matching })
}

/// A dissection block of an outerplanar decoration: `leaves[i]` is the
/// atom at polygon vertex `i + 1`; `edges` use positions `0..=m`, `0` is `*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon {
    pub leaves: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
}

/// Read a leaf-form `D = X + SEQ_{≥2}(D)` structure as a polygon dissection.
pub fn polygon_of_block(s: &Structure) -> Option<Polygon> {
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut leaf_atom: Vec<Option<u32>> = vec![None];
    let mut stack = vec![(0usize, s)];
    while let Some((node, s)) = stack.pop() {
        match s {
            Structure::Branch(0, inner) => match &**inner {
                Structure::Atom(a) => leaf_atom[node] = Some(*a),
                _ => return None,
            },
            Structure::Branch(_, inner) => {
                let Structure::Subst { outer, parts } = &**inner else { return None };
                let Structure::Seq(order) = &**outer else { return None };
                for &pi in order {
                    children.push(Vec::new());
                    leaf_atom.push(None);
                    let c = children.len() - 1;
                    children[node].push(c);
                    stack.push((c, &parts[pi as usize]));
                }
            }
            _ => return None,
        }
    }
    let (t, order) = PlaneTree::from_children(&children, 0);
    let d = dissection_from_leaf_tree(&t).ok()?;
    let leaves = order.iter().filter_map(|&o| leaf_atom[o]).collect();
    Some(Polygon { leaves, edges: d.edges() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_and_edge() {
        let d = dissection_from_leaf_tree(&PlaneTree::single()).unwrap();
        assert_eq!(d, Dissection::edge());
        let tri = dissection_from_leaf_tree(&PlaneTree::new(vec![2, 0, 0]).unwrap()).unwrap();
        assert_eq!(tri, Dissection { n: 2, diagonals: vec![] });
        assert_eq!(tri.face_sizes(), vec![3]);
    }

    #[test]
    fn square_faces() {
        let plain = Dissection { n: 3, diagonals: vec![] };
        assert_eq!(plain.face_sizes(), vec![4]);
        let split = Dissection { n: 3, diagonals: vec![(0, 2)] };
        assert_eq!(split.face_sizes(), vec![3, 3]);
        split.validate().unwrap();
        assert!(Dissection { n: 4, diagonals: vec![(0, 2), (1, 3)] }.validate().is_err());
    }

    #[test]
    fn leaf_tree_round_trip() {
        for t in [vec![2, 0, 0], vec![3, 0, 0, 0], vec![2, 2, 0, 0, 0], vec![2, 0, 2, 0, 0], vec![2, 0, 3, 0, 2, 0, 0, 0]] {
            let t = PlaneTree::new(t).unwrap();
            let d = dissection_from_leaf_tree(&t).unwrap();
            d.validate().unwrap();
            assert_eq!(leaf_tree_from_dissection(&d).unwrap(), t);
        }
    }

    #[test]
    fn enriched_round_trip() {
        let d = Dissection { n: 6, diagonals: vec![(0, 3), (3, 5)] };
        let e = enriched_from_dissection(&d).unwrap();
        e.validate().unwrap();
        assert_eq!(e.len(), 6);
        assert_eq!(dissection_from_enriched(&e).unwrap(), d);
    }
}
