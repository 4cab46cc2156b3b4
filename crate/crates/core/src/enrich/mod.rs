//! `R`-enriched trees: a sampled plane tree whose offspring sets carry
//! weight-proportional `R`-structures.

use rand::Rng;
use serde::Serialize;

use crate::decode::maps::canonical_relabel;
use crate::error::{Error, Result};
use crate::species::presets::ClassKind;
use crate::species::{Catalog, Expr, FixedSampler, Payload, Structure};
use crate::treegen::{MarkedTree, PlaneTree};

/// A plane tree with one `R`-structure per vertex.
///
/// `deco[v]` is `None` exactly at infinite or truncated vertices. The atoms
/// of `deco[v]` are `0..d⁺(v)` and `matching[v][a]` is the index (among
/// the children of `v`) of the child standing for atom `a`.
#[derive(Clone, Debug, Serialize)]
pub struct EnrichedTree {
    pub tree: PlaneTree,
    pub deco: Vec<Option<Structure>>,
    pub matching: Vec<Vec<u32>>,
}

impl EnrichedTree {
    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// Ordered children of every vertex, as tree indices.
    pub fn children(&self) -> Vec<Vec<usize>> {
        self.tree.children()
    }

    /// The child of `v` matched to atom `a`.
    pub fn child_of_atom(&self, children: &[Vec<usize>], v: usize, a: u32) -> usize {
        children[v][self.matching[v][a as usize] as usize]
    }

    /// Every decorated vertex has a structure of its outdegree and every
    /// matching is a permutation.
    pub fn validate(&self) -> Result<()> {
        let n = self.tree.len();
        if !self.tree.is_valid() || self.deco.len() != n || self.matching.len() != n {
            return Err(Error::InvalidStructure("enriched tree shape".into()));
        }
        for v in 0..n {
            let d = self.tree.outdeg[v];
            if let Some(s) = &self.deco[v] {
                let mut atoms = s.atoms();
                atoms.sort_unstable();
                if atoms != (0..d as u32).collect::<Vec<_>>() {
                    return Err(Error::InvalidStructure(format!("vertex {v}: atoms are not 0..{d}")));
                }
            }
            let mut m = self.matching[v].clone();
            m.sort_unstable();
            if m != (0..d as u32).collect::<Vec<_>>() {
                return Err(Error::InvalidStructure(format!("vertex {v}: matching is not a bijection")));
            }
        }
        Ok(())
    }
}

/// Reusable per-vertex decoration sampler for degrees up to a bound.
#[derive(Debug)]
pub struct Decorator {
    sampler: FixedSampler,
}

impl Decorator {
    pub fn new(r: &Expr, max_degree: usize) -> Result<Self> {
        Ok(Self { sampler: FixedSampler::new(r, max_degree)? })
    }

    pub fn max_degree(&self) -> usize {
        self.sampler.max_size()
    }

    fn one<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> Result<Structure> {
        if d > self.sampler.max_size() || self.sampler.ln_coefficient(d) == f64::NEG_INFINITY {
            return Err(Error::Unsupported(format!("degree {d} unsupported by species {}", self.sampler.expr())));
        }
        self.sampler.sample(d, rng)
    }

    pub fn decorate<R: Rng + ?Sized>(&self, t: &PlaneTree, rng: &mut R) -> Result<EnrichedTree> {
        let mut deco = Vec::with_capacity(t.len());
        for &d in &t.outdeg {
            deco.push(Some(self.one(d, rng)?));
        }
        Ok(EnrichedTree { tree: t.clone(), deco, matching: identity(t) })
    }

    /// Infinite and truncated vertices stay undecorated.
    pub fn decorate_marked<R: Rng + ?Sized>(&self, t: &MarkedTree, rng: &mut R) -> Result<EnrichedTree> {
        let mut deco = Vec::with_capacity(t.tree.len());
        for (v, &d) in t.tree.outdeg.iter().enumerate() {
            if t.infinite[v] || t.truncated[v] {
                deco.push(None);
            } else {
                deco.push(Some(self.one(d, rng)?));
            }
        }
        Ok(EnrichedTree { tree: t.tree.clone(), deco, matching: identity(&t.tree) })
    }
}

fn identity(t: &PlaneTree) -> Vec<Vec<u32>> {
    t.outdeg.iter().map(|&d| (0..d as u32).collect()).collect()
}

/// Decorate every vertex of `t` independently with a weight-proportional
/// `R`-structure of size `d⁺(v)`.
pub fn decorate<R: Rng + ?Sized>(t: &PlaneTree, r: &Expr, rng: &mut R) -> Result<EnrichedTree> {
    let max = t.outdeg.iter().copied().max().unwrap_or(0);
    Decorator::new(r, max)?.decorate(t, rng)
}

/// Distance of every atom from the `*`-vertex inside one structure.
pub type AtomDistance<'a> = dyn Fn(&Structure) -> Option<Vec<(u32, usize)>> + 'a;

/// Reorder the matchings so that children appear in nondecreasing order of
/// their atom's distance (ties keep the current child order). Vertices for
/// which `dist` has no answer keep their matching.
pub fn match_by_height(e: &EnrichedTree, dist: &AtomDistance<'_>) -> EnrichedTree {
    let mut out = e.clone();
    for v in 0..e.len() {
        let Some(s) = &e.deco[v] else { continue };
        let Some(mut ds) = dist(s) else { continue };
        ds.sort_by_key(|&(a, d)| (d, e.matching[v][a as usize]));
        for (rank, (a, _)) in ds.into_iter().enumerate() {
            out.matching[v][a as usize] = rank as u32;
        }
    }
    out
}

/// The distance rule used for each class:
/// plane, labelled and k-tree atoms all sit at distance 1 (k-tree atoms are
/// ordered by front), graph atoms by their distance to `*` inside the block,
/// dissection atoms by the index of their part, outerplanar atoms by their
/// distance to `*` inside the dissection. Maps have no rule.
pub fn atom_distances(kind: ClassKind, catalog: Option<&Catalog>, s: &Structure) -> Option<Vec<(u32, usize)>> {
    match kind {
        ClassKind::Plane | ClassKind::Labelled => Some(s.atoms().into_iter().map(|a| (a, 1)).collect()),
        ClassKind::KTree(_) => {
            let mut out = Vec::new();
            let mut cur = s;
            let mut i = 1;
            loop {
                match cur {
                    Structure::Pair(a, b) => {
                        out.extend(a.atoms().into_iter().map(|x| (x, i)));
                        cur = b;
                        i += 1;
                    }
                    other => {
                        out.extend(other.atoms().into_iter().map(|x| (x, i)));
                        break;
                    }
                }
            }
            Some(out)
        }
        ClassKind::Graph => {
            let cat = catalog?;
            let Structure::Subst { parts, .. } = s else { return None };
            let mut out = Vec::new();
            for p in parts {
                let Structure::Entry { index, atoms, .. } = p else { return None };
                let k = atoms.len();
                let Payload::Block { edges } = &cat.entries(k)[*index as usize].payload else { return None };
                let d = bfs_positions(k + 1, edges, k as u32);
                out.extend(atoms.iter().enumerate().map(|(i, &a)| (a, d[i])));
            }
            Some(out)
        }
        ClassKind::Dissection => {
            let Structure::Subst { outer, parts } = s else { return None };
            let Structure::Seq(order) = &**outer else { return None };
            let mut out = Vec::new();
            for (i, &pi) in order.iter().enumerate() {
                out.extend(parts[pi as usize].atoms().into_iter().map(|a| (a, i + 1)));
            }
            Some(out)
        }
        ClassKind::Outerplanar => {
            let Structure::Subst { outer, parts } = s else { return None };
            let Structure::Seq(order) = &**outer else { return None };
            let mut out = Vec::new();
            for &pi in order {
                let poly = crate::decode::polygon_of_block(&parts[pi as usize])?;
                let m = poly.leaves.len();
                let d = bfs_positions(m + 1, &poly.edges, 0);
                out.extend(poly.leaves.iter().enumerate().map(|(i, &a)| (a, d[i + 1])));
            }
            Some(out)
        }
        ClassKind::Maps => None,
    }
}

fn bfs_positions(n: usize, edges: &[(u32, u32)], src: u32) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a as usize].push(b as usize);
        adj[b as usize].push(a as usize);
    }
    let mut d = vec![usize::MAX; n];
    d[src as usize] = 0;
    let mut q = std::collections::VecDeque::from([src as usize]);
    while let Some(v) = q.pop_front() {
        for &u in &adj[v] {
            if d[u] == usize::MAX {
                d[u] = d[v] + 1;
                q.push_back(u);
            }
        }
    }
    d
}

/// Rooted-map code of a catalog entry, for censuses of decorations.
pub fn entry_code(cat: &Catalog, k: usize, index: u32) -> Vec<u32> {
    match &cat.entries(k)[index as usize].payload {
        Payload::Map(m) => {
            let c = canonical_relabel(m, m.root);
            c.sigma.iter().chain(&c.alpha).copied().collect()
        }
        Payload::Block { edges } => edges.iter().flat_map(|&(a, b)| [a, b]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::presets;
    use crate::species::SizeSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seq_decoration_is_one_structure_per_degree() {
        let t = PlaneTree::new(vec![3, 0, 1, 0, 0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = decorate(&t, &Expr::seq(SizeSet::ALL), &mut rng).unwrap();
        e.validate().unwrap();
        let m = match_by_height(&e, &|s| atom_distances(ClassKind::Plane, None, s));
        assert_eq!(m.matching, e.matching);
    }

    #[test]
    fn dissection_degree_two_law() {
        // Two structures of size 2 under unit weights: one part of two atoms, or two parts.
        let c = presets::dissection_uniform().unwrap();
        let d = Decorator::new(&c.r, 2).unwrap();
        let t = PlaneTree::new(vec![2, 0, 0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut one_part = 0;
        let reps = 20_000;
        for _ in 0..reps {
            let e = d.decorate(&t, &mut rng).unwrap();
            if let Some(Structure::Subst { parts, .. }) = &e.deco[0] {
                if parts.len() == 1 {
                    one_part += 1;
                }
            }
        }
        let f = one_part as f64 / reps as f64;
        assert!((f - 0.5).abs() < 0.02, "{f}");
    }

    #[test]
    fn distances_sort_children() {
        let s = Structure::Subst {
            outer: Box::new(Structure::Seq(vec![1, 0])),
            parts: vec![Structure::Seq(vec![0]), Structure::Seq(vec![1, 2])],
        };
        let e = EnrichedTree {
            tree: PlaneTree::new(vec![3, 0, 0, 0]).unwrap(),
            deco: vec![Some(s), None, None, None],
            matching: vec![vec![0, 1, 2], vec![], vec![], vec![]],
        };
        let m = match_by_height(&e, &|s| atom_distances(ClassKind::Dissection, None, s));
        // Atoms 1 and 2 are in the first part (distance 1), atom 0 in the second.
        assert_eq!(m.matching[0], vec![2, 0, 1]);
    }
}
