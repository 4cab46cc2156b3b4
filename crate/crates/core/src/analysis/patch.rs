//! Semi-metrics patched together from local metrics on the decorations.
//!
//! Every vertex `v` of an enriched tree carries a weighted graph on `v`
//! itself (the `*` point) and the children standing for its atoms. The
//! patched distance is the shortest-path distance in the union of these
//! local graphs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::decode::polygon_of_block;
use crate::enrich::EnrichedTree;
use crate::error::{Error, Result};
use crate::species::presets::ClassKind;
use crate::species::{Catalog, Payload, Structure, STAR};

/// Shortest-path semi-metric on `0..n`.
#[derive(Clone, Debug)]
pub struct PatchedMetric {
    pub adj: Vec<Vec<(u32, f64)>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

impl PatchedMetric {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32, f64)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (a, b, w) in edges {
            adj[a as usize].push((b, w));
            adj[b as usize].push((a, w));
        }
        Self { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Distances from `x` to every point (Dijkstra).
    pub fn from_point(&self, x: u32) -> Vec<f64> {
        let mut d = vec![f64::INFINITY; self.adj.len()];
        d[x as usize] = 0.0;
        let mut heap = BinaryHeap::from([(Reverse(Key(0.0)), x)]);
        while let Some((Reverse(Key(dv)), v)) = heap.pop() {
            if dv > d[v as usize] {
                continue;
            }
            for &(u, w) in &self.adj[v as usize] {
                let du = dv + w;
                if du < d[u as usize] {
                    d[u as usize] = du;
                    heap.push((Reverse(Key(du)), u));
                }
            }
        }
        d
    }

    pub fn dist(&self, x: u32, y: u32) -> f64 {
        self.from_point(x)[y as usize]
    }

    /// Eccentricity of the farthest point from `start`, then of the farthest
    /// point from that one: a lower bound on the diameter that is exact on trees.
    pub fn diameter_double_sweep(&self, start: u32) -> f64 {
        let far = |d: &[f64]| {
            d.iter()
                .enumerate()
                .filter(|(_, x)| x.is_finite())
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map_or((start, 0.0), |(i, &x)| (i as u32, x))
        };
        let (a, _) = far(&self.from_point(start));
        far(&self.from_point(a)).1
    }
}

/// Law of the weights put on local edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EdgeLaw {
    Zero,
    Unit,
    /// Exponential with the given rate.
    Exp(f64),
}

impl EdgeLaw {
    pub fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            EdgeLaw::Zero => 0.0,
            EdgeLaw::Unit => 1.0,
            EdgeLaw::Exp(rate) => Exp::new(rate).expect("positive rate").sample(rng),
        }
    }
}

/// Supplier of the local metric of one decoration: weighted edges among its
/// atoms and `STAR`. Suppliers must treat atoms only through the structure,
/// so relabelling a decoration relabels its metric.
pub trait LocalMetric {
    fn edges(&self, s: &Structure, rng: &mut dyn RngCore) -> Result<Vec<(u32, u32, f64)>>;
}

/// Every atom at distance one from `STAR`: the patched metric is the tree metric.
#[derive(Clone, Copy, Debug)]
pub struct UnitStar;

impl LocalMetric for UnitStar {
    fn edges(&self, s: &Structure, _rng: &mut dyn RngCore) -> Result<Vec<(u32, u32, f64)>> {
        Ok(s.atoms().into_iter().map(|a| (STAR, a, 1.0)).collect())
    }
}

/// Edges of the decoded pieces (blocks, polygons, or the star for trees)
/// with i.i.d. weights.
#[derive(Clone, Debug)]
pub struct PieceMetric {
    pub kind: ClassKind,
    pub catalog: Option<Arc<Catalog>>,
    pub law: EdgeLaw,
}

impl PieceMetric {
    /// First-passage percolation with exponential(1) edge weights.
    pub fn fpp(kind: ClassKind, catalog: Option<Arc<Catalog>>) -> Self {
        Self { kind, catalog, law: EdgeLaw::Exp(1.0) }
    }
}

impl LocalMetric for PieceMetric {
    fn edges(&self, s: &Structure, rng: &mut dyn RngCore) -> Result<Vec<(u32, u32, f64)>> {
        let unsupported = || Error::Unsupported(format!("no local metric for {:?} structures", self.kind));
        let mut out = Vec::new();
        match self.kind {
            ClassKind::Plane | ClassKind::Labelled => {
                for a in s.atoms() {
                    out.push((STAR, a, self.law.draw(rng)));
                }
            }
            ClassKind::Graph => {
                let cat = self.catalog.as_ref().ok_or_else(unsupported)?;
                let Structure::Subst { parts, .. } = s else { return Err(unsupported()) };
                for p in parts {
                    let Structure::Entry { index, atoms, .. } = p else { return Err(unsupported()) };
                    let k = atoms.len();
                    let entry = cat.entries(k).get(*index as usize).ok_or_else(unsupported)?;
                    let Payload::Block { edges } = &entry.payload else { return Err(unsupported()) };
                    let at = |q: u32| if q as usize == k { STAR } else { atoms[q as usize] };
                    for &(a, b) in edges {
                        out.push((at(a), at(b), self.law.draw(rng)));
                    }
                }
            }
            ClassKind::Outerplanar => {
                let Structure::Subst { parts, .. } = s else { return Err(unsupported()) };
                for p in parts {
                    let poly = polygon_of_block(p).ok_or_else(unsupported)?;
                    let at = |q: u32| if q == 0 { STAR } else { poly.leaves[q as usize - 1] };
                    for &(a, b) in &poly.edges {
                        out.push((at(a), at(b), self.law.draw(rng)));
                    }
                }
            }
            _ => return Err(unsupported()),
        }
        Ok(out)
    }
}

/// Patch the local metrics of every decoration of `e` into one semi-metric
/// on the tree vertices.
pub fn patch_metric<R: Rng + ?Sized>(e: &EnrichedTree, delta: &dyn LocalMetric, rng: &mut R) -> Result<PatchedMetric> {
    let ch = e.children();
    let mut rng = rng;
    let rng: &mut dyn RngCore = &mut rng;
    let mut edges = Vec::new();
    for v in 0..e.len() {
        let s = e.deco[v].as_ref().ok_or_else(|| Error::InvalidStructure(format!("vertex {v} is undecorated")))?;
        let at = |a: u32| if a == STAR { v as u32 } else { e.child_of_atom(&ch, v, a) as u32 };
        for (a, b, w) in delta.edges(s, rng)? {
            if w < 0.0 || w.is_nan() {
                return Err(Error::InvalidStructure("negative local distance".into()));
            }
            edges.push((at(a), at(b), w));
        }
    }
    Ok(PatchedMetric::from_edges(e.len(), edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::block_catalog;
    use crate::treegen::PlaneTree;
    use num_traits::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plane(outdeg: Vec<usize>) -> EnrichedTree {
        let tree = PlaneTree::new(outdeg).unwrap();
        let deco = tree.outdeg.iter().map(|&d| Some(Structure::Seq((0..d as u32).collect()))).collect();
        let matching = tree.outdeg.iter().map(|&d| (0..d as u32).collect()).collect();
        EnrichedTree { tree, deco, matching }
    }

    #[test]
    fn unit_star_gives_the_tree_metric() {
        let e = plane(vec![2, 1, 0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = patch_metric(&e, &UnitStar, &mut rng).unwrap();
        let depth = e.tree.depths();
        for v in 0..4 {
            assert_eq!(m.dist(0, v as u32), depth[v] as f64);
        }
        assert_eq!(m.dist(2, 3), 3.0);
        assert_eq!(m.diameter_double_sweep(0), 3.0);
    }

    #[test]
    fn zero_weights_collapse_everything() {
        let e = plane(vec![3, 1, 0, 0, 0]);
        let zero = PieceMetric { kind: ClassKind::Plane, catalog: None, law: EdgeLaw::Zero };
        let m = patch_metric(&e, &zero, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for x in 0..5 {
            assert!(m.from_point(x).iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn triangle_block_is_a_shortcut() {
        let cat = block_catalog(2, |_| crate::species::Ratio::one()).unwrap();
        assert_eq!(cat.entries(2).len(), 1);
        let tree = PlaneTree::new(vec![2, 0, 0]).unwrap();
        let leaf = Some(Structure::Subst { outer: Box::new(Structure::Set(vec![])), parts: vec![] });
        let root = Structure::Subst {
            outer: Box::new(Structure::Set(vec![0])),
            parts: vec![Structure::Entry { catalog: cat.id, index: 0, atoms: vec![0, 1] }],
        };
        let e = EnrichedTree { tree, deco: vec![Some(root), leaf.clone(), leaf], matching: vec![vec![0, 1], vec![], vec![]] };
        let unit = PieceMetric { kind: ClassKind::Graph, catalog: Some(cat), law: EdgeLaw::Unit };
        let m = patch_metric(&e, &unit, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(m.dist(1, 2), 1.0);
    }

    #[test]
    fn maps_have_no_preset() {
        let e = plane(vec![1, 0]);
        let fpp = PieceMetric::fpp(ClassKind::Maps, None);
        assert!(patch_metric(&e, &fpp, &mut ChaCha8Rng::seed_from_u64(3)).is_err());
    }
}
