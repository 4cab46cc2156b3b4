//! Planar maps from their nonseparable cores: a vertex of the tree is either
//! an empty corner or a core whose corners carry the children.

use super::PlanarMap;
use crate::enrich::EnrichedTree;
use crate::error::{Error, Result};
use crate::species::{Catalog, Payload, Structure};

/// A tree on `2n + 1` vertices decodes to a map with `n` edges. Atom `i` of
/// a core sits in the corner following its half-edge `i`; a child core is
/// glued into that corner by its root vertex.
pub fn planarmap_from_enriched(e: &EnrichedTree, cat: &Catalog) -> Result<PlanarMap> {
    let n = e.len();
    let ch = e.children();
    let mut off = vec![0usize; n + 1];
    for v in 0..n {
        off[v + 1] = off[v] + e.tree.outdeg[v];
    }
    let h = off[n];
    let mut alpha = vec![0u32; h];
    let mut sigma = vec![0u32; h];
    // Per vertex: the core's root half-edge and its σ-predecessor.
    let mut core: Vec<Option<(&[u32], u32, u32)>> = vec![None; n];
    for v in 0..n {
        let s = e.deco[v].as_ref().ok_or_else(|| Error::InvalidStructure(format!("vertex {v} is undecorated")))?;
        match s {
            Structure::Branch(0, _) => {
                if e.tree.outdeg[v] != 0 {
                    return Err(Error::InvalidStructure("empty corner with children".into()));
                }
            }
            Structure::Branch(_, inner) => {
                let Structure::Entry { index, atoms, .. } = &**inner else {
                    return Err(Error::InvalidStructure("expected a core".into()));
                };
                let k = atoms.len();
                let entry = cat
                    .entries(k)
                    .get(*index as usize)
                    .ok_or_else(|| Error::InvalidStructure(format!("no core {index} with {k} corners")))?;
                let Payload::Map(m) = &entry.payload else {
                    return Err(Error::InvalidStructure("catalog does not hold maps".into()));
                };
                let o = off[v] as u32;
                for j in 0..k {
                    alpha[off[v] + j] = o + m.alpha[j];
                    sigma[off[v] + j] = o + m.sigma[j];
                }
                let last = m.sigma.iter().position(|&x| x == m.root).expect("σ is a permutation") as u32;
                core[v] = Some((atoms.as_slice(), o + m.root, o + last));
            }
            _ => return Err(Error::InvalidStructure("expected 1 + Q".into())),
        }
    }
    for v in 0..n {
        let Some((atoms, _, _)) = core[v] else { continue };
        for (i, &a) in atoms.iter().enumerate() {
            let c = e.child_of_atom(&ch, v, a);
            let Some((_, root_c, last_c)) = core[c] else { continue };
            let corner = off[v] + i;
            let old = sigma[corner];
            sigma[corner] = root_c;
            sigma[last_c as usize] = old;
        }
    }
    let root = match core[0] {
        Some((_, r, _)) => r,
        None => return Ok(PlanarMap::vertex_map()),
    };
    Ok(PlanarMap { alpha, sigma, root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::maps::rooted_code;
    use crate::species::nonseparable_map_catalog;
    use crate::treegen::PlaneTree;
    use std::collections::BTreeSet;

    /// All plane trees with `n` vertices as outdegree sequences.
    fn plane_trees(n: usize) -> Vec<Vec<usize>> {
        fn go(prefix: &mut Vec<usize>, open: i64, n: usize, out: &mut Vec<Vec<usize>>) {
            if prefix.len() == n {
                if open == 0 {
                    out.push(prefix.clone());
                }
                return;
            }
            if open <= 0 {
                return;
            }
            for d in 0..n - prefix.len() {
                prefix.push(d);
                go(prefix, open + d as i64 - 1, n, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        go(&mut Vec::new(), 1, n, &mut out);
        out
    }

    #[test]
    fn rooted_maps_with_three_edges() {
        // Rooted planar maps with 3 edges: 54.
        let cat = nonseparable_map_catalog(3).unwrap();
        let mut codes = BTreeSet::new();
        for deg in plane_trees(7) {
            let t = PlaneTree::new(deg).unwrap();
            // Every choice of core at each vertex.
            let mut choices: Vec<Vec<Option<Structure>>> = Vec::new();
            for &d in &t.outdeg {
                let atoms: Vec<u32> = (0..d as u32).collect();
                let opts = if d == 0 {
                    vec![Some(Structure::Branch(0, Box::new(Structure::Unit)))]
                } else {
                    (0..cat.entries(d).len())
                        .map(|i| {
                            Some(Structure::Branch(
                                1,
                                Box::new(Structure::Entry { catalog: cat.id, index: i as u32, atoms: atoms.clone() }),
                            ))
                        })
                        .collect()
                };
                choices.push(opts);
            }
            let total: usize = choices.iter().map(|c| c.len()).product();
            for mut idx in 0..total {
                let mut deco = Vec::new();
                for c in &choices {
                    deco.push(c[idx % c.len()].clone());
                    idx /= c.len();
                }
                let matching = t.outdeg.iter().map(|&d| (0..d as u32).collect()).collect();
                let e = EnrichedTree { tree: t.clone(), deco, matching };
                let m = planarmap_from_enriched(&e, &cat).unwrap();
                m.validate().unwrap();
                assert_eq!(m.edge_count(), 3);
                codes.insert(rooted_code(&m));
            }
        }
        assert_eq!(codes.len(), 54);
    }
}
