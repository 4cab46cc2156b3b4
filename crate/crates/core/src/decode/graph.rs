//! Block-weighted connected graphs: every vertex owns the blocks that
//! separate it from its descendants.

use super::LabelledGraph;
use crate::enrich::EnrichedTree;
use crate::error::{Error, Result};
use crate::species::{Catalog, Payload, Structure};
use crate::treegen::PlaneTree;

/// Vertex sets (sorted) of the 2-connected components, bridges included.
/// Isolated vertices belong to no block.
pub fn biconnected_components(adj: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let n = adj.len();
    let mut disc = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut time = 0u32;
    let mut out = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for s in 0..n {
        if disc[s] != u32::MAX {
            continue;
        }
        disc[s] = time;
        low[s] = time;
        time += 1;
        // (vertex, parent, next neighbour index)
        let mut stack = vec![(s as u32, u32::MAX, 0usize)];
        while let Some(&mut (v, p, ref mut i)) = stack.last_mut() {
            if let Some(&u) = adj[v as usize].get(*i) {
                *i += 1;
                if u == p {
                    continue;
                }
                if disc[u as usize] == u32::MAX {
                    disc[u as usize] = time;
                    low[u as usize] = time;
                    time += 1;
                    edges.push((v, u));
                    stack.push((u, v, 0));
                } else if disc[u as usize] < disc[v as usize] {
                    low[v as usize] = low[v as usize].min(disc[u as usize]);
                    edges.push((v, u));
                }
                continue;
            }
            stack.pop();
            if p == u32::MAX {
                continue;
            }
            low[p as usize] = low[p as usize].min(low[v as usize]);
            if low[v as usize] >= disc[p as usize] {
                let mut block = Vec::new();
                while let Some(e) = edges.pop() {
                    block.push(e.0);
                    block.push(e.1);
                    if e == (p, v) {
                        break;
                    }
                }
                block.sort_unstable();
                block.dedup();
                out.push(block);
            }
        }
    }
    out
}

/// Vertex `i` of the result is tree vertex `i`; the root is vertex 0.
pub fn graph_from_enriched(e: &EnrichedTree, cat: &Catalog) -> Result<LabelledGraph> {
    let ch = e.children();
    let mut edges = Vec::with_capacity(e.len());
    for v in 0..e.len() {
        let Some(s) = &e.deco[v] else {
            return Err(Error::InvalidStructure(format!("vertex {v} is undecorated")));
        };
        let Structure::Subst { parts, .. } = s else {
            return Err(Error::InvalidStructure("expected a SET ∘ B' structure".into()));
        };
        for p in parts {
            let Structure::Entry { index, atoms, .. } = p else {
                return Err(Error::InvalidStructure("expected block entries".into()));
            };
            let k = atoms.len();
            let entry = cat
                .entries(k)
                .get(*index as usize)
                .ok_or_else(|| Error::InvalidStructure(format!("no block {index} of size {k}")))?;
            let Payload::Block { edges: be } = &entry.payload else {
                return Err(Error::InvalidStructure("catalog does not hold blocks".into()));
            };
            let at = |q: u32| -> u32 {
                if q as usize == k {
                    v as u32
                } else {
                    e.child_of_atom(&ch, v, atoms[q as usize]) as u32
                }
            };
            edges.extend(be.iter().map(|&(a, b)| (at(a), at(b))));
        }
    }
    LabelledGraph::new(e.len(), Some(0), edges)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

/// Inverse of [`graph_from_enriched`] for a rooted connected graph. Returns
/// the enriched tree and, for each tree vertex, the graph vertex it stands for.
pub fn graph_to_enriched(g: &LabelledGraph, cat: &Catalog) -> Result<(EnrichedTree, Vec<u32>)> {
    let root = g.root.ok_or_else(|| Error::InvalidStructure("graph has no root".into()))?;
    if !g.is_connected() {
        return Err(Error::InvalidStructure("graph is not connected".into()));
    }
    let adj = g.adjacency();
    let blocks = biconnected_components(&adj);
    let mut blocks_of = vec![Vec::new(); g.n];
    for (b, vs) in blocks.iter().enumerate() {
        for &v in vs {
            blocks_of[v as usize].push(b);
        }
    }
    let has_edge = |a: u32, b: u32| adj[a as usize].binary_search(&b).is_ok();
    let mut used = vec![false; blocks.len()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); g.n];
    let mut parts_of: Vec<Vec<Structure>> = vec![Vec::new(); g.n];
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &b in &blocks_of[v as usize] {
            if std::mem::replace(&mut used[b], true) {
                continue;
            }
            let others: Vec<u32> = blocks[b].iter().copied().filter(|&u| u != v).collect();
            let k = others.len();
            let first = children[v as usize].len() as u32;
            children[v as usize].extend(others.iter().map(|&u| u as usize));
            queue.extend(others.iter().copied());
            let mut found = None;
            'search: for p in permutations(k) {
                let at = |q: u32| if q as usize == k { v } else { others[p[q as usize]] };
                for (idx, entry) in cat.entries(k).iter().enumerate() {
                    let Payload::Block { edges } = &entry.payload else { continue };
                    let inside = (0..=k as u32)
                        .flat_map(|a| ((a + 1)..=k as u32).map(move |b| (a, b)))
                        .filter(|&(a, b)| has_edge(at(a), at(b)))
                        .count();
                    if inside == edges.len() && edges.iter().all(|&(a, b)| has_edge(at(a), at(b))) {
                        let atoms = (0..k).map(|q| first + p[q] as u32).collect();
                        found = Some(Structure::Entry { catalog: cat.id, index: idx as u32, atoms });
                        break 'search;
                    }
                }
            }
            let s = found.ok_or_else(|| {
                Error::Unsupported(format!("block on {} vertices is not in catalog {}", k + 1, cat.name))
            })?;
            parts_of[v as usize].push(s);
        }
    }
    let (tree, order) = PlaneTree::from_children(&children, root as usize);
    let mut deco = Vec::with_capacity(g.n);
    for &o in &order {
        let parts = std::mem::take(&mut parts_of[o]);
        deco.push(Some(Structure::Subst {
            outer: Box::new(Structure::Set((0..parts.len() as u32).collect())),
            parts,
        }));
    }
    let matching = tree.outdeg.iter().map(|&d| (0..d as u32).collect()).collect();
    Ok((EnrichedTree { tree, deco, matching }, order.iter().map(|&o| o as u32).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::block_catalog;
    use num_traits::One;

    fn relabel(g: &LabelledGraph, order: &[u32]) -> LabelledGraph {
        LabelledGraph::new(
            g.n,
            g.root.map(|r| order[r as usize]),
            g.edges.iter().map(|&(a, b)| (order[a as usize], order[b as usize])),
        )
        .unwrap()
    }

    #[test]
    fn components_of_a_bowtie_with_tail() {
        let g = LabelledGraph::new(6, Some(0), [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2), (4, 5)]).unwrap();
        let mut b = biconnected_components(&g.adjacency());
        b.sort();
        assert_eq!(b, vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5]]);
    }

    #[test]
    fn round_trip_all_connected_graphs_on_four_vertices() {
        let cat = block_catalog(3, |_| crate::species::Ratio::one()).unwrap();
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let mut connected = 0;
        for mask in 0..64u32 {
            let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e);
            let g = LabelledGraph::new(4, Some(0), edges).unwrap();
            if !g.is_connected() {
                continue;
            }
            connected += 1;
            let (e, order) = graph_to_enriched(&g, &cat).unwrap();
            e.validate().unwrap();
            let back = graph_from_enriched(&e, &cat).unwrap();
            assert_eq!(relabel(&back, &order), g);
        }
        assert_eq!(connected, 38);
    }
}
