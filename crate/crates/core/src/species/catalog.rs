use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::Ratio;
use crate::decode::{maps, PlanarMap};
use crate::error::{Error, Result};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// What a catalog entry stands for; decoders read it back.
#[derive(Clone, Debug)]
pub enum Payload {
    /// Graph on positions `0..k` (the atoms) plus position `k` for `*`.
    Block { edges: Vec<(u32, u32)> },
    /// Rooted map whose half-edge `i` owns the corner that is atom `i`.
    Map(PlanarMap),
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub weight: Ratio,
    /// Position permutations (including the identity) that fix the entry.
    pub automorphisms: Vec<Vec<u32>>,
    pub payload: Payload,
}

impl CatalogEntry {
    /// Lexicographically least relabelling among automorphic placements.
    pub fn canonical_atoms(&self, atoms: &[u32]) -> Vec<u32> {
        self.automorphisms
            .iter()
            .map(|a| a.iter().map(|&p| atoms[p as usize]).collect::<Vec<u32>>())
            .min()
            .unwrap_or_else(|| atoms.to_vec())
    }

    /// `1/|Aut|` times the weight: the entry's share of the EGF coefficient.
    pub fn egf_share(&self) -> Ratio {
        &self.weight / Ratio::from_integer(self.automorphisms.len().max(1).into())
    }
}

/// A finite family of concrete structures for each size.
#[derive(Debug)]
pub struct Catalog {
    pub id: u64,
    pub name: String,
    sizes: Vec<Vec<CatalogEntry>>,
}

impl Catalog {
    pub fn new(name: impl Into<String>, sizes: Vec<Vec<CatalogEntry>>) -> Self {
        Self { id: NEXT_ID.fetch_add(1, Ordering::Relaxed), name: name.into(), sizes }
    }

    pub fn entries(&self, k: usize) -> &[CatalogEntry] {
        self.sizes.get(k).map_or(&[], |v| v.as_slice())
    }

    pub fn max_size(&self) -> usize {
        self.sizes.len().saturating_sub(1)
    }

    /// EGF coefficient at size `k`.
    pub fn coefficient(&self, k: usize) -> Ratio {
        self.entries(k).iter().fold(Ratio::zero(), |acc, e| acc + e.egf_share())
    }
}

fn connected_without(adj: &[u32], n: usize, skip: Option<usize>) -> bool {
    let start = (0..n).find(|&v| Some(v) != skip);
    let Some(start) = start else { return true };
    let mut seen = 1u32 << start;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        let mut nb = adj[v] & !seen;
        if let Some(s) = skip {
            nb &= !(1 << s);
        }
        while nb != 0 {
            let u = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            seen |= 1 << u;
            stack.push(u);
        }
    }
    let want = (0..n).filter(|&v| Some(v) != skip).count();
    seen.count_ones() as usize == want
}

/// 2-connectedness for simple graphs on `n ≤ 32` vertices; `K_2` counts.
fn biconnected(edges: &[(u32, u32)], n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut adj = vec![0u32; n];
    for &(a, b) in edges {
        adj[a as usize] |= 1 << b;
        adj[b as usize] |= 1 << a;
    }
    if !connected_without(&adj, n, None) {
        return false;
    }
    n == 2 || (0..n).all(|v| connected_without(&adj, n, Some(v)))
}

fn permutations(k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (0..k as u32).collect();
    heap_permute(k, &mut cur, &mut out);
    out
}

fn heap_permute(k: usize, a: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, a, out);
        if k % 2 == 0 {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
}

/// `B'`: 2-connected graphs with one unlabelled vertex `*`, as a catalog of
/// isomorphism classes with up to `max_atoms` labelled vertices.
///
/// `weight` maps the edge count of a block to its weight.
pub fn block_catalog(max_atoms: usize, weight: impl Fn(usize) -> Ratio) -> Result<Arc<Catalog>> {
    if max_atoms > 5 {
        return Err(Error::Unsupported("blocks with more than 6 vertices".into()));
    }
    let mut sizes = vec![Vec::new()];
    for k in 1..=max_atoms {
        let n = k + 1;
        let pairs: Vec<(u32, u32)> =
            (0..n as u32).flat_map(|a| ((a + 1)..n as u32).map(move |b| (a, b))).collect();
        let perms = permutations(k);
        let mut pidx = vec![vec![0usize; n]; n];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            pidx[a as usize][b as usize] = i;
            pidx[b as usize][a as usize] = i;
        }
        let mut classes: BTreeMap<u64, CatalogEntry> = BTreeMap::new();
        for mask in 0u64..(1u64 << pairs.len()) {
            let edges: Vec<(u32, u32)> =
                pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            if !biconnected(&edges, n) {
                continue;
            }
            // Canonical mask under permutations of the atoms (the `*` vertex `k` is fixed).
            let image = |p: &[u32]| -> u64 {
                let map = |v: u32| if v as usize == k { v } else { p[v as usize] };
                edges.iter().fold(0u64, |m, &(a, b)| {
                    m | 1 << pidx[map(a) as usize][map(b) as usize]
                })
            };
            let canon = perms.iter().map(|p| image(p)).min().expect("perm");
            if canon != mask {
                continue;
            }
            let automorphisms: Vec<Vec<u32>> = perms.iter().filter(|p| image(p) == mask).cloned().collect();
            classes.insert(
                mask,
                CatalogEntry { weight: weight(edges.len()), automorphisms, payload: Payload::Block { edges } },
            );
        }
        sizes.push(classes.into_values().filter(|e| !e.weight.is_zero()).collect());
    }
    Ok(Arc::new(Catalog::new(format!("blocks[..{max_atoms}]"), sizes)))
}

fn cache_path(max_edges: usize) -> Option<PathBuf> {
    std::env::var_os("RET_CATALOG_DIR").map(|d| PathBuf::from(d).join(format!("nonsep-maps-{max_edges}.txt")))
}

/// Rooted nonseparable maps with at most `max_edges` edges, indexed by their
/// number of corners `2m`. Cached under `$RET_CATALOG_DIR` when set.
pub fn nonseparable_map_catalog(max_edges: usize) -> Result<Arc<Catalog>> {
    let maps_list = match cache_path(max_edges).filter(|p| p.exists()) {
        Some(p) => maps::read_map_lines(&std::fs::read_to_string(p)?)?,
        None => {
            let list = maps::nonseparable_maps_up_to(max_edges);
            if let Some(p) = cache_path(max_edges) {
                if let Some(dir) = p.parent() {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(&p, maps::write_map_lines(&list))?;
            }
            list
        }
    };
    let mut sizes: Vec<Vec<CatalogEntry>> = vec![Vec::new(); 2 * max_edges + 1];
    for m in maps_list {
        let h = m.half_edges();
        sizes[h].push(CatalogEntry {
            weight: Ratio::one(),
            automorphisms: vec![(0..h as u32).collect()],
            payload: Payload::Map(m),
        });
    }
    Ok(Arc::new(Catalog::new(format!("nonsep[..{max_edges}]"), sizes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labelled_block_counts() {
        // Labelled 2-connected graphs on 2..6 vertices: 1, 1, 10, 238, 11368.
        let cat = block_catalog(5, |_| Ratio::one()).unwrap();
        let expect = [1u64, 1, 10, 238, 11368];
        for (k, &e) in (1..=5).zip(&expect) {
            let fact: u64 = (1..=k as u64).product();
            let got = cat.coefficient(k) * Ratio::from_integer(fact.into());
            assert_eq!(got, Ratio::from_integer(e.into()), "k = {k}");
        }
    }
}
