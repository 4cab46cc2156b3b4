//! Rooted map utilities: canonical relabelling, exhaustive generation and
//! the nonseparable-map catalog file format.

use std::collections::{BTreeMap, BTreeSet};

use super::PlanarMap;
use crate::error::{Error, Result};

/// Relabel half-edges in the order a breadth-first walk from the root
/// discovers them (trying `σ` before `α`). Two rooted maps are isomorphic
/// iff their relabellings are equal.
pub fn canonical_relabel(m: &PlanarMap, root: u32) -> PlanarMap {
    let h = m.half_edges();
    if h == 0 {
        return PlanarMap::vertex_map();
    }
    let mut new = vec![u32::MAX; h];
    let mut order = Vec::with_capacity(h);
    new[root as usize] = 0;
    order.push(root);
    let mut i = 0;
    while i < order.len() {
        let x = order[i] as usize;
        for y in [m.sigma[x], m.alpha[x]] {
            if new[y as usize] == u32::MAX {
                new[y as usize] = order.len() as u32;
                order.push(y);
            }
        }
        i += 1;
    }
    let sigma = order.iter().map(|&x| new[m.sigma[x as usize] as usize]).collect();
    let alpha = order.iter().map(|&x| new[m.alpha[x as usize] as usize]).collect();
    PlanarMap { alpha, sigma, root: 0 }
}

/// Flat code of a rooted map (after [`canonical_relabel`]).
pub fn rooted_code(m: &PlanarMap) -> Vec<u32> {
    let c = canonical_relabel(m, m.root);
    c.sigma.iter().chain(&c.alpha).copied().collect()
}

fn unrooted_key(m: &PlanarMap) -> Vec<u32> {
    (0..m.half_edges() as u32)
        .map(|r| {
            let c = canonical_relabel(m, r);
            c.sigma.iter().chain(&c.alpha).copied().collect::<Vec<u32>>()
        })
        .min()
        .unwrap_or_default()
}

/// Every way of adding one edge to `m` that keeps it a connected planar map.
fn extensions(m: &PlanarMap) -> Vec<PlanarMap> {
    let h = m.half_edges() as u32;
    if h == 0 {
        return vec![
            PlanarMap { alpha: vec![1, 0], sigma: vec![0, 1], root: 0 },
            PlanarMap { alpha: vec![1, 0], sigma: vec![1, 0], root: 0 },
        ];
    }
    let (a, b) = (h, h + 1);
    let mut out = Vec::new();
    let base = |m: &PlanarMap| {
        let mut alpha = m.alpha.clone();
        alpha.extend([b, a]);
        let mut sigma = m.sigma.clone();
        sigma.extend([a, b]);
        PlanarMap { alpha, sigma, root: 0 }
    };
    // Pendant edge into the corner after x.
    for x in 0..h {
        let mut n = base(m);
        let next = n.sigma[x as usize];
        n.sigma[x as usize] = a;
        n.sigma[a as usize] = next;
        n.sigma[b as usize] = b;
        out.push(n);
    }
    // Edge between two corners of the same face (a loop when x = y).
    let face = m.face_of();
    for x in 0..h {
        for y in x..h {
            // Corner after x lies in the face of σ(x).
            if face[m.sigma[x as usize] as usize] != face[m.sigma[y as usize] as usize] {
                continue;
            }
            let mut n = base(m);
            if x == y {
                let next = n.sigma[x as usize];
                n.sigma[x as usize] = a;
                n.sigma[a as usize] = b;
                n.sigma[b as usize] = next;
            } else {
                let nx = n.sigma[x as usize];
                let ny = n.sigma[y as usize];
                n.sigma[x as usize] = a;
                n.sigma[a as usize] = nx;
                n.sigma[y as usize] = b;
                n.sigma[b as usize] = ny;
            }
            out.push(n);
        }
    }
    out.retain(|n| n.is_planar());
    out
}

/// Unrooted planar maps with exactly `edges` edges, one representative each.
pub fn unrooted_maps(edges: usize) -> Vec<PlanarMap> {
    let mut level: BTreeMap<Vec<u32>, PlanarMap> = BTreeMap::new();
    level.insert(Vec::new(), PlanarMap::vertex_map());
    for _ in 0..edges {
        let mut next = BTreeMap::new();
        for m in level.values() {
            for n in extensions(m) {
                next.entry(unrooted_key(&n)).or_insert(n);
            }
        }
        level = next;
    }
    level.into_values().collect()
}

/// Rooted planar maps with exactly `edges` edges, canonically relabelled.
pub fn rooted_maps(edges: usize) -> Vec<PlanarMap> {
    let mut out = BTreeMap::new();
    for m in unrooted_maps(edges) {
        if m.half_edges() == 0 {
            out.insert(Vec::new(), m);
            continue;
        }
        for r in 0..m.half_edges() as u32 {
            let c = canonical_relabel(&m, r);
            out.entry(c.sigma.iter().chain(&c.alpha).copied().collect::<Vec<u32>>()).or_insert(c);
        }
    }
    out.into_values().collect()
}

/// Nonseparable: one edge (link or loop), or loopless with a 2-connected
/// underlying multigraph.
pub fn is_nonseparable(m: &PlanarMap) -> bool {
    let e = m.edge_count();
    if e == 0 {
        return false;
    }
    if e == 1 {
        return true;
    }
    let (n, edges) = m.multigraph();
    if edges.iter().any(|&(a, b)| a == b) {
        return false;
    }
    let connected_without = |skip: Option<u32>| {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &edges {
            if Some(a) != skip && Some(b) != skip {
                adj[a as usize].push(b);
                adj[b as usize].push(a);
            }
        }
        let start = (0..n as u32).find(|&v| Some(v) != skip).expect("two vertices");
        let mut seen = vec![false; n];
        seen[start as usize] = true;
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v as usize] {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n - usize::from(skip.is_some())
    };
    n >= 2 && connected_without(None) && (n == 2 || (0..n as u32).all(|v| connected_without(Some(v))))
}

/// Rooted nonseparable maps with `1..=max_edges` edges.
pub fn nonseparable_maps_up_to(max_edges: usize) -> Vec<PlanarMap> {
    let mut out = Vec::new();
    let mut level: BTreeMap<Vec<u32>, PlanarMap> = BTreeMap::new();
    level.insert(Vec::new(), PlanarMap::vertex_map());
    for _ in 0..max_edges {
        let mut next = BTreeMap::new();
        for m in level.values() {
            for n in extensions(m) {
                next.entry(unrooted_key(&n)).or_insert(n);
            }
        }
        level = next;
        let mut rooted = BTreeSet::new();
        for m in level.values().filter(|m| is_nonseparable(m)) {
            for r in 0..m.half_edges() as u32 {
                let c = canonical_relabel(m, r);
                if rooted.insert(c.sigma.iter().chain(&c.alpha).copied().collect::<Vec<u32>>()) {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// One map per line: `[H, [alpha...], [sigma...]]`, root half-edge 0.
pub fn write_map_lines(maps: &[PlanarMap]) -> String {
    let mut s = String::new();
    for m in maps {
        let line = serde_json::json!([m.half_edges(), m.alpha, m.sigma]);
        s.push_str(&line.to_string());
        s.push('\n');
    }
    s
}

pub fn read_map_lines(text: &str) -> Result<Vec<PlanarMap>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (h, alpha, sigma): (usize, Vec<u32>, Vec<u32>) = serde_json::from_str(line)?;
        let m = PlanarMap { alpha, sigma, root: 0 };
        if m.half_edges() != h {
            return Err(Error::Parse(format!("catalog line {}: H disagrees with alpha", i + 1)));
        }
        m.validate()?;
        out.push(m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rooted_map_counts() {
        // Rooted planar maps: 1, 2, 9, 54, 378.
        let want = [1, 2, 9, 54, 378];
        for (e, &w) in want.iter().enumerate() {
            assert_eq!(rooted_maps(e).len(), w, "{e} edges");
        }
    }

    #[test]
    fn nonseparable_counts() {
        // Rooted nonseparable maps: 2, 1, 2, 6, 22.
        let all = nonseparable_maps_up_to(5);
        let mut by = [0usize; 6];
        for m in &all {
            m.validate().unwrap();
            by[m.edge_count()] += 1;
        }
        assert_eq!(&by[1..], &[2, 1, 2, 6, 22]);
    }

    #[test]
    fn catalog_lines_round_trip() {
        let all = nonseparable_maps_up_to(3);
        let back = read_map_lines(&write_map_lines(&all)).unwrap();
        assert_eq!(all, back);
    }
}
