//! Outerplanar maps: each vertex owns an ordered sequence of dissected
//! polygons glued at it, and its descendants are the polygon vertices.

use super::dissection::polygon_of_block;
use super::PlanarMap;
use crate::enrich::EnrichedTree;
use crate::error::{Error, Result};
use crate::species::Structure;

/// Vertex `i` of the result is tree vertex `i`. The root half-edge goes
/// from the root along the root edge of its first polygon.
pub fn outerplanar_from_enriched(e: &EnrichedTree) -> Result<PlanarMap> {
    let ch = e.children();
    // Per polygon: vertex of each position, and the edges on positions.
    let mut polys: Vec<(Vec<u32>, Vec<(u32, u32)>)> = Vec::new();
    let mut own: Vec<Vec<usize>> = vec![Vec::new(); e.len()];
    let mut place: Vec<Option<(usize, u32)>> = vec![None; e.len()];
    for v in 0..e.len() {
        let Some(Structure::Subst { outer, parts }) = &e.deco[v] else {
            return Err(Error::InvalidStructure(format!("vertex {v}: expected SEQ ∘ D")));
        };
        let Structure::Seq(order) = &**outer else {
            return Err(Error::InvalidStructure("expected an outer sequence".into()));
        };
        for &pi in order {
            let poly = polygon_of_block(&parts[pi as usize])
                .ok_or_else(|| Error::InvalidStructure("not a dissection structure".into()))?;
            let mut at = vec![v as u32];
            for (i, &a) in poly.leaves.iter().enumerate() {
                let c = e.child_of_atom(&ch, v, a);
                place[c] = Some((polys.len(), i as u32 + 1));
                at.push(c as u32);
            }
            own[v].push(polys.len());
            polys.push((at, poly.edges));
        }
    }
    let mut rot: Vec<Vec<u32>> = vec![Vec::new(); e.len()];
    for (x, r) in rot.iter_mut().enumerate() {
        if let Some((p, i)) = place[x] {
            let (at, edges) = &polys[p];
            let m = at.len() as u32;
            let mut nb: Vec<u32> = edges
                .iter()
                .filter_map(|&(a, b)| if a == i { Some(b) } else if b == i { Some(a) } else { None })
                .collect();
            nb.sort_by_key(|&u| (u + m - i) % m);
            r.extend(nb.iter().map(|&u| at[u as usize]));
        }
        for &p in &own[x] {
            let (at, edges) = &polys[p];
            let mut nb: Vec<u32> =
                edges.iter().filter_map(|&(a, b)| if a == 0 { Some(b) } else if b == 0 { Some(a) } else { None }).collect();
            nb.sort_unstable();
            r.extend(nb.iter().map(|&u| at[u as usize]));
        }
    }
    let root = own[0].first().map(|&p| {
        let at = &polys[p].0;
        (0u32, *at.last().expect("polygon"))
    });
    PlanarMap::from_rotations(&rot, root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::presets;
    use crate::treegen::PlaneTree;

    fn leaf(a: u32) -> Structure {
        Structure::Branch(0, Box::new(Structure::Atom(a)))
    }

    fn face(parts: Vec<Structure>) -> Structure {
        let order = (0..parts.len() as u32).collect();
        Structure::Branch(1, Box::new(Structure::Subst { outer: Box::new(Structure::Seq(order)), parts }))
    }

    fn empty() -> Option<Structure> {
        Some(Structure::Subst { outer: Box::new(Structure::Seq(vec![])), parts: vec![] })
    }

    #[test]
    fn triangle_with_pendant_edge() {
        // Root owns a triangle on atoms 0, 1 and atom 1 owns a single edge.
        let root = Structure::Subst {
            outer: Box::new(Structure::Seq(vec![0])),
            parts: vec![face(vec![leaf(0), leaf(1)])],
        };
        let child = Structure::Subst { outer: Box::new(Structure::Seq(vec![0])), parts: vec![leaf(0)] };
        let e = EnrichedTree {
            tree: PlaneTree::new(vec![2, 0, 1, 0]).unwrap(),
            deco: vec![Some(root), empty(), Some(child), empty()],
            matching: vec![vec![0, 1], vec![], vec![0], vec![]],
        };
        let m = outerplanar_from_enriched(&e).unwrap();
        m.validate().unwrap();
        assert_eq!(m.edge_count(), 4);
        let mut f = m.face_degrees();
        f.sort_unstable();
        assert_eq!(f, vec![3, 5]);
    }

    #[test]
    fn sampled_structures_are_outerplanar() {
        use rand::SeedableRng;
        let c = presets::outerplanar().unwrap();
        let w = c.weights();
        let p = crate::series::classify(&w).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 5, 30] {
            let t = crate::treegen::sample_sgt(&w, &p, n, crate::treegen::Backend::RecursiveZ, &mut rng).unwrap();
            let e = crate::enrich::decorate(&t, &c.r, &mut rng).unwrap();
            let m = outerplanar_from_enriched(&e).unwrap();
            m.validate().unwrap();
            assert_eq!(m.vertices().len(), n);
            // Every vertex lies on the outer face: some face meets all vertices.
            if n > 2 {
                let vo = m.vertex_of();
                let ok = m.faces().iter().any(|f| {
                    let mut s: Vec<u32> = f.iter().map(|&h| vo[h as usize]).collect();
                    s.sort_unstable();
                    s.dedup();
                    s.len() == n
                });
                assert!(ok);
            }
        }
    }
}
