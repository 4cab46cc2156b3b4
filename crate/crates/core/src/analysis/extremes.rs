//! Largest blocks and faces.

use crate::decode::{biconnected_components, Dissection, LabelledGraph, PlanarMap};

/// Vertex counts of the blocks, largest first.
pub fn block_sizes(g: &LabelledGraph) -> Vec<usize> {
    let mut s: Vec<usize> = biconnected_components(&g.adjacency()).iter().map(Vec::len).collect();
    s.sort_unstable_by(|a, b| b.cmp(a));
    s
}

/// Structures with faces.
pub trait Faces {
    /// Face degrees, largest first; dissections leave out the outer face.
    fn face_sizes(&self) -> Vec<usize>;
}

impl Faces for PlanarMap {
    fn face_sizes(&self) -> Vec<usize> {
        if self.half_edges() == 0 {
            return Vec::new();
        }
        let mut f = self.face_degrees();
        f.sort_unstable_by(|a, b| b.cmp(a));
        f
    }
}

impl Faces for Dissection {
    fn face_sizes(&self) -> Vec<usize> {
        Dissection::face_sizes(self)
    }
}

pub fn face_sizes(x: &impl Faces) -> Vec<usize> {
    x.face_sizes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_of_small_graphs() {
        let tri = LabelledGraph::new(3, None, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(block_sizes(&tri), vec![3]);
        let path = LabelledGraph::new(3, None, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(block_sizes(&path), vec![2, 2]);
        let bowtie = LabelledGraph::new(5, None, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]).unwrap();
        assert_eq!(block_sizes(&bowtie), vec![3, 3]);
    }

    #[test]
    fn faces_of_small_dissections() {
        let tri = Dissection { n: 2, diagonals: vec![] };
        assert_eq!(face_sizes(&tri), vec![3]);
        let sq = Dissection { n: 3, diagonals: vec![] };
        assert_eq!(face_sizes(&sq), vec![4]);
        let split = Dissection { n: 3, diagonals: vec![(0, 2)] };
        assert_eq!(face_sizes(&split), vec![3, 3]);
    }

    #[test]
    fn map_faces_include_every_face() {
        let sq = Dissection { n: 3, diagonals: vec![(0, 2)] }.to_map();
        assert_eq!(face_sizes(&sq), vec![4, 3, 3]);
    }
}
