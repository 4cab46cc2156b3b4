//! Invariants checked on random inputs.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use etrees::analysis::experiments::uniform_connected_graph;
use etrees::analysis::{
    block_sizes, canonical_code, face_sizes, patch_metric, starter_ratio, EdgeLaw, GibbsSampler, PieceMetric,
};
use etrees::decode::{dissection_from_enriched, graph_from_enriched, planarmap_from_enriched, LabelledGraph};
use etrees::enrich::{Decorator, EnrichedTree};
use etrees::series::{classify, CoefficientTable};
use etrees::species::presets::{self, EnrichedClass};
use etrees::species::{Expr, SizeSet};
use etrees::treegen::{Backend, SgtSampler};

fn graph_from_mask(n: usize, mask: u64) -> LabelledGraph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for a in 0..n as u32 {
        for b in (a + 1)..n as u32 {
            if mask >> bit & 1 == 1 {
                edges.push((a, b));
            }
            bit += 1;
        }
    }
    LabelledGraph::new(n, Some(0), edges).unwrap()
}

fn relabel(g: &LabelledGraph, perm: &[u32]) -> LabelledGraph {
    LabelledGraph::new(
        g.n,
        g.root.map(|r| perm[r as usize]),
        g.edges.iter().map(|&(a, b)| (perm[a as usize], perm[b as usize])),
    )
    .unwrap()
}

fn permutations(n: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, (n - 1) as u32);
            out.push(q);
        }
    }
    out
}

/// Smallest sorted edge list over relabellings sending the root to 0.
fn brute_code(g: &LabelledGraph) -> Vec<(u32, u32)> {
    let root = g.root.unwrap_or(0);
    permutations(g.n)
        .into_iter()
        .filter(|p| p[root as usize] == 0)
        .map(|p| relabel(g, &p).edges)
        .min()
        .unwrap()
}

struct Pipeline {
    class: EnrichedClass,
    sampler: SgtSampler,
    deco: Decorator,
}

impl Pipeline {
    fn new(class: EnrichedClass, size: usize, backend: Backend) -> Self {
        let w = class.weights();
        let prof = classify(&w).unwrap();
        let sampler = SgtSampler::new(&w, &prof, size, backend).unwrap();
        let bound = w.support_bound().map_or(size, |b| b.min(size));
        let deco = Decorator::new(&class.r, bound).unwrap();
        Self { class, sampler, deco }
    }

    fn draw(&self, seed: u64) -> EnrichedTree {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = self.sampler.sample(&mut rng).unwrap();
        self.deco.decorate(&t, &mut rng).unwrap()
    }
}

fn graphs() -> &'static Pipeline {
    static P: OnceLock<Pipeline> = OnceLock::new();
    P.get_or_init(|| Pipeline::new(presets::block_graph(4).unwrap(), 40, Backend::RecursiveZ))
}

fn maps() -> &'static Pipeline {
    static P: OnceLock<Pipeline> = OnceLock::new();
    P.get_or_init(|| Pipeline::new(presets::planar_maps(6).unwrap(), 2 * 30 + 1, Backend::RecursiveZ))
}

fn dissections() -> &'static Pipeline {
    static P: OnceLock<Pipeline> = OnceLock::new();
    P.get_or_init(|| Pipeline::new(presets::dissection_uniform().unwrap(), 30, Backend::RecursiveZ))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn canonical_code_separates_exactly_the_isomorphism_classes(
        n in 1usize..=6,
        m1 in any::<u64>(),
        m2 in any::<u64>(),
        shuffle in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let g = graph_from_mask(n, m1);
        let h = if shuffle {
            let mut p: Vec<u32> = (0..n as u32).collect();
            p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            relabel(&g, &p)
        } else {
            graph_from_mask(n, m2)
        };
        let same = canonical_code(&g).unwrap() == canonical_code(&h).unwrap();
        prop_assert_eq!(same, brute_code(&g) == brute_code(&h));
        if shuffle {
            prop_assert!(same);
        }
    }

    #[test]
    fn relabelling_keeps_the_code_on_seven_vertices(m in any::<u64>(), seed in any::<u64>()) {
        let g = graph_from_mask(7, m);
        let mut p: Vec<u32> = (0..7).collect();
        p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(canonical_code(&g).unwrap(), canonical_code(&relabel(&g, &p)).unwrap());
    }

    #[test]
    fn block_tree_identity(n in 1usize..=11, m in any::<u64>()) {
        let g = graph_from_mask(n, m);
        prop_assume!(g.is_connected());
        let b = block_sizes(&g);
        prop_assert_eq!(b.iter().map(|s| s - 1).sum::<usize>() + 1, n);
    }

    #[test]
    fn sampled_block_graphs_respect_the_block_cap(seed in any::<u64>()) {
        let p = graphs();
        let g = graph_from_enriched(&p.draw(seed), p.class.catalog.as_deref().unwrap()).unwrap();
        prop_assert!(g.is_connected());
        let b = block_sizes(&g);
        // Blocks carry at most four vertices besides the one they hang from.
        prop_assert!(b[0] <= 5);
        prop_assert_eq!(b.iter().map(|s| s - 1).sum::<usize>() + 1, g.n);
    }

    #[test]
    fn patched_metric_is_a_semimetric(seed in any::<u64>(), x in 0u32..40, y in 0u32..40, z in 0u32..40) {
        let p = graphs();
        let e = p.draw(seed);
        let fpp = PieceMetric::fpp(p.class.kind, p.class.catalog.clone());
        let m = patch_metric(&e, &fpp, &mut ChaCha8Rng::seed_from_u64(seed ^ 1)).unwrap();
        let (dx, dy) = (m.from_point(x), m.from_point(y));
        prop_assert_eq!(dx[x as usize], 0.0);
        prop_assert!((dx[y as usize] - dy[x as usize]).abs() < 1e-9);
        prop_assert!(dx[z as usize] <= dx[y as usize] + dy[z as usize] + 1e-9);
    }

    #[test]
    fn unit_block_metric_is_the_graph_metric(seed in any::<u64>()) {
        let p = graphs();
        let e = p.draw(seed);
        let unit = PieceMetric { kind: p.class.kind, catalog: p.class.catalog.clone(), law: EdgeLaw::Unit };
        let m = patch_metric(&e, &unit, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let g = graph_from_enriched(&e, p.class.catalog.as_deref().unwrap()).unwrap();
        // Both count edges of the same blocks, so eccentricities agree as multisets.
        let ecc = |d: Vec<f64>| d.into_iter().fold(0.0, f64::max);
        let mut a: Vec<u64> = (0..g.n as u32).map(|v| ecc(m.from_point(v)) as u64).collect();
        let adj = g.adjacency();
        let mut b: Vec<u64> = (0..g.n as u32)
            .map(|v| *etrees::analysis::distances(&adj, v, etrees::analysis::Metric::Graph).iter().max().unwrap() as u64)
            .collect();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn map_faces_satisfy_handshake_and_euler(seed in any::<u64>()) {
        let p = maps();
        let m = planarmap_from_enriched(&p.draw(seed), p.class.catalog.as_deref().unwrap()).unwrap();
        m.validate().unwrap();
        let f = face_sizes(&m);
        prop_assert_eq!(m.edge_count(), 30);
        prop_assert_eq!(f.iter().sum::<usize>(), 2 * m.edge_count());
        prop_assert_eq!(m.vertices().len() + f.len(), m.edge_count() + 2);
    }

    #[test]
    fn dissection_faces_cover_sides_and_both_sides_of_diagonals(seed in any::<u64>()) {
        let p = dissections();
        let d = dissection_from_enriched(&p.draw(seed)).unwrap();
        d.validate().unwrap();
        let f = face_sizes(&d);
        prop_assert_eq!(f.iter().sum::<usize>(), d.n + 1 + 2 * d.diagonals.len());
        prop_assert_eq!(f.len(), d.diagonals.len() + 1);
    }

    #[test]
    fn starter_ratio_falls_for_gaussian_growth(c in 0.3f64..0.7, n in 6usize..29, k in 2usize..=3) {
        let t = CoefficientTable { values: (0..=31).map(|i| (c * (i * i) as f64).exp()).collect() };
        prop_assert!(starter_ratio(&t, n + 1, k).unwrap() < starter_ratio(&t, n, k).unwrap());
    }
}

#[test]
fn gibbs_partition_of_three_vertices_gives_uniform_graphs() {
    let gibbs = GibbsSampler::new(&Expr::set(SizeSet::ALL), &presets::connected_graphs_blob(3), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let reps = 40_000;
    let mut counts: BTreeMap<Vec<(u32, u32)>, usize> = BTreeMap::new();
    for _ in 0..reps {
        let part = gibbs.sample(&mut rng).unwrap();
        let mut edges = Vec::new();
        for labels in &part.blocks {
            let g = uniform_connected_graph(labels.len(), &mut rng);
            edges.extend(g.edges.iter().map(|&(a, b)| (labels[a as usize], labels[b as usize])));
        }
        *counts.entry(LabelledGraph::new(3, None, edges).unwrap().edges).or_default() += 1;
    }
    // All 8 graphs on three labelled vertices, each with probability 1/8.
    assert_eq!(counts.len(), 8);
    let tv: f64 = counts.values().map(|&c| (c as f64 / reps as f64 - 0.125).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.02, "tv {tv}");
}
