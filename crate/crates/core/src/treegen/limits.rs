//! Truncated limit objects: the Kesten tree `T̂`, the backward-spine tree
//! `T*` and the condensation tree of type II sequences.

use rand::Rng;

use super::backends::ConvTable;
use super::offspring::OffspringSampler;
use super::{MarkedTree, PlaneTree};
use crate::error::{Error, Result};
use crate::series::{Kind, PowerTable, SeriesProfile, WeightSequence};
use crate::species::sample::pick;

/// Children materialised at an infinite-degree vertex.
pub const DEFAULT_WINDOW: usize = 64;

/// `Ω_n = ⌈ln² n⌉`.
pub fn condensation_threshold(n: usize) -> usize {
    let l = (n.max(2) as f64).ln();
    (l * l).ceil() as usize
}

/// Above this size the root-degree law comes from the hitting-time formula
/// instead of the cubic `Z`-power table.
const TABLE_LIMIT: usize = 600;

/// `P(d⁺(o) = k)` for `k < n` in a simply generated tree with `n` vertices.
///
/// Small `n` (and type III) use `ω_k [z^{n-1}] Z^k / Z_n`. Larger `n` use the
/// equivalent offspring law and the hitting-time identity
/// `P(d⁺(o)=k | |T|=n) = π_k (k/(n-1)) P(S_{n-1}=n-1-k) / ((1/n) P(S_n=n-1))`.
pub fn root_degree_law(w: &WeightSequence, p: &SeriesProfile, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptyClass(0));
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    if n <= TABLE_LIMIT || p.tau == 0.0 {
        if n > 4 * TABLE_LIMIT {
            return Err(Error::Unsupported(format!("root-degree law of type III weights at n = {n}")));
        }
        let t = PowerTable::new(w, n);
        if !t.ln_z(n).is_finite() {
            return Err(Error::EmptyClass(n));
        }
        return Ok(t.root_degree_law(n));
    }
    let pi = p.offspring_pmf(w, n);
    let conv = ConvTable::new(pi.clone(), n);
    Ok(hitting_time_law(&conv, &pi, n))
}

pub(crate) fn hitting_time_law(conv: &ConvTable, pi: &[f64], n: usize) -> Vec<f64> {
    let sn = conv.pmf(n);
    let sn1 = conv.pmf(n - 1);
    let denom = sn[n - 1] / n as f64;
    let mut law: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                pi[k] * (k as f64 / (n - 1) as f64) * sn1[n - 1 - k] / denom
            }
        })
        .collect();
    // Absorb round-off from the convolutions.
    let s: f64 = law.iter().sum();
    if s > 0.0 {
        law.iter_mut().for_each(|x| *x /= s);
    }
    law
}

/// Tree under construction, grown breadth-first.
struct Arena {
    children: Vec<Vec<usize>>,
    infinite: Vec<bool>,
    truncated: Vec<bool>,
}

impl Arena {
    fn new() -> Self {
        let mut a = Self { children: Vec::new(), infinite: Vec::new(), truncated: Vec::new() };
        a.add();
        a
    }

    fn add(&mut self) -> usize {
        self.children.push(Vec::new());
        self.infinite.push(false);
        self.truncated.push(false);
        self.children.len() - 1
    }

    fn add_children(&mut self, v: usize, k: usize) -> std::ops::Range<usize> {
        let start = self.children.len();
        for _ in 0..k {
            let c = self.add();
            self.children[v].push(c);
        }
        start..start + k
    }

    /// Grow an unconditioned Galton–Watson tree below `v` (optionally down to
    /// `max_depth` levels). Returns `false` if the arena would exceed `cap`.
    fn grow_gw<R: Rng + ?Sized>(
        &mut self,
        v: usize,
        off: &OffspringSampler,
        max_depth: Option<usize>,
        cap: usize,
        rng: &mut R,
    ) -> bool {
        let mut stack = vec![(v, 0usize)];
        while let Some((u, d)) = stack.pop() {
            if max_depth.is_some_and(|m| d >= m) {
                self.truncated[u] = true;
                continue;
            }
            let k = match off.sample(rng) {
                Some(k) => k,
                None => return false,
            };
            if self.children.len() + k > cap {
                return false;
            }
            for c in self.add_children(u, k) {
                stack.push((c, d + 1));
            }
        }
        true
    }

    fn finish(self, spine: &[usize], pointer: Option<usize>, window: usize) -> MarkedTree {
        let (tree, order) = PlaneTree::from_children(&self.children, 0);
        let mut pos = vec![0usize; order.len()];
        for (i, &o) in order.iter().enumerate() {
            pos[o] = i;
        }
        MarkedTree {
            tree,
            infinite: order.iter().map(|&o| self.infinite[o]).collect(),
            truncated: order.iter().map(|&o| self.truncated[o]).collect(),
            spine: spine.iter().map(|&s| pos[s]).collect(),
            window,
            pointer: pointer.map(|p| pos[p]),
        }
    }
}

/// `T̂` cut below `depth`: vertices at depth `≤ depth` have their offspring
/// materialised, their children at depth `depth + 1` are flagged truncated.
pub fn sample_kesten<R: Rng + ?Sized>(
    w: &WeightSequence,
    p: &SeriesProfile,
    depth: usize,
    window: usize,
    rng: &mut R,
) -> Result<MarkedTree> {
    let normal = OffspringSampler::new(w, p)?;
    let special = OffspringSampler::size_biased(w, p)?;
    let mut a = Arena::new();
    let mut spine = vec![0usize];
    let mut cur = 0usize;
    let mut d = 0usize;
    loop {
        match special.sample(rng) {
            Some(k) => {
                let kids = a.add_children(cur, k);
                let next = kids.start + rng.random_range(0..k.max(1));
                for c in kids {
                    if c != next {
                        if !a.grow_gw(c, &normal, Some(depth - d), usize::MAX, rng) {
                            return Err(Error::Unsupported("normal offspring drew infinity".into()));
                        }
                    }
                }
                if d == depth {
                    a.truncated[next] = true;
                    spine.push(next);
                    break;
                }
                spine.push(next);
                cur = next;
                d += 1;
            }
            None => {
                a.infinite[cur] = true;
                for c in a.add_children(cur, window) {
                    if !a.grow_gw(c, &normal, Some(depth - d), usize::MAX, rng) {
                        return Err(Error::Unsupported("normal offspring drew infinity".into()));
                    }
                }
                break;
            }
        }
    }
    Ok(a.finish(&spine, None, window))
}

/// Retries allowed when an unconditioned tree outgrows the size cap.
const RETRIES: usize = 1000;

/// `T*` with `levels` ancestors above the pointed vertex `u_0`; the root of
/// the result is `u_levels`. `cap` bounds the total size.
pub fn sample_tstar<R: Rng + ?Sized>(
    w: &WeightSequence,
    p: &SeriesProfile,
    levels: usize,
    cap: usize,
    rng: &mut R,
) -> Result<MarkedTree> {
    if !p.satisfies(Kind::IAlpha) && !p.satisfies(Kind::Ia) && !p.satisfies(Kind::Ib) {
        return Err(Error::Unsupported("T* needs a type I sequence".into()));
    }
    let normal = OffspringSampler::new(w, p)?;
    let special = OffspringSampler::size_biased(w, p)?;
    for _ in 0..RETRIES {
        // Build top-down: the root is u_levels.
        let mut a = Arena::new();
        let mut spine = vec![0usize];
        let mut cur = 0usize;
        let mut ok = true;
        for _ in 0..levels {
            let Some(k) = special.sample(rng) else {
                ok = false;
                break;
            };
            let kids = a.add_children(cur, k);
            let next = kids.start + rng.random_range(0..k);
            for c in kids {
                if c != next && !a.grow_gw(c, &normal, None, cap, rng) {
                    ok = false;
                }
            }
            if !ok {
                break;
            }
            spine.push(next);
            cur = next;
        }
        if ok && a.grow_gw(cur, &normal, None, cap, rng) {
            return Ok(a.finish(&spine, Some(cur), 0));
        }
    }
    Err(Error::Budget(RETRIES as u64))
}

/// Condensation tree of a type II sequence at size `n`: a spine of finite
/// size-biased vertices (each continuing with probability `ν`) ending in a
/// tip whose degree is `D̃_n`, the root-degree law of `T_n` conditioned on
/// exceeding `Ω_n`. Every other vertex is an ordinary Galton–Watson vertex.
pub fn sample_condensation<R: Rng + ?Sized>(
    w: &WeightSequence,
    p: &SeriesProfile,
    n: usize,
    rng: &mut R,
) -> Result<MarkedTree> {
    if !p.satisfies(Kind::II) {
        return Err(Error::Unsupported("condensation trees need a type II sequence".into()));
    }
    let law = root_degree_law(w, p, n)?;
    let omega = condensation_threshold(n);
    let mut tip: Vec<f64> = law.iter().enumerate().map(|(k, &x)| if k > omega { x } else { 0.0 }).collect();
    let mass: f64 = tip.iter().sum();
    if mass < 1e-12 {
        return Err(Error::Unsupported(format!("Ω_n = {omega} too large for n = {n}")));
    }
    tip.iter_mut().for_each(|x| *x /= mass);
    let normal = OffspringSampler::new(w, p)?;
    let finite: Vec<f64> = p.size_biased(w, n).iter().map(|x| x / p.nu).collect();
    let cap = 100 * n.max(100);
    for _ in 0..RETRIES {
        let mut a = Arena::new();
        let mut spine = vec![0usize];
        let mut cur = 0usize;
        let mut ok = true;
        while rng.random::<f64>() < p.nu {
            let Some(k) = pick(&finite, rng) else {
                return Err(Error::Indeterminate("size-biased law has no mass".into()));
            };
            let kids = a.add_children(cur, k);
            let next = kids.start + rng.random_range(0..k);
            for c in kids {
                if c != next && !a.grow_gw(c, &normal, None, cap, rng) {
                    ok = false;
                }
            }
            spine.push(next);
            cur = next;
            if !ok {
                break;
            }
        }
        if !ok {
            continue;
        }
        let d = pick(&tip, rng).expect("normalised tip law");
        a.infinite[cur] = true;
        for c in a.add_children(cur, d) {
            if !a.grow_gw(c, &normal, None, cap, rng) {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(a.finish(&spine, None, d));
        }
    }
    Err(Error::Budget(RETRIES as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{classify, preset};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn threshold() {
        assert_eq!(condensation_threshold(10_000), 85);
    }

    #[test]
    fn laws_agree_between_methods() {
        let w = preset("uniform-plane").unwrap();
        let p = classify(&w).unwrap();
        let n = 700;
        let t = PowerTable::new(&w, n).root_degree_law(n);
        let conv = ConvTable::new(p.offspring_pmf(&w, n), n);
        let h = hitting_time_law(&conv, &p.offspring_pmf(&w, n), n);
        for k in 0..20 {
            assert!((t[k] - h[k]).abs() < 1e-9, "k = {k}: {} vs {}", t[k], h[k]);
        }
    }

    #[test]
    fn kesten_depth_zero() {
        let w = preset("uniform-plane").unwrap();
        let p = classify(&w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let t = sample_kesten(&w, &p, 0, DEFAULT_WINDOW, &mut rng).unwrap();
            assert!(t.tree.is_valid());
            assert!(t.tree.outdeg[0] >= 1);
            assert_eq!(t.tree.len(), 1 + t.tree.outdeg[0]);
            assert!(t.truncated[1..].iter().all(|&x| x));
        }
    }

    #[test]
    fn tstar_levels_zero_is_pointed_at_root() {
        let w = preset("uniform-plane").unwrap();
        let p = classify(&w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = sample_tstar(&w, &p, 0, 1 << 20, &mut rng).unwrap();
        assert_eq!(t.pointer, Some(0));
        assert_eq!(t.spine, vec![0]);
    }

    #[test]
    fn condensation_tip_exceeds_threshold() {
        let w = preset("excool").unwrap();
        let p = classify(&w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 2000;
        for _ in 0..20 {
            let t = sample_condensation(&w, &p, n, &mut rng).unwrap();
            let tip = *t.spine.last().unwrap();
            assert!(t.infinite[tip]);
            assert!(t.tree.outdeg[tip] > condensation_threshold(n));
        }
    }
}
