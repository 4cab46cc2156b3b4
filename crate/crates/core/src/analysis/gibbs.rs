//! Gibbs partitions of composite structures and the starter ratio of a
//! coefficient sequence.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;
use crate::series::CoefficientTable;
use crate::species::{Expr, FixedSampler, Structure};

/// The partition of `0..n` induced by one `(F ∘ G)`-structure.
#[derive(Clone, Debug, Serialize)]
pub struct GibbsPartition {
    /// Component sizes, largest first.
    pub sizes: Vec<usize>,
    /// Labels of each component, in the order of `sizes`.
    pub blocks: Vec<Vec<u32>>,
    /// The `G`-structure on each component, in the order of `sizes`.
    pub components: Vec<Structure>,
    /// The `F`-structure on the component indices as sampled.
    pub outer: Structure,
}

/// Reusable sampler for `(outer ∘ inner)[n]`.
#[derive(Debug)]
pub struct GibbsSampler {
    sampler: FixedSampler,
    n: usize,
}

impl GibbsSampler {
    pub fn new(outer: &Expr, inner: &Expr, n: usize) -> Result<Self> {
        let e = Expr::subst(outer.clone(), inner.clone())?;
        let sampler = FixedSampler::new(&e, n)?;
        if sampler.ln_coefficient(n) == f64::NEG_INFINITY {
            return Err(Error::EmptyClass(n));
        }
        Ok(Self { sampler, n })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GibbsPartition> {
        let s = self.sampler.sample(self.n, rng)?;
        let Structure::Subst { outer, parts } = s else {
            return Err(Error::InvalidStructure("expected a composite structure".into()));
        };
        let mut comps: Vec<(Vec<u32>, Structure)> = parts
            .into_iter()
            .map(|p| {
                let mut a = p.atoms();
                a.sort_unstable();
                (a, p)
            })
            .collect();
        comps.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(GibbsPartition {
            sizes: comps.iter().map(|c| c.0.len()).collect(),
            blocks: comps.iter().map(|c| c.0.clone()).collect(),
            components: comps.into_iter().map(|c| c.1).collect(),
            outer: *outer,
        })
    }
}

/// One weight-proportional `(outer ∘ inner)`-structure on `0..n`.
pub fn gibbs_sample<R: Rng + ?Sized>(outer: &Expr, inner: &Expr, n: usize, rng: &mut R) -> Result<GibbsPartition> {
    GibbsSampler::new(outer, inner, n)?.sample(rng)
}

/// `Σ a_{i_1} ⋯ a_{i_k} / a_{n-k+1}` over compositions `i_1 + … + i_k = n`
/// with every part below `n - k + 1`. It tends to zero for the
/// subexponential sequences behind a giant component. A zero denominator
/// gives `+∞`; the sequence then lives on a sublattice that misses `n - k + 1`.
pub fn starter_ratio(a: &CoefficientTable, n: usize, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidStructure("starter ratio needs k ≥ 2".into()));
    }
    if n + 1 < k || a.values.len() <= n {
        return Err(Error::InvalidStructure(format!("table of length {} too short for n = {n}", a.values.len())));
    }
    let top = n + 1 - k;
    let ln: Vec<f64> = a.values[..top].iter().map(|&x| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY }).collect();
    // cur[m] = ln Σ over j-part compositions of m with parts < top.
    let mut cur: Vec<f64> = (0..=n).map(|m| if m < top { ln[m] } else { f64::NEG_INFINITY }).collect();
    for _ in 1..k {
        let mut next = vec![f64::NEG_INFINITY; n + 1];
        let mut buf = Vec::new();
        for (m, slot) in next.iter_mut().enumerate() {
            buf.clear();
            for i in 0..top.min(m + 1) {
                let x = ln[i] + cur[m - i];
                if x > f64::NEG_INFINITY {
                    buf.push(x);
                }
            }
            if !buf.is_empty() {
                *slot = log_sum_exp(&buf);
            }
        }
        cur = next;
    }
    let den = a.values[top];
    if den <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((cur[n] - den.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(v: Vec<f64>) -> CoefficientTable {
        CoefficientTable { values: v }
    }

    #[test]
    fn starter_ratio_by_hand() {
        let t = table(vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(starter_ratio(&t, 2, 2).unwrap(), 0.0);
        // a_i = 1: the only split of 4 into two parts below 3 is (2, 2).
        let t = table(vec![1.0; 10]);
        assert!((starter_ratio(&t, 4, 2).unwrap() - 1.0).abs() < 1e-12);
        // Three parts below 2 sum to at most 3.
        assert_eq!(starter_ratio(&t, 4, 3).unwrap(), 0.0);
    }

    #[test]
    fn factorial_ratio_decreases() {
        let f: Vec<f64> = (0..=20).map(|i| (1..=i).map(|j| j as f64).product()).collect();
        let t = table(f.clone());
        let r10 = starter_ratio(&t, 10, 2).unwrap();
        let r20 = starter_ratio(&t, 20, 2).unwrap();
        let direct: f64 = (2..=8).map(|i| f[i] * f[10 - i]).sum::<f64>() / f[9];
        assert!((r10 - direct).abs() < 1e-9 * direct);
        assert!(r20 < r10);
    }
}
