//! Empirical laws, total variation and Kolmogorov–Smirnov distances.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts of observed values. Merging two censuses adds their counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDistribution<K: Ord> {
    pub counts: BTreeMap<K, u64>,
    pub total: u64,
}

impl<K: Ord> Default for EmpiricalDistribution<K> {
    fn default() -> Self {
        Self { counts: BTreeMap::new(), total: 0 }
    }
}

impl<K: Ord> FromIterator<K> for EmpiricalDistribution<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut d = Self::default();
        for k in iter {
            d.add(k);
        }
        d
    }
}

impl<K: Ord> EmpiricalDistribution<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, k: K) {
        self.add_n(k, 1);
    }

    pub fn add_n(&mut self, k: K, c: u64) {
        *self.counts.entry(k).or_insert(0) += c;
        self.total += c;
    }

    pub fn merge(mut self, other: Self) -> Self {
        for (k, c) in other.counts {
            self.add_n(k, c);
        }
        self
    }

    pub fn prob(&self, k: &K) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.get(k).copied().unwrap_or(0) as f64 / self.total as f64
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    /// Distance to a law given as `(value, probability)` pairs. Mass the law
    /// leaves unassigned counts as one extra atom that no observation hits.
    pub fn tv_to<'a>(&self, law: impl IntoIterator<Item = (&'a K, f64)>) -> Result<f64>
    where
        K: 'a,
    {
        if self.total == 0 {
            return Err(Error::InvalidStructure("empty distribution".into()));
        }
        let mut seen = 0.0;
        let mut sum = 0.0;
        let mut covered = 0u64;
        for (k, p) in law {
            let c = self.counts.get(k).copied().unwrap_or(0);
            covered += c;
            sum += (c as f64 / self.total as f64 - p).abs();
            seen += p;
        }
        sum += (self.total - covered) as f64 / self.total as f64;
        sum += (1.0 - seen).max(0.0);
        Ok(0.5 * sum)
    }
}

impl EmpiricalDistribution<usize> {
    /// [`EmpiricalDistribution::tv_to`] for a law on `0..pmf.len()`.
    pub fn tv_to_pmf(&self, pmf: &[f64]) -> Result<f64> {
        let keys: Vec<usize> = (0..pmf.len()).collect();
        self.tv_to(keys.iter().zip(pmf.iter().copied()))
    }

    /// Relative frequencies on `0..=max`.
    pub fn pmf(&self) -> Vec<f64> {
        let len = self.counts.keys().next_back().map_or(0, |&k| k + 1);
        (0..len).map(|k| self.prob(&k)).collect()
    }
}

impl<K: Ord + Display> EmpiricalDistribution<K> {
    /// `code,count` lines with a header.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "code,count")?;
        for (k, c) in &self.counts {
            writeln!(w, "{k},{c}")?;
        }
        Ok(())
    }
}

/// `½ Σ |a(x) − b(x)|` over the union of the supports.
pub fn tv_distance<K: Ord>(a: &EmpiricalDistribution<K>, b: &EmpiricalDistribution<K>) -> Result<f64> {
    if a.total == 0 || b.total == 0 {
        return Err(Error::InvalidStructure("empty distribution".into()));
    }
    let mut sum = 0.0;
    for (k, &c) in &a.counts {
        sum += (c as f64 / a.total as f64 - b.prob(k)).abs();
    }
    for (k, &c) in &b.counts {
        if !a.counts.contains_key(k) {
            sum += c as f64 / b.total as f64;
        }
    }
    Ok(0.5 * sum)
}

/// TV distance between two probability vectors on the same index set.
pub fn tv_pmf(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    0.5 * (0..n).map(|i| (a.get(i).unwrap_or(&0.0) - b.get(i).unwrap_or(&0.0)).abs()).sum::<f64>()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_against(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// `exp(−(c/α) x^{−α})` for `x > 0`.
pub fn frechet_cdf(x: f64, c: f64, alpha: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (-(c / alpha) * x.powf(-alpha)).exp()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// `P(X ≥ x)` at each distinct observed value, increasing in `x`.
pub fn survival(xs: &[f64]) -> Vec<(f64, f64)> {
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        out.push((v[i], (v.len() - i) as f64 / n));
        let x = v[i];
        while i < v.len() && v[i] == x {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_examples() {
        let a: EmpiricalDistribution<char> = ['a', 'b'].into_iter().collect();
        let b: EmpiricalDistribution<char> = ['a'].into_iter().collect();
        let c: EmpiricalDistribution<char> = ['c'].into_iter().collect();
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&b, &c).unwrap(), 1.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 0.5);
        assert!(tv_distance(&a, &EmpiricalDistribution::new()).is_err());
    }

    #[test]
    fn tv_against_truncated_law() {
        let d: EmpiricalDistribution<usize> = [0, 0, 1, 5].into_iter().collect();
        // Law (½, ¼) with ¼ unassigned: |½−½| + |¼−¼| + ¼ (value 5) + ¼ (missing).
        assert!((d.tv_to_pmf(&[0.5, 0.25]).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn merge_is_additive() {
        let a: EmpiricalDistribution<usize> = [1, 2].into_iter().collect();
        let b: EmpiricalDistribution<usize> = [2, 3].into_iter().collect();
        let m = a.merge(b);
        assert_eq!(m.total, 4);
        assert_eq!(m.counts[&2], 2);
    }

    #[test]
    fn ks_statistics() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[2.5]) - 0.5).abs() < 1e-15);
        // Uniform grid midpoints against the uniform CDF.
        let xs: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        assert!((ks_against(&xs, |x| x) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn frechet_quantiles() {
        // The median solves (c/α) x^{−α} = ln 2.
        let (c, a) = (2.0, 1.5);
        let med = ((c / a) / 2f64.ln()).powf(1.0 / a);
        assert!((frechet_cdf(med, c, a) - 0.5).abs() < 1e-12);
        assert_eq!(frechet_cdf(0.0, c, a), 0.0);
    }

    #[test]
    fn survival_steps() {
        let s = survival(&[1.0, 1.0, 2.0, 4.0]);
        assert_eq!(s, vec![(1.0, 1.0), (2.0, 0.5), (4.0, 0.25)]);
    }
}
