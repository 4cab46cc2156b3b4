use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::offspring::OffspringSampler;
use super::{cycle_shift, PlaneTree};
use crate::error::{Error, Result};
use crate::numeric::convolve_pmf;
use crate::series::{PowerTable, SeriesProfile, WeightSequence};
use crate::species::sample::{pick, pick_ln};

/// Sampling method for `P(T_n = T) = ω(T)/Z_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    /// i.i.d. degrees conditioned on their sum, then the cyclic shift.
    CycleLemma,
    /// Galton–Watson trees until one has exactly `n` vertices.
    RejectionGW,
    /// Root degree and subtree sizes from the `Z`-table.
    RecursiveZ,
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" | "cycle-lemma" | "CycleLemma" => Ok(Backend::CycleLemma),
            "rejection" | "gw" | "RejectionGW" => Ok(Backend::RejectionGW),
            "recursive" | "z" | "RecursiveZ" => Ok(Backend::RecursiveZ),
            other => Err(Error::Unknown { kind: "backend", name: other.into() }),
        }
    }
}

/// Laws of `S_m = ξ_1 + … + ξ_m` truncated to `0..n`, memoised along the
/// halving tree `m → (⌊m/2⌋, ⌈m/2⌉)`.
#[derive(Debug)]
pub(crate) struct ConvTable {
    len: usize,
    pmfs: Mutex<BTreeMap<usize, Arc<Vec<f64>>>>,
}

impl ConvTable {
    pub(crate) fn new(pi: Vec<f64>, len: usize) -> Self {
        let mut base = pi;
        base.resize(len, 0.0);
        let mut map = BTreeMap::new();
        map.insert(1, Arc::new(base));
        Self { len, pmfs: Mutex::new(map) }
    }

    pub(crate) fn pmf(&self, m: usize) -> Arc<Vec<f64>> {
        if let Some(p) = self.pmfs.lock().expect("lock").get(&m) {
            return p.clone();
        }
        let out = if m == 0 {
            let mut v = vec![0.0; self.len];
            v[0] = 1.0;
            Arc::new(v)
        } else {
            let a = self.pmf(m / 2);
            let b = self.pmf(m - m / 2);
            Arc::new(convolve_pmf(&a, &b, self.len))
        };
        self.pmfs.lock().expect("lock").insert(m, out.clone());
        out
    }

    /// Split a total `s` over `m` variables according to the conditional law.
    pub(crate) fn split<R: Rng + ?Sized>(&self, m: usize, s: usize, rng: &mut R, out: &mut Vec<usize>) -> bool {
        if m == 1 {
            out.push(s);
            return true;
        }
        let a = m / 2;
        let b = m - a;
        let pa = self.pmf(a);
        let pb = self.pmf(b);
        let w: Vec<f64> = (0..=s).map(|j| pa[j] * pb[s - j]).collect();
        let Some(j) = pick(&w, rng) else { return false };
        self.split(a, j, rng, out) && self.split(b, s - j, rng, out)
    }
}

#[derive(Debug)]
enum Strategy {
    Single,
    Multinomial { pi: Vec<f64>, tails: Vec<f64> },
    Convolution(Arc<ConvTable>),
    Gw(OffspringSampler),
    Recursive(Arc<PowerTable>),
}

/// Reusable sampler for simply generated trees of a fixed size.
#[derive(Debug)]
pub struct SgtSampler {
    n: usize,
    backend: Backend,
    strategy: Strategy,
    /// Attempts allowed per tree for the rejection-based strategies.
    pub budget: u64,
}

impl SgtSampler {
    pub fn new(w: &WeightSequence, p: &SeriesProfile, n: usize, backend: Backend) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyClass(0));
        }
        let strategy = if n == 1 {
            Strategy::Single
        } else {
            match backend {
                Backend::RecursiveZ => {
                    let t = PowerTable::new(w, n);
                    if !t.ln_z(n).is_finite() {
                        return Err(Error::EmptyClass(n));
                    }
                    Strategy::Recursive(Arc::new(t))
                }
                Backend::CycleLemma | Backend::RejectionGW => {
                    if p.tau == 0.0 {
                        return Err(Error::Unsupported(
                            "type III weights have no equivalent offspring law; use RecursiveZ".into(),
                        ));
                    }
                    if (n as u64 - 1) % p.span != 0 {
                        return Err(Error::EmptyClass(n));
                    }
                    if backend == Backend::RejectionGW {
                        Strategy::Gw(OffspringSampler::new(w, p)?)
                    } else {
                        let pi = p.offspring_pmf(w, n);
                        if p.mu < 1.0 - 1e-9 {
                            Strategy::Convolution(Arc::new(ConvTable::new(pi, n)))
                        } else {
                            let mut tails = vec![0.0; n + 1];
                            for k in (0..n).rev() {
                                tails[k] = tails[k + 1] + pi[k];
                            }
                            Strategy::Multinomial { pi, tails }
                        }
                    }
                }
            }
        };
        Ok(Self { n, backend, strategy, budget: 10_000_000 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }


    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PlaneTree> {
        let n = self.n;
        match &self.strategy {
            Strategy::Single => Ok(PlaneTree::single()),
            Strategy::Multinomial { pi, tails } => {
                for _ in 0..self.budget {
                    if let Some(counts) = multinomial_attempt(pi, tails, n, rng) {
                        let mut deg = Vec::with_capacity(n);
                        for (k, c) in counts {
                            deg.extend(std::iter::repeat_n(k, c));
                        }
                        deg.shuffle(rng);
                        return Ok(rotate(deg));
                    }
                }
                Err(Error::Budget(self.budget))
            }
            Strategy::Convolution(t) => {
                for _ in 0..1000 {
                    let mut deg = Vec::with_capacity(n);
                    if t.split(n, n - 1, rng, &mut deg) {
                        return Ok(rotate(deg));
                    }
                }
                Err(Error::Budget(1000))
            }
            Strategy::Gw(off) => {
                let mut deg = Vec::with_capacity(n);
                for _ in 0..self.budget {
                    deg.clear();
                    let mut open: i64 = 1;
                    while open > 0 && deg.len() < n {
                        let k = off.sample(rng).unwrap_or(usize::MAX);
                        if k >= n {
                            break;
                        }
                        deg.push(k);
                        open += k as i64 - 1;
                    }
                    if open == 0 && deg.len() == n {
                        return Ok(PlaneTree { outdeg: deg });
                    }
                }
                Err(Error::Budget(self.budget))
            }
            Strategy::Recursive(t) => Ok(recursive(t, n, rng)),
        }
    }
}

fn multinomial_attempt<R: Rng + ?Sized>(pi: &[f64], tails: &[f64], n: usize, rng: &mut R) -> Option<Vec<(usize, usize)>> {
    let mut left = n as u64;
    let mut total = 0usize;
    let mut counts = Vec::new();
    for k in 0..pi.len() {
        if left == 0 {
            break;
        }
        if pi[k] == 0.0 {
            continue;
        }
        let p = if tails[k] > 0.0 { (pi[k] / tails[k]).min(1.0) } else { 1.0 };
        let c = if p >= 1.0 { left } else { Binomial::new(left, p).expect("valid binomial").sample(rng) };
        if c > 0 {
            total += k * c as usize;
            if total > n - 1 {
                return None;
            }
            counts.push((k, c as usize));
            left -= c;
        }
    }
    (left == 0 && total == n - 1).then_some(counts)
}

fn rotate(mut deg: Vec<usize>) -> PlaneTree {
    let inc: Vec<i64> = deg.iter().map(|&d| d as i64 - 1).collect();
    let s = cycle_shift(&inc);
    deg.rotate_left(s);
    PlaneTree { outdeg: deg }
}

fn recursive<R: Rng + ?Sized>(t: &PowerTable, n: usize, rng: &mut R) -> PlaneTree {
    let mut out = Vec::with_capacity(n);
    let mut stack = vec![n];
    let mut w = Vec::new();
    let mut sizes = Vec::new();
    while let Some(m) = stack.pop() {
        w.clear();
        w.extend((0..m).map(|k| t.ln_w[k] + t.ln_power(k, m - 1)));
        let k = pick_ln(&w, rng).expect("positive Z_m");
        out.push(k);
        sizes.clear();
        let mut rem = m - 1;
        for i in 0..k {
            let left = k - i;
            w.clear();
            w.extend((1..=rem + 1 - left).map(|j| t.ln_z(j) + t.ln_power(left - 1, rem - j)));
            let j = 1 + pick_ln(&w, rng).expect("positive split");
            sizes.push(j);
            rem -= j;
        }
        stack.extend(sizes.iter().rev());
    }
    PlaneTree { outdeg: out }
}

/// One tree drawn from `ω(T)/Z_n` with the chosen backend.
pub fn sample_sgt<R: Rng + ?Sized>(
    w: &WeightSequence,
    p: &SeriesProfile,
    n: usize,
    backend: Backend,
    rng: &mut R,
) -> Result<PlaneTree> {
    SgtSampler::new(w, p, n, backend)?.sample(rng)
}
