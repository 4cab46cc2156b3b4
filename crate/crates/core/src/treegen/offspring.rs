use rand::Rng;

use crate::error::{Error, Result};
use crate::series::{SeriesProfile, WeightSequence};

/// Inverse-CDF sampler for `π` (or the size-biased `kπ_k`), with an exact
/// on-the-fly continuation past the tabulated range.
#[derive(Clone, Debug)]
pub struct OffspringSampler {
    cdf: Vec<f64>,
    ln_w: Vec<f64>,
    ln_tau: f64,
    ln_phi: f64,
    biased: bool,
    w: WeightSequence,
    /// Mass of the (possible) atom at infinity.
    pub infinity: f64,
}

const TABLE: usize = 1 << 12;

impl OffspringSampler {
    fn build(w: &WeightSequence, p: &SeriesProfile, biased: bool) -> Result<Self> {
        if p.tau == 0.0 {
            return Err(Error::Unsupported("no equivalent probability weights (type III)".into()));
        }
        let ln_w = w.ln_coeffs(TABLE);
        let ln_tau = p.tau.ln();
        let ln_phi = p.phi_tau.ln();
        let mut cdf = Vec::with_capacity(TABLE);
        let mut acc = 0.0;
        for (k, l) in ln_w.iter().enumerate() {
            let mut x = (l + k as f64 * ln_tau - ln_phi).exp();
            if biased {
                x *= k as f64;
            }
            acc += x;
            cdf.push(acc);
        }
        let infinity = if biased { (1.0 - p.mu).max(0.0) } else { 0.0 };
        Ok(Self { cdf, ln_w, ln_tau, ln_phi, biased, w: w.clone(), infinity })
    }

    /// Offspring law `π`.
    pub fn new(w: &WeightSequence, p: &SeriesProfile) -> Result<Self> {
        Self::build(w, p, false)
    }

    /// Size-biased law `kπ_k`, with mass `1 - μ` at infinity.
    pub fn size_biased(w: &WeightSequence, p: &SeriesProfile) -> Result<Self> {
        Self::build(w, p, true)
    }

    fn term(&self, k: usize) -> f64 {
        let l = if k < self.ln_w.len() { self.ln_w[k] } else { self.w.ln_coeff(k) };
        let x = (l + k as f64 * self.ln_tau - self.ln_phi).exp();
        if self.biased {
            x * k as f64
        } else {
            x
        }
    }

    /// A draw; `None` is the infinite value of the size-biased law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let u: f64 = rng.random();
        if u >= 1.0 - self.infinity {
            return None;
        }
        let last = *self.cdf.last().unwrap_or(&0.0);
        if u < last {
            return Some(self.cdf.partition_point(|&c| c <= u));
        }
        // Continue past the table.
        let mut acc = last;
        let mut k = self.cdf.len();
        let bound = self.w.support_bound().unwrap_or(usize::MAX);
        loop {
            if k > bound {
                // Rounding left a sliver of mass; give it to the last support point.
                return Some(bound.min(self.cdf.len() - 1));
            }
            acc += self.term(k);
            if u < acc {
                return Some(k);
            }
            k += 1;
            if k > (1 << 24) {
                return Some(k);
            }
        }
    }
}
