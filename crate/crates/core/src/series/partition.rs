use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::source::WeightSequence;
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, ratio_to_f64};

/// Coefficients `Z_0, Z_1, ..., Z_N` of a generating function.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientTable {
    pub values: Vec<f64>,
}

/// Log-space table of `[z^m] Z^k` for `0 ≤ k ≤ m ≤ N` (plus `k = 0`).
///
/// This is the workhorse of the recursive sampler: the root of a tree of
/// size `m + 1` has `k` children with probability `ω_k [z^m] Z^k / Z_{m+1}`,
/// and the sizes of `k` fringe subtrees split through the same table.
#[derive(Debug, Clone)]
pub struct PowerTable {
    n: usize,
    /// `ln ω_k` for `k ≤ N`.
    pub ln_w: Vec<f64>,
    /// `rows[k][m] = ln [z^m] Z^k`.
    rows: Vec<Vec<f64>>,
}

impl PowerTable {
    /// Build the table for degrees up to `N`, which covers `Z_1..Z_N`.
    pub fn new(w: &WeightSequence, n: usize) -> Self {
        let ln_w = w.ln_coeffs(n + 1);
        let ninf = f64::NEG_INFINITY;
        // rows[k][m] for k in 0..=n, m in 0..=n
        let mut rows = vec![vec![ninf; n + 1]; n + 1];
        rows[0][0] = 0.0;
        let mut buf = Vec::with_capacity(n + 1);
        // ln Z_m, Z_0 = 0.
        let mut lz = vec![ninf; n + 1];
        for m in 1..=n {
            // Z_m = Σ_k ω_k [z^{m-1}] Z^k; rows[k][m-1] for k ≥ 1 are complete.
            buf.clear();
            for k in 0..m {
                if ln_w[k].is_finite() && rows[k][m - 1].is_finite() {
                    buf.push(ln_w[k] + rows[k][m - 1]);
                }
            }
            lz[m] = log_sum_exp(&buf);
            rows[1][m] = lz[m];
            // Extend powers k ≥ 2 at degree m: [z^m] Z^k = Σ_i Z_i [z^{m-i}] Z^{k-1}.
            for k in 2..=m {
                buf.clear();
                for i in 1..=(m - k + 1) {
                    let a = lz[i];
                    let b = rows[k - 1][m - i];
                    if a.is_finite() && b.is_finite() {
                        buf.push(a + b);
                    }
                }
                rows[k][m] = log_sum_exp(&buf);
            }
        }
        Self { n, ln_w, rows }
    }

    pub fn max_index(&self) -> usize {
        self.n
    }

    /// `ln [z^m] Z^k`.
    pub fn ln_power(&self, k: usize, m: usize) -> f64 {
        if k > self.n || m > self.n {
            return f64::NEG_INFINITY;
        }
        self.rows[k][m]
    }

    /// `ln Z_n`.
    pub fn ln_z(&self, n: usize) -> f64 {
        self.ln_power(1, n)
    }

    /// Root-degree law of a tree with `n` vertices: `ω_k [z^{n-1}] Z^k / Z_n`.
    pub fn root_degree_law(&self, n: usize) -> Vec<f64> {
        let lz = self.ln_z(n);
        (0..n)
            .map(|k| {
                let l = self.ln_w[k] + self.ln_power(k, n - 1);
                if l.is_finite() { (l - lz).exp() } else { 0.0 }
            })
            .collect()
    }
}

/// `Z_1..Z_N` in double precision; fails with the first overflowing index.
pub fn partition_function(w: &WeightSequence, n: usize) -> Result<CoefficientTable> {
    let table = PowerTable::new(w, n);
    let mut values = vec![0.0; n + 1];
    for (m, v) in values.iter_mut().enumerate().skip(1) {
        let x = table.ln_z(m).exp();
        if !x.is_finite() {
            return Err(Error::Overflow(m));
        }
        *v = x;
    }
    Ok(CoefficientTable { values })
}

/// Exact `Z_1..Z_N` for rational weights `ω_0..ω_N`.
pub fn partition_function_exact(w: &[BigRational], n: usize) -> Vec<BigRational> {
    let zero = BigRational::zero();
    let wk = |k: usize| w.get(k).cloned().unwrap_or_else(BigRational::zero);
    let mut rows = vec![vec![zero.clone(); n + 1]; n + 1];
    rows[0][0] = BigRational::from_integer(1.into());
    let mut z = vec![zero.clone(); n + 1];
    for m in 1..=n {
        let mut acc = zero.clone();
        for k in 0..m {
            if !rows[k][m - 1].is_zero() {
                acc += wk(k) * &rows[k][m - 1];
            }
        }
        z[m] = acc.clone();
        rows[1][m] = acc;
        for k in 2..=m {
            let mut s = zero.clone();
            for i in 1..=(m - k + 1) {
                s += &z[i] * &rows[k - 1][m - i];
            }
            rows[k][m] = s;
        }
    }
    z
}

/// Finite-`n` checks of the ratio and convolution limits that characterise
/// subexponential sequences: `g_n / g_{n+d} → r^d` and `[z^n]g² / g_n → 2 g(r)`.
#[derive(Debug, Clone, Serialize)]
pub struct RatioDiagnostics {
    pub shift_ratios: Vec<f64>,
    pub convolution_ratios: Vec<f64>,
}

pub fn ratio_diagnostics(g: &[f64], d: usize) -> RatioDiagnostics {
    let shift_ratios = (0..g.len().saturating_sub(d))
        .map(|n| if g[n + d] != 0.0 { g[n] / g[n + d] } else { f64::NAN })
        .collect();
    let convolution_ratios = (0..g.len())
        .map(|n| {
            let conv: f64 = (0..=n).map(|i| g[i] * g[n - i]).sum();
            if g[n] != 0.0 { conv / g[n] } else { f64::NAN }
        })
        .collect();
    RatioDiagnostics { shift_ratios, convolution_ratios }
}

/// Double-precision view of an exact table.
pub fn exact_to_f64(z: &[BigRational]) -> Vec<f64> {
    z.iter().map(ratio_to_f64).collect()
}
