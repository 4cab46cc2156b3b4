use serde::{Serialize, Serializer};

use super::source::WeightSequence;
use crate::error::{Error, Result};
use crate::numeric::gcd;

/// Variance above which a finite truncated sum is read as divergent.
pub const VARIANCE_CUTOFF: f64 = 1e12;

/// Regime of a weight sequence.
///
/// `Ia`/`Ib` split type I by `ν > 1` versus `ν = 1`, while `IAlpha`/`IBeta`
/// split it by finite versus infinite offspring variance. The primary kind
/// reported by [`classify`] is `Ia` when `ν > 1` and `IAlpha`/`IBeta` when
/// `ν = 1`; [`SeriesProfile::satisfies`] answers the overlapping queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    Ia,
    Ib,
    IAlpha,
    IBeta,
    II,
    III,
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("nan")
    }
}

/// Everything the samplers and the limit objects need to know about `φ`.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesProfile {
    #[serde(serialize_with = "ser_f64")]
    pub rho_phi: f64,
    #[serde(serialize_with = "ser_f64")]
    pub tau: f64,
    #[serde(serialize_with = "ser_f64")]
    pub nu: f64,
    pub mu: f64,
    #[serde(serialize_with = "ser_f64")]
    pub sigma2: f64,
    pub span: u64,
    pub kind: Kind,
    /// `φ(τ)`.
    #[serde(serialize_with = "ser_f64")]
    pub phi_tau: f64,
    /// Offspring law `π_k = τ^k ω_k / φ(τ)`, truncated.
    #[serde(skip)]
    pub pi: Vec<f64>,
    /// Probability mass beyond the truncation of `pi`.
    pub pi_tail: f64,
}

impl SeriesProfile {
    pub fn satisfies(&self, kind: Kind) -> bool {
        let finite_var = self.sigma2.is_finite();
        match kind {
            Kind::Ia => self.nu > 1.0,
            Kind::Ib => self.nu == 1.0,
            Kind::IAlpha => self.nu >= 1.0 && finite_var,
            Kind::IBeta => self.nu == 1.0 && !finite_var,
            Kind::II => self.nu > 0.0 && self.nu < 1.0,
            Kind::III => self.nu == 0.0,
        }
    }

    /// Offspring probabilities `π_0..π_{len-1}` computed afresh from `w`.
    pub fn offspring_pmf(&self, w: &WeightSequence, len: usize) -> Vec<f64> {
        if self.tau == 0.0 {
            let mut v = vec![0.0; len];
            if len > 0 {
                v[0] = 1.0;
            }
            return v;
        }
        let lt = self.tau.ln();
        let lp = self.phi_tau.ln();
        w.ln_coeffs(len)
            .iter()
            .enumerate()
            .map(|(k, l)| (l + k as f64 * lt - lp).exp())
            .collect()
    }

    /// `P(ξ̂ = k) = k π_k` for `k < len`; the rest of the mass, `1 - μ`, sits at infinity.
    pub fn size_biased(&self, w: &WeightSequence, len: usize) -> Vec<f64> {
        self.offspring_pmf(w, len)
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .collect()
    }
}

/// Sum `Σ a_k` with adaptive truncation.
///
/// Dyadic block sums are extrapolated geometrically, which is exact in the
/// limit both for geometric decay and for power laws `k^{-β}`.
fn adaptive_sum(term: impl Fn(usize) -> f64, support: Option<usize>, tol: f64) -> Result<(f64, f64)> {
    if let Some(b) = support {
        let s: f64 = (0..=b).map(&term).sum();
        return Ok((s, 0.0));
    }
    const CAP: usize = 1 << 22;
    let mut sum: f64 = (0..16).map(&term).sum();
    let mut lo = 16usize;
    let mut prev_block = f64::NAN;
    let mut prev_q = f64::NAN;
    let mut growth = 0;
    while lo < CAP {
        let hi = 2 * lo;
        let block: f64 = (lo..hi).map(&term).sum();
        if !block.is_finite() {
            return Ok((f64::INFINITY, 0.0));
        }
        sum += block;
        lo = hi;
        if block == 0.0 {
            if prev_block == 0.0 {
                return Ok((sum, 0.0));
            }
            prev_block = 0.0;
            continue;
        }
        if prev_block.is_nan() || prev_block == 0.0 {
            prev_block = block;
            continue;
        }
        let q = block / prev_block;
        prev_block = block;
        if q >= 1.0 {
            growth += 1;
            if growth >= 3 && lo >= 1024 {
                return Ok((f64::INFINITY, 0.0));
            }
            prev_q = q;
            continue;
        }
        growth = 0;
        let tail = block * q / (1.0 - q);
        let drift = if prev_q.is_nan() { 1.0 } else { ((q - prev_q) / (1.0 - q)).abs().min(1.0) };
        prev_q = q;
        let err = tail * drift + f64::EPSILON * sum.abs();
        if tail <= tol * sum.abs().max(1.0) {
            return Ok((sum + tail, err));
        }
        if lo >= CAP {
            if q > 0.999 {
                return Ok((f64::INFINITY, 0.0));
            }
            return Ok((sum + tail, err));
        }
    }
    Err(Error::Indeterminate("series truncation did not settle".into()))
}

/// Falling factorial `k (k-1) ... (k-j+1)`.
fn falling(k: usize, j: usize) -> f64 {
    (0..j).map(|i| k as f64 - i as f64).product()
}

/// `φ^{(j)}(t)` with an error bound, `j ≤ 2`.
pub fn eval_phi_derivative(w: &WeightSequence, t: f64, j: usize, tol: f64) -> Result<(f64, f64)> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::OutOfRange { t, radius: f64::NAN });
    }
    if let Some(r) = w.source().declared_radius() {
        if t > r {
            return Err(Error::OutOfRange { t, radius: r });
        }
    }
    if j <= 2 {
        if let Some(c) = w.source().closed_form(t) {
            return Ok((c[j], 0.0));
        }
    }
    if t == 0.0 {
        return Ok((if j == 0 { w.coeff(0) } else if j == 1 { w.coeff(1) } else { 2.0 * w.coeff(2) }, 0.0));
    }
    let lt = t.ln();
    let term = |k: usize| {
        if k < j {
            return 0.0;
        }
        let l = w.ln_coeff(k);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            falling(k, j) * (l + (k - j) as f64 * lt).exp()
        }
    };
    adaptive_sum(term, w.support_bound(), tol)
}

/// `φ(t)` with an error bound; `+inf` once divergence is certified.
pub fn eval_phi(w: &WeightSequence, t: f64, tol: f64) -> Result<(f64, f64)> {
    eval_phi_derivative(w, t, 0, tol)
}

/// `ψ(t) = t φ'(t) / φ(t)`.
pub fn psi(w: &WeightSequence, t: f64) -> Result<f64> {
    let (p0, _) = eval_phi(w, t, 1e-14)?;
    let (p1, _) = eval_phi_derivative(w, t, 1, 1e-14)?;
    if !p0.is_finite() || !p1.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(t * p1 / p0)
}

/// Least squares fit of `ln ω_k ≈ a + b k + c ln k` over `ks`; returns `b`.
fn growth_rate(ln: &[f64], ks: std::ops::Range<usize>) -> Option<f64> {
    let pts: Vec<(f64, f64, f64)> = ks
        .filter(|&k| ln[k].is_finite())
        .map(|k| (k as f64, (k as f64).ln(), ln[k]))
        .collect();
    if pts.len() < 8 {
        return None;
    }
    // Normal equations for three parameters.
    let mut m = [[0.0f64; 4]; 3];
    for &(k, lk, y) in &pts {
        let row = [1.0, k, lk];
        for i in 0..3 {
            for jj in 0..3 {
                m[i][jj] += row[i] * row[jj];
            }
            m[i][3] += row[i] * y;
        }
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        m.swap(col, piv);
        let d = m[col][col];
        if d.abs() < 1e-300 {
            return None;
        }
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / d;
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some(m[1][3] / m[1][1])
}

/// Radius of convergence: declared, finite support, or a root-test estimate.
fn radius(w: &WeightSequence) -> Result<f64> {
    if let Some(r) = w.source().declared_radius() {
        return Ok(r);
    }
    if w.support_bound().is_some() {
        return Ok(f64::INFINITY);
    }
    let ln = w.ln_coeffs(2049);
    let b1 = growth_rate(&ln, 512..1025);
    let b2 = growth_rate(&ln, 1024..2049);
    match (b1, b2) {
        (Some(b1), Some(b2)) => {
            if (b2 - b1).abs() < 1e-3 * (1.0 + b2.abs()) {
                Ok((-b2).exp())
            } else if b2 < b1 - 0.3 {
                Ok(f64::INFINITY)
            } else if b2 > b1 + 0.3 {
                Ok(0.0)
            } else {
                Err(Error::RadiusUnresolved(format!("root test drifts from {b1} to {b2}")))
            }
        }
        _ => Err(Error::RadiusUnresolved("too few non-zero coefficients".into())),
    }
}

fn gcd_span(w: &WeightSequence) -> u64 {
    let len = w.support_bound().map_or(4096, |b| b + 1);
    w.ln_coeffs(len)
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| l.is_finite())
        .fold(0u64, |g, (k, _)| gcd(g, k as u64))
        .max(1)
}

/// Classify `φ` and compute `τ`, `ν`, `μ`, `σ²` and the offspring law.
pub fn classify(w: &WeightSequence) -> Result<SeriesProfile> {
    w.validate()?;
    let span = gcd_span(w);
    let rho = radius(w)?;

    let nu = if rho == 0.0 {
        0.0
    } else if rho.is_infinite() {
        match w.support_bound() {
            Some(b) => b as f64,
            None => f64::INFINITY,
        }
    } else {
        let (p0, _) = eval_phi(w, rho, 1e-13)?;
        let (p1, _) = eval_phi_derivative(w, rho, 1, 1e-13)?;
        if !p0.is_finite() || !p1.is_finite() {
            f64::INFINITY
        } else {
            rho * p1 / p0
        }
    };

    let tau = if nu > 1.0 {
        solve_tau(w, rho)?
    } else {
        if rho.is_infinite() {
            return Err(Error::InvalidWeights("ν ≤ 1 with infinite radius".into()));
        }
        rho
    };

    let (phi_tau, sigma2) = if tau == 0.0 {
        (w.coeff(0), 0.0)
    } else {
        let (p0, _) = eval_phi(w, tau, 1e-14)?;
        let (p1, _) = eval_phi_derivative(w, tau, 1, 1e-14)?;
        let (p2, _) = eval_phi_derivative(w, tau, 2, 1e-14)?;
        let m = tau * p1 / p0;
        let s2 = tau * tau * p2 / p0 + m - m * m;
        let s2 = if !s2.is_finite() || tau * tau * p2 / p0 > VARIANCE_CUTOFF { f64::INFINITY } else { s2.max(0.0) };
        (p0, s2)
    };

    let mu = nu.min(1.0);
    let kind = if nu == 0.0 {
        Kind::III
    } else if nu < 1.0 {
        Kind::II
    } else if nu > 1.0 {
        Kind::Ia
    } else if sigma2.is_finite() {
        Kind::IAlpha
    } else {
        Kind::IBeta
    };

    let mut profile = SeriesProfile {
        rho_phi: rho,
        tau,
        nu,
        mu,
        sigma2,
        span,
        kind,
        phi_tau,
        pi: Vec::new(),
        pi_tail: 0.0,
    };
    let mut len = w.support_bound().map_or(64, |b| b + 1);
    loop {
        let pi = profile.offspring_pmf(w, len);
        let mass: f64 = pi.iter().sum();
        let last = pi.iter().rev().take(8).sum::<f64>();
        if w.support_bound().is_some() || last < 1e-17 || len >= 1 << 16 {
            profile.pi_tail = (1.0 - mass).max(0.0);
            profile.pi = pi;
            break;
        }
        len *= 2;
    }
    Ok(profile)
}

/// Solve `ψ(τ) = 1` by bisection on `(0, ρ)`.
fn solve_tau(w: &WeightSequence, rho: f64) -> Result<f64> {
    let mut hi = if rho.is_finite() { rho } else { 1.0 };
    if rho.is_infinite() {
        while psi(w, hi)? < 1.0 {
            hi *= 2.0;
            if hi > 1e150 {
                return Err(Error::Indeterminate("no bracket for τ".into()));
            }
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi(w, mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
