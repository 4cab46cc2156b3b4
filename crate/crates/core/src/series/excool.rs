//! Outerplanar maps whose inner faces of degree `k` carry weight `ι_k`, with
//! `Σ_{k≥1} ι_{k+2} z^k = z/2 + ((1-4z)^{3/2} - 1)/12`.
//!
//! The dissection class solves `D (1 - S(D)) = z`. With `w = sqrt(1-4D)` the
//! inverse is the quintic `z = P(w)`, which gives closed-form values of the
//! outerplanar weight series `φ = 1/(1 - D)` up to and including `ρ = 23/96`.

use std::sync::Mutex;

use super::source::CoefficientSource;
use crate::numeric::{convolve, series_inverse};

/// `ρ` of the outerplanar weight series.
pub const RHO: f64 = 23.0 / 96.0;

/// `S(z)` and its first two derivatives in terms of `w = sqrt(1 - 4z)`.
fn s_terms(z: f64, w: f64) -> [f64; 3] {
    let s = z / 2.0 + (w * w * w - 1.0) / 12.0;
    let s1 = 0.5 - w / 2.0;
    let s2 = if w > 0.0 { 1.0 / w } else { f64::INFINITY };
    [s, s1, s2]
}

fn p_of_w(w: f64) -> f64 {
    let d = (1.0 - w * w) / 4.0;
    d * (1.0 - s_terms(d, w)[0])
}

/// Solve `P(w) = t` on `w ∈ [0, 1]`; `P` decreases from `ρ` to `0` there.
fn w_of_t(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t >= RHO {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p_of_w(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `(D, D', D'')` at `t ∈ [0, ρ]`.
fn dissection_at(t: f64) -> [f64; 3] {
    let w = w_of_t(t);
    let d = (1.0 - w * w) / 4.0;
    let [s, s1, s2] = s_terms(d, w);
    let f1 = 1.0 - s - d * s1;
    let f2 = -2.0 * s1 - d * s2;
    let d1 = 1.0 / f1;
    let d2 = -f2 * d1 * d1 * d1;
    [d, d1, d2]
}

/// Scaled coefficients `ω_k ρ^k = [x^k] 1/(1 - D(ρ x))` for `k < len`.
fn outerplanar_scaled(len: usize) -> Vec<f64> {
    let d = dissection_scaled_series(len);
    let mut one_minus: Vec<f64> = d.iter().map(|c| -c).collect();
    one_minus[0] += 1.0;
    series_inverse(&one_minus, len)
}

/// Power series of `x ↦ D(ρ x)`, by Newton iteration on `P(w(x)) = ρ x`.
fn dissection_scaled_series(len: usize) -> Vec<f64> {
    let mut w = vec![1.0];
    let mut cur = 1;
    while cur < len {
        cur = (2 * cur).min(len);
        w.resize(cur, 0.0);
        let w2 = convolve(&w, &w, cur);
        let w3 = convolve(&w2, &w, cur);
        let d: Vec<f64> = (0..cur)
            .map(|i| ((if i == 0 { 1.0 } else { 0.0 }) - w2[i]) / 4.0)
            .collect();
        // inner = 1 - D/2 - (w^3 - 1)/12
        let inner: Vec<f64> = (0..cur)
            .map(|i| {
                let one = if i == 0 { 1.0 } else { 0.0 };
                one - d[i] / 2.0 - (w3[i] - one) / 12.0
            })
            .collect();
        let p = convolve(&d, &inner, cur);
        // dP/dw = (-w/2) inner + D (w/4 - w^2/4)
        let neg_half_w: Vec<f64> = w.iter().map(|c| -c / 2.0).collect();
        let a = convolve(&neg_half_w, &inner, cur);
        let bracket: Vec<f64> = (0..cur).map(|i| w[i] / 4.0 - w2[i] / 4.0).collect();
        let b = convolve(&d, &bracket, cur);
        let dp: Vec<f64> = (0..cur).map(|i| a[i] + b[i]).collect();
        let mut resid = p;
        if cur > 1 {
            resid[1] -= RHO;
        }
        let inv = series_inverse(&dp, cur);
        let step = convolve(&resid, &inv, cur);
        for i in 0..cur {
            w[i] -= step[i];
        }
    }
    let w2 = convolve(&w, &w, len);
    (0..len)
        .map(|i| ((if i == 0 { 1.0 } else { 0.0 }) - w2[i]) / 4.0)
        .collect()
}

/// Weight sequence of the outerplanar class: `ω_k = [z^k] 1/(1 - D(z))`.
#[derive(Debug, Default)]
pub struct ExcoolOuterplanar {
    cache: Mutex<Vec<f64>>,
}

impl ExcoolOuterplanar {
    pub fn new() -> Self {
        Self::default()
    }

    /// `ω_k ρ^k` for `k < len`, from the cached Newton expansion.
    pub fn scaled(&self, len: usize) -> Vec<f64> {
        let mut cache = self.cache.lock().expect("cache poisoned");
        if cache.len() < len {
            *cache = outerplanar_scaled(len.max(2 * cache.len()).max(256));
        }
        cache[..len].to_vec()
    }
}

impl CoefficientSource for ExcoolOuterplanar {
    fn ln_coeff(&self, k: usize) -> f64 {
        self.ln_coeffs(k + 1)[k]
    }
    fn ln_coeffs(&self, len: usize) -> Vec<f64> {
        let lr = RHO.ln();
        self.scaled(len)
            .iter()
            .enumerate()
            .map(|(k, &c)| if c > 0.0 { c.ln() - k as f64 * lr } else { f64::NEG_INFINITY })
            .collect()
    }
    fn declared_radius(&self) -> Option<f64> {
        Some(RHO)
    }
    fn closed_form(&self, t: f64) -> Option<[f64; 3]> {
        if !(0.0..=RHO).contains(&t) {
            return None;
        }
        let [d, d1, d2] = dissection_at(t);
        let u = 1.0 - d;
        let phi = 1.0 / u;
        let phi1 = d1 / (u * u);
        let phi2 = d2 / (u * u) + 2.0 * d1 * d1 / (u * u * u);
        Some([phi, phi1, phi2])
    }
    fn name(&self) -> String {
        "excool".into()
    }
}

/// Weight sequence of the underlying dissections: `ω_k = [z^k] 1/(1 - S(z))`.
#[derive(Debug, Default)]
pub struct ExcoolDissection {
    cache: Mutex<Vec<f64>>,
}

impl ExcoolDissection {
    pub fn new() -> Self {
        Self::default()
    }

    /// Coefficients of `S`: `s_1 = 0`, `s_k = [z^k](1-4z)^{3/2} / 12` for `k ≥ 2`.
    pub fn face_series(len: usize) -> Vec<f64> {
        let mut c = vec![0.0; len];
        // b_k = [z^k](1-4z)^{3/2}, b_k = b_{k-1} * (k - 1 - 3/2)/k * 4 with sign folded in
        let mut b = 1.0f64;
        for (k, slot) in c.iter_mut().enumerate().skip(1) {
            b *= (k as f64 - 1.0 - 1.5) / k as f64 * 4.0;
            *slot = if k == 1 { 0.0 } else { b / 12.0 };
        }
        c
    }
}

impl CoefficientSource for ExcoolDissection {
    fn ln_coeff(&self, k: usize) -> f64 {
        self.ln_coeffs(k + 1)[k]
    }
    fn ln_coeffs(&self, len: usize) -> Vec<f64> {
        let mut cache = self.cache.lock().expect("cache poisoned");
        if cache.len() < len {
            let n = len.max(2 * cache.len()).max(256);
            // Work with x = 4z so that coefficients stay O(k^{-5/2}).
            let mut s = vec![0.0; n];
            let mut b = 1.0f64;
            for (k, slot) in s.iter_mut().enumerate().skip(1) {
                b *= (k as f64 - 2.5) / k as f64;
                *slot = if k == 1 { 0.0 } else { b / 12.0 };
            }
            let mut one_minus: Vec<f64> = s.iter().map(|c| -c).collect();
            one_minus[0] += 1.0;
            let inv = series_inverse(&one_minus, n);
            *cache = inv
                .iter()
                .enumerate()
                .map(|(k, &c)| if c > 0.0 { c.ln() + k as f64 * 4f64.ln() } else { f64::NEG_INFINITY })
                .collect();
        }
        cache[..len].to_vec()
    }
    fn declared_radius(&self) -> Option<f64> {
        Some(0.25)
    }
    fn closed_form(&self, t: f64) -> Option<[f64; 3]> {
        if !(0.0..=0.25).contains(&t) {
            return None;
        }
        let w = (1.0 - 4.0 * t).max(0.0).sqrt();
        let [s, s1, s2] = s_terms(t, w);
        let u = 1.0 - s;
        Some([1.0 / u, s1 / (u * u), s2 / (u * u) + 2.0 * s1 * s1 / (u * u * u)])
    }
    fn name(&self) -> String {
        "excool-dissection".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_endpoints() {
        assert!((p_of_w(0.0) - RHO).abs() < 1e-15);
        assert!(p_of_w(1.0).abs() < 1e-15);
    }

    #[test]
    fn face_series_matches_hand_expansion() {
        let s = ExcoolDissection::face_series(5);
        // (1-4z)^{3/2} = 1 - 6z + 6z^2 + 4z^3 + 6z^4 + ...
        assert_eq!(s[1], 0.0);
        assert!((s[2] - 0.5).abs() < 1e-15);
        assert!((s[3] - 4.0 / 12.0).abs() < 1e-15);
        assert!((s[4] - 6.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn dissection_weights_stay_finite_far_out() {
        let ln = ExcoolDissection::new().ln_coeffs(5000);
        assert!(ln.iter().all(|x| x.is_finite()));
        // ω_k 4^{-k} decays like k^{-5/2}.
        let slope = (ln[4000] - ln[2000] - 2000.0 * 4f64.ln()) / 2f64.ln();
        assert!((slope + 2.5).abs() < 0.05, "{slope}");
    }

    #[test]
    fn newton_series_matches_fixed_point_iteration() {
        // Independent expansion: iterate D <- z / (1 - S(D)) on truncated series.
        let len = 40;
        let s = ExcoolDissection::face_series(len);
        let mut d = vec![0.0; len];
        for _ in 0..len {
            // compose S(D)
            let mut sd = vec![0.0; len];
            let mut pow = vec![0.0; len];
            pow[0] = 1.0;
            for &sk in s.iter().skip(1) {
                pow = crate::numeric::convolve(&pow, &d, len);
                for i in 0..len {
                    sd[i] += sk * pow[i];
                }
            }
            let mut om: Vec<f64> = sd.iter().map(|c| -c).collect();
            om[0] += 1.0;
            let inv = series_inverse(&om, len);
            let mut next = vec![0.0; len];
            next[1..len].copy_from_slice(&inv[..(len - 1)]);
            d = next;
        }
        let scaled = dissection_scaled_series(len);
        for k in 1..len {
            let expect = d[k] * RHO.powi(k as i32);
            assert!((scaled[k] - expect).abs() < 1e-12 * expect.abs().max(1e-300) + 1e-15, "k={k}");
        }
    }

    #[test]
    fn closed_form_matches_coefficients_inside_disc() {
        let src = ExcoolOuterplanar::new();
        let c = src.scaled(4000);
        let t = 0.8 * RHO;
        let series: f64 = c.iter().enumerate().map(|(k, v)| v * 0.8f64.powi(k as i32)).sum();
        let closed = src.closed_form(t).unwrap()[0];
        assert!((series - closed).abs() < 1e-10, "{series} vs {closed}");
    }
}
