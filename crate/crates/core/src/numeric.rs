//! Small numerical toolkit: log-space arithmetic, FFT convolution,
//! truncated power series and the zeta / polylog values needed by presets.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cell::RefCell;

use rustfft::{num_complex::Complex, FftPlanner};

thread_local! {
    // Plans are cached by the planner, so reuse it across calls.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ exp(x_i)`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln n!` via a running table for small n and Stirling beyond.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 256 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Lanczos approximation of `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Natural log of a positive big integer, exact to double precision.
pub fn ln_bigint(n: &BigInt) -> f64 {
    if !n.is_positive() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a non-negative rational; `-inf` for zero.
pub fn ln_ratio(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// Rational to f64 that survives huge numerators and denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && b != 0.0 => {
            let v = a / b;
            if v != 0.0 && v.is_finite() {
                return v;
            }
        }
        _ => {}
    }
    let s = if r.is_negative() { -1.0 } else { 1.0 };
    s * ln_ratio(&r.abs()).exp()
}

/// Riemann zeta for real `s > 1` by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta requires s > 1");
    hurwitz_tail(s, 1)
}

/// `Σ_{k ≥ m} k^{-s}` for `s > 1`, `m ≥ 1`.
pub fn hurwitz_tail(s: f64, m: usize) -> f64 {
    let n = m.max(20) as f64;
    let mut head = 0.0;
    let mut k = m as f64;
    while k < n {
        head += k.powf(-s);
        k += 1.0;
    }
    // Euler–Maclaurin from n with Bernoulli terms B2, B4, B6.
    let tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * n.powf(-s - 5.0) / 30240.0;
    head + tail
}

/// Polylogarithm `Li_s(x) = Σ_{k≥1} x^k k^{-s}` for `0 ≤ x ≤ 1`; `x = 1` needs `s > 1`.
pub fn polylog(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return if s > 1.0 { zeta(s) } else { f64::INFINITY };
    }
    // Direct summation converges geometrically; near x = 1 switch to the
    // singular expansion only when the direct sum would be too slow.
    let lx = x.ln();
    if -lx < 1e-3 {
        return polylog_near_one(s, x);
    }
    let mut sum = 0.0;
    let mut k = 1.0f64;
    loop {
        let term = (k * lx).exp() * k.powf(-s);
        sum += term;
        if term < 1e-18 * sum.max(1e-300) {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Series in `μ = ln x` around `x = 1` for non-integer `s`:
/// `Li_s(e^μ) = Γ(1-s)(-μ)^{s-1} + Σ_j ζ(s-j) μ^j / j!`.
fn polylog_near_one(s: f64, x: f64) -> f64 {
    let mu = x.ln();
    if (s - s.round()).abs() < 1e-9 {
        // Integer orders are not needed by the presets; sum directly.
        let mut sum = 0.0;
        let mut k = 1.0f64;
        while k < 1e8 {
            let term = (k * mu).exp() * k.powf(-s);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        return sum;
    }
    let g = gamma_signed(1.0 - s);
    let mut total = g * (-mu).powf(s - 1.0);
    let mut fact = 1.0;
    for j in 0..30 {
        if j > 0 {
            fact *= j as f64;
        }
        let z = zeta_any(s - j as f64);
        let term = z * mu.powi(j) / fact;
        total += term;
        if j > 2 && term.abs() < 1e-18 {
            break;
        }
    }
    total
}

/// Γ(x) with sign, for non-integer real x.
fn gamma_signed(x: f64) -> f64 {
    if x > 0.0 {
        ln_gamma(x).exp()
    } else {
        let pi = std::f64::consts::PI;
        pi / ((pi * x).sin() * gamma_signed(1.0 - x))
    }
}

/// ζ(s) for any real `s ≠ 1` through the functional equation.
fn zeta_any(s: f64) -> f64 {
    if s > 1.0 {
        return zeta(s);
    }
    if s == 0.0 {
        return -0.5;
    }
    if s > 0.0 {
        // Dirichlet eta relation: ζ(s) = η(s)/(1 - 2^{1-s}), alternating sum.
        let mut eta = 0.0;
        let terms = 200_000;
        let mut partial = Vec::with_capacity(2);
        for k in 1..=terms {
            let t = (k as f64).powf(-s);
            eta += if k % 2 == 1 { t } else { -t };
            if k >= terms - 1 {
                partial.push(eta);
            }
        }
        let eta = 0.5 * (partial[0] + partial[1]);
        return eta / (1.0 - 2f64.powf(1.0 - s));
    }
    let pi = std::f64::consts::PI;
    2f64.powf(s) * pi.powf(s - 1.0) * (pi * s / 2.0).sin() * gamma_signed(1.0 - s) * zeta_any(1.0 - s)
}

/// Linear convolution truncated to `len` coefficients; FFT for large inputs.
pub fn convolve(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let la = a.len().min(len);
    let lb = b.len().min(len);
    if la == 0 || lb == 0 {
        return vec![0.0; len];
    }
    if (la as u64) * (lb as u64) <= 1 << 16 {
        let mut out = vec![0.0; len];
        for (i, &x) in a[..la].iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, &y) in b[..lb.min(len - i)].iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let size = (la + lb - 1).next_power_of_two();
    let (fwd, inv) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(size), p.plan_fft_inverse(size))
    });
    let mut fa: Vec<Complex<f64>> = (0..size)
        .map(|i| Complex::new(if i < la { a[i] } else { 0.0 }, 0.0))
        .collect();
    let mut fb: Vec<Complex<f64>> = (0..size)
        .map(|i| Complex::new(if i < lb { b[i] } else { 0.0 }, 0.0))
        .collect();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    (0..len)
        .map(|i| if i < size { fa[i].re * scale } else { 0.0 })
        .collect()
}

/// Convolution of two probability vectors; FFT noise below zero is clamped.
pub fn convolve_pmf(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = convolve(a, b, len);
    let peak = out.iter().copied().fold(0.0, f64::max);
    let floor = peak * 1e-15;
    for v in &mut out {
        if *v < floor {
            *v = if *v < 0.0 { 0.0 } else { *v };
        }
    }
    out
}

/// Reciprocal `1/f` of a power series with `f[0] ≠ 0`, by Newton iteration.
pub fn series_inverse(f: &[f64], len: usize) -> Vec<f64> {
    assert!(!f.is_empty() && f[0] != 0.0);
    let mut g = vec![1.0 / f[0]];
    let mut cur = 1;
    while cur < len {
        cur = (2 * cur).min(len);
        // g <- g (2 - f g)
        let fg = convolve(&f[..f.len().min(cur)], &g, cur);
        let mut corr: Vec<f64> = fg.iter().map(|x| -x).collect();
        corr[0] += 2.0;
        g = convolve(&g, &corr, cur);
    }
    g.truncate(len);
    g
}

/// Exact greatest common divisor.
pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// Ordinary least squares fit `y = a + b x`, returning `(a, b, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (a, b, r2)
}

/// Binomial coefficient as a big integer.
pub fn binomial_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1u32);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn zeta_matches_known_values() {
        let pi = std::f64::consts::PI;
        assert!((zeta(2.0) - pi * pi / 6.0).abs() < 1e-12);
        assert!((zeta(4.0) - pi.powi(4) / 90.0).abs() < 1e-12);
        assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-10);
        assert!((zeta(2.5) - 1.341_487_257_250_917).abs() < 1e-10);
    }

    #[test]
    fn polylog_agrees_with_direct_sums() {
        for &(s, x) in &[(2.5, 0.5), (1.5, 0.9), (2.5, 0.9999), (1.5, 0.9995)] {
            let direct: f64 = (1..5_000_000)
                .map(|k| (x as f64).powi(k) * (k as f64).powf(-s))
                .sum();
            let got = polylog(s, x);
            assert!((got - direct).abs() < 1e-6 * direct, "{s} {x}: {got} vs {direct}");
        }
    }

    #[test]
    fn ln_gamma_factorials() {
        assert!((ln_gamma(6.0) - 120f64.ln()).abs() < 1e-12);
        assert!((ln_factorial(300) - ln_gamma(301.0)).abs() < 1e-9);
    }

    #[test]
    fn fft_convolution_matches_naive() {
        let a: Vec<f64> = (0..700).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let b: Vec<f64> = (0..500).map(|i| ((i * 7) % 13) as f64).collect();
        let fast = convolve(&a, &b, 900);
        for k in (0..900).step_by(37) {
            let naive: f64 = (0..=k)
                .filter(|&i| i < a.len() && k - i < b.len())
                .map(|i| a[i] * b[k - i])
                .sum();
            assert!((fast[k] - naive).abs() < 1e-9 * (1.0 + naive.abs()));
        }
    }

    #[test]
    fn series_inverse_of_one_minus_z() {
        let inv = series_inverse(&[1.0, -1.0], 50);
        assert!(inv.iter().all(|&c| (c - 1.0).abs() < 1e-12));
    }

    #[test]
    fn big_logs() {
        let big = BigInt::from(10u32).pow(400);
        assert!((ln_bigint(&big) - 400.0 * 10f64.ln()).abs() < 1e-9);
        let r = BigRational::new(BigInt::one(), big);
        assert!((ln_ratio(&r) + 400.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn fit_is_exact_on_lines() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (a, b, r2) = linear_fit(&xs, &ys);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
