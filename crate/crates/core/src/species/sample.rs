use std::collections::HashMap;

use rand::Rng;

use super::coeffs::{egf_coefficients, Tables};
use super::scalar::LogF64;
use super::structure::{Structure, STAR};
use super::{Expr, Node};
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, ratio_to_f64};

/// Index drawn with probability proportional to `exp(ln_w[i])`.
pub(crate) fn pick_ln<R: Rng + ?Sized>(ln_w: &[f64], rng: &mut R) -> Option<usize> {
    let m = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return None;
    }
    let w: Vec<f64> = ln_w.iter().map(|x| (x - m).exp()).collect();
    pick(&w, rng)
}

/// Index drawn with probability proportional to `w[i] ≥ 0`.
pub(crate) fn pick<R: Rng + ?Sized>(w: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    for (i, &x) in w.iter().enumerate() {
        if u < x {
            return Some(i);
        }
        u -= x;
    }
    w.iter().rposition(|&x| x > 0.0)
}

fn lookup_fix(env: &[(String, Expr)], name: &str) -> Result<Expr> {
    env.iter()
        .rev()
        .find(|(n, _)| n == name)
        .map(|(_, e)| e.clone())
        .ok_or_else(|| Error::InvalidStructure(format!("unbound reference `{name}`")))
}

/// Recursive-method sampler: exact weight-proportional structures of a
/// prescribed size, driven by log-space coefficient tables.
#[derive(Debug)]
pub struct FixedSampler {
    expr: Expr,
    tables: Tables<LogF64>,
}

impl FixedSampler {
    /// Tables for sizes up to `n`.
    pub fn new(expr: &Expr, n: usize) -> Result<Self> {
        Ok(Self { expr: expr.clone(), tables: Tables::build(expr, n)? })
    }

    pub fn max_size(&self) -> usize {
        self.tables.n
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// `ln c_k` of the root species.
    pub fn ln_coefficient(&self, k: usize) -> f64 {
        self.tables.get(&self.expr).get(k).map_or(f64::NEG_INFINITY, |c| c.0)
    }

    /// A structure on the labels `0..k`.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Structure> {
        let mut s = self.sample_shape(k, rng)?;
        s.shuffle_labels(rng);
        Ok(s)
    }

    /// Like [`FixedSampler::sample`] but without the final uniform relabelling;
    /// atoms are numbered in generation order.
    pub fn sample_shape<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Structure> {
        if k > self.tables.n {
            return Err(Error::Unsupported(format!("size {k} beyond table size {}", self.tables.n)));
        }
        if self.ln_coefficient(k) == f64::NEG_INFINITY {
            return Err(Error::EmptyClass(k));
        }
        let mut counter = 0u32;
        let mut env = Vec::new();
        self.gen(&self.expr, k, &mut env, &mut counter, rng)
    }

    fn t(&self, e: &Expr, k: usize) -> f64 {
        self.tables.get(e).get(k).map_or(f64::NEG_INFINITY, |c| c.0)
    }

    fn fresh(counter: &mut u32, k: usize) -> Vec<u32> {
        let v: Vec<u32> = (*counter..*counter + k as u32).collect();
        *counter += k as u32;
        v
    }

    fn gen<R: Rng + ?Sized>(
        &self,
        expr: &Expr,
        k: usize,
        env: &mut Vec<(String, Expr)>,
        counter: &mut u32,
        rng: &mut R,
    ) -> Result<Structure> {
        let empty = || Error::EmptyClass(k);
        Ok(match expr.node() {
            Node::One => Structure::Unit,
            Node::Atom => Structure::Atom(Self::fresh(counter, 1)[0]),
            Node::Seq { .. } => Structure::Seq(Self::fresh(counter, k)),
            Node::Set { .. } => Structure::Set(Self::fresh(counter, k)),
            Node::Catalog(cat) => {
                let shares: Vec<f64> = cat.entries(k).iter().map(|e| ratio_to_f64(&e.egf_share())).collect();
                let idx = pick(&shares, rng).ok_or_else(empty)?;
                Structure::Entry { catalog: cat.id, index: idx as u32, atoms: Self::fresh(counter, k) }
            }
            Node::Sum(parts) => {
                let w: Vec<f64> = parts.iter().map(|p| self.t(p, k)).collect();
                let i = pick_ln(&w, rng).ok_or_else(empty)?;
                Structure::Branch(i as u32, Box::new(self.gen(&parts[i], k, env, counter, rng)?))
            }
            Node::Prod(a, b) => {
                let w: Vec<f64> = (0..=k).map(|j| self.t(a, j) + self.t(b, k - j)).collect();
                let j = pick_ln(&w, rng).ok_or_else(empty)?;
                let x = self.gen(a, j, env, counter, rng)?;
                let y = self.gen(b, k - j, env, counter, rng)?;
                Structure::Pair(Box::new(x), Box::new(y))
            }
            Node::Subst(f, g) => {
                let here: Vec<f64> = self.tables.get(expr).iter().map(|c| c.0).collect();
                let gt = |j: usize| self.t(g, j);
                let mut sizes = Vec::new();
                let outer = match f.node() {
                    Node::Seq { sizes: s, weight: None } if s.is_all() => {
                        let mut rem = k;
                        while rem > 0 {
                            let w: Vec<f64> = (1..=rem).map(|j| gt(j) + here[rem - j]).collect();
                            let j = 1 + pick_ln(&w, rng).ok_or_else(empty)?;
                            sizes.push(j);
                            rem -= j;
                        }
                        Structure::Seq((0..sizes.len() as u32).collect())
                    }
                    Node::Set { sizes: s, weight: None } if s.is_all() => {
                        let mut rem = k;
                        while rem > 0 {
                            let w: Vec<f64> =
                                (1..=rem).map(|j| (j as f64).ln() + gt(j) + here[rem - j]).collect();
                            let j = 1 + pick_ln(&w, rng).ok_or_else(empty)?;
                            sizes.push(j);
                            rem -= j;
                        }
                        Structure::Set((0..sizes.len() as u32).collect())
                    }
                    _ => {
                        let pows = self.tables.powers(expr).ok_or_else(|| {
                            Error::InvalidStructure("missing power table for substitution".into())
                        })?;
                        let p = |m: usize, j: usize| pows[m].get(j).map_or(f64::NEG_INFINITY, |c| c.0);
                        let w: Vec<f64> = (0..=k).map(|m| self.t(f, m) + p(m, k)).collect();
                        let m = pick_ln(&w, rng).ok_or_else(empty)?;
                        let mut rem = k;
                        for left in (1..=m).rev() {
                            let w: Vec<f64> = (1..=rem).map(|j| gt(j) + p(left - 1, rem - j)).collect();
                            let j = 1 + pick_ln(&w, rng).ok_or_else(empty)?;
                            sizes.push(j);
                            rem -= j;
                        }
                        let mut oc = 0u32;
                        let mut outer = self.gen(f, m, env, &mut oc, rng)?;
                        outer.shuffle_labels(rng);
                        outer
                    }
                };
                let mut parts = Vec::with_capacity(sizes.len());
                for &j in &sizes {
                    parts.push(self.gen(g, j, env, counter, rng)?);
                }
                Structure::Subst { outer: Box::new(outer), parts }
            }
            Node::Derivative(e) => {
                let base = *counter;
                let mut inner = self.gen(e, k + 1, env, counter, rng)?;
                let r = base + rng.random_range(0..=k as u32);
                inner.relabel(&|a| if a == r { STAR } else if a > r { a - 1 } else { a });
                *counter -= 1;
                Structure::Derived(Box::new(inner))
            }
            Node::Pointing(e) => {
                let base = *counter;
                let inner = self.gen(e, k, env, counter, rng)?;
                let point = base + rng.random_range(0..k as u32);
                Structure::Pointed { point, inner: Box::new(inner) }
            }
            Node::Restrict(e, _) | Node::Scale(e, _) => self.gen(e, k, env, counter, rng)?,
            Node::Fix { name, body } => {
                env.push((name.clone(), expr.clone()));
                let r = self.gen(body, k, env, counter, rng);
                env.pop();
                r?
            }
            Node::Ref(name) => {
                let target = lookup_fix(env, name)?;
                match target.node() {
                    Node::Fix { body, .. } => self.gen(body, k, env, counter, rng)?,
                    _ => self.gen(&target, k, env, counter, rng)?,
                }
            }
        })
    }
}

/// Convenience wrapper: one weight-proportional structure of size `k`.
pub fn sample_fixed_size<R: Rng + ?Sized>(expr: &Expr, k: usize, rng: &mut R) -> Result<Structure> {
    FixedSampler::new(expr, k)?.sample(k, rng)
}

/// Generating-function value `F(y)`.
pub fn boltzmann_value(expr: &Expr, y: f64) -> Result<f64> {
    let mut vals = HashMap::new();
    eval(expr, y, &mut Vec::new(), &mut vals, false)
}

fn power_sum(y: f64, min: usize, max: Option<usize>, coef: impl Fn(usize) -> f64) -> Result<f64> {
    let hi = max.unwrap_or(usize::MAX);
    let mut sum = 0.0;
    let mut k = min;
    let ly = y.ln();
    let mut small = 0;
    while k <= hi {
        let c = coef(k);
        let t = if c == 0.0 { 0.0 } else if k == 0 { c } else { (c.ln() + k as f64 * ly).exp() };
        if !t.is_finite() {
            return Err(Error::OutOfRange { t: y, radius: f64::NAN });
        }
        sum += t;
        if t <= 1e-18 * sum.max(1e-300) {
            small += 1;
            if small > 32 {
                break;
            }
        } else {
            small = 0;
        }
        k += 1;
        if k > min + 2_000_000 {
            return Err(Error::OutOfRange { t: y, radius: f64::NAN });
        }
    }
    Ok(sum)
}

fn coef_series(expr: &Expr, y: f64) -> Result<Vec<f64>> {
    let mut n = 64;
    loop {
        let c = egf_coefficients(expr, n)?;
        let last: f64 = (n - 8..=n).map(|k| c[k] * y.powi(k as i32)).sum();
        let total: f64 = c.iter().enumerate().map(|(k, v)| v * y.powi(k as i32)).sum();
        if last <= 1e-17 * total || n >= 4096 {
            if last > 1e-10 * total {
                return Err(Error::OutOfRange { t: y, radius: f64::NAN });
            }
            return Ok(c);
        }
        n *= 2;
    }
}

fn eval(
    expr: &Expr,
    y: f64,
    env: &mut Vec<(String, f64)>,
    vals: &mut HashMap<usize, f64>,
    store: bool,
) -> Result<f64> {
    let v = match expr.node() {
        Node::One => 1.0,
        Node::Atom => y,
        Node::Seq { sizes, weight } => match weight {
            None if sizes.is_all() => {
                if y >= 1.0 {
                    return Err(Error::OutOfRange { t: y, radius: 1.0 });
                }
                1.0 / (1.0 - y)
            }
            _ => power_sum(y, sizes.min, sizes.max, |k| {
                weight.as_ref().map_or(1.0, |w| ratio_to_f64(&w.at(k)))
            })?,
        },
        Node::Set { sizes, weight } => match weight {
            None if sizes.is_all() => y.exp(),
            _ => power_sum(y, sizes.min, sizes.max, |k| {
                weight.as_ref().map_or(1.0, |w| ratio_to_f64(&w.at(k))) * (-ln_factorial(k)).exp()
            })?,
        },
        Node::Catalog(c) => (0..=c.max_size()).map(|k| ratio_to_f64(&c.coefficient(k)) * y.powi(k as i32)).sum(),
        Node::Sum(parts) => {
            let mut s = 0.0;
            for p in parts {
                s += eval(p, y, env, vals, store)?;
            }
            s
        }
        Node::Prod(a, b) => eval(a, y, env, vals, store)? * eval(b, y, env, vals, store)?,
        Node::Subst(f, g) => {
            let gy = eval(g, y, env, vals, store)?;
            eval(f, gy, env, vals, store)?
        }
        Node::Derivative(_) | Node::Pointing(_) | Node::Restrict(..) => {
            let c = coef_series(expr, y)?;
            c.iter().enumerate().map(|(k, v)| v * y.powi(k as i32)).sum()
        }
        Node::Scale(e, r) => ratio_to_f64(r) * eval(e, y, env, vals, store)?,
        Node::Fix { name, body } => {
            let mut x = 0.0f64;
            let mut done = false;
            for _ in 0..1_000_000 {
                env.push((name.clone(), x));
                let next = eval(body, y, env, vals, false);
                env.pop();
                let next = next?;
                if !(next.is_finite() && next < 1e100) {
                    return Err(Error::OutOfRange { t: y, radius: f64::NAN });
                }
                let close = (next - x).abs() <= 1e-15 * next.abs();
                x = next;
                if close {
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(Error::OutOfRange { t: y, radius: f64::NAN });
            }
            if store {
                env.push((name.clone(), x));
                let r = eval(body, y, env, vals, true);
                env.pop();
                r?;
            }
            x
        }
        Node::Ref(name) => env
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::InvalidStructure(format!("unbound reference `{name}`")))?,
    };
    if store {
        vals.insert(expr.key(), v);
    }
    Ok(v)
}

/// Boltzmann sampler at parameter `y`: size `k` appears with probability
/// `c_k y^k / F(y)` and is uniform given its size. Fails once more than
/// `cap` atoms have been produced.
pub fn sample_boltzmann<R: Rng + ?Sized>(expr: &Expr, y: f64, cap: usize, rng: &mut R) -> Result<Structure> {
    let mut vals = HashMap::new();
    // Parameters below the top level differ for substitutions, so values
    // are evaluated lazily per (node, parameter).
    eval(expr, y, &mut Vec::new(), &mut vals, true)?;
    let mut b = Boltzmann { cap, counter: 0, cache: HashMap::new() };
    let mut env = Vec::new();
    let mut s = b.gen(expr, y, &mut env, rng)?;
    s.shuffle_labels(rng);
    Ok(s)
}

struct Boltzmann {
    cap: usize,
    counter: u32,
    cache: HashMap<(usize, u64), f64>,
}

impl Boltzmann {
    fn value(&mut self, e: &Expr, y: f64, env: &[(String, Expr)]) -> Result<f64> {
        let key = (e.key(), y.to_bits());
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        // Close the expression over the enclosing fixed points.
        let closed = close_over(e, env);
        let v = boltzmann_value(&closed, y)?;
        self.cache.insert(key, v);
        Ok(v)
    }

    fn fresh(&mut self, k: usize) -> Result<Vec<u32>> {
        if self.counter as usize + k > self.cap {
            return Err(Error::Budget(self.cap as u64));
        }
        let v = (self.counter..self.counter + k as u32).collect();
        self.counter += k as u32;
        Ok(v)
    }

    fn gen<R: Rng + ?Sized>(
        &mut self,
        expr: &Expr,
        y: f64,
        env: &mut Vec<(String, Expr)>,
        rng: &mut R,
    ) -> Result<Structure> {
        Ok(match expr.node() {
            Node::One => Structure::Unit,
            Node::Atom => Structure::Atom(self.fresh(1)?[0]),
            Node::Seq { sizes, weight } | Node::Set { sizes, weight } => {
                let is_set = matches!(expr.node(), Node::Set { .. });
                let total = self.value(expr, y, env)?;
                let mut u = rng.random::<f64>() * total;
                let mut k = sizes.min;
                let ly = y.ln();
                loop {
                    if sizes.max.is_some_and(|m| k > m) {
                        k -= 1;
                        break;
                    }
                    let c = weight.as_ref().map_or(1.0, |w| ratio_to_f64(&w.at(k)));
                    let lf = if is_set { ln_factorial(k) } else { 0.0 };
                    let t = if c == 0.0 { 0.0 } else if k == 0 { c } else { (c.ln() + k as f64 * ly - lf).exp() };
                    if u < t {
                        break;
                    }
                    u -= t;
                    k += 1;
                    if k > self.cap {
                        return Err(Error::Budget(self.cap as u64));
                    }
                }
                let atoms = self.fresh(k)?;
                if is_set {
                    Structure::Set(atoms)
                } else {
                    Structure::Seq(atoms)
                }
            }
            Node::Catalog(cat) => {
                let w: Vec<f64> =
                    (0..=cat.max_size()).map(|k| ratio_to_f64(&cat.coefficient(k)) * y.powi(k as i32)).collect();
                let k = pick(&w, rng).ok_or(Error::EmptyClass(0))?;
                let shares: Vec<f64> = cat.entries(k).iter().map(|e| ratio_to_f64(&e.egf_share())).collect();
                let idx = pick(&shares, rng).ok_or(Error::EmptyClass(k))?;
                Structure::Entry { catalog: cat.id, index: idx as u32, atoms: self.fresh(k)? }
            }
            Node::Sum(parts) => {
                let mut w = Vec::with_capacity(parts.len());
                for p in parts {
                    w.push(self.value(p, y, env)?);
                }
                let i = pick(&w, rng).ok_or(Error::EmptyClass(0))?;
                Structure::Branch(i as u32, Box::new(self.gen(&parts[i], y, env, rng)?))
            }
            Node::Prod(a, b) => {
                let x = self.gen(a, y, env, rng)?;
                let z = self.gen(b, y, env, rng)?;
                Structure::Pair(Box::new(x), Box::new(z))
            }
            Node::Subst(f, g) => {
                let gy = self.value(g, y, env)?;
                // The outer structure lives on its own label space.
                let saved = self.counter;
                self.counter = 0;
                let outer = self.gen(f, gy, env, rng);
                let m = self.counter as usize;
                self.counter = saved;
                let outer = outer?;
                let mut parts = Vec::with_capacity(m);
                for _ in 0..m {
                    parts.push(self.gen(g, y, env, rng)?);
                }
                Structure::Subst { outer: Box::new(outer), parts }
            }
            Node::Derivative(_) | Node::Pointing(_) | Node::Restrict(..) => {
                let closed = close_over(expr, env);
                let c = coef_series(&closed, y)?;
                let w: Vec<f64> = c.iter().enumerate().map(|(k, v)| v * y.powi(k as i32)).collect();
                let k = pick(&w, rng).ok_or(Error::EmptyClass(0))?;
                let shape = FixedSampler::new(&closed, k)?.sample_shape(k, rng)?;
                let base = self.counter;
                self.fresh(k)?;
                let mut shape = shape;
                shape.relabel(&|a| a + base);
                shape
            }
            Node::Scale(e, _) => self.gen(e, y, env, rng)?,
            Node::Fix { name, body } => {
                env.push((name.clone(), expr.clone()));
                let r = self.gen(body, y, env, rng);
                env.pop();
                r?
            }
            Node::Ref(name) => {
                let target = lookup_fix(env, name)?;
                match target.node() {
                    Node::Fix { body, .. } => self.gen(body, y, env, rng)?,
                    _ => self.gen(&target, y, env, rng)?,
                }
            }
        })
    }
}

/// Rebuild `e` with every free reference replaced by its enclosing fixed point.
fn close_over(e: &Expr, env: &[(String, Expr)]) -> Expr {
    if env.is_empty() {
        return e.clone();
    }
    match e.node() {
        Node::Ref(name) => env
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map_or_else(|| e.clone(), |(_, fix)| fix.clone()),
        Node::Sum(v) => Expr::sum(v.iter().map(|x| close_over(x, env)).collect()),
        Node::Prod(a, b) => Expr::prod(close_over(a, env), close_over(b, env)),
        Node::Subst(a, b) => Expr(std::sync::Arc::new(Node::Subst(close_over(a, env), close_over(b, env)))),
        Node::Derivative(a) => Expr::derivative(close_over(a, env)),
        Node::Pointing(a) => Expr::pointing(close_over(a, env)),
        Node::Restrict(a, s) => Expr::restrict(close_over(a, env), *s),
        Node::Scale(a, r) => Expr::scale(close_over(a, env), r.clone()),
        Node::Fix { name, body } => {
            let inner: Vec<(String, Expr)> = env.iter().filter(|(n, _)| n != name).cloned().collect();
            Expr::fix(name.clone(), close_over(body, &inner))
        }
        _ => e.clone(),
    }
}
