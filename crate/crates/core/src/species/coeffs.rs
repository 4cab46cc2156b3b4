use std::collections::HashMap;

use super::scalar::Scalar;
use super::{Expr, Node, Ratio, SizeSet};
use crate::error::{Error, Result};

/// Coefficient tables for every node of an expression, up to a common size.
///
/// Nodes inside a fixed point are tabulated against the converged solution,
/// so the tables can drive the recursive sampler directly.
#[derive(Debug)]
pub struct Tables<S: Scalar> {
    pub(crate) tables: HashMap<usize, Vec<S>>,
    /// Powers `[z^j] G^m` of the inner species of generic substitutions.
    pub(crate) powers: HashMap<usize, Vec<Vec<S>>>,
    pub n: usize,
}

impl<S: Scalar> Tables<S> {
    pub fn build(expr: &Expr, n: usize) -> Result<Self> {
        let mut t = Tables { tables: HashMap::new(), powers: HashMap::new(), n };
        let mut env = Vec::new();
        t.fill(expr, n, &mut env, true, false)?;
        Ok(t)
    }

    /// Coefficients of `expr` (a node of the expression the tables were built from).
    pub fn get(&self, expr: &Expr) -> &[S] {
        self.tables.get(&expr.key()).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub(crate) fn powers(&self, expr: &Expr) -> Option<&Vec<Vec<S>>> {
        self.powers.get(&expr.key())
    }

    fn store(&mut self, expr: &Expr, v: &[S]) {
        let slot = self.tables.entry(expr.key()).or_default();
        if slot.len() < v.len() {
            *slot = v.to_vec();
        }
    }

    /// Coefficients `0..=len` of `expr`.
    fn fill(
        &mut self,
        expr: &Expr,
        len: usize,
        env: &mut Vec<(String, Vec<S>)>,
        store: bool,
        free_zero: bool,
    ) -> Result<Vec<S>> {
        let size = len + 1;
        let unit = |k: usize| if k == 0 { S::one() } else { S::zero() };
        let out: Vec<S> = match expr.node() {
            Node::One => (0..size).map(unit).collect(),
            Node::Atom => (0..size).map(|k| if k == 1 { S::one() } else { S::zero() }).collect(),
            Node::Seq { sizes, weight } => (0..size)
                .map(|k| {
                    if !sizes.contains(k) {
                        S::zero()
                    } else {
                        weight.as_ref().map_or_else(S::one, |w| S::from_ratio(&w.at(k)))
                    }
                })
                .collect(),
            Node::Set { sizes, weight } => (0..size)
                .map(|k| {
                    if !sizes.contains(k) {
                        S::zero()
                    } else {
                        let w = weight.as_ref().map_or_else(S::one, |w| S::from_ratio(&w.at(k)));
                        w.mul(&S::inv_factorial(k))
                    }
                })
                .collect(),
            Node::Catalog(c) => (0..size).map(|k| S::from_ratio(&c.coefficient(k))).collect(),
            Node::Sum(parts) => {
                let mut acc = vec![S::zero(); size];
                for p in parts {
                    let t = self.fill(p, len, env, store, free_zero)?;
                    for (a, b) in acc.iter_mut().zip(&t) {
                        *a = a.add(b);
                    }
                }
                acc
            }
            Node::Prod(a, b) => {
                let ta = self.fill(a, len, env, store, free_zero)?;
                let tb = self.fill(b, len, env, store, free_zero)?;
                convolve(&ta, &tb, size)
            }
            Node::Subst(f, g) => {
                let tg = self.fill(g, len, env, store, free_zero)?;
                if !tg[0].is_zero() {
                    return Err(Error::InvalidStructure(format!("`{g}` has structures of size 0")));
                }
                match f.node() {
                    Node::Seq { sizes, weight: None } if sizes.is_all() => {
                        if store {
                            self.fill(f, len, env, store, free_zero)?;
                        }
                        let mut c = vec![S::zero(); size];
                        c[0] = S::one();
                        for k in 1..size {
                            let mut acc = S::zero();
                            for j in 1..=k {
                                if !tg[j].is_zero() && !c[k - j].is_zero() {
                                    acc = acc.add(&tg[j].mul(&c[k - j]));
                                }
                            }
                            c[k] = acc;
                        }
                        c
                    }
                    Node::Set { sizes, weight: None } if sizes.is_all() => {
                        if store {
                            self.fill(f, len, env, store, free_zero)?;
                        }
                        let mut c = vec![S::zero(); size];
                        c[0] = S::one();
                        for k in 1..size {
                            let mut acc = S::zero();
                            for j in 1..=k {
                                if !tg[j].is_zero() && !c[k - j].is_zero() {
                                    acc = acc.add(&tg[j].mul(&c[k - j]).mul(&S::from_usize(j)));
                                }
                            }
                            c[k] = acc.div_usize(k);
                        }
                        c
                    }
                    _ => {
                        let tf = self.fill(f, len, env, store, free_zero)?;
                        let mut pows: Vec<Vec<S>> = Vec::with_capacity(size);
                        pows.push((0..size).map(unit).collect());
                        let mut c: Vec<S> = (0..size).map(|k| if k == 0 { tf[0].clone() } else { S::zero() }).collect();
                        for m in 1..size {
                            let next = convolve(&pows[m - 1], &tg, size);
                            if !tf[m].is_zero() {
                                for (ck, p) in c.iter_mut().zip(&next) {
                                    *ck = ck.add(&tf[m].mul(p));
                                }
                            }
                            pows.push(next);
                        }
                        if store {
                            self.powers.insert(expr.key(), pows);
                        }
                        c
                    }
                }
            }
            Node::Derivative(e) => {
                let t = self.fill(e, len + 1, env, store, free_zero)?;
                (0..size).map(|k| t[k + 1].mul(&S::from_usize(k + 1))).collect()
            }
            Node::Pointing(e) => {
                let t = self.fill(e, len, env, store, free_zero)?;
                t.iter().enumerate().map(|(k, c)| if k == 0 { S::zero() } else { c.mul(&S::from_usize(k)) }).collect()
            }
            Node::Restrict(e, sizes) => {
                let t = self.fill(e, len, env, store, free_zero)?;
                restrict(t, sizes)
            }
            Node::Scale(e, r) => {
                let t = self.fill(e, len, env, store, free_zero)?;
                let s = S::from_ratio(r);
                t.iter().map(|c| c.mul(&s)).collect()
            }
            Node::Fix { name, body } => {
                let wide = len + body.derivative_depth();
                let mut cur = vec![S::zero(); wide + 1];
                let mut converged = false;
                for _ in 0..(wide + 3) {
                    env.push((name.clone(), cur.clone()));
                    let next = self.fill(body, wide, env, false, free_zero);
                    env.pop();
                    let next = next?;
                    let same = next.iter().zip(&cur).all(|(a, b)| a.same(b));
                    cur = next;
                    if same {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    return Err(Error::InvalidStructure(format!("fixed point `{name}` is not well founded")));
                }
                if store {
                    env.push((name.clone(), cur.clone()));
                    let r = self.fill(body, wide, env, true, free_zero);
                    env.pop();
                    r?;
                }
                cur.truncate(size);
                cur
            }
            Node::Ref(name) => match env.iter().rev().find(|(n, _)| n == name) {
                Some((_, t)) => {
                    if t.len() < size {
                        return Err(Error::InvalidStructure(format!("reference `{name}` needed beyond its table")));
                    }
                    t[..size].to_vec()
                }
                None if free_zero => vec![S::zero(); size],
                None => return Err(Error::InvalidStructure(format!("unbound reference `{name}`"))),
            },
        };
        if store {
            self.store(expr, &out);
        }
        Ok(out)
    }
}

fn restrict<S: Scalar>(t: Vec<S>, sizes: &SizeSet) -> Vec<S> {
    t.into_iter().enumerate().map(|(k, c)| if sizes.contains(k) { c } else { S::zero() }).collect()
}

fn convolve<S: Scalar>(a: &[S], b: &[S], size: usize) -> Vec<S> {
    let mut out = vec![S::zero(); size];
    for (i, x) in a.iter().enumerate().take(size) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(size - i) {
            if !y.is_zero() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
    }
    out
}

/// EGF coefficients `c_0..c_n` in double precision.
pub fn egf_coefficients(expr: &Expr, n: usize) -> Result<Vec<f64>> {
    let mut t: Tables<f64> = Tables { tables: HashMap::new(), powers: HashMap::new(), n };
    t.fill(expr, n, &mut Vec::new(), false, false)
}

/// Exact EGF coefficients `c_0..c_n`.
pub fn egf_coefficients_exact(expr: &Expr, n: usize) -> Result<Vec<Ratio>> {
    let mut t: Tables<Ratio> = Tables { tables: HashMap::new(), powers: HashMap::new(), n };
    t.fill(expr, n, &mut Vec::new(), false, false)
}

/// Constant term of `expr`, reading unbound references as the zero series
/// (the first iterate of any enclosing fixed point).
pub(crate) fn constant_term_open(expr: &Expr) -> Result<Ratio> {
    let mut t: Tables<Ratio> = Tables { tables: HashMap::new(), powers: HashMap::new(), n: 0 };
    Ok(t.fill(expr, 0, &mut Vec::new(), false, true)?.swap_remove(0))
}
