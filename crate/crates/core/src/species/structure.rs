use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{Expr, Node, Ratio};
use crate::error::{Error, Result};

/// Label standing for the distinguished `*`-atom of a derived structure.
pub const STAR: u32 = u32::MAX;

/// A labelled structure. Atoms are `u32` labels; a structure of size `k`
/// produced by the samplers uses the labels `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Structure {
    Unit,
    Atom(u32),
    Seq(Vec<u32>),
    /// Sorted.
    Set(Vec<u32>),
    Branch(u32, Box<Structure>),
    Pair(Box<Structure>, Box<Structure>),
    /// Catalog entry with `atoms[i]` the label at position `i`.
    Entry { catalog: u64, index: u32, atoms: Vec<u32> },
    /// `outer` is a structure on the part indices `0..parts.len()`.
    Subst { outer: Box<Structure>, parts: Vec<Structure> },
    /// Structure on the atoms plus `STAR`.
    Derived(Box<Structure>),
    Pointed { point: u32, inner: Box<Structure> },
}

impl Structure {
    /// Atoms in traversal order (the `STAR` atom excluded).
    pub fn atoms(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<u32>) {
        match self {
            Structure::Unit => {}
            Structure::Atom(a) => {
                if *a != STAR {
                    out.push(*a)
                }
            }
            Structure::Seq(v) | Structure::Set(v) | Structure::Entry { atoms: v, .. } => {
                out.extend(v.iter().copied().filter(|a| *a != STAR))
            }
            Structure::Branch(_, s) | Structure::Derived(s) => s.collect_atoms(out),
            Structure::Pointed { inner, .. } => inner.collect_atoms(out),
            Structure::Pair(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Structure::Subst { parts, .. } => parts.iter().for_each(|p| p.collect_atoms(out)),
        }
    }

    pub fn size(&self) -> usize {
        self.atoms().len()
    }

    /// Apply `f` to every atom label (the `STAR` label is left alone), and
    /// restore the sortedness invariant of sets.
    pub fn relabel(&mut self, f: &impl Fn(u32) -> u32) {
        let g = |a: u32| if a == STAR { STAR } else { f(a) };
        match self {
            Structure::Unit => {}
            Structure::Atom(a) => *a = g(*a),
            Structure::Seq(v) | Structure::Entry { atoms: v, .. } => v.iter_mut().for_each(|a| *a = g(*a)),
            Structure::Set(v) => {
                v.iter_mut().for_each(|a| *a = g(*a));
                v.sort_unstable();
            }
            Structure::Branch(_, s) | Structure::Derived(s) => s.relabel(f),
            Structure::Pointed { point, inner } => {
                *point = g(*point);
                inner.relabel(f);
            }
            Structure::Pair(a, b) => {
                a.relabel(f);
                b.relabel(f);
            }
            Structure::Subst { parts, .. } => parts.iter_mut().for_each(|p| p.relabel(f)),
        }
    }

    /// Relabel the atoms `0..k` by a uniformly random permutation.
    pub fn shuffle_labels<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let k = self.size();
        let mut perm: Vec<u32> = (0..k as u32).collect();
        perm.shuffle(rng);
        self.relabel(&|a| perm[a as usize]);
    }

    /// Canonical representative: sets sorted, substitution parts ordered by
    /// their smallest atom, catalog positions reduced modulo automorphisms.
    pub fn canonicalize(&mut self, expr: &Expr) -> Result<()> {
        let mut env = Vec::new();
        canon(self, expr, &mut env)
    }

    /// Weight of the structure as an element of the species `expr`.
    pub fn weight(&self, expr: &Expr) -> Result<Ratio> {
        let mut env = Vec::new();
        weight_of(self, expr, &mut env)
    }
}

fn lookup<'a>(env: &'a [(String, Expr)], name: &str) -> Result<&'a Expr> {
    env.iter()
        .rev()
        .find(|(n, _)| n == name)
        .map(|(_, e)| e)
        .ok_or_else(|| Error::InvalidStructure(format!("unbound reference `{name}`")))
}

fn mismatch(expr: &Expr) -> Error {
    Error::InvalidStructure(format!("structure does not match `{expr}`"))
}

fn canon(s: &mut Structure, expr: &Expr, env: &mut Vec<(String, Expr)>) -> Result<()> {
    match (expr.node(), s) {
        (Node::Fix { name, body }, s) => {
            env.push((name.clone(), expr.clone()));
            let r = canon(s, body, env);
            env.pop();
            r
        }
        (Node::Ref(name), s) => {
            let target = lookup(env, name)?.clone();
            canon(s, &target, env)
        }
        (Node::Set { .. }, Structure::Set(v)) => {
            v.sort_unstable();
            Ok(())
        }
        (Node::Catalog(cat), Structure::Entry { index, atoms, .. }) => {
            let entry = &cat.entries(atoms.len())[*index as usize];
            *atoms = entry.canonical_atoms(atoms);
            Ok(())
        }
        (Node::Sum(v), Structure::Branch(i, inner)) => {
            let e = v.get(*i as usize).ok_or_else(|| mismatch(expr))?;
            canon(inner, e, env)
        }
        (Node::Prod(a, b), Structure::Pair(x, y)) => {
            canon(x, a, env)?;
            canon(y, b, env)
        }
        (Node::Subst(outer_e, inner_e), Structure::Subst { outer, parts }) => {
            for p in parts.iter_mut() {
                canon(p, inner_e, env)?;
            }
            let mut order: Vec<usize> = (0..parts.len()).collect();
            let mins: Vec<u32> = parts.iter().map(|p| p.atoms().into_iter().min().unwrap_or(STAR)).collect();
            order.sort_by_key(|&i| mins[i]);
            let mut new_index = vec![0u32; parts.len()];
            for (new, &old) in order.iter().enumerate() {
                new_index[old] = new as u32;
            }
            let old_parts = std::mem::take(parts);
            let mut slots: Vec<Option<Structure>> = old_parts.into_iter().map(Some).collect();
            *parts = order.iter().map(|&i| slots[i].take().expect("part")).collect();
            outer.relabel(&|a| new_index[a as usize]);
            canon(outer, outer_e, env)
        }
        (Node::Derivative(e), Structure::Derived(inner)) => canon(inner, e, env),
        (Node::Pointing(e), Structure::Pointed { inner, .. }) => canon(inner, e, env),
        (Node::Restrict(e, _), s) | (Node::Scale(e, _), s) => canon(s, e, env),
        (Node::One, Structure::Unit) | (Node::Atom, Structure::Atom(_)) | (Node::Seq { .. }, Structure::Seq(_)) => Ok(()),
        _ => Err(mismatch(expr)),
    }
}

fn weight_of(s: &Structure, expr: &Expr, env: &mut Vec<(String, Expr)>) -> Result<Ratio> {
    use num_traits::One;
    match (expr.node(), s) {
        (Node::Fix { name, body }, s) => {
            env.push((name.clone(), expr.clone()));
            let r = weight_of(s, body, env);
            env.pop();
            r
        }
        (Node::Ref(name), s) => {
            let target = lookup(env, name)?.clone();
            weight_of(s, &target, env)
        }
        (Node::One, Structure::Unit) | (Node::Atom, Structure::Atom(_)) => Ok(Ratio::one()),
        (Node::Seq { sizes, weight }, Structure::Seq(v)) | (Node::Set { sizes, weight }, Structure::Set(v)) => {
            if !sizes.contains(v.len()) {
                return Err(mismatch(expr));
            }
            Ok(weight.as_ref().map_or_else(Ratio::one, |w| w.at(v.len())))
        }
        (Node::Catalog(cat), Structure::Entry { index, atoms, .. }) => {
            Ok(cat.entries(atoms.len())[*index as usize].weight.clone())
        }
        (Node::Sum(v), Structure::Branch(i, inner)) => {
            weight_of(inner, v.get(*i as usize).ok_or_else(|| mismatch(expr))?, env)
        }
        (Node::Prod(a, b), Structure::Pair(x, y)) => Ok(weight_of(x, a, env)? * weight_of(y, b, env)?),
        (Node::Subst(oe, ie), Structure::Subst { outer, parts }) => {
            let mut w = weight_of(outer, oe, env)?;
            for p in parts {
                w *= weight_of(p, ie, env)?;
            }
            Ok(w)
        }
        (Node::Derivative(e), Structure::Derived(inner)) => weight_of(inner, e, env),
        (Node::Pointing(e), Structure::Pointed { inner, .. }) => weight_of(inner, e, env),
        (Node::Restrict(e, sizes), s) => {
            if !sizes.contains(s.size()) {
                return Err(mismatch(expr));
            }
            weight_of(s, e, env)
        }
        (Node::Scale(e, r), s) => Ok(weight_of(s, e, env)? * r),
        _ => Err(mismatch(expr)),
    }
}

/// Relabel atoms so that they become `0..k` in increasing order of the old labels.
pub fn compact_labels(s: &mut Structure) {
    let mut atoms = s.atoms();
    atoms.sort_unstable();
    let map: HashMap<u32, u32> = atoms.iter().enumerate().map(|(i, &a)| (a, i as u32)).collect();
    s.relabel(&|a| map[&a]);
}
