use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::structure::{Structure, STAR};
use super::{Expr, Node, Ratio};
use crate::error::{Error, Result};

/// Every structure on the labels `0..n` with its weight (zero-weight
/// structures are dropped). Intended for `n ≤ 6` or so.
pub fn enumerate_small(expr: &Expr, n: usize) -> Result<Vec<(Structure, Ratio)>> {
    let labels: Vec<u32> = (0..n as u32).collect();
    let mut env = Vec::new();
    let out = enum_on(expr, &labels, &mut env, 0)?;
    Ok(out.into_iter().filter(|(_, w)| !w.is_zero()).collect())
}

type Found = Vec<(Structure, Ratio)>;

fn permutations(labels: &[u32]) -> Vec<Vec<u32>> {
    if labels.len() <= 1 {
        return vec![labels.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..labels.len() {
        let mut rest = labels.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Set partitions with blocks listed in order of their least element.
fn set_partitions(labels: &[u32]) -> Vec<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    fn rec(i: usize, labels: &[u32], blocks: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        if i == labels.len() {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(labels[i]);
            rec(i + 1, labels, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![labels[i]]);
        rec(i + 1, labels, blocks, out);
        blocks.pop();
    }
    rec(0, labels, &mut blocks, &mut out);
    out
}

fn enum_on(expr: &Expr, labels: &[u32], env: &mut Vec<(String, Expr)>, depth: usize) -> Result<Found> {
    if depth > 10_000 {
        return Err(Error::InvalidStructure("enumeration does not terminate".into()));
    }
    let k = labels.len();
    let w_at = |w: &Option<super::WeightFn>| w.as_ref().map_or_else(Ratio::one, |w| w.at(k));
    Ok(match expr.node() {
        Node::One => {
            if k == 0 {
                vec![(Structure::Unit, Ratio::one())]
            } else {
                vec![]
            }
        }
        Node::Atom => {
            if k == 1 {
                vec![(Structure::Atom(labels[0]), Ratio::one())]
            } else {
                vec![]
            }
        }
        Node::Seq { sizes, weight } => {
            if !sizes.contains(k) {
                return Ok(vec![]);
            }
            let w = w_at(weight);
            permutations(labels).into_iter().map(|p| (Structure::Seq(p), w.clone())).collect()
        }
        Node::Set { sizes, weight } => {
            if !sizes.contains(k) {
                return Ok(vec![]);
            }
            vec![(Structure::Set(labels.to_vec()), w_at(weight))]
        }
        Node::Catalog(cat) => {
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for (idx, entry) in cat.entries(k).iter().enumerate() {
                for p in permutations(labels) {
                    let atoms = entry.canonical_atoms(&p);
                    if seen.insert((idx, atoms.clone())) {
                        out.push((
                            Structure::Entry { catalog: cat.id, index: idx as u32, atoms },
                            entry.weight.clone(),
                        ));
                    }
                }
            }
            out
        }
        Node::Sum(parts) => {
            let mut out = Vec::new();
            for (i, p) in parts.iter().enumerate() {
                for (s, w) in enum_on(p, labels, env, depth + 1)? {
                    out.push((Structure::Branch(i as u32, Box::new(s)), w));
                }
            }
            out
        }
        Node::Prod(a, b) => {
            let mut out = Vec::new();
            for mask in 0u64..(1u64 << k) {
                let left: Vec<u32> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| labels[i]).collect();
                let right: Vec<u32> = (0..k).filter(|i| mask >> i & 1 == 0).map(|i| labels[i]).collect();
                let la = enum_on(a, &left, env, depth + 1)?;
                if la.is_empty() {
                    continue;
                }
                let lb = enum_on(b, &right, env, depth + 1)?;
                for (x, wx) in &la {
                    for (y, wy) in &lb {
                        out.push((Structure::Pair(Box::new(x.clone()), Box::new(y.clone())), wx * wy));
                    }
                }
            }
            out
        }
        Node::Subst(f, g) => {
            let mut out = Vec::new();
            for blocks in set_partitions(labels) {
                let m = blocks.len();
                let outer_labels: Vec<u32> = (0..m as u32).collect();
                let outers = enum_on(f, &outer_labels, env, depth + 1)?;
                if outers.is_empty() {
                    continue;
                }
                let mut combos: Vec<(Vec<Structure>, Ratio)> = vec![(Vec::new(), Ratio::one())];
                for b in &blocks {
                    let inner = enum_on(g, b, env, depth + 1)?;
                    let mut next = Vec::new();
                    for (parts, w) in &combos {
                        for (s, ws) in &inner {
                            let mut p = parts.clone();
                            p.push(s.clone());
                            next.push((p, w * ws));
                        }
                    }
                    combos = next;
                    if combos.is_empty() {
                        break;
                    }
                }
                for (o, wo) in &outers {
                    for (parts, wp) in &combos {
                        out.push((
                            Structure::Subst { outer: Box::new(o.clone()), parts: parts.clone() },
                            wo * wp,
                        ));
                    }
                }
            }
            out
        }
        Node::Derivative(e) => {
            let mut with_star = labels.to_vec();
            with_star.push(STAR);
            enum_on(e, &with_star, env, depth + 1)?
                .into_iter()
                .map(|(s, w)| (Structure::Derived(Box::new(s)), w))
                .collect()
        }
        Node::Pointing(e) => {
            let mut out = Vec::new();
            for (s, w) in enum_on(e, labels, env, depth + 1)? {
                for &a in labels {
                    out.push((Structure::Pointed { point: a, inner: Box::new(s.clone()) }, w.clone()));
                }
            }
            out
        }
        Node::Restrict(e, sizes) => {
            if sizes.contains(k) {
                enum_on(e, labels, env, depth + 1)?
            } else {
                vec![]
            }
        }
        Node::Scale(e, r) => enum_on(e, labels, env, depth + 1)?.into_iter().map(|(s, w)| (s, w * r)).collect(),
        Node::Fix { name, body } => {
            env.push((name.clone(), expr.clone()));
            let r = enum_on(body, labels, env, depth + 1);
            env.pop();
            r?
        }
        Node::Ref(name) => {
            let target = env
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, e)| e.clone())
                .ok_or_else(|| Error::InvalidStructure(format!("unbound reference `{name}`")))?;
            match target.node() {
                Node::Fix { body, .. } => enum_on(body, labels, env, depth + 1)?,
                _ => enum_on(&target, labels, env, depth + 1)?,
            }
        }
    })
}
