//! Enrichment species `R` of the classes that are encoded as `R`-enriched
//! trees, together with the weight sequence `ω_k = [z^k] R(z)` they induce.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use super::catalog::{block_catalog, nonseparable_map_catalog, Catalog};
use super::coeffs::Tables;
use super::scalar::LogF64;
use super::{Expr, Ratio, SizeSet, WeightFn};
use crate::error::Result;
use crate::series::WeightSequence;

/// Which decoder understands the structures of an [`EnrichedClass`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassKind {
    /// `SEQ`: plane trees.
    Plane,
    /// `SET`: unordered (Cayley) trees.
    Labelled,
    /// `SET ∘ B'`: block-weighted connected graphs.
    Graph,
    /// `SEQ ∘ SEQ_{≥1}`: dissections, vertex-tree form.
    Dissection,
    /// `SEQ ∘ D` with `D = X + SEQ_{≥2}(D)`: outerplanar maps.
    Outerplanar,
    /// `1 + Q`: planar maps by corners.
    Maps,
    /// `SET^k`: front-rooted k-trees.
    KTree(usize),
}

/// An enrichment species with its decoding hint and catalog (if any).
#[derive(Clone)]
pub struct EnrichedClass {
    pub name: String,
    pub kind: ClassKind,
    pub r: Expr,
    pub catalog: Option<Arc<Catalog>>,
    radius: Option<f64>,
    support: Option<usize>,
    /// Closed-form weights replacing the generic tables.
    fixed: Option<WeightSequence>,
}

impl fmt::Debug for EnrichedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.name, self.r)
    }
}

impl EnrichedClass {
    fn new(name: impl Into<String>, kind: ClassKind, r: Expr) -> Self {
        Self { name: name.into(), kind, r, catalog: None, radius: None, support: None, fixed: None }
    }

    /// `ω_k = [z^k] R(z)`, produced in log space on demand.
    pub fn weights(&self) -> WeightSequence {
        if let Some(w) = &self.fixed {
            return w.clone();
        }
        let r = self.r.clone();
        WeightSequence::from_bulk(self.name.clone(), self.radius, self.support, move |len| {
            match Tables::<LogF64>::build(&r, len.saturating_sub(1)) {
                Ok(t) => t.get(&r).iter().map(|c| c.0).collect(),
                Err(_) => vec![f64::NAN; len],
            }
        })
    }
}

fn factorial(k: usize) -> Ratio {
    Ratio::from_integer((1..=k).map(BigInt::from).product())
}

pub fn plane() -> EnrichedClass {
    let mut c = EnrichedClass::new("plane", ClassKind::Plane, Expr::seq(SizeSet::ALL));
    c.radius = Some(1.0);
    c
}

pub fn labelled() -> EnrichedClass {
    let mut c = EnrichedClass::new("labelled", ClassKind::Labelled, Expr::set(SizeSet::ALL));
    c.radius = Some(f64::INFINITY);
    c
}

/// Connected graphs with unit block weights and blocks of at most `max_block`
/// non-root vertices.
pub fn block_graph(max_block: usize) -> Result<EnrichedClass> {
    block_graph_weighted(max_block, |_| Ratio::one())
}

/// As [`block_graph`], with a block weight depending on the block's edge count.
pub fn block_graph_weighted(max_block: usize, w: impl Fn(usize) -> Ratio) -> Result<EnrichedClass> {
    let cat = block_catalog(max_block, w)?;
    let r = Expr::subst(Expr::set(SizeSet::ALL), Expr::catalog(cat.clone()))?;
    let mut c = EnrichedClass::new(format!("graph:blocks={max_block}"), ClassKind::Graph, r);
    c.catalog = Some(cat);
    c.radius = Some(f64::INFINITY);
    Ok(c)
}

/// Planar maps: `R = 1 + Q` over nonseparable maps with at most `max_edges` edges.
pub fn planar_maps(max_edges: usize) -> Result<EnrichedClass> {
    let cat = nonseparable_map_catalog(max_edges)?;
    let r = Expr::sum(vec![Expr::one(), Expr::catalog(cat.clone())]);
    let mut c = EnrichedClass::new(format!("maps:edges={max_edges}"), ClassKind::Maps, r);
    c.catalog = Some(cat);
    c.support = Some(2 * max_edges);
    Ok(c)
}

/// Dissections whose inner faces of degree `d` weigh `face(d)`.
///
/// A vertex carries a sequence of parts; a part of length `j` stands for a
/// face of degree `j + 2`.
pub fn dissection(name: &str, face: impl Fn(usize) -> Ratio + Send + Sync + 'static) -> Result<EnrichedClass> {
    let part = Expr::weighted_seq(SizeSet::at_least(1), WeightFn::new(name, move |j| face(j + 2)));
    let r = Expr::subst(Expr::seq(SizeSet::ALL), part)?;
    Ok(EnrichedClass::new(format!("dissection:{name}"), ClassKind::Dissection, r))
}

/// Uniform dissections.
pub fn dissection_uniform() -> Result<EnrichedClass> {
    let mut c = dissection("unit", |_| Ratio::one())?;
    c.radius = Some(0.5);
    Ok(c)
}

/// Faces of degree `d` weigh `(d-2)!`.
pub fn dissection_factorial() -> Result<EnrichedClass> {
    let mut c = dissection("factorial", |d| factorial(d - 2))?;
    c.radius = Some(0.0);
    Ok(c)
}

/// `D = X + SEQ_{≥2}(D)` with a face of degree `d` weighted by `face(d)`;
/// the leaves are the non-root vertices.
pub fn dissection_leaf_form(name: &str, face: impl Fn(usize) -> Ratio + Send + Sync + 'static) -> Expr {
    let faces = Expr::weighted_seq(SizeSet::at_least(2), WeightFn::new(name, move |c| face(c + 1)));
    let body = Expr::sum(vec![
        Expr::atom(),
        Expr::subst(faces, Expr::reference("d")).expect("D has no size-0 structures"),
    ]);
    Expr::fix("d", body)
}

/// Outerplanar maps: `R = SEQ(D)` with uniform face weights.
pub fn outerplanar() -> Result<EnrichedClass> {
    let d = dissection_leaf_form("unit", |_| Ratio::one());
    let r = Expr::subst(Expr::seq(SizeSet::ALL), d)?;
    let mut c = EnrichedClass::new("outerplanar", ClassKind::Outerplanar, r);
    c.fixed = Some(outerplanar_weights());
    Ok(c)
}

/// `SEQ(D)` with `D = z + D²/(1 - D)` is `φ(t) = (3 - t - sqrt(1 - 6t + t²))/2`,
/// so `ω_0 = ω_1 = 1` and `ω_k = 2 s_{k-1}` for the little Schröder numbers
/// `(m + 1) s_m = 3 (2m - 1) s_{m-1} - (m - 2) s_{m-2}`.
fn outerplanar_weights() -> WeightSequence {
    let ln_s = std::sync::Mutex::new(vec![0.0f64, 0.0]);
    let ratio = std::sync::Mutex::new(1.0f64);
    let f = move |k: usize| -> f64 {
        if k < 2 {
            return 0.0;
        }
        let m = k - 1;
        let mut t = ln_s.lock().expect("schröder cache");
        let mut r = ratio.lock().expect("schröder cache");
        while t.len() <= m {
            let mf = t.len() as f64;
            *r = (3.0 * (2.0 * mf - 1.0) - (mf - 2.0) / *r) / (mf + 1.0);
            let last = *t.last().expect("non-empty");
            t.push(last + r.ln());
        }
        std::f64::consts::LN_2 + t[m]
    };
    let closed = |t: f64| {
        let d = (1.0 - 6.0 * t + t * t).max(0.0);
        let s = d.sqrt();
        [(3.0 - t - s) / 2.0, (-1.0 + (3.0 - t) / s) / 2.0, ((3.0 - t).powi(2) / (d * s) - 1.0 / s) / 2.0]
    };
    WeightSequence::from_ln_fn_closed("outerplanar", Some(3.0 - 8f64.sqrt()), f, closed)
}

/// Front-rooted k-trees: `R = SET^k`, a hedron distributing its children
/// over its `k` new fronts.
pub fn ktree(k: usize) -> EnrichedClass {
    assert!(k >= 1, "k-trees need k ≥ 1");
    let mut r = Expr::set(SizeSet::ALL);
    for _ in 1..k {
        r = Expr::prod(Expr::set(SizeSet::ALL), r);
    }
    let mut c = EnrichedClass::new(format!("ktree:k={k}"), ClassKind::KTree(k), r);
    c.radius = Some(f64::INFINITY);
    c
}

/// The connected graphs on `k` labels as an opaque weighted block:
/// `SET_{≥1}` with weight `C_k`, the number of connected labelled graphs.
pub fn connected_graphs_blob(max: usize) -> Expr {
    let counts = Arc::new(connected_graph_counts(max));
    Expr::weighted_set(
        SizeSet::range(1, max),
        WeightFn::new("connected", move |k| Ratio::from_integer(counts[k].clone())),
    )
}

/// `C_0..C_n` for connected labelled graphs, from
/// `C_n = g_n - Σ_{k<n} binom(n-1, k-1) C_k g_{n-k}` with `g_n = 2^{binom(n,2)}`.
pub fn connected_graph_counts(n: usize) -> Vec<BigInt> {
    let g = |m: usize| BigInt::one() << (m * m.saturating_sub(1) / 2);
    let mut c = vec![BigInt::from(0); n + 1];
    for m in 1..=n {
        let mut acc = g(m);
        for k in 1..m {
            acc -= crate::numeric::binomial_big((m - 1) as u64, (k - 1) as u64) * &c[k] * g(m - k);
        }
        c[m] = acc;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::egf_coefficients_exact;

    #[test]
    fn connected_counts() {
        let c = connected_graph_counts(6);
        let want = [0u64, 1, 1, 4, 38, 728, 26704];
        for (a, b) in c.iter().zip(want) {
            assert_eq!(*a, BigInt::from(b));
        }
    }

    #[test]
    fn dissection_weights_leaf_form_counts() {
        // Leaves carry a linear order, so the EGF coefficients are the counts 1, 1, 3, 11, 45.
        let d = dissection_leaf_form("unit", |_| Ratio::one());
        let c = egf_coefficients_exact(&d, 5).unwrap();
        let want = [0i64, 1, 1, 3, 11, 45];
        for (k, w) in want.iter().enumerate() {
            assert_eq!(c[k], Ratio::from_integer((*w).into()), "k = {k}");
        }
    }

    #[test]
    fn outerplanar_closed_form_matches_tables() {
        let c = outerplanar().unwrap();
        let t = Tables::<LogF64>::build(&c.r, 20).unwrap();
        let w = c.weights();
        for (k, x) in t.get(&c.r).iter().enumerate() {
            assert!((x.0 - w.ln_coeff(k)).abs() < 1e-9, "k = {k}");
        }
        let (phi, _) = crate::series::eval_phi(&w, 0.1, 1e-12).unwrap();
        let direct: f64 = (0..400).map(|k| (w.ln_coeff(k) + k as f64 * 0.1f64.ln()).exp()).sum();
        assert!((phi - direct).abs() < 1e-10);
    }

    #[test]
    fn ktree_weights() {
        let w = ktree(2).weights();
        for j in 0..8 {
            let want = j as f64 * 2f64.ln() - crate::numeric::ln_factorial(j);
            assert!((w.ln_coeff(j) - want).abs() < 1e-12);
        }
    }
}
