//! Weighted combinatorial species: expressions, exact coefficient tables,
//! exhaustive enumeration, fixed-size and Boltzmann samplers.

mod catalog;
mod coeffs;
mod enumerate;
mod parse;
pub mod presets;
pub(crate) mod sample;
mod scalar;
mod structure;

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

pub use catalog::{block_catalog, nonseparable_map_catalog, Catalog, CatalogEntry, Payload};
pub use coeffs::{egf_coefficients, egf_coefficients_exact, Tables};
pub use enumerate::enumerate_small;
pub use parse::parse_expr;
pub use sample::{boltzmann_value, sample_boltzmann, sample_fixed_size, FixedSampler};
pub use scalar::{LogF64, Scalar};
pub use structure::{compact_labels, Structure, STAR};

use crate::error::{Error, Result};

pub type Ratio = BigRational;

/// Contiguous size range `min..=max` (`max = None` is unbounded).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeSet {
    pub min: usize,
    pub max: Option<usize>,
}

impl SizeSet {
    pub const ALL: SizeSet = SizeSet { min: 0, max: None };

    pub fn at_least(min: usize) -> Self {
        Self { min, max: None }
    }
    pub fn at_most(max: usize) -> Self {
        Self { min: 0, max: Some(max) }
    }
    pub fn exactly(k: usize) -> Self {
        Self { min: k, max: Some(k) }
    }
    pub fn range(min: usize, max: usize) -> Self {
        Self { min, max: Some(max) }
    }
    pub fn contains(&self, k: usize) -> bool {
        k >= self.min && self.max.is_none_or(|m| k <= m)
    }
    pub fn is_all(&self) -> bool {
        *self == Self::ALL
    }
}

impl fmt::Display for SizeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.min, self.max) {
            (a, Some(b)) if a == b => write!(f, "[={a}]"),
            (0, None) => Ok(()),
            (0, Some(b)) => write!(f, "[..{b}]"),
            (a, None) => write!(f, "[{a}..]"),
            (a, Some(b)) => write!(f, "[{a}..{b}]"),
        }
    }
}

/// A named per-size weight `k ↦ γ_k`.
#[derive(Clone)]
pub struct WeightFn {
    pub name: String,
    f: Arc<dyn Fn(usize) -> Ratio + Send + Sync>,
}

impl WeightFn {
    pub fn new(name: impl Into<String>, f: impl Fn(usize) -> Ratio + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }
    pub fn at(&self, k: usize) -> Ratio {
        (self.f)(k)
    }
}

impl fmt::Debug for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Expression node. Sharing is by `Arc`, and node identity (pointer) keys
/// the coefficient caches.
#[derive(Debug)]
pub enum Node {
    One,
    Atom,
    /// Linear orders of the atoms, weighted per length.
    Seq { sizes: SizeSet, weight: Option<WeightFn> },
    /// The atom set itself, weighted per size; doubles as an opaque weighted blob.
    Set { sizes: SizeSet, weight: Option<WeightFn> },
    Catalog(Arc<Catalog>),
    Sum(Vec<Expr>),
    Prod(Expr, Expr),
    Subst(Expr, Expr),
    Derivative(Expr),
    Pointing(Expr),
    Restrict(Expr, SizeSet),
    Scale(Expr, Ratio),
    Fix { name: String, body: Expr },
    Ref(String),
}

#[derive(Clone, Debug)]
pub struct Expr(pub Arc<Node>);

impl Expr {
    fn wrap(n: Node) -> Self {
        Expr(Arc::new(n))
    }
    pub fn node(&self) -> &Node {
        &self.0
    }
    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as *const () as usize
    }

    pub fn one() -> Self {
        Self::wrap(Node::One)
    }
    pub fn atom() -> Self {
        Self::wrap(Node::Atom)
    }
    pub fn seq(sizes: SizeSet) -> Self {
        Self::wrap(Node::Seq { sizes, weight: None })
    }
    pub fn set(sizes: SizeSet) -> Self {
        Self::wrap(Node::Set { sizes, weight: None })
    }
    pub fn weighted_seq(sizes: SizeSet, w: WeightFn) -> Self {
        Self::wrap(Node::Seq { sizes, weight: Some(w) })
    }
    pub fn weighted_set(sizes: SizeSet, w: WeightFn) -> Self {
        Self::wrap(Node::Set { sizes, weight: Some(w) })
    }
    pub fn catalog(c: Arc<Catalog>) -> Self {
        Self::wrap(Node::Catalog(c))
    }
    pub fn sum(parts: Vec<Expr>) -> Self {
        Self::wrap(Node::Sum(parts))
    }
    pub fn prod(a: Expr, b: Expr) -> Self {
        Self::wrap(Node::Prod(a, b))
    }
    /// `outer ∘ inner`; `inner` must not have structures of size zero.
    pub fn subst(outer: Expr, inner: Expr) -> Result<Self> {
        if !Zero::is_zero(&coeffs::constant_term_open(&inner)?) {
            return Err(Error::InvalidStructure("substituted species has size-0 structures".into()));
        }
        Ok(Self::wrap(Node::Subst(outer, inner)))
    }
    pub fn derivative(e: Expr) -> Self {
        Self::wrap(Node::Derivative(e))
    }
    pub fn pointing(e: Expr) -> Self {
        Self::wrap(Node::Pointing(e))
    }
    pub fn restrict(e: Expr, sizes: SizeSet) -> Self {
        Self::wrap(Node::Restrict(e, sizes))
    }
    pub fn scale(e: Expr, r: Ratio) -> Self {
        Self::wrap(Node::Scale(e, r))
    }
    pub fn fix(name: impl Into<String>, body: Expr) -> Self {
        Self::wrap(Node::Fix { name: name.into(), body })
    }
    pub fn reference(name: impl Into<String>) -> Self {
        Self::wrap(Node::Ref(name.into()))
    }

    /// Number of `Derivative` nodes below (and including) this one, used to
    /// size fixed-point iterations.
    pub(crate) fn derivative_depth(&self) -> usize {
        match self.node() {
            Node::Derivative(e) => 1 + e.derivative_depth(),
            Node::Sum(v) => v.iter().map(|e| e.derivative_depth()).max().unwrap_or(0),
            Node::Prod(a, b) | Node::Subst(a, b) => a.derivative_depth().max(b.derivative_depth()),
            Node::Pointing(e) | Node::Restrict(e, _) | Node::Scale(e, _) => e.derivative_depth(),
            Node::Fix { body, .. } => body.derivative_depth(),
            _ => 0,
        }
    }

    /// Structural equality (weights compared by name, catalogs by id).
    pub fn same_as(&self, other: &Expr) -> bool {
        use Node::*;
        match (self.node(), other.node()) {
            (One, One) | (Atom, Atom) => true,
            (Seq { sizes: a, weight: wa }, Seq { sizes: b, weight: wb })
            | (Set { sizes: a, weight: wa }, Set { sizes: b, weight: wb }) => {
                a == b && wa.as_ref().map(|w| &w.name) == wb.as_ref().map(|w| &w.name)
            }
            (Catalog(a), Catalog(b)) => a.id == b.id,
            (Sum(a), Sum(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_as(y)),
            (Prod(a1, a2), Prod(b1, b2)) | (Subst(a1, a2), Subst(b1, b2)) => a1.same_as(b1) && a2.same_as(b2),
            (Derivative(a), Derivative(b)) | (Pointing(a), Pointing(b)) => a.same_as(b),
            (Restrict(a, s), Restrict(b, t)) => s == t && a.same_as(b),
            (Scale(a, r), Scale(b, s)) => r == s && a.same_as(b),
            (Fix { name: n, body: a }, Fix { name: m, body: b }) => n == m && a.same_as(b),
            (Ref(a), Ref(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::One => write!(f, "one"),
            Node::Atom => write!(f, "x"),
            Node::Seq { sizes, weight } => {
                write!(f, "seq{sizes}")?;
                if let Some(w) = weight {
                    write!(f, "{{{}}}", w.name)?;
                }
                Ok(())
            }
            Node::Set { sizes, weight } => {
                write!(f, "set{sizes}")?;
                if let Some(w) = weight {
                    write!(f, "{{{}}}", w.name)?;
                }
                Ok(())
            }
            Node::Catalog(c) => write!(f, "{}", c.name),
            Node::Sum(v) => {
                write!(f, "sum(")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            Node::Prod(a, b) => write!(f, "prod({a}, {b})"),
            Node::Subst(a, b) => write!(f, "subst({a}, {b})"),
            Node::Derivative(e) => write!(f, "deriv({e})"),
            Node::Pointing(e) => write!(f, "point({e})"),
            Node::Restrict(e, s) => write!(f, "restrict{s}({e})"),
            Node::Scale(e, r) => write!(f, "scale[{r}]({e})"),
            Node::Fix { name, body } => write!(f, "fix({name}, {body})"),
            Node::Ref(n) => write!(f, "{n}"),
        }
    }
}

