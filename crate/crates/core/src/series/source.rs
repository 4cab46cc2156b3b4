use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

/// Anything that can hand out the coefficients `ω_k` of a weight sequence.
///
/// Coefficients are exchanged as natural logarithms so that sequences such
/// as `k!` or `k^{-β} ρ^{-k}` stay representable far beyond `f64` range.
pub trait CoefficientSource: Send + Sync + fmt::Debug {
    /// `ln ω_k`, or `-inf` when `ω_k = 0`.
    fn ln_coeff(&self, k: usize) -> f64;

    /// `ln ω_k` for `k < len`.
    fn ln_coeffs(&self, len: usize) -> Vec<f64> {
        (0..len).map(|k| self.ln_coeff(k)).collect()
    }

    /// Largest index with a non-zero weight, when the support is finite.
    fn support_bound(&self) -> Option<usize> {
        None
    }

    /// Radius of convergence when known analytically.
    fn declared_radius(&self) -> Option<f64> {
        None
    }

    /// `(φ(t), φ'(t), φ''(t))` when a closed form is available.
    fn closed_form(&self, _t: f64) -> Option<[f64; 3]> {
        None
    }

    fn name(&self) -> String;
}

/// A shared handle to a weight sequence.
#[derive(Clone)]
pub struct WeightSequence {
    src: Arc<dyn CoefficientSource>,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightSequence({})", self.src.name())
    }
}

impl WeightSequence {
    pub fn new(src: impl CoefficientSource + 'static) -> Self {
        Self { src: Arc::new(src) }
    }

    /// Finitely supported sequence given by its values; the radius is infinite
    /// unless `radius` is supplied.
    pub fn from_values(values: Vec<f64>, radius: Option<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidWeights(format!("negative or non-finite weight {v}")));
        }
        let ln = values.iter().map(|v| v.ln()).collect();
        Ok(Self::new(Table { ln, radius, name: "table".into() }))
    }

    /// Sequence given by `k ↦ ln ω_k`, optionally with a known radius.
    pub fn from_ln_fn(
        name: impl Into<String>,
        radius: Option<f64>,
        f: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(LnFn { name: name.into(), radius, f: Box::new(f), closed: None })
    }

    /// Like [`WeightSequence::from_ln_fn`] with an exact evaluator for `φ, φ', φ''`.
    pub fn from_ln_fn_closed(
        name: impl Into<String>,
        radius: Option<f64>,
        f: impl Fn(usize) -> f64 + Send + Sync + 'static,
        closed: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        Self::new(LnFn {
            name: name.into(),
            radius,
            f: Box::new(f),
            closed: Some(Box::new(closed)),
        })
    }

    /// Sequence whose log-coefficients are produced in bulk by `fill(len)`
    /// and cached; used for weights that come out of a series computation.
    pub fn from_bulk(
        name: impl Into<String>,
        radius: Option<f64>,
        support: Option<usize>,
        fill: impl Fn(usize) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self::new(Bulk {
            name: name.into(),
            radius,
            support,
            fill: Box::new(fill),
            cache: Mutex::new(Vec::new()),
        })
    }

    pub fn source(&self) -> &dyn CoefficientSource {
        &*self.src
    }

    pub fn name(&self) -> String {
        self.src.name()
    }

    pub fn ln_coeff(&self, k: usize) -> f64 {
        if let Some(b) = self.src.support_bound() {
            if k > b {
                return f64::NEG_INFINITY;
            }
        }
        self.src.ln_coeff(k)
    }

    pub fn ln_coeffs(&self, len: usize) -> Vec<f64> {
        let mut v = self.src.ln_coeffs(len);
        if let Some(b) = self.src.support_bound() {
            for x in v.iter_mut().skip(b + 1) {
                *x = f64::NEG_INFINITY;
            }
        }
        v
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.ln_coeff(k).exp()
    }

    pub fn support_bound(&self) -> Option<usize> {
        self.src.support_bound()
    }

    /// Check the standing assumptions `ω_0 > 0` and `ω_k > 0` for some `k ≥ 2`.
    pub fn validate(&self) -> Result<()> {
        let probe = self.support_bound().map_or(4096, |b| b + 1);
        let ln = self.ln_coeffs(probe);
        if ln.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::InvalidWeights("non-finite weight".into()));
        }
        if ln[0] == f64::NEG_INFINITY {
            return Err(Error::InvalidWeights("ω_0 must be positive".into()));
        }
        if !ln.iter().skip(2).any(|x| x.is_finite()) {
            return Err(Error::InvalidWeights("need ω_k > 0 for some k ≥ 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
struct Table {
    ln: Vec<f64>,
    radius: Option<f64>,
    name: String,
}

impl CoefficientSource for Table {
    fn ln_coeff(&self, k: usize) -> f64 {
        self.ln.get(k).copied().unwrap_or(f64::NEG_INFINITY)
    }
    fn support_bound(&self) -> Option<usize> {
        if self.radius.is_some() {
            return None;
        }
        Some(self.ln.iter().rposition(|x| x.is_finite()).unwrap_or(0))
    }
    fn declared_radius(&self) -> Option<f64> {
        self.radius.or(Some(f64::INFINITY))
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

type ClosedFn = Box<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

struct LnFn {
    name: String,
    radius: Option<f64>,
    f: Box<dyn Fn(usize) -> f64 + Send + Sync>,
    closed: Option<ClosedFn>,
}

impl fmt::Debug for LnFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl CoefficientSource for LnFn {
    fn ln_coeff(&self, k: usize) -> f64 {
        (self.f)(k)
    }
    fn declared_radius(&self) -> Option<f64> {
        self.radius
    }
    fn closed_form(&self, t: f64) -> Option<[f64; 3]> {
        self.closed.as_ref().map(|c| c(t))
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

type FillFn = Box<dyn Fn(usize) -> Vec<f64> + Send + Sync>;

struct Bulk {
    name: String,
    radius: Option<f64>,
    support: Option<usize>,
    fill: FillFn,
    cache: Mutex<Vec<f64>>,
}

impl fmt::Debug for Bulk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl Bulk {
    fn ensure(&self, len: usize) -> std::sync::MutexGuard<'_, Vec<f64>> {
        let mut cache = self.cache.lock().expect("coefficient cache poisoned");
        if cache.len() < len {
            let target = len.max(2 * cache.len()).max(64);
            let target = self.support.map_or(target, |b| target.min(b + 1).max(len));
            *cache = (self.fill)(target);
        }
        cache
    }
}

impl CoefficientSource for Bulk {
    fn ln_coeff(&self, k: usize) -> f64 {
        if self.support.is_some_and(|b| k > b) {
            return f64::NEG_INFINITY;
        }
        self.ensure(k + 1)[k]
    }
    fn ln_coeffs(&self, len: usize) -> Vec<f64> {
        let cache = self.ensure(len);
        let mut v: Vec<f64> = cache.iter().take(len).copied().collect();
        v.resize(len, f64::NEG_INFINITY);
        v
    }
    fn support_bound(&self) -> Option<usize> {
        self.support
    }
    fn declared_radius(&self) -> Option<f64> {
        if self.support.is_some() {
            Some(f64::INFINITY)
        } else {
            self.radius
        }
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}
