use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::numeric::{ln_factorial, ln_ratio, log_add, ratio_to_f64};

/// Coefficient arithmetic used by the generic table builder.
pub trait Scalar: Clone + Send + Sync + std::fmt::Debug + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn from_ratio(r: &BigRational) -> Self;
    fn from_usize(k: usize) -> Self;
    fn div_usize(&self, k: usize) -> Self;
    fn inv_factorial(k: usize) -> Self;
    fn is_zero(&self) -> bool;
    /// Equality used to detect fixed-point convergence.
    fn same(&self, other: &Self) -> bool;
    fn ln(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn from_ratio(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }
    fn from_usize(k: usize) -> Self {
        k as f64
    }
    fn div_usize(&self, k: usize) -> Self {
        self / k as f64
    }
    fn inv_factorial(k: usize) -> Self {
        (-ln_factorial(k)).exp()
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn same(&self, o: &Self) -> bool {
        self == o || (self - o).abs() <= 1e-15 * self.abs().max(o.abs())
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_usize(k: usize) -> Self {
        BigRational::from_integer(BigInt::from(k))
    }
    fn div_usize(&self, k: usize) -> Self {
        self / BigRational::from_integer(BigInt::from(k))
    }
    fn inv_factorial(k: usize) -> Self {
        let f: BigInt = (1..=k).map(BigInt::from).product();
        BigRational::new(BigInt::one(), f)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn same(&self, o: &Self) -> bool {
        self == o
    }
    fn ln(&self) -> f64 {
        ln_ratio(self)
    }
}

/// A non-negative real stored as its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogF64(pub f64);

impl Scalar for LogF64 {
    fn zero() -> Self {
        LogF64(f64::NEG_INFINITY)
    }
    fn one() -> Self {
        LogF64(0.0)
    }
    fn add(&self, o: &Self) -> Self {
        LogF64(log_add(self.0, o.0))
    }
    fn mul(&self, o: &Self) -> Self {
        if self.0 == f64::NEG_INFINITY || o.0 == f64::NEG_INFINITY {
            return Self::zero();
        }
        LogF64(self.0 + o.0)
    }
    fn from_ratio(r: &BigRational) -> Self {
        LogF64(ln_ratio(r))
    }
    fn from_usize(k: usize) -> Self {
        LogF64((k as f64).ln())
    }
    fn div_usize(&self, k: usize) -> Self {
        LogF64(self.0 - (k as f64).ln())
    }
    fn inv_factorial(k: usize) -> Self {
        LogF64(-ln_factorial(k))
    }
    fn is_zero(&self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
    fn same(&self, o: &Self) -> bool {
        self.0 == o.0 || (self.0 - o.0).abs() <= 1e-13 * (1.0 + self.0.abs())
    }
    fn ln(&self) -> f64 {
        self.0
    }
}
