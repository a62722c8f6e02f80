//! Number types shared by the exact, arbitrary-precision and double-precision
//! code paths.
//!
//! Moment-based tridiagonalization and the Bell-polynomial conversions are
//! written once against [`Scalar`] and instantiated with
//!
//! * [`RBig`] exact rationals (test suite, exact identities),
//! * [`Real`] binary floating point at a caller-chosen precision,
//! * `f64` for plotting-grade evaluation,
//!
//! and [`Complex`] over any of them. Constants are produced "like" an existing
//! value so that they inherit its working precision.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use dashu_float::round::mode::{HalfAway, HalfEven};
use dashu_float::{DBig, FBig};
use dashu_int::IBig;
pub use dashu_ratio::RBig;

use crate::error::{Error, Result};

/// Working precision used when callers do not ask for one.
pub const DEFAULT_PRECISION_BITS: usize = 256;

/// Upper limit of the automatic precision-doubling policy.
pub const MAX_PRECISION_BITS: usize = 4096;

/// A commutative field element.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Integer constant carrying the precision of `self`.
    fn from_i64_like(&self, v: i64) -> Self;

    fn is_zero(&self) -> bool;

    fn zero_like(&self) -> Self {
        self.from_i64_like(0)
    }

    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = self.one_like();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

/// An ordered real field.
pub trait RealScalar: Scalar + PartialOrd {
    fn abs(&self) -> Self;

    fn to_f64(&self) -> f64;

    /// Value of a double, carrying the precision of `self`.
    fn from_f64_like(&self, v: f64) -> Self;

    /// `2^(-p/2)` for a `p`-bit float; zero for exact arithmetic.
    fn noise_floor(&self) -> Self;

    /// `None` for exact arithmetic.
    fn precision_bits(&self) -> Option<usize>;
}

/// A real type with the elementary functions needed by the spectra.
pub trait FloatScalar: RealScalar {
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
}

// ---------------------------------------------------------------------------
// f64

impl Scalar for f64 {
    fn from_i64_like(&self, v: i64) -> Self {
        v as f64
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl RealScalar for f64 {
    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64_like(&self, v: f64) -> Self {
        v
    }

    fn noise_floor(&self) -> Self {
        (2.0f64).powf(-26.5)
    }

    fn precision_bits(&self) -> Option<usize> {
        Some(53)
    }
}

impl FloatScalar for f64 {
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }
}

// ---------------------------------------------------------------------------
// exact rationals

impl Scalar for RBig {
    fn from_i64_like(&self, v: i64) -> Self {
        RBig::from(v)
    }

    fn is_zero(&self) -> bool {
        RBig::is_zero(self)
    }
}

impl RealScalar for RBig {
    fn abs(&self) -> Self {
        if *self < RBig::ZERO {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn to_f64(&self) -> f64 {
        RBig::to_f64(self).value()
    }

    fn from_f64_like(&self, v: f64) -> Self {
        RBig::try_from(v).expect("finite double")
    }

    fn noise_floor(&self) -> Self {
        RBig::ZERO
    }

    fn precision_bits(&self) -> Option<usize> {
        None
    }
}

/// Parses `"p/q"`, an integer, or a finite decimal (`"0.25"`, `"1e-3"`) into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<RBig> {
    let s = s.trim();
    if let Ok(r) = RBig::from_str(s) {
        return Ok(r);
    }
    let d = DBig::from_str(s).map_err(|_| Error::arg(format!("not a number: {s:?}")))?;
    let (signif, exp) = d.repr().clone().into_parts();
    let ten = RBig::from(10);
    let scale = if exp >= 0 {
        ten.powi(exp as u32)
    } else {
        RBig::ONE / ten.powi((-exp) as u32)
    };
    Ok(RBig::from(signif) * scale)
}

// ---------------------------------------------------------------------------
// arbitrary precision binary floats

type Inner = FBig<HalfEven, 2>;

/// Binary floating-point number with an explicit working precision.
///
/// Every constructor takes the precision; arithmetic keeps the larger
/// precision of its operands.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct Real(Inner);

impl Real {
    pub fn from_i64(v: i64, bits: usize) -> Self {
        Real(Inner::from(v).with_precision(bits).value())
    }

    pub fn from_f64(v: f64, bits: usize) -> Self {
        assert!(v.is_finite(), "non-finite value {v}");
        Real(Inner::try_from(v).expect("finite").with_precision(bits).value())
    }

    pub fn from_rational(r: &RBig, bits: usize) -> Self {
        let num = Inner::from(r.numerator().clone()).with_precision(bits).value();
        let den = Inner::from(IBig::from(r.denominator().clone()))
            .with_precision(bits)
            .value();
        Real(num / den)
    }

    /// Parses a decimal string, rounding once to `bits`.
    pub fn parse(s: &str, bits: usize) -> Result<Self> {
        let d = DBig::from_str(s.trim()).map_err(|_| Error::arg(format!("not a number: {s:?}")))?;
        let b = d.with_base_and_precision::<2>(bits + 8).value();
        let b: Inner = b.with_rounding::<HalfEven>();
        Ok(Real(b.with_precision(bits).value()))
    }

    pub fn precision(&self) -> usize {
        self.0.precision()
    }

    /// Re-rounds (or exactly widens) to `bits`.
    pub fn with_precision(&self, bits: usize) -> Self {
        Real(self.0.clone().with_precision(bits).value())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        if self.0 == Inner::ZERO {
            return "0".to_string();
        }
        let d = self
            .0
            .clone()
            .with_rounding::<HalfAway>()
            .with_base_and_precision::<10>(digits)
            .value();
        format!("{d:e}")
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.sqrt())
    }

    pub fn ln(&self) -> Self {
        Real(self.0.ln())
    }

    pub fn exp(&self) -> Self {
        Real(self.0.exp())
    }

    pub fn abs(&self) -> Self {
        if self.0 < Inner::ZERO {
            Real(-self.0.clone())
        } else {
            self.clone()
        }
    }

    /// `2^e` at the precision of `self`.
    pub fn pow2_like(&self, e: isize) -> Self {
        Real(
            Inner::from_parts(IBig::ONE, e)
                .with_precision(self.precision().max(1))
                .value(),
        )
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.precision() as f64 * std::f64::consts::LOG10_2).ceil() as usize;
        f.write_str(&self.to_decimal_string(digits.max(1)))
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real(self.0.$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a Real> for &'a Real {
            type Output = Real;
            fn $m(self, rhs: &'a Real) -> Real {
                Real((&self.0).$m(&rhs.0))
            }
        }
    };
}

real_binop!(Add, add);
real_binop!(Sub, sub);
real_binop!(Mul, mul);
real_binop!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Scalar for Real {
    fn from_i64_like(&self, v: i64) -> Self {
        Real::from_i64(v, self.precision())
    }

    fn is_zero(&self) -> bool {
        self.0 == Inner::ZERO
    }
}

impl RealScalar for Real {
    fn abs(&self) -> Self {
        Real::abs(self)
    }

    fn to_f64(&self) -> f64 {
        Real::to_f64(self)
    }

    fn from_f64_like(&self, v: f64) -> Self {
        Real::from_f64(v, self.precision())
    }

    fn noise_floor(&self) -> Self {
        self.pow2_like(-((self.precision() / 2) as isize))
    }

    fn precision_bits(&self) -> Option<usize> {
        Some(self.precision())
    }
}

impl FloatScalar for Real {
    fn sqrt(&self) -> Self {
        Real::sqrt(self)
    }

    fn ln(&self) -> Self {
        Real::ln(self)
    }

    fn exp(&self) -> Self {
        Real::exp(self)
    }
}

// ---------------------------------------------------------------------------
// complex numbers over any scalar

/// `re + i·im` over an arbitrary [`Scalar`].
#[derive(Clone, Debug, PartialEq)]
pub struct Complex<T> {
    pub re: T,
    pub im: T,
}

impl<T: Scalar> Complex<T> {
    pub fn new(re: T, im: T) -> Self {
        Complex { re, im }
    }

    pub fn real(re: T) -> Self {
        let im = re.zero_like();
        Complex { re, im }
    }

    /// The imaginary unit at the precision of `like`.
    pub fn i_like(like: &T) -> Self {
        Complex { re: like.zero_like(), im: like.one_like() }
    }

    pub fn conj(&self) -> Self {
        Complex { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> T {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn scale(&self, k: &T) -> Self {
        Complex { re: self.re.clone() * k.clone(), im: self.im.clone() * k.clone() }
    }

    /// `(-i)^n` at the precision of `like`.
    pub fn minus_i_pow(n: usize, like: &T) -> Self {
        let (one, zero) = (like.one_like(), like.zero_like());
        match n % 4 {
            0 => Complex::new(one, zero),
            1 => Complex::new(zero, -one),
            2 => Complex::new(-one, zero),
            _ => Complex::new(zero, one),
        }
    }

    /// `i^n` at the precision of `like`.
    pub fn i_pow(n: usize, like: &T) -> Self {
        Self::minus_i_pow((4 - n % 4) % 4, like)
    }
}

impl<T: RealScalar> Complex<T> {
    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl<T: Scalar> Add for Complex<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Complex { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl<T: Scalar> Sub for Complex<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Complex { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl<T: Scalar> Mul for Complex<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let re = self.re.clone() * rhs.re.clone() - self.im.clone() * rhs.im.clone();
        let im = self.re * rhs.im + self.im * rhs.re;
        Complex { re, im }
    }
}

impl<T: Scalar> Div for Complex<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let den = rhs.norm_sqr();
        let re = self.re.clone() * rhs.re.clone() + self.im.clone() * rhs.im.clone();
        let im = self.im * rhs.re - self.re * rhs.im;
        Complex { re: re / den.clone(), im: im / den }
    }
}

impl<T: Scalar> Neg for Complex<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Complex { re: -self.re, im: -self.im }
    }
}

impl<T: Scalar> Scalar for Complex<T> {
    fn from_i64_like(&self, v: i64) -> Self {
        Complex::real(self.re.from_i64_like(v))
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}
