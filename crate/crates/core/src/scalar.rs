//! Scalar field used for values, measures and metrics.
//!
//! Two arithmetic modes are supported: exact rationals of arbitrary
//! precision and IEEE doubles. All algorithms are generic over [`Scalar`];
//! the mode is picked once at the entry point.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    #[default]
    Exact,
    Float,
}

impl Display for ArithmeticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithmeticMode::Exact => f.write_str("exact"),
            ArithmeticMode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for ArithmeticMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ArithmeticMode::Exact),
            "float" => Ok(ArithmeticMode::Float),
            other => Err(Error::Parse(format!("unknown arithmetic mode `{other}`"))),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + Eq
    + Ord
    + Hash
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: ArithmeticMode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_i64(n: i64) -> Self;
    fn abs(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;

    /// Whether a harmonicity residual counts as zero in this mode.
    fn is_negligible(&self) -> bool;

    /// `"p/q"` in exact mode, a decimal string in float mode.
    fn encode(&self) -> String;
    fn decode(s: &str) -> Result<Self>;

    /// `2^{-n}`.
    fn half_pow(n: usize) -> Self {
        let two = Self::from_i64(2);
        let mut out = Self::one();
        for _ in 0..n {
            out = out / two.clone();
        }
        out
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("not a rational: `{s}`")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(Rational::new(parse_int(n)?, d))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

pub fn encode_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl Scalar for Rational {
    const MODE: ArithmeticMode = ArithmeticMode::Exact;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_negligible(&self) -> bool {
        Zero::is_zero(self)
    }
    fn encode(&self) -> String {
        encode_rational(self)
    }
    fn decode(s: &str) -> Result<Self> {
        parse_rational(s)
    }
    fn half_pow(n: usize) -> Self {
        Rational::new(BigInt::one(), BigInt::one() << n)
    }
}

/// IEEE double with a total order, so it can key hash maps.
#[derive(Clone, Copy, Default)]
pub struct Float(pub f64);

/// Absolute tolerance for float-mode residuals.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

impl Float {
    fn canonical_bits(self) -> u64 {
        if self.0 == 0.0 {
            0
        } else {
            self.0.to_bits()
        }
    }
}

impl Debug for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Debug::fmt(&self.0, f)
    }
}

impl PartialEq for Float {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_bits() == other.canonical_bits()
    }
}
impl Eq for Float {}

impl Hash for Float {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical_bits().hash(state)
    }
}

impl PartialOrd for Float {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Float {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            Ordering::Equal
        } else {
            self.0.total_cmp(&other.0)
        }
    }
}

macro_rules! float_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Float {
            type Output = Float;
            fn $method(self, rhs: Float) -> Float {
                Float(self.0 $op rhs.0)
            }
        }
    };
}
float_binop!(Add, add, +);
float_binop!(Sub, sub, -);
float_binop!(Mul, mul, *);
float_binop!(Div, div, /);

impl Neg for Float {
    type Output = Float;
    fn neg(self) -> Float {
        Float(-self.0)
    }
}

impl Scalar for Float {
    const MODE: ArithmeticMode = ArithmeticMode::Float;

    fn zero() -> Self {
        Float(0.0)
    }
    fn one() -> Self {
        Float(1.0)
    }
    fn from_rational(r: &Rational) -> Self {
        Float(ToPrimitive::to_f64(r).unwrap_or(f64::NAN))
    }
    fn from_i64(n: i64) -> Self {
        Float(n as f64)
    }
    fn abs(&self) -> Self {
        Float(self.0.abs())
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
    fn is_negligible(&self) -> bool {
        self.0.abs() <= FLOAT_TOLERANCE
    }
    fn encode(&self) -> String {
        format!("{:?}", self.0)
    }
    fn decode(s: &str) -> Result<Self> {
        match s.trim().parse::<f64>() {
            Ok(v) => Ok(Float(v)),
            Err(_) => parse_rational(s).map(|r| Float::from_rational(&r)),
        }
    }
    fn half_pow(n: usize) -> Self {
        Float(0.5f64.powi(n as i32))
    }
}
