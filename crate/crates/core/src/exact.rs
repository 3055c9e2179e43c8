//! Arbitrary-precision exact integers and rationals, iterated sums and
//! products, and the combinatorial coefficients built from them.
//!
//! [`ExactInt`] and [`ExactRat`] are thin wrappers over `num-bigint` /
//! `num-rational` that pin down the representation invariants the rest of the
//! crate relies on: canonical zero, rationals always reduced to lowest terms
//! with a positive denominator, and value equality. Serialization goes through
//! decimal strings (`"123"`) and fraction strings (`"p/q"`), never through an
//! internal limb format.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, BitAnd, Div, Mul, Neg, Rem, Shl, Shr, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Errors from constructors and combinatorial operations in this module.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("cannot parse {0:?} as an exact integer")]
    BadInt(String),
    #[error("cannot parse {0:?} as an exact rational")]
    BadRat(String),
    #[error("denominator is zero")]
    ZeroDenominator,
    #[error("binomial requires m <= n, got n={n}, m={m}")]
    BinomialRange { n: usize, m: usize },
    #[error("multinomial parts sum to {got}, expected {expected}")]
    MultinomialSum { expected: usize, got: usize },
    #[error("triangular products need at least {needed} factors, got {got}")]
    NotEnoughFactors { needed: usize, got: usize },
}

/// Arbitrary-precision signed integer with canonical zero.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactInt(BigInt);

/// Arbitrary-precision rational, always reduced, denominator always positive.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactRat(BigRational);

impl ExactInt {
    pub fn zero() -> Self {
        ExactInt(BigInt::zero())
    }

    pub fn one() -> Self {
        ExactInt(BigInt::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.sign() == Sign::Minus
    }

    pub fn is_positive(&self) -> bool {
        self.0.sign() == Sign::Plus
    }

    pub fn abs(&self) -> Self {
        ExactInt(self.0.abs())
    }

    /// Sign as -1, 0, or 1.
    pub fn signum(&self) -> i32 {
        match self.0.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Number of bits in the magnitude; 0 for zero. For x >= 1 this is the
    /// unique n with 2^(n-1) <= x < 2^n.
    pub fn bit_length(&self) -> u64 {
        self.0.bits()
    }

    /// Bit `i` of the magnitude.
    pub fn bit(&self, i: u64) -> bool {
        self.0.bit(i)
    }

    pub fn pow(&self, exp: usize) -> Self {
        ExactInt(self.0.pow(exp as u32))
    }

    /// 2^exp.
    pub fn two_pow(exp: u64) -> Self {
        ExactInt(BigInt::one() << exp)
    }

    /// Euclidean-style quotient and remainder with 0 <= r < |x|; this is the
    /// native division the reduction in [`crate::divpow`] is checked against.
    pub fn div_rem_floor(&self, other: &Self) -> (Self, Self) {
        let (q, r) = self.0.div_mod_floor(&other.0);
        (ExactInt(q), ExactInt(r))
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.0.to_usize()
    }

    pub fn inner(&self) -> &BigInt {
        &self.0
    }
}

impl ExactRat {
    /// Builds num/den reduced to lowest terms with positive denominator.
    pub fn new(num: ExactInt, den: ExactInt) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        Ok(ExactRat(BigRational::new(num.0, den.0)))
    }

    pub fn zero() -> Self {
        ExactRat(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRat(BigRational::one())
    }

    pub fn from_int(n: ExactInt) -> Self {
        ExactRat(BigRational::from_integer(n.0))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn numer(&self) -> ExactInt {
        ExactInt(self.0.numer().clone())
    }

    pub fn denom(&self) -> ExactInt {
        ExactInt(self.0.denom().clone())
    }

    pub fn abs(&self) -> Self {
        ExactRat(self.0.abs())
    }

    pub fn signum(&self) -> i32 {
        if self.0.is_zero() {
            0
        } else if self.0.is_negative() {
            -1
        } else {
            1
        }
    }

    pub fn recip(&self) -> Self {
        ExactRat(self.0.recip())
    }

    pub fn pow(&self, exp: usize) -> Self {
        ExactRat(self.0.pow(exp as i32))
    }

    /// Largest integer <= self.
    pub fn floor(&self) -> ExactInt {
        ExactInt(self.0.floor().to_integer())
    }

    /// Smallest integer >= self.
    pub fn ceil(&self) -> ExactInt {
        ExactInt(self.0.ceil().to_integer())
    }

    /// The integer value, if the denominator is 1.
    pub fn to_int(&self) -> Option<ExactInt> {
        if self.0.denom().is_one() {
            Some(ExactInt(self.0.numer().clone()))
        } else {
            None
        }
    }

    pub fn is_integer(&self) -> bool {
        self.0.denom().is_one()
    }
}

impl From<i64> for ExactInt {
    fn from(v: i64) -> Self {
        ExactInt(BigInt::from(v))
    }
}

impl From<i32> for ExactInt {
    fn from(v: i32) -> Self {
        ExactInt(BigInt::from(v))
    }
}

impl From<usize> for ExactInt {
    fn from(v: usize) -> Self {
        ExactInt(BigInt::from(v))
    }
}

impl From<BigInt> for ExactInt {
    fn from(v: BigInt) -> Self {
        ExactInt(v)
    }
}

impl From<i64> for ExactRat {
    fn from(v: i64) -> Self {
        ExactRat(BigRational::from_integer(BigInt::from(v)))
    }
}

impl From<i32> for ExactRat {
    fn from(v: i32) -> Self {
        ExactRat(BigRational::from_integer(BigInt::from(v)))
    }
}

impl From<ExactInt> for ExactRat {
    fn from(v: ExactInt) -> Self {
        ExactRat::from_int(v)
    }
}

/// Convenience for literal fractions in tests and builders: `rat(1, 3)`.
pub fn rat(num: i64, den: i64) -> ExactRat {
    assert!(den != 0, "rat() denominator must be nonzero");
    ExactRat(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// Convenience for integer literals: `int(42)`.
pub fn int(v: i64) -> ExactInt {
    ExactInt::from(v)
}

impl FromStr for ExactInt {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        t.parse::<BigInt>()
            .map(ExactInt)
            .map_err(|_| ExactError::BadInt(s.to_owned()))
    }
}

impl FromStr for ExactRat {
    type Err = ExactError;

    /// Accepts `p/q`, plain integers, and decimal literals (`-2.75` becomes
    /// `-11/4` exactly).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            let n: ExactInt = num.parse().map_err(|_| ExactError::BadRat(s.to_owned()))?;
            let d: ExactInt = den.parse().map_err(|_| ExactError::BadRat(s.to_owned()))?;
            return ExactRat::new(n, d).map_err(|_| ExactError::BadRat(s.to_owned()));
        }
        if let Some((whole, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ExactError::BadRat(s.to_owned()));
            }
            let negative = whole.starts_with('-');
            let whole_int: ExactInt = if whole == "-" || whole == "+" || whole.is_empty() {
                ExactInt::zero()
            } else {
                whole.parse().map_err(|_| ExactError::BadRat(s.to_owned()))?
            };
            let scale = ExactInt(BigInt::from(10u32).pow(frac.len() as u32));
            let frac_int: ExactInt = frac.parse().map_err(|_| ExactError::BadRat(s.to_owned()))?;
            let magnitude = &whole_int.abs() * &scale + &frac_int;
            let signed = if negative { -magnitude } else { magnitude };
            return ExactRat::new(signed, scale).map_err(|_| ExactError::BadRat(s.to_owned()));
        }
        let n: ExactInt = t.parse().map_err(|_| ExactError::BadRat(s.to_owned()))?;
        Ok(ExactRat::from_int(n))
    }
}

impl fmt::Display for ExactInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for ExactInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactInt({})", self.0)
    }
}

impl fmt::Display for ExactRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for ExactRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactRat({})", self.0)
    }
}

impl Serialize for ExactInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

impl Serialize for ExactRat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactRat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

macro_rules! forward_binop {
    ($ty:ident, $trait:ident, $method:ident) => {
        impl $trait for $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                $ty((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a $ty> for $ty {
            type Output = $ty;
            fn $method(self, rhs: &'a $ty) -> $ty {
                $ty((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<$ty> for &'a $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                $ty((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b $ty> for &'a $ty {
            type Output = $ty;
            fn $method(self, rhs: &'b $ty) -> $ty {
                $ty((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(ExactInt, Add, add);
forward_binop!(ExactInt, Sub, sub);
forward_binop!(ExactInt, Mul, mul);
forward_binop!(ExactInt, Div, div);
forward_binop!(ExactInt, Rem, rem);
forward_binop!(ExactRat, Add, add);
forward_binop!(ExactRat, Sub, sub);
forward_binop!(ExactRat, Mul, mul);
forward_binop!(ExactRat, Div, div);

impl Neg for ExactInt {
    type Output = ExactInt;
    fn neg(self) -> ExactInt {
        ExactInt(-self.0)
    }
}

impl Neg for &ExactInt {
    type Output = ExactInt;
    fn neg(self) -> ExactInt {
        ExactInt(-&self.0)
    }
}

impl Neg for ExactRat {
    type Output = ExactRat;
    fn neg(self) -> ExactRat {
        ExactRat(-self.0)
    }
}

impl Neg for &ExactRat {
    type Output = ExactRat;
    fn neg(self) -> ExactRat {
        ExactRat(-&self.0)
    }
}

impl Shl<u64> for &ExactInt {
    type Output = ExactInt;
    fn shl(self, rhs: u64) -> ExactInt {
        ExactInt(&self.0 << rhs)
    }
}

impl BitAnd<&ExactInt> for &ExactInt {
    type Output = ExactInt;
    fn bitand(self, rhs: &ExactInt) -> ExactInt {
        ExactInt(&self.0 & &rhs.0)
    }
}

impl Shr<u64> for &ExactInt {
    type Output = ExactInt;
    fn shr(self, rhs: u64) -> ExactInt {
        ExactInt(&self.0 >> rhs)
    }
}

impl Sum for ExactInt {
    fn sum<I: Iterator<Item = ExactInt>>(iter: I) -> ExactInt {
        iter.fold(ExactInt::zero(), |acc, x| acc + x)
    }
}

impl Product for ExactInt {
    fn product<I: Iterator<Item = ExactInt>>(iter: I) -> ExactInt {
        iter.fold(ExactInt::one(), |acc, x| acc * x)
    }
}

impl Sum for ExactRat {
    fn sum<I: Iterator<Item = ExactRat>>(iter: I) -> ExactRat {
        iter.fold(ExactRat::zero(), |acc, x| acc + x)
    }
}

impl Product for ExactRat {
    fn product<I: Iterator<Item = ExactRat>>(iter: I) -> ExactRat {
        iter.fold(ExactRat::one(), |acc, x| acc * x)
    }
}

/// Sum of a sequence as a sequential left fold; the empty sum is 0.
///
/// Exactness makes the association irrelevant, so permutation invariance and
/// the double-counting identities hold on the nose (they are property-tested,
/// not assumed).
pub fn iter_sum(xs: &[ExactRat]) -> ExactRat {
    xs.iter().fold(ExactRat::zero(), |acc, x| acc + x)
}

/// Product of a sequence as a sequential left fold; the empty product is 1.
pub fn iter_prod(xs: &[ExactRat]) -> ExactRat {
    xs.iter().fold(ExactRat::one(), |acc, x| acc * x)
}

/// Triangular matrix of all partial products of a sequence.
///
/// `get(i, j)` is the product of `xs[i..j]`, so `get(i, i) = 1` and
/// `get(i, j + 1) = get(i, j) * xs[j]` for `i <= j < n`. Only the strictly
/// upper part is stored; the diagonal is synthesized on access, so `n = 0`
/// yields an empty matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangularProducts {
    n: usize,
    // rows[i][k] = product of xs[i..=i+k], for k < n - i
    rows: Vec<Vec<ExactInt>>,
}

impl TriangularProducts {
    /// Number of factors covered by the matrix.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Product of `xs[i..j]`. Panics if `i > j` or `j > n`.
    pub fn get(&self, i: usize, j: usize) -> ExactInt {
        assert!(i <= j && j <= self.n, "index ({i}, {j}) out of range for n={}", self.n);
        if i == j {
            ExactInt::one()
        } else {
            self.rows[i][j - i - 1].clone()
        }
    }
}

/// Builds the full triangular matrix of partial products of `xs[..n]`.
///
/// Fails when fewer than `n` factors are supplied.
pub fn triangular_products(xs: &[ExactInt], n: usize) -> Result<TriangularProducts, ExactError> {
    if xs.len() < n {
        return Err(ExactError::NotEnoughFactors { needed: n, got: xs.len() });
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n - i);
        let mut acc = ExactInt::one();
        for x in &xs[i..n] {
            acc = &acc * x;
            row.push(acc.clone());
        }
        rows.push(row);
    }
    Ok(TriangularProducts { n, rows })
}

/// n! as a sequential product.
pub fn factorial(n: usize) -> ExactInt {
    let mut acc = ExactInt::one();
    for i in 1..=n {
        acc = &acc * &ExactInt::from(i);
    }
    acc
}

/// Binomial coefficient n over m; errors when m > n.
///
/// Computed as the factorial quotient, which is always exact; the Pascal
/// recurrence is asserted in tests rather than used for construction.
pub fn binomial(n: usize, m: usize) -> Result<ExactInt, ExactError> {
    if m > n {
        return Err(ExactError::BinomialRange { n, m });
    }
    let num = factorial(n);
    let den = factorial(m) * factorial(n - m);
    let (q, r) = num.div_rem_floor(&den);
    debug_assert!(r.is_zero());
    Ok(q)
}

/// Multinomial coefficient n over (parts); errors unless the parts sum to n.
pub fn multinomial(n: usize, parts: &[usize]) -> Result<ExactInt, ExactError> {
    let total: usize = parts.iter().sum();
    if total != n {
        return Err(ExactError::MultinomialSum { expected: n, got: total });
    }
    let num = factorial(n);
    let den: ExactInt = parts.iter().map(|&p| factorial(p)).product();
    let (q, r) = num.div_rem_floor(&den);
    debug_assert!(r.is_zero());
    Ok(q)
}
