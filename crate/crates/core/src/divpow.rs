//! Division computed from powering, and the power sequence reconstructed from
//! a single division.
//!
//! These reductions exist to mirror the underlying arithmetic identities, not
//! for speed; native division is available as [`ExactInt::div_rem_floor`], and
//! agreement between the two routes is itself part of the test suite.

use thiserror::Error;

use crate::exact::ExactInt;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DivPowError {
    #[error("divisor must be >= 1, got {0}")]
    DivisorTooSmall(ExactInt),
    #[error("dividend must be >= 0, got {0}")]
    NegativeDividend(ExactInt),
    #[error("base must be >= 0, got {0}; decompose the sign at the call site")]
    NegativeBase(ExactInt),
}

/// Intermediate data of the division reduction, exposed for the invariant
/// checks in the tests.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct DivisionReduction {
    /// n with 2^(n-1) <= x <= 2^n.
    pub divisor_bits: u64,
    /// m >= 1 with y <= 2^m.
    pub dividend_bits: u64,
    /// z = sum over i < m of (2^n - x)^i * 2^(n(m-1-i)), so x*z = 2^(nm) - (2^n - x)^m.
    pub scaled_reciprocal: ExactInt,
    /// First quotient guess, floor(y * z / 2^(nm)) by bit-shift truncation.
    pub quotient_guess: ExactInt,
}

pub(crate) fn division_reduction(y: &ExactInt, x: &ExactInt) -> DivisionReduction {
    let divisor_bits = x.bit_length().max(1);
    let dividend_bits = y.bit_length().max(1);
    let complement = &ExactInt::two_pow(divisor_bits) - x;
    let mut scaled_reciprocal = ExactInt::zero();
    let mut power = ExactInt::one();
    // Accumulate (2^n - x)^i * 2^(n(m-1-i)) for i = 0..m.
    for i in 0..dividend_bits {
        let shift = divisor_bits * (dividend_bits - 1 - i);
        scaled_reciprocal = scaled_reciprocal + (&power << shift);
        power = &power * &complement;
    }
    let quotient_guess = &(y * &scaled_reciprocal) >> (divisor_bits * dividend_bits);
    DivisionReduction { divisor_bits, dividend_bits, scaled_reciprocal, quotient_guess }
}

/// Computes `(q, r)` with `y = q*x + r` and `0 <= r < x`, by the powering
/// route: a truncated product with a scaled reciprocal brackets the quotient
/// within one unit, and a final comparison pass lands it exactly.
pub fn divide_via_powers(y: &ExactInt, x: &ExactInt) -> Result<(ExactInt, ExactInt), DivPowError> {
    if x < &ExactInt::one() {
        return Err(DivPowError::DivisorTooSmall(x.clone()));
    }
    if y.is_negative() {
        return Err(DivPowError::NegativeDividend(y.clone()));
    }
    let reduction = division_reduction(y, x);
    let mut q = reduction.quotient_guess;
    let mut r = y - &(&q * x);
    // The guess satisfies q*x <= y <= (q+1)*x, so one adjustment suffices;
    // the loop is a guard against ever silently returning r >= x.
    let mut passes = 0;
    while &r >= x {
        q = q + ExactInt::one();
        r = r - x.clone();
        passes += 1;
        assert!(passes <= 2, "quotient guess off by more than the reduction allows");
    }
    assert!(!r.is_negative(), "quotient guess overshot the dividend");
    Ok((q, r))
}

/// Reconstructs `(x^0, ..., x^n)` from one division: with `x < 2^k` and
/// `m = k(n+1) + 1`, dividing `2^(nm)` by `2^m - x` yields a quotient whose
/// base-`2^m` digits are exactly the powers, and the remainder is `x^n`.
pub fn powers_via_division(x: &ExactInt, n: usize) -> Result<Vec<ExactInt>, DivPowError> {
    if x.is_negative() {
        return Err(DivPowError::NegativeBase(x.clone()));
    }
    let k = x.bit_length().max(1);
    let m = k * (n as u64 + 1) + 1;
    let divisor = &ExactInt::two_pow(m) - x;
    let dividend = ExactInt::two_pow(m * n as u64);
    let (q, r) = dividend.div_rem_floor(&divisor);
    let mask = &ExactInt::two_pow(m) - &ExactInt::one();
    let mut powers = Vec::with_capacity(n + 1);
    for i in 0..n {
        let digit = &(&q >> (m * (n as u64 - 1 - i as u64))) & &mask;
        powers.push(digit);
    }
    powers.push(r);
    debug_assert_eq!(powers[0], ExactInt::one());
    Ok(powers)
}
