//! Formal-inverse power series of constant-degree polynomials, computed from
//! generalized Catalan numbers, with certified geometric error bounds on the
//! partial sums.
//!
//! For `f(x) = x + a_2 x^2 + ... + a_d x^d`, the compositional inverse
//! `g(w) = sum b_n w^n` has coefficients given by a closed form over degree
//! vectors; the recurrence `b_n = sum_k (-a_k) sum b_{n_1}...b_{n_k}` is kept
//! as an independent check. For `h = f + a_0` with `|a_0| < 1/(4a)`, the
//! partial sums of `g(-a_0)` approximate a root of `h` with explicit exact
//! rational bounds, all asserted before a result is returned.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalan::{catalan, compositions_with_weight};
use crate::exact::{ExactRat, ExactInt};
use crate::poly::Polynomial;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LifError {
    #[error("polynomial must have linear coefficient 1, got {0}")]
    LinearCoefficient(ExactRat),
    #[error("series expansion requires zero constant coefficient, got {0}")]
    ConstantNotZero(ExactRat),
    #[error("outside the convergence domain: |a0| = {a0_abs} but the bound requires |a0| < {limit}")]
    ConvergenceDomain { a0_abs: ExactRat, limit: ExactRat },
}

/// Inverse-series coefficients `b_1..b_N` of a polynomial with zero constant
/// term and unit linear coefficient, together with the cached majorant
/// `a = max(1, sum |a_i|)` and geometric ratio `alpha = 4 a |a_0|` of the
/// originating polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifSeries {
    /// The inverted polynomial; constant term zero, linear term one.
    source: Polynomial,
    /// Constant term of the polynomial whose root the partial sums chase
    /// (zero when the series was expanded directly).
    constant: ExactRat,
    /// b_1..b_N.
    coeffs: Vec<ExactRat>,
    majorant: ExactRat,
    ratio: ExactRat,
}

impl LifSeries {
    pub fn source(&self) -> &Polynomial {
        &self.source
    }

    /// Number of expanded coefficients N.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// b_n for n in 1..=N.
    pub fn coeff(&self, n: usize) -> &ExactRat {
        &self.coeffs[n - 1]
    }

    pub fn coeffs(&self) -> &[ExactRat] {
        &self.coeffs
    }

    /// `a = max(1, sum of |a_i| for i >= 2)`.
    pub fn majorant(&self) -> &ExactRat {
        &self.majorant
    }

    /// `alpha = 4 a |a_0|`; zero when expanded from a constant-free polynomial.
    pub fn ratio(&self) -> &ExactRat {
        &self.ratio
    }

    /// Verifies `b_1 = 1` and the inverse recurrence
    /// `b_n = sum_{k=2}^d (-a_k) * sum_{n_1+..+n_k=n} b_{n_1} ... b_{n_k}`
    /// for all `1 < n <= N` by direct evaluation. This route costs O(N^d)
    /// terms per coefficient and exists as an oracle for the closed form.
    pub fn satisfies_recurrence(&self) -> bool {
        if self.coeffs.is_empty() {
            return true;
        }
        if self.coeffs[0] != ExactRat::one() {
            return false;
        }
        let d = self.source.degree_bound();
        for n in 2..=self.coeffs.len() {
            let mut rhs = ExactRat::zero();
            for k in 2..=d {
                let mut tuple_sum = ExactRat::zero();
                self.for_each_composition(n, k, &mut tuple_sum);
                rhs = rhs + -self.source.coeff(k) * tuple_sum;
            }
            if rhs != self.coeffs[n - 1] {
                return false;
            }
        }
        true
    }

    // Adds b_{n_1} * ... * b_{n_k} over all compositions of n into k positive
    // parts to `acc`.
    fn for_each_composition(&self, n: usize, k: usize, acc: &mut ExactRat) {
        fn go(series: &LifSeries, n: usize, k: usize, prod: ExactRat, acc: &mut ExactRat) {
            if n < k {
                return; // no composition into k positive parts
            }
            if k == 1 {
                *acc = &*acc + &(prod * series.coeff(n));
                return;
            }
            // Leave at least one unit for each of the remaining k-1 parts.
            for first in 1..=n - (k - 1) {
                go(series, n - first, k - 1, &prod * series.coeff(first), acc);
            }
        }
        go(self, n, k, ExactRat::one(), acc);
    }

    /// Checks `|b_n| <= (4a)^(n-1)` for every expanded coefficient.
    pub fn bound_holds(&self) -> bool {
        let four_a = ExactRat::from(4) * &self.majorant;
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, b)| b.abs() <= four_a.pow(i))
    }

    /// The ratio sequence `|b_n| / (4a)^(n-1)`, reported rather than bounded:
    /// for the worst cases it decays only polynomially.
    pub fn bound_ratios(&self) -> Vec<ExactRat> {
        let four_a = ExactRat::from(4) * &self.majorant;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, b)| b.abs() / four_a.pow(i))
            .collect()
    }
}

fn majorant_of(poly: &Polynomial) -> ExactRat {
    let mut sum = ExactRat::zero();
    for i in 2..=poly.degree_bound() {
        sum = sum + poly.coeff(i).abs();
    }
    if sum < ExactRat::one() {
        ExactRat::one()
    } else {
        sum
    }
}

/// Expands the first `n` inverse-series coefficients of `f` through the closed
/// form: `b_n` sums `C_m * prod (-a_i)^{m_i}` over all degree vectors with
/// weight `n - 1`. Requires `f` to have constant term 0 and linear term 1.
pub fn coefficients(f: &Polynomial, n: usize) -> Result<LifSeries, LifError> {
    if f.coeff(1) != ExactRat::one() {
        return Err(LifError::LinearCoefficient(f.coeff(1)));
    }
    if !f.coeff(0).is_zero() {
        return Err(LifError::ConstantNotZero(f.coeff(0)));
    }
    let majorant = majorant_of(f);
    Ok(LifSeries {
        coeffs: expand_coefficients(f, n),
        source: f.clone(),
        constant: ExactRat::zero(),
        majorant,
        ratio: ExactRat::zero(),
    })
}

fn expand_coefficients(f: &Polynomial, n: usize) -> Vec<ExactRat> {
    let d = f.degree_bound().max(1);
    let negated: Vec<ExactRat> = (0..=d).map(|i| -f.coeff(i)).collect();
    let mut coeffs = Vec::with_capacity(n);
    for term in 1..=n {
        let mut b = ExactRat::zero();
        for m in compositions_with_weight(d, term) {
            let mut monomial = ExactRat::from_int(catalan(&m));
            for i in 2..=d {
                let count = m.count(i);
                if count > 0 {
                    monomial = monomial * negated[i].pow(count);
                }
            }
            b = b + monomial;
        }
        coeffs.push(b);
    }
    coeffs
}

/// The exact bounds carried by a partial-sum root approximation. Every bound
/// is verified against its attained value before the certificate is returned.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceCertificate {
    /// Number of summed terms N.
    pub terms: usize,
    /// Declared degree d of the polynomial.
    pub degree: usize,
    /// a = max(1, sum |a_i|).
    pub majorant: ExactRat,
    /// alpha = 4 a |a_0|, strictly below 1 inside the convergence domain.
    pub ratio: ExactRat,
    /// |x_N| <= |a_0| / (1 - alpha).
    pub sup_bound: ExactRat,
    pub sup_attained: ExactRat,
    /// |x_N - x_(N+1)| <= |a_0| alpha^(N-1) / (1 - alpha), checked at the
    /// single step M = N + 1.
    pub step_bound: ExactRat,
    pub step_attained: ExactRat,
    /// Limit form of the step bound: |x_N - root| is below the same quantity.
    pub tail_bound: ExactRat,
    /// |h(x_N)| <= N^d |a_0| alpha^N.
    pub residual_bound: ExactRat,
    pub residual_attained: ExactRat,
}

/// A partial-sum root approximation together with its certificate and the
/// underlying series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialSumRoot {
    /// x_N, the N-th partial sum of the inverse series at -a_0.
    pub value: ExactRat,
    pub certificate: ConvergenceCertificate,
    pub series: LifSeries,
}

/// Approximates the small root of `h` (unit linear coefficient, small constant
/// term) by the N-th partial sum of the inverse series of `h - a_0` evaluated
/// at `-a_0`.
///
/// Fails outside the convergence domain `|a_0| < 1/(4a)` or when the linear
/// coefficient is not 1. The three certificate bounds are exact rational
/// inequalities asserted before returning.
pub fn partial_sum_root(h: &Polynomial, n: usize) -> Result<PartialSumRoot, LifError> {
    assert!(n >= 1, "at least one term is required");
    if h.coeff(1) != ExactRat::one() {
        return Err(LifError::LinearCoefficient(h.coeff(1)));
    }
    let a0 = h.coeff(0);
    let majorant = majorant_of(h);
    let limit = (ExactRat::from(4) * &majorant).recip();
    if a0.abs() >= limit {
        return Err(LifError::ConvergenceDomain { a0_abs: a0.abs(), limit });
    }
    let f = h.with_constant(ExactRat::zero());
    let ratio = ExactRat::from(4) * &majorant * a0.abs();
    // One extra coefficient so the step to x_(N+1) can be measured exactly.
    let coeffs = expand_coefficients(&f, n + 1);
    let minus_a0 = -&a0;
    let mut partials = Vec::with_capacity(n + 1);
    let mut acc = ExactRat::zero();
    let mut power = ExactRat::one();
    for b in &coeffs {
        power = power * &minus_a0;
        acc = acc + b * &power;
        partials.push(acc.clone());
    }
    let value = partials[n - 1].clone();

    let one_minus_ratio = ExactRat::one() - &ratio;
    let sup_bound = a0.abs() / &one_minus_ratio;
    let sup_attained = value.abs();
    assert!(sup_attained <= sup_bound, "partial sum escaped its sup bound");

    let step_bound = a0.abs() * ratio.pow(n - 1) / &one_minus_ratio;
    let step_attained = (&partials[n] - &value).abs();
    assert!(step_attained <= step_bound, "partial sum step escaped its bound");

    let residual_bound =
        ExactRat::from_int(ExactInt::from(n).pow(h.degree_bound())) * a0.abs() * ratio.pow(n);
    let residual_attained = h.eval(&value).abs();
    assert!(residual_attained <= residual_bound, "residual escaped its bound");

    let series = LifSeries {
        coeffs: coeffs[..n].to_vec(),
        source: f,
        constant: a0,
        majorant: majorant.clone(),
        ratio: ratio.clone(),
    };
    Ok(PartialSumRoot {
        value,
        certificate: ConvergenceCertificate {
            terms: n,
            degree: h.degree_bound(),
            majorant,
            ratio,
            sup_bound,
            sup_attained,
            tail_bound: step_bound.clone(),
            step_bound,
            step_attained,
            residual_bound,
            residual_attained,
        },
        series,
    })
}
