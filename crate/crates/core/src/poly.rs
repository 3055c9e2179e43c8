//! Dense univariate polynomials over exact rationals.
//!
//! Coefficients are stored low-to-high with trailing zeros permitted, so the
//! declared degree bound of a polynomial can exceed its effective degree.
//! Evaluation is Horner-exact.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::exact::{ExactError, ExactInt, ExactRat};

/// Dense rational polynomial `a0 + a1 x + ... + ad x^d`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<ExactRat>,
}

impl Polynomial {
    /// Builds a polynomial from low-to-high coefficients. An empty list is the
    /// zero polynomial of declared degree 0.
    pub fn new(mut coeffs: Vec<ExactRat>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(ExactRat::zero());
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial::new(vec![])
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| ExactRat::from(c)).collect())
    }

    /// Coefficient of x^i; zero beyond the declared degree.
    pub fn coeff(&self, i: usize) -> ExactRat {
        self.coeffs.get(i).cloned().unwrap_or_else(ExactRat::zero)
    }

    pub fn coeffs(&self) -> &[ExactRat] {
        &self.coeffs
    }

    /// Declared degree bound (index of the last stored coefficient).
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Degree of the highest nonzero coefficient; `None` for the zero polynomial.
    pub fn effective_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.effective_degree().is_none()
    }

    /// True when every coefficient is an integer.
    pub fn has_integer_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Horner evaluation at a rational point.
    pub fn eval(&self, x: &ExactRat) -> ExactRat {
        let mut acc = ExactRat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluation at an integer point.
    pub fn eval_int(&self, x: &ExactInt) -> ExactRat {
        self.eval(&ExactRat::from_int(x.clone()))
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| ExactRat::from(i as i64) * c)
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn negate(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale_values(&self, c: &ExactRat) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Returns a copy with the constant coefficient replaced.
    pub fn with_constant(&self, a0: ExactRat) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = a0;
        Polynomial::new(coeffs)
    }

    /// Exact composition with an affine argument: returns `f(scale * x + shift)`.
    pub fn compose_affine(&self, scale: &ExactRat, shift: &ExactRat) -> Polynomial {
        // Horner in the polynomial ring: acc <- acc * (scale x + shift) + a_i.
        let mut acc: Vec<ExactRat> = vec![];
        for c in self.coeffs.iter().rev() {
            let mut next = vec![ExactRat::zero(); acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                next[i + 1] = &next[i + 1] + &(a * scale);
                next[i] = &next[i] + &(a * shift);
            }
            next[0] = &next[0] + c;
            acc = next;
        }
        // Preserve the declared degree bound.
        acc.resize(self.coeffs.len(), ExactRat::zero());
        Polynomial::new(acc)
    }
}

impl FromStr for Polynomial {
    type Err = ExactError;

    /// Parses the CLI coefficient format `a0,a1,...,ad` where each entry is a
    /// fraction or decimal literal.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let coeffs = s
            .split(',')
            .map(|part| part.parse::<ExactRat>())
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.is_empty() {
            return Err(ExactError::BadRat(s.to_owned()));
        }
        Ok(Polynomial::new(coeffs))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{i}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{self}]")
    }
}
